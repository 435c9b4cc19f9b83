use amalthea_kit::cli;

fn main() {
    std::process::exit(cli::run());
}
