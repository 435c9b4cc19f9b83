//! Serialize a model to its XML form, parse it back, and prove the
//! round-trip is exact. Then damage the document on purpose and show how
//! parse errors come back: all of them at once, each with a line, column,
//! and category.
//!
//! Run with: `cargo run --example xml_roundtrip`

use amalthea_kit::democar::build_democar;
use amalthea_kit::xml;

fn main() {
    let model = build_democar();
    let document = xml::serialize(&model).expect("DemoCar is valid");
    println!("serialized DemoCar: {} bytes, {} lines", document.len(), document.lines().count());

    let parsed = xml::parse(&document).expect("own output parses");
    assert_eq!(parsed.model, model, "round-trip must be exact");
    println!("parsed back: equal to the original, {} warnings\n", parsed.warnings.len());

    // Now break it: a bad number and an unknown attribute in one document.
    // Declaration problems are collected together instead of stopping at
    // the first.
    let broken = document
        .replacen("bitLength=\"16\"", "bitLength=\"zero\"", 1)
        .replacen("<task id=\"t_Task5ms\"", "<task id=\"t_Task5ms\" color=\"red\"", 1);
    match xml::parse(&broken) {
        Ok(_) => unreachable!("the damage must be detected"),
        Err(errors) => {
            println!("damaged declarations produced {} errors:", errors.len());
            for error in &errors {
                println!("  {error}");
            }
        }
    }

    // References are resolved once the declarations are clean, so a
    // dangling id surfaces with its own category.
    let dangling =
        document.replacen("read label=\"l_CylinderNumber\"", "read label=\"l_NoSuchLabel\"", 1);
    match xml::parse(&dangling) {
        Ok(_) => unreachable!("the damage must be detected"),
        Err(errors) => {
            println!("\ndangling reference produced {} error:", errors.len());
            for error in &errors {
                println!("  {error}");
            }
        }
    }

    // Namespaced attributes from other tools are tolerated with a warning.
    let foreign = document.replacen(
        "<amalthea>",
        "<amalthea xmlns:ext=\"urn:example\">",
        1,
    );
    let foreign = foreign.replacen("<label id=", "<label ext:note=\"keep\" id=", 1);
    let parsed = xml::parse(&foreign).expect("foreign attributes do not break parsing");
    println!("\nforeign-attribute document: {} warning(s)", parsed.warnings.len());
    for warning in &parsed.warnings {
        println!("  {}:{}: {}", warning.line, warning.column, warning.message);
    }
}
