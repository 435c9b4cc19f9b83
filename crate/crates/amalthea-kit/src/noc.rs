//! W×H mesh network-on-chip platform with deterministic XY routing and a
//! contention-free message latency model.
//!
//! Routing is dimension-ordered: a message first resolves its X
//! displacement completely, then its Y displacement. Latency is a
//! closed-form store-and-forward bound per flit; link arbitration and
//! blocking are deliberately not modeled (an extension point), which keeps
//! the latency function pure and the schedulability simulation
//! deterministic.
//!
//! Inactive cores do not execute work but still route: switching a core
//! off disables computation only, never its router, so partial meshes do
//! not partition.

use thiserror::Error;

use crate::model::AmaltheaModel;

/// A core as the platform sees it: mesh position, activity flag, and the
/// timing parameters needed to convert instruction counts to time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlatformCore {
    pub id: String,
    pub name: String,
    pub position: (u32, u32),
    pub active: bool,
    pub ticks_per_instruction: u64,
    pub frequency_hz: u64,
}

/// An XY route: the visited mesh coordinates from source to destination,
/// inclusive. Consecutive entries are 4-neighbor adjacent and the X
/// coordinate reaches the destination column before Y moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub path: Vec<(u32, u32)>,
}

impl Route {
    /// Number of link traversals (path length minus one).
    pub fn hops(&self) -> u64 {
        (self.path.len() - 1) as u64
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NocError {
    #[error("coordinate ({0}, {1}) is outside the {2}x{3} mesh")]
    OutOfBounds(u32, u32, u32, u32),
    #[error("mesh of {width}x{height} cores cannot host {active} active cores")]
    BadActiveCount { width: u32, height: u32, active: usize },
    #[error("a platform needs at least one active core")]
    NoActiveCores,
    #[error("model cores do not tile a full mesh: {0}")]
    BadModelMesh(String),
}

/// Default flit width in bits; every DemoCar label (≤ 16 bits) fits one flit.
pub const DEFAULT_FLIT_BITS: u64 = 32;
/// Default per-hop, per-flit router+link traversal latency in nanoseconds.
pub const DEFAULT_HOP_LATENCY_NS: u64 = 10;

/// Immutable mesh platform: cores with activity flags plus the two NoC
/// latency parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NocPlatform {
    width: u32,
    height: u32,
    cores: Vec<PlatformCore>,
    pub hop_latency_ns: u64,
    pub flit_bits: u64,
}

impl NocPlatform {
    /// Builds a full `width`×`height` mesh of identical cores in row-major
    /// order (x varies fastest); the first `active` cores are active.
    pub fn mesh(
        width: u32,
        height: u32,
        active: usize,
        ticks_per_instruction: u64,
        frequency_hz: u64,
        hop_latency_ns: u64,
        flit_bits: u64,
    ) -> Result<Self, NocError> {
        let total = (width as usize) * (height as usize);
        if active == 0 {
            return Err(NocError::NoActiveCores);
        }
        if total == 0 || active > total {
            return Err(NocError::BadActiveCount { width, height, active });
        }
        let mut cores = Vec::with_capacity(total);
        for y in 0..height {
            for x in 0..width {
                let index = (y * width + x) as usize;
                cores.push(PlatformCore {
                    id: format!("c_{x}_{y}"),
                    name: format!("core_{x}_{y}"),
                    position: (x, y),
                    active: index < active,
                    ticks_per_instruction,
                    frequency_hz,
                });
            }
        }
        Ok(Self { width, height, cores, hop_latency_ns, flit_bits })
    }

    /// Builds a platform from the model's hardware section. The model's
    /// cores must tile a full W×H grid; they are ordered row-major and the
    /// first `active` of them are active. Per-core timing comes from each
    /// core's type and quartz.
    pub fn from_model(
        model: &AmaltheaModel,
        active: usize,
        hop_latency_ns: u64,
        flit_bits: u64,
    ) -> Result<Self, NocError> {
        if model.core_count() == 0 {
            return Err(NocError::BadModelMesh("the model declares no cores".into()));
        }
        let width = model.cores().iter().map(|c| c.position.0).max().unwrap() + 1;
        let height = model.cores().iter().map(|c| c.position.1).max().unwrap() + 1;
        let total = (width as usize) * (height as usize);
        if model.core_count() != total {
            return Err(NocError::BadModelMesh(format!(
                "{} cores cannot fill a {width}x{height} grid",
                model.core_count()
            )));
        }
        if active == 0 {
            return Err(NocError::NoActiveCores);
        }
        if active > total {
            return Err(NocError::BadActiveCount { width, height, active });
        }
        let mut slots: Vec<Option<PlatformCore>> = vec![None; total];
        for core in model.cores() {
            let (x, y) = core.position;
            let slot = (y * width + x) as usize;
            if slots[slot].is_some() {
                return Err(NocError::BadModelMesh(format!("two cores share position ({x}, {y})")));
            }
            slots[slot] = Some(PlatformCore {
                id: core.id.clone(),
                name: core.name.clone(),
                position: core.position,
                active: false,
                ticks_per_instruction: model.core_type(core.core_type).ticks_per_instruction,
                frequency_hz: model.quartz(core.quartz).frequency_hz,
            });
        }
        let mut cores: Vec<PlatformCore> = slots
            .into_iter()
            .map(|s| s.ok_or_else(|| NocError::BadModelMesh("grid has an empty position".into())))
            .collect::<Result<_, _>>()?;
        for core in cores.iter_mut().take(active) {
            core.active = true;
        }
        Ok(Self { width, height, cores, hop_latency_ns, flit_bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// All cores in row-major order.
    pub fn cores(&self) -> &[PlatformCore] {
        &self.cores
    }

    /// Returns the core at `index`; panics if out of range.
    pub fn core(&self, index: usize) -> &PlatformCore {
        &self.cores[index]
    }

    pub fn core_count(&self) -> usize {
        self.cores.len()
    }

    /// Indices of active cores, ascending (row-major).
    pub fn active_cores(&self) -> Vec<usize> {
        (0..self.cores.len()).filter(|&i| self.cores[i].active).collect()
    }

    pub fn core_by_name(&self, name: &str) -> Option<usize> {
        self.cores.iter().position(|c| c.name == name)
    }

    fn check_bounds(&self, (x, y): (u32, u32)) -> Result<(), NocError> {
        if x >= self.width || y >= self.height {
            Err(NocError::OutOfBounds(x, y, self.width, self.height))
        } else {
            Ok(())
        }
    }

    /// Deterministic dimension-ordered route from `src` to `dst`: X first,
    /// then Y. The path has `|dx| + |dy|` hops.
    pub fn xy_route(&self, src: (u32, u32), dst: (u32, u32)) -> Result<Route, NocError> {
        self.check_bounds(src)?;
        self.check_bounds(dst)?;
        let mut path = vec![src];
        let (mut x, mut y) = src;
        while x != dst.0 {
            x = if x < dst.0 { x + 1 } else { x - 1 };
            path.push((x, y));
        }
        while y != dst.1 {
            y = if y < dst.1 { y + 1 } else { y - 1 };
            path.push((x, y));
        }
        Ok(Route { path })
    }

    /// Contention-free latency of transferring `bits` from `src` to `dst`:
    /// 0 for a local access, otherwise hops × hop latency × flit count.
    pub fn message_latency(&self, bits: u64, src: (u32, u32), dst: (u32, u32)) -> Result<u64, NocError> {
        self.check_bounds(src)?;
        self.check_bounds(dst)?;
        if src == dst {
            return Ok(0);
        }
        let hops = (src.0.abs_diff(dst.0) + src.1.abs_diff(dst.1)) as u64;
        let flits = bits.div_ceil(self.flit_bits);
        Ok(hops * self.hop_latency_ns * flits)
    }

}
