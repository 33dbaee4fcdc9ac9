//! Data files shipped with the crate.

use crate::error::{Error, Result};
use crate::format::{parse_machine, parse_spectrum};
use crate::machine::{LatencySpectrum, MachineSpec};
use crate::report::{parse_benchmark_csv, ComparisonRow};

pub const HASWELL_SPECTRUM: &str = include_str!("../data/haswell.spectrum");
pub const FIB_SPECTRUM: &str = include_str!("../data/fib.spectrum");
pub const PENTIUM_M_TOY: &str = include_str!("../data/pentium_m_toy.machine");
pub const INTEL_CORE_TOY: &str = include_str!("../data/intel_core_toy.machine");
pub const IVY_BRIDGE_TOY: &str = include_str!("../data/ivy_bridge_toy.machine");
pub const HASWELL_TOY: &str = include_str!("../data/haswell_toy.machine");
pub const SKYLAKE_TOY: &str = include_str!("../data/skylake_toy.machine");
pub const MEMORY_TOY: &str = include_str!("../data/memory_toy.machine");
pub const BENCHMARKS_CSV: &str = include_str!("../data/benchmarks.csv");
pub const PUBLISHED_CAPACITIES_CSV: &str = include_str!("../data/published_capacities.csv");
pub const SYSTEMS_CSV: &str = include_str!("../data/systems.csv");

/// Pipeline width of the Haswell core.
pub const HASWELL_WIDTH: u32 = 4;

pub fn haswell_spectrum() -> LatencySpectrum {
    parse_spectrum(HASWELL_SPECTRUM).expect("bundled spectrum parses")
}

pub fn pentium_m_toy() -> MachineSpec {
    parse_machine(PENTIUM_M_TOY).expect("bundled machine parses")
}

/// All bundled machine descriptions, by name.
pub fn machines() -> Vec<MachineSpec> {
    [
        PENTIUM_M_TOY,
        INTEL_CORE_TOY,
        IVY_BRIDGE_TOY,
        HASWELL_TOY,
        SKYLAKE_TOY,
        MEMORY_TOY,
    ]
    .iter()
    .map(|t| parse_machine(t).expect("bundled machine parses"))
    .collect()
}

pub fn benchmarks() -> Vec<ComparisonRow> {
    parse_benchmark_csv(BENCHMARKS_CSV).expect("bundled csv parses")
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublishedCapacity {
    pub microarchitecture: String,
    pub pipeline_width: u32,
    pub bits_per_cycle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct System {
    pub name: String,
    pub microarchitecture: String,
    pub cores: u32,
    pub clock_mhz: f64,
}

fn records(text: &str) -> Result<Vec<csv::StringRecord>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.map_err(|e| Error::Contract(e.to_string())))
        .collect()
}

fn field<T: std::str::FromStr>(r: &csv::StringRecord, i: usize) -> Result<T> {
    r.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Contract(format!("bad field {i} in {r:?}")))
}

pub fn published_capacities() -> Vec<PublishedCapacity> {
    records(PUBLISHED_CAPACITIES_CSV)
        .and_then(|rs| {
            rs.iter()
                .map(|r| {
                    Ok(PublishedCapacity {
                        microarchitecture: field(r, 0)?,
                        pipeline_width: field(r, 1)?,
                        bits_per_cycle: field(r, 2)?,
                    })
                })
                .collect()
        })
        .expect("bundled csv parses")
}

pub fn published_capacity(microarchitecture: &str) -> Option<PublishedCapacity> {
    published_capacities()
        .into_iter()
        .find(|p| p.microarchitecture == microarchitecture)
}

pub fn systems() -> Vec<System> {
    records(SYSTEMS_CSV)
        .and_then(|rs| {
            rs.iter()
                .map(|r| {
                    Ok(System {
                        name: field(r, 0)?,
                        microarchitecture: field(r, 1)?,
                        cores: field(r, 2)?,
                        clock_mhz: field(r, 3)?,
                    })
                })
                .collect()
        })
        .expect("bundled csv parses")
}
