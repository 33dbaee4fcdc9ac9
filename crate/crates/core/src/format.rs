//! Text formats: machine files, spectrum files, sweep configs and
//! candidate lists. All are line based with `#` comments.
//!
//! A machine file looks like
//!
//! ```text
//! [machine]
//! name = toy
//! int_regs = 8
//! vec_regs = 8
//! pipeline_width = 3
//! word_bytes = 8        # optional, default 8
//! cores = 1             # optional, default 1
//! clock_mhz = 2000      # optional
//!
//! [memory]
//! L1 32768 3            # name, size in bytes, latency in cycles
//! RAM 1073741824 70
//!
//! [instructions]
//! 53 cmd r 1            # mnemonics, `cmd`, operands, latency
//! 91 cmd r,r 1
//! ```
//!
//! Operand tokens are `r` (integer register), `x` (vector register), `m`
//! (memory) and `iN` (N-bit immediate); `-` means no operands.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::machine::{
    parse_operands, InstructionClass, LatencySpectrum, MachineSpec, MemoryLevel, DEFAULT_WORD_BYTES,
};
use crate::whatif::{
    parse_modification, Candidate, ClassSelector, SweepConfig, Target, COMBO_ADD_COUNTS,
    COMBO_REGISTER_FACTORS, GROWTH_FACTORS, REGISTER_FACTORS,
};

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn section_name(line: &str) -> Option<&str> {
    line.strip_prefix('[')?.strip_suffix(']').map(str::trim)
}

fn key_value(line: &str, n: usize) -> Result<(&str, &str)> {
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| Error::parse(n, format!("expected `key = value`, got `{line}`")))?;
    Ok((k.trim(), v.trim()))
}

fn int<T: std::str::FromStr>(s: &str, n: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(n, format!("{what}: `{s}` is not a valid integer")))
}

fn positive<T>(s: &str, n: usize, what: &str) -> Result<T>
where
    T: std::str::FromStr + Default + PartialOrd,
{
    let v: T = int(s, n, what)?;
    if v <= T::default() {
        return Err(Error::parse(n, format!("{what} must be >= 1")));
    }
    Ok(v)
}

fn at_line(n: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        e @ Error::Parse { .. } => e,
        other => Error::parse(n, other.to_string()),
    }
}

pub fn parse_class_line(line: &str, n: usize) -> Result<InstructionClass> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let [count, "cmd", ops, lat] = words.as_slice() else {
        return Err(Error::parse(
            n,
            format!("expected `COUNT cmd OPERANDS LATENCY`, got `{line}`"),
        ));
    };
    let count = positive(count, n, "mnemonic count")?;
    let lat = positive(lat, n, "latency")?;
    let ops = parse_operands(ops).map_err(at_line(n))?;
    InstructionClass::new(count, ops, lat).map_err(at_line(n))
}

pub fn parse_machine(text: &str) -> Result<MachineSpec> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Machine,
        Memory,
        Instructions,
    }
    let mut section = Section::None;
    let mut keys: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut levels: Vec<(usize, MemoryLevel)> = Vec::new();
    let mut classes: Vec<(usize, InstructionClass)> = Vec::new();
    let mut machine_line = 1;

    for (n, line) in content_lines(text) {
        if let Some(name) = section_name(line) {
            section = match name {
                "machine" => {
                    machine_line = n;
                    Section::Machine
                }
                "memory" => Section::Memory,
                "instructions" => Section::Instructions,
                other => return Err(Error::parse(n, format!("unknown section [{other}]"))),
            };
            continue;
        }
        match section {
            Section::None => return Err(Error::parse(n, "content before the first section")),
            Section::Machine => {
                let (k, v) = key_value(line, n)?;
                const KNOWN: [&str; 7] = [
                    "name",
                    "int_regs",
                    "vec_regs",
                    "pipeline_width",
                    "word_bytes",
                    "cores",
                    "clock_mhz",
                ];
                if !KNOWN.contains(&k) {
                    return Err(Error::parse(n, format!("unknown key `{k}`")));
                }
                if keys.insert(k, (n, v)).is_some() {
                    return Err(Error::parse(n, format!("duplicate key `{k}`")));
                }
            }
            Section::Memory => {
                let words: Vec<&str> = line.split_whitespace().collect();
                let [name, size, lat] = words.as_slice() else {
                    return Err(Error::parse(
                        n,
                        format!("expected `NAME SIZE_BYTES LATENCY_CC`, got `{line}`"),
                    ));
                };
                if levels.iter().any(|(_, l)| l.name == *name) {
                    return Err(Error::parse(n, format!("duplicate memory level `{name}`")));
                }
                let level = MemoryLevel::new(
                    *name,
                    positive(size, n, "size")?,
                    positive(lat, n, "latency")?,
                );
                if let Some((_, prev)) = levels.last() {
                    if level.size_bytes <= prev.size_bytes {
                        return Err(Error::parse(
                            n,
                            format!("level `{name}` must be larger than `{}`", prev.name),
                        ));
                    }
                    if level.latency_cc < prev.latency_cc {
                        return Err(Error::parse(
                            n,
                            format!("level `{name}` is faster than `{}`", prev.name),
                        ));
                    }
                }
                levels.push((n, level));
            }
            Section::Instructions => classes.push((n, parse_class_line(line, n)?)),
        }
    }

    let required = |k: &str| {
        keys.get(k)
            .copied()
            .ok_or_else(|| Error::parse(machine_line, format!("missing key `{k}`")))
    };
    let optional = |k: &str| keys.get(k).copied();

    let name = required("name")?.1.to_owned();
    let (n, v) = required("int_regs")?;
    let int_regs = positive(v, n, "int_regs")?;
    let (n, v) = required("vec_regs")?;
    let vec_regs = positive(v, n, "vec_regs")?;
    let (n, v) = required("pipeline_width")?;
    let pipeline_width = positive(v, n, "pipeline_width")?;
    let word_bytes = match optional("word_bytes") {
        Some((n, v)) => positive(v, n, "word_bytes")?,
        None => DEFAULT_WORD_BYTES,
    };
    let cores = match optional("cores") {
        Some((n, v)) => positive(v, n, "cores")?,
        None => 1,
    };
    let clock_hz = match optional("clock_mhz") {
        Some((n, v)) => {
            let mhz: f64 = v
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite() && *x > 0.0)
                .ok_or_else(|| {
                    Error::parse(n, format!("clock_mhz: `{v}` is not a positive number"))
                })?;
            Some(mhz * 1e6)
        }
        None => None,
    };
    for (n, level) in &levels {
        if level.size_bytes % word_bytes != 0 {
            return Err(Error::parse(
                *n,
                format!(
                    "size of `{}` is not a multiple of word_bytes = {word_bytes}",
                    level.name
                ),
            ));
        }
    }
    if classes.is_empty() {
        return Err(Error::parse(machine_line, "no [instructions] given"));
    }

    let spec = MachineSpec {
        name,
        int_regs,
        vec_regs,
        memory_levels: levels.into_iter().map(|(_, l)| l).collect(),
        word_bytes,
        pipeline_width,
        cores,
        clock_hz,
        classes: classes.into_iter().map(|(_, c)| c).collect(),
    };
    spec.validate().map_err(at_line(machine_line))?;
    Ok(spec)
}

pub fn render_machine(spec: &MachineSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[machine]");
    let _ = writeln!(out, "name = {}", spec.name);
    let _ = writeln!(out, "int_regs = {}", spec.int_regs);
    let _ = writeln!(out, "vec_regs = {}", spec.vec_regs);
    let _ = writeln!(out, "pipeline_width = {}", spec.pipeline_width);
    let _ = writeln!(out, "word_bytes = {}", spec.word_bytes);
    let _ = writeln!(out, "cores = {}", spec.cores);
    if let Some(hz) = spec.clock_hz {
        let _ = writeln!(out, "clock_mhz = {}", hz / 1e6);
    }
    if !spec.memory_levels.is_empty() {
        let _ = writeln!(out, "\n[memory]");
        for l in spec.sorted_levels() {
            let _ = writeln!(out, "{} {} {}", l.name, l.size_bytes, l.latency_cc);
        }
    }
    let _ = writeln!(out, "\n[instructions]");
    for c in &spec.classes {
        let _ = writeln!(out, "{c}");
    }
    out
}

/// `LATENCY COUNT` per line; counts may exceed any machine integer.
pub fn parse_spectrum(text: &str) -> Result<LatencySpectrum> {
    let mut spectrum = LatencySpectrum::new();
    for (n, line) in content_lines(text) {
        let words: Vec<&str> = line.split_whitespace().collect();
        let [lat, count] = words.as_slice() else {
            return Err(Error::parse(
                n,
                format!("expected `LATENCY COUNT`, got `{line}`"),
            ));
        };
        let lat: u32 = positive(lat, n, "latency")?;
        let count: BigUint = count
            .parse()
            .map_err(|_| Error::parse(n, format!("count: `{count}` is not a valid integer")))?;
        if count == BigUint::default() {
            return Err(Error::parse(n, "count must be >= 1"));
        }
        if spectrum.get(lat).is_some() {
            return Err(Error::parse(n, format!("duplicate latency {lat}")));
        }
        spectrum.add(lat, count).map_err(at_line(n))?;
    }
    Ok(spectrum)
}

pub fn render_spectrum(spectrum: &LatencySpectrum) -> String {
    spectrum.iter().map(|(t, n)| format!("{t} {n}\n")).collect()
}

fn numbers<T: std::str::FromStr>(v: &str, n: usize) -> Result<Vec<T>> {
    v.split_whitespace()
        .map(|w| {
            w.parse()
                .map_err(|_| Error::parse(n, format!("`{w}` is not a number")))
        })
        .collect()
}

/// Key to (line, value) within one config section.
type Keys = BTreeMap<String, (usize, String)>;

/// Sweep configuration. Each section is optional and missing sections are
/// skipped; missing keys inside a present section take the protocol
/// defaults for `spec`.
///
/// ```text
/// [single]
/// targets = identity size:L1 latency:L1 int_regs vec_regs
/// factors = 0.5 2 5 10 20
/// [pair]
/// targets = int_regs vec_regs
/// [grow]
/// families = r:1 r,r:1
/// factors = 1.1 1.25 1.5 2
/// [combo]
/// classes = r,r,r:1 x,x,x:1
/// register_factors = 2 5 10
/// counts = 8 16 32 64
/// ```
pub fn parse_sweep_config(text: &str, spec: &MachineSpec) -> Result<SweepConfig> {
    let defaults = SweepConfig::protocol_defaults(spec);
    let mut sections: Vec<(usize, String, Keys)> = Vec::new();
    for (n, line) in content_lines(text) {
        if let Some(name) = section_name(line) {
            if !["single", "pair", "grow", "combo"].contains(&name) {
                return Err(Error::parse(n, format!("unknown section [{name}]")));
            }
            if sections.iter().any(|s| s.1 == name) {
                return Err(Error::parse(n, format!("duplicate section [{name}]")));
            }
            sections.push((n, name.to_owned(), BTreeMap::new()));
            continue;
        }
        let Some((_, name, keys)) = sections.last_mut() else {
            return Err(Error::parse(n, "content before the first section"));
        };
        let (k, v) = key_value(line, n)?;
        let allowed: &[&str] = match name.as_str() {
            "single" | "pair" => &["targets", "factors"],
            "grow" => &["families", "factors"],
            _ => &["classes", "register_factors", "counts"],
        };
        if !allowed.contains(&k) {
            return Err(Error::parse(n, format!("unknown key `{k}` in [{name}]")));
        }
        if keys.insert(k.to_owned(), (n, v.to_owned())).is_some() {
            return Err(Error::parse(n, format!("duplicate key `{k}`")));
        }
    }

    let mut config = SweepConfig::empty();
    for (sn, name, keys) in sections {
        let get = |k: &str| keys.get(k).map(|(n, v)| (*n, v.as_str()));
        let factors = |k: &str, default: &[f64]| -> Result<Vec<f64>> {
            match get(k) {
                Some((n, v)) => {
                    let f: Vec<f64> = numbers(v, n)?;
                    if f.is_empty() || f.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                        return Err(Error::parse(n, format!("`{k}` needs positive numbers")));
                    }
                    Ok(f)
                }
                None => Ok(default.to_vec()),
            }
        };
        let targets = |n: usize, v: &str| -> Result<Vec<Target>> {
            v.split_whitespace()
                .map(|t| Target::parse(t).map_err(at_line(n)))
                .collect()
        };
        match name.as_str() {
            "single" => {
                let t = match get("targets") {
                    Some((n, v)) => targets(n, v)?,
                    None => defaults.single.clone().map(|s| s.0).unwrap_or_default(),
                };
                config.single = Some((t, factors("factors", &REGISTER_FACTORS)?));
            }
            "pair" => {
                let pair = match get("targets") {
                    Some((n, v)) => match targets(n, v)?.as_slice() {
                        [a, b] => (a.clone(), b.clone()),
                        _ => return Err(Error::parse(n, "[pair] needs exactly two targets")),
                    },
                    None => (Target::IntRegs, Target::VecRegs),
                };
                config.pair = Some((pair, factors("factors", &REGISTER_FACTORS)?));
            }
            "grow" => {
                let families = match get("families") {
                    Some((n, v)) => v
                        .split_whitespace()
                        .map(|s| ClassSelector::parse(s).map_err(at_line(n)))
                        .collect::<Result<Vec<_>>>()?,
                    None => defaults.grow.clone().map(|g| g.0).ok_or_else(|| {
                        Error::parse(sn, "machine has no latency-1 register families")
                    })?,
                };
                config.grow = Some((families, factors("factors", &GROWTH_FACTORS)?));
            }
            _ => {
                let classes =
                    match get("classes") {
                        Some((n, v)) => v
                            .split_whitespace()
                            .map(|s| {
                                let sel = ClassSelector::parse(s).map_err(at_line(n))?;
                                InstructionClass::new(1, sel.operands, sel.latency.unwrap_or(1))
                                    .map_err(at_line(n))
                            })
                            .collect::<Result<Vec<_>>>()?,
                        None => defaults.combo.clone().map(|c| c.0).ok_or_else(|| {
                            Error::parse(sn, "machine already uses the widest class")
                        })?,
                    };
                let counts = match get("counts") {
                    Some((n, v)) => numbers(v, n)?,
                    None => COMBO_ADD_COUNTS.to_vec(),
                };
                config.combo = Some((
                    classes,
                    factors("register_factors", &COMBO_REGISTER_FACTORS)?,
                    counts,
                ));
            }
        }
    }
    Ok(config)
}

/// One candidate per line; modifications applied together are joined by `+`.
pub fn parse_candidates(text: &str) -> Result<Vec<Candidate>> {
    content_lines(text)
        .map(|(n, line)| {
            let steps = line
                .split('+')
                .map(|part| parse_modification(part.trim()).map_err(at_line(n)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Candidate::new(steps))
        })
        .collect()
}
