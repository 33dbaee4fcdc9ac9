//! What-if analysis: edit a machine, re-solve, and report capacity as a
//! percentage of the unmodified machine.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::machine::{operands_token, parse_operands, InstructionClass, MachineSpec, OperandKind};
use crate::solver::capacity;

/// Percentages below this count as "no measurable gain".
pub const SATURATION_THRESHOLD: f64 = 100.05;

pub const REGISTER_FACTORS: [f64; 5] = [0.5, 2.0, 5.0, 10.0, 20.0];
pub const GROWTH_FACTORS: [f64; 4] = [1.1, 1.25, 1.5, 2.0];
pub const COMBO_REGISTER_FACTORS: [f64; 3] = [2.0, 5.0, 10.0];
pub const COMBO_ADD_COUNTS: [u64; 4] = [8, 16, 32, 64];

/// Picks instruction classes by operand signature and, optionally, latency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSelector {
    pub operands: Vec<OperandKind>,
    pub latency: Option<u32>,
}

impl ClassSelector {
    pub fn new(operands: Vec<OperandKind>, latency: Option<u32>) -> Self {
        ClassSelector { operands, latency }
    }

    pub fn matches(&self, class: &InstructionClass) -> bool {
        class.operands == self.operands && self.latency.is_none_or(|l| l == class.base_latency)
    }

    /// `r,r:1` or `r,r` (any latency).
    pub fn parse(text: &str) -> Result<Self> {
        let (ops, lat) = match text.split_once(':') {
            Some((ops, lat)) => {
                let lat: u32 = lat
                    .parse()
                    .map_err(|_| Error::Contract(format!("bad selector latency in `{text}`")))?;
                (ops, Some(lat))
            }
            None => (text, None),
        };
        Ok(ClassSelector::new(parse_operands(ops)?, lat))
    }

    pub fn token(&self) -> String {
        match self.latency {
            Some(l) => format!("{}:{l}", operands_token(&self.operands)),
            None => operands_token(&self.operands),
        }
    }

    /// Human label in `cmd r,r 1` notation.
    pub fn label(&self) -> String {
        match self.latency {
            Some(l) => format!("cmd {} {l}", operands_token(&self.operands)),
            None => format!("cmd {}", operands_token(&self.operands)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Modification {
    Identity,
    ScaleIntRegs(f64),
    ScaleVecRegs(f64),
    ScaleBoth(f64),
    ScaleMemLevelSize {
        level: String,
        factor: f64,
    },
    SetMemLatency {
        level: String,
        latency_cc: u32,
    },
    ScaleMemLatency {
        level: String,
        factor: f64,
    },
    ScaleClassFamily {
        selector: ClassSelector,
        factor: f64,
    },
    /// Add `mnemonics` new mnemonics with the operands and latency of `class`.
    AddClass {
        class: InstructionClass,
        mnemonics: u64,
    },
}

/// Candidate-file syntax; `parse_modification` reads it back.
impl fmt::Display for Modification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modification::Identity => write!(f, "identity"),
            Modification::ScaleIntRegs(k) => write!(f, "scale_int_regs {k}"),
            Modification::ScaleVecRegs(k) => write!(f, "scale_vec_regs {k}"),
            Modification::ScaleBoth(k) => write!(f, "scale_regs {k}"),
            Modification::ScaleMemLevelSize { level, factor } => {
                write!(f, "scale_mem_size {level} {factor}")
            }
            Modification::SetMemLatency { level, latency_cc } => {
                write!(f, "set_mem_latency {level} {latency_cc}")
            }
            Modification::ScaleMemLatency { level, factor } => {
                write!(f, "scale_mem_latency {level} {factor}")
            }
            Modification::ScaleClassFamily { selector, factor } => {
                write!(f, "scale_family {} {factor}", selector.token())
            }
            Modification::AddClass { class, mnemonics } => write!(
                f,
                "add_class {mnemonics} cmd {} {}",
                operands_token(&class.operands),
                class.base_latency
            ),
        }
    }
}

/// Parse one modification in candidate-file syntax.
pub fn parse_modification(text: &str) -> Result<Modification> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let bad = || Error::Contract(format!("cannot parse modification `{text}`"));
    let factor = |s: &str| -> Result<f64> {
        let k: f64 = s.parse().map_err(|_| bad())?;
        check_factor(k)?;
        Ok(k)
    };
    let m = match words.as_slice() {
        ["identity"] => Modification::Identity,
        ["scale_int_regs", k] => Modification::ScaleIntRegs(factor(k)?),
        ["scale_vec_regs", k] => Modification::ScaleVecRegs(factor(k)?),
        ["scale_regs", k] => Modification::ScaleBoth(factor(k)?),
        ["scale_mem_size", level, k] => Modification::ScaleMemLevelSize {
            level: level.to_string(),
            factor: factor(k)?,
        },
        ["scale_mem_latency", level, k] => Modification::ScaleMemLatency {
            level: level.to_string(),
            factor: factor(k)?,
        },
        ["set_mem_latency", level, l] => Modification::SetMemLatency {
            level: level.to_string(),
            latency_cc: l.parse().map_err(|_| bad())?,
        },
        ["scale_family", sel, k] => Modification::ScaleClassFamily {
            selector: ClassSelector::parse(sel)?,
            factor: factor(k)?,
        },
        ["add_class", n, "cmd", ops, lat] => {
            let mnemonics: u64 = n.parse().map_err(|_| bad())?;
            let class = InstructionClass::new(
                mnemonics.max(1),
                parse_operands(ops)?,
                lat.parse().map_err(|_| bad())?,
            )?;
            Modification::AddClass { class, mnemonics }
        }
        _ => return Err(bad()),
    };
    Ok(m)
}

fn check_factor(factor: f64) -> Result<()> {
    if factor.is_finite() && factor > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidFactor(factor))
    }
}

/// Round-to-nearest scaling with a floor of 1.
fn scale_count(n: u64, factor: f64) -> u64 {
    (n as f64 * factor).round().max(1.0) as u64
}

fn level_mut<'a>(
    spec: &'a mut MachineSpec,
    name: &str,
) -> Result<&'a mut crate::machine::MemoryLevel> {
    spec.memory_levels
        .iter_mut()
        .find(|l| l.name == name)
        .ok_or_else(|| Error::UnknownLevel(name.to_owned()))
}

/// Sets one level's latency. Larger levels are raised and smaller levels
/// lowered as needed so latencies stay non-decreasing with size.
fn set_level_latency(spec: &mut MachineSpec, name: &str, latency: u64) -> Result<()> {
    let latency = u32::try_from(latency)
        .map_err(|_| Error::InvalidSpec("memory latency overflows".into()))?;
    let size = level_mut(spec, name)?.size_bytes;
    for l in &mut spec.memory_levels {
        if l.size_bytes > size {
            l.latency_cc = l.latency_cc.max(latency);
        } else if l.size_bytes < size {
            l.latency_cc = l.latency_cc.min(latency);
        } else {
            l.latency_cc = latency;
        }
    }
    Ok(())
}

pub fn apply_modification(spec: &MachineSpec, m: &Modification) -> Result<MachineSpec> {
    let mut out = spec.clone();
    match m {
        Modification::Identity => {}
        Modification::ScaleIntRegs(k) => {
            check_factor(*k)?;
            out.int_regs = scale_count(spec.int_regs, *k);
        }
        Modification::ScaleVecRegs(k) => {
            check_factor(*k)?;
            out.vec_regs = scale_count(spec.vec_regs, *k);
        }
        Modification::ScaleBoth(k) => {
            check_factor(*k)?;
            out.int_regs = scale_count(spec.int_regs, *k);
            out.vec_regs = scale_count(spec.vec_regs, *k);
        }
        Modification::ScaleMemLevelSize { level, factor } => {
            check_factor(*factor)?;
            let word = spec.word_bytes.max(1);
            let l = level_mut(&mut out, level)?;
            l.size_bytes = scale_count(l.size_bytes / word, *factor) * word;
        }
        Modification::SetMemLatency { level, latency_cc } => {
            if *latency_cc == 0 {
                return Err(Error::InvalidSpec("memory latency must be >= 1".into()));
            }
            set_level_latency(&mut out, level, u64::from(*latency_cc))?;
        }
        Modification::ScaleMemLatency { level, factor } => {
            check_factor(*factor)?;
            let current = level_mut(&mut out, level)?.latency_cc;
            set_level_latency(&mut out, level, scale_count(u64::from(current), *factor))?;
        }
        Modification::ScaleClassFamily { selector, factor } => {
            check_factor(*factor)?;
            let mut hit = false;
            for class in out.classes.iter_mut().filter(|c| selector.matches(c)) {
                class.mnemonic_count = scale_count(class.mnemonic_count, *factor);
                hit = true;
            }
            if !hit {
                return Err(Error::NoMatchingClass(selector.label()));
            }
        }
        Modification::AddClass { class, mnemonics } => {
            let mut added = class.clone();
            added.mnemonic_count = *mnemonics;
            added.validate()?;
            out.classes.push(added);
        }
    }
    out.validate()?;
    Ok(out)
}

/// A parameter that a sweep scales by a factor.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Identity,
    IntRegs,
    VecRegs,
    BothRegs,
    MemSize(String),
    MemLatency(String),
    Family(ClassSelector),
}

impl Target {
    pub fn at(&self, factor: f64) -> Modification {
        match self {
            Target::Identity => Modification::Identity,
            Target::IntRegs => Modification::ScaleIntRegs(factor),
            Target::VecRegs => Modification::ScaleVecRegs(factor),
            Target::BothRegs => Modification::ScaleBoth(factor),
            Target::MemSize(l) => Modification::ScaleMemLevelSize {
                level: l.clone(),
                factor,
            },
            Target::MemLatency(l) => Modification::ScaleMemLatency {
                level: l.clone(),
                factor,
            },
            Target::Family(s) => Modification::ScaleClassFamily {
                selector: s.clone(),
                factor,
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Target::Identity => "identity".into(),
            Target::IntRegs => "R_i".into(),
            Target::VecRegs => "R_v".into(),
            Target::BothRegs => "R_i & R_v".into(),
            Target::MemSize(l) => l.clone(),
            Target::MemLatency(l) => format!("{l}_t"),
            Target::Family(s) => s.label(),
        }
    }

    /// Config-file token: `identity`, `int_regs`, `vec_regs`, `regs`,
    /// `size:L1`, `latency:L1`, `family:r,r:1`.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text {
            "identity" => Target::Identity,
            "int_regs" => Target::IntRegs,
            "vec_regs" => Target::VecRegs,
            "regs" => Target::BothRegs,
            t => match t.split_once(':') {
                Some(("size", l)) => Target::MemSize(l.to_owned()),
                Some(("latency", l)) => Target::MemLatency(l.to_owned()),
                Some(("family", s)) => Target::Family(ClassSelector::parse(s)?),
                _ => return Err(Error::Contract(format!("unknown sweep target `{t}`"))),
            },
        })
    }

    pub fn token(&self) -> String {
        match self {
            Target::Identity => "identity".into(),
            Target::IntRegs => "int_regs".into(),
            Target::VecRegs => "vec_regs".into(),
            Target::BothRegs => "regs".into(),
            Target::MemSize(l) => format!("size:{l}"),
            Target::MemLatency(l) => format!("latency:{l}"),
            Target::Family(s) => format!("family:{}", s.token()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Percent(f64),
    Failed(String),
}

impl Cell {
    pub fn percent(&self) -> Option<f64> {
        match self {
            Cell::Percent(p) => Some(*p),
            Cell::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub label: String,
    pub cells: Vec<Cell>,
}

impl SweepRow {
    /// Every cell is exactly 100%.
    pub fn is_no_effect(&self) -> bool {
        self.cells.iter().all(|c| c.percent() == Some(100.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub title: String,
    pub baseline_capacity: f64,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Collapse rows whose cells are identical (all numeric), joining labels.
    pub fn merge_identical_rows(&mut self) {
        let mut merged: Vec<SweepRow> = Vec::with_capacity(self.rows.len());
        for row in self.rows.drain(..) {
            let numeric = row.cells.iter().all(|c| c.percent().is_some());
            let same = merged.iter_mut().find(|m| {
                numeric
                    && m.cells.len() == row.cells.len()
                    && m.cells.iter().zip(&row.cells).all(|(a, b)| match (a, b) {
                        (Cell::Percent(x), Cell::Percent(y)) => x.to_bits() == y.to_bits(),
                        _ => false,
                    })
            });
            match same {
                Some(m) => {
                    m.label.push_str(", ");
                    m.label.push_str(&row.label);
                }
                None => merged.push(row),
            }
        }
        self.rows = merged;
    }

    pub fn cell(&self, row_label: &str, column: &str) -> Option<&Cell> {
        let c = self.columns.iter().position(|x| x == column)?;
        let row = self
            .rows
            .iter()
            .find(|r| r.label.split(", ").any(|l| l == row_label))?;
        row.cells.get(c)
    }
}

pub fn format_factor(f: f64) -> String {
    format!("{f}")
}

fn evaluate(spec: &MachineSpec, baseline: f64, steps: &[Modification]) -> Cell {
    let run = || -> Result<f64> {
        let mut current = spec.clone();
        for m in steps {
            current = apply_modification(&current, m)?;
        }
        let c = capacity(&current)?.capacity_per_cycle;
        Ok(100.0 * (c / baseline))
    };
    match run() {
        Ok(p) => Cell::Percent(p),
        Err(e) => Cell::Failed(e.to_string()),
    }
}

/// Row label plus, per column, the modifications applied together.
type RowPlan = (String, Vec<Vec<Modification>>);

fn run_grid(
    spec: &MachineSpec,
    title: &str,
    columns: Vec<String>,
    plan: Vec<RowPlan>,
) -> Result<SweepReport> {
    let baseline = capacity(spec)?.capacity_per_cycle;
    let jobs: Vec<(usize, &Vec<Modification>)> = plan
        .iter()
        .enumerate()
        .flat_map(|(r, (_, cols))| cols.iter().map(move |steps| (r, steps)))
        .collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|(_, steps)| evaluate(spec, baseline, steps))
        .collect();
    let mut cells = cells.into_iter();
    let rows = plan
        .into_iter()
        .map(|(label, cols)| SweepRow {
            label,
            cells: cells.by_ref().take(cols.len()).collect(),
        })
        .collect();
    let mut report = SweepReport {
        title: title.to_owned(),
        baseline_capacity: baseline,
        columns,
        rows,
    };
    report.merge_identical_rows();
    Ok(report)
}

fn require_factors(factors: &[f64]) -> Result<()> {
    if factors.is_empty() {
        return Err(Error::Contract("factor list is empty".into()));
    }
    factors.iter().try_for_each(|f| check_factor(*f))
}

/// Scale one parameter at a time, each from the baseline.
pub fn single_sweep(
    spec: &MachineSpec,
    targets: &[Target],
    factors: &[f64],
) -> Result<SweepReport> {
    require_factors(factors)?;
    let plan = targets
        .iter()
        .map(|t| (t.label(), factors.iter().map(|f| vec![t.at(*f)]).collect()))
        .collect();
    run_grid(
        spec,
        "single parameter",
        factors.iter().map(|f| format_factor(*f)).collect(),
        plan,
    )
}

/// Scale two parameters together by the same factor.
pub fn pair_sweep(
    spec: &MachineSpec,
    pair: (&Target, &Target),
    factors: &[f64],
) -> Result<SweepReport> {
    require_factors(factors)?;
    let label = format!("{} & {}", pair.0.label(), pair.1.label());
    let cols = factors
        .iter()
        .map(|f| vec![pair.0.at(*f), pair.1.at(*f)])
        .collect();
    run_grid(
        spec,
        "parameter pair",
        factors.iter().map(|f| format_factor(*f)).collect(),
        vec![(label, cols)],
    )
}

/// Scale the mnemonic count of each selected family.
pub fn grow_instruction_set(
    spec: &MachineSpec,
    selectors: &[ClassSelector],
    factors: &[f64],
) -> Result<SweepReport> {
    require_factors(factors)?;
    for s in selectors {
        if !spec.classes.iter().any(|c| s.matches(c)) {
            return Err(Error::NoMatchingClass(s.label()));
        }
    }
    let plan = selectors
        .iter()
        .map(|s| {
            let t = Target::Family(s.clone());
            (t.label(), factors.iter().map(|f| vec![t.at(*f)]).collect())
        })
        .collect();
    run_grid(
        spec,
        "instruction set growth",
        factors.iter().map(|f| format_factor(*f)).collect(),
        plan,
    )
}

/// Register target matching the operands of a new class: integer, vector,
/// or both when mixed or register-free.
fn register_target_for(class: &InstructionClass) -> Target {
    let int = class.operands.contains(&OperandKind::IntReg);
    let vec = class.operands.contains(&OperandKind::VecReg);
    match (int, vec) {
        (true, false) => Target::IntRegs,
        (false, true) => Target::VecRegs,
        _ => Target::BothRegs,
    }
}

fn register_tag(target: &Target) -> &'static str {
    match target {
        Target::IntRegs => "r",
        Target::VecRegs => "x",
        _ => "r&x",
    }
}

/// Scale registers and add mnemonics of a new, wider class at the same time.
/// Rows are register factors, columns are added mnemonic counts.
pub fn combo_step3(
    spec: &MachineSpec,
    register_factors: &[f64],
    new_class: &InstructionClass,
    add_counts: &[u64],
) -> Result<SweepReport> {
    run_grid(
        spec,
        "registers with new instruction type",
        add_counts.iter().map(|n| n.to_string()).collect(),
        combo_plan(spec, register_factors, new_class, add_counts)?,
    )
}

fn combo_plan(
    spec: &MachineSpec,
    register_factors: &[f64],
    new_class: &InstructionClass,
    add_counts: &[u64],
) -> Result<Vec<RowPlan>> {
    require_factors(register_factors)?;
    if add_counts.is_empty() {
        return Err(Error::Contract("added-count list is empty".into()));
    }
    new_class.validate()?;
    if new_class.arity() <= spec.max_arity() {
        return Err(Error::Contract(format!(
            "new class arity {} must exceed the widest existing class ({})",
            new_class.arity(),
            spec.max_arity()
        )));
    }
    let target = register_target_for(new_class);
    let class_label = format!(
        "cmd {} {}",
        operands_token(&new_class.operands),
        new_class.base_latency
    );
    Ok(register_factors
        .iter()
        .map(|f| {
            let label = format!(
                "{} x{} + {class_label}",
                register_tag(&target),
                format_factor(*f)
            );
            let cols = add_counts
                .iter()
                .map(|&n| {
                    let mut steps = vec![target.at(*f)];
                    if n > 0 {
                        steps.push(Modification::AddClass {
                            class: new_class.clone(),
                            mnemonics: n,
                        });
                    }
                    steps
                })
                .collect();
            (label, cols)
        })
        .collect())
}

/// What a full sweep run evaluates. `None` sections are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub single: Option<(Vec<Target>, Vec<f64>)>,
    pub pair: Option<((Target, Target), Vec<f64>)>,
    pub grow: Option<(Vec<ClassSelector>, Vec<f64>)>,
    pub combo: Option<(Vec<InstructionClass>, Vec<f64>, Vec<u64>)>,
}

impl SweepConfig {
    pub fn empty() -> Self {
        SweepConfig {
            single: None,
            pair: None,
            grow: None,
            combo: None,
        }
    }

    /// The three-step protocol: every memory size and latency plus both
    /// register files at x0.5..x20, the register pair, growth of every
    /// latency-1 register family present at x1.1..x2, and registers x2/x5/x10
    /// combined with 8..64 mnemonics of the next wider integer and vector
    /// class.
    pub fn protocol_defaults(spec: &MachineSpec) -> Self {
        let mut targets = vec![Target::Identity];
        for l in spec.sorted_levels() {
            targets.push(Target::MemSize(l.name.clone()));
        }
        for l in spec.sorted_levels() {
            targets.push(Target::MemLatency(l.name.clone()));
        }
        targets.push(Target::IntRegs);
        targets.push(Target::VecRegs);

        let mut families: Vec<ClassSelector> = Vec::new();
        for c in &spec.classes {
            let fast = c.base_latency == 1 && c.mem_operands() == 0;
            let sel = ClassSelector::new(c.operands.clone(), Some(1));
            if fast && !c.operands.is_empty() && !families.contains(&sel) {
                families.push(sel);
            }
        }
        families.sort_by_key(|s| (s.operands.len(), s.operands.clone()));

        let arity = spec.max_arity() + 1;
        let combo = (arity <= crate::machine::MAX_OPERANDS).then(|| {
            let classes = [OperandKind::IntReg, OperandKind::VecReg]
                .into_iter()
                .map(|k| InstructionClass {
                    mnemonic_count: 1,
                    operands: vec![k; arity],
                    base_latency: 1,
                })
                .collect();
            (
                classes,
                COMBO_REGISTER_FACTORS.to_vec(),
                COMBO_ADD_COUNTS.to_vec(),
            )
        });

        SweepConfig {
            single: Some((targets, REGISTER_FACTORS.to_vec())),
            pair: Some((
                (Target::IntRegs, Target::VecRegs),
                REGISTER_FACTORS.to_vec(),
            )),
            grow: (!families.is_empty()).then(|| (families, GROWTH_FACTORS.to_vec())),
            combo,
        }
    }
}

/// Run every configured step. The pair row joins the single-parameter table
/// when both use the same factors.
pub fn run_sweeps(spec: &MachineSpec, config: &SweepConfig) -> Result<Vec<SweepReport>> {
    let mut reports = Vec::new();
    let mut step1 = match &config.single {
        Some((targets, factors)) => Some(single_sweep(spec, targets, factors)?),
        None => None,
    };
    if let Some(((a, b), factors)) = &config.pair {
        let pair = pair_sweep(spec, (a, b), factors)?;
        match step1.as_mut() {
            Some(s1) if s1.columns == pair.columns => {
                s1.rows.extend(pair.rows);
                s1.merge_identical_rows();
            }
            _ => reports.push(pair),
        }
    }
    if let Some(s1) = step1 {
        reports.insert(0, s1);
    }
    if let Some((selectors, factors)) = &config.grow {
        reports.push(grow_instruction_set(spec, selectors, factors)?);
    }
    if let Some((classes, reg_factors, counts)) = &config.combo {
        let mut plan = Vec::new();
        for class in classes {
            plan.extend(combo_plan(spec, reg_factors, class, counts)?);
        }
        reports.push(run_grid(
            spec,
            "registers with new instruction type",
            counts.iter().map(|n| n.to_string()).collect(),
            plan,
        )?);
    }
    Ok(reports)
}

/// A named set of modifications applied together.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub label: String,
    pub steps: Vec<Modification>,
}

impl Candidate {
    pub fn new(steps: Vec<Modification>) -> Self {
        let label = steps
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(" + ");
        Candidate { label, steps }
    }
}

impl From<Modification> for Candidate {
    fn from(m: Modification) -> Self {
        Candidate::new(vec![m])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub candidate: Candidate,
    pub result: Cell,
    /// Below the saturation threshold, or failed.
    pub saturated: bool,
}

/// Rank candidate evolution steps by capacity gain, best first. Ties keep
/// input order; failed candidates sink to the end.
pub fn evolution_rank(
    spec: &MachineSpec,
    candidates: &[Candidate],
) -> Result<Vec<RankedCandidate>> {
    if candidates.is_empty() {
        return Err(Error::Contract("no candidates to rank".into()));
    }
    let baseline = capacity(spec)?.capacity_per_cycle;
    let results: Vec<Cell> = candidates
        .par_iter()
        .map(|c| evaluate(spec, baseline, &c.steps))
        .collect();
    let mut ranked: Vec<RankedCandidate> = candidates
        .iter()
        .cloned()
        .zip(results)
        .map(|(candidate, result)| {
            let saturated = result.percent().is_none_or(|p| p < SATURATION_THRESHOLD);
            RankedCandidate {
                candidate,
                result,
                saturated,
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        let key = |r: &RankedCandidate| r.result.percent().unwrap_or(f64::NEG_INFINITY);
        key(b).total_cmp(&key(a))
    });
    Ok(ranked)
}

/// `100 * successor / base`.
pub fn relative_percent(base_capacity: f64, successor_capacity: f64) -> f64 {
    100.0 * (successor_capacity / base_capacity)
}
