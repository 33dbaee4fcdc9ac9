//! Machine descriptions and their expansion into a latency spectrum.
//!
//! An instruction instance is a mnemonic together with concrete operand
//! values, so a class with `k` mnemonics over operands `o1..on` contributes
//! `k * |o1| * ... * |on|` distinct instructions. Memory operands are split
//! per memory level: level `j` owns the cells it adds beyond level `j-1`,
//! and an access there costs the level latency on top of the base latency.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const MAX_OPERANDS: usize = 4;
pub const DEFAULT_WORD_BYTES: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperandKind {
    IntReg,
    VecReg,
    Mem,
    /// Immediate of the given bit width, 1..=64.
    Imm(u8),
}

impl OperandKind {
    /// Short token used in machine files: `r`, `x`, `m`, `iN`.
    pub fn token(&self) -> String {
        match self {
            OperandKind::IntReg => "r".to_owned(),
            OperandKind::VecReg => "x".to_owned(),
            OperandKind::Mem => "m".to_owned(),
            OperandKind::Imm(w) => format!("i{w}"),
        }
    }

    pub fn from_token(tok: &str) -> Result<Self> {
        match tok {
            "r" => Ok(OperandKind::IntReg),
            "x" => Ok(OperandKind::VecReg),
            "m" => Ok(OperandKind::Mem),
            t if t.starts_with('i') => {
                let w: u8 = t[1..]
                    .parse()
                    .map_err(|_| Error::UnsupportedClass(format!("bad operand token `{t}`")))?;
                let kind = OperandKind::Imm(w);
                kind.validate()?;
                Ok(kind)
            }
            t => Err(Error::UnsupportedClass(format!("bad operand token `{t}`"))),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            OperandKind::Imm(w) if !(1..=64).contains(w) => Err(Error::UnsupportedClass(format!(
                "immediate width {w} outside 1..=64"
            ))),
            _ => Ok(()),
        }
    }
}

/// Comma-joined operand tokens, `-` for an empty list.
pub fn operands_token(ops: &[OperandKind]) -> String {
    if ops.is_empty() {
        "-".to_owned()
    } else {
        ops.iter().map(|o| o.token()).collect::<Vec<_>>().join(",")
    }
}

pub fn parse_operands(text: &str) -> Result<Vec<OperandKind>> {
    if text == "-" {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| OperandKind::from_token(t.trim()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionClass {
    pub mnemonic_count: u64,
    pub operands: Vec<OperandKind>,
    pub base_latency: u32,
}

impl InstructionClass {
    pub fn new(mnemonic_count: u64, operands: Vec<OperandKind>, base_latency: u32) -> Result<Self> {
        let class = InstructionClass {
            mnemonic_count,
            operands,
            base_latency,
        };
        class.validate()?;
        Ok(class)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mnemonic_count == 0 {
            return Err(Error::UnsupportedClass(
                "mnemonic count must be >= 1".into(),
            ));
        }
        if self.base_latency == 0 {
            return Err(Error::UnsupportedClass("base latency must be >= 1".into()));
        }
        if self.operands.len() > MAX_OPERANDS {
            return Err(Error::UnsupportedClass(format!(
                "{} operands (at most {MAX_OPERANDS})",
                self.operands.len()
            )));
        }
        for op in &self.operands {
            op.validate()?;
        }
        if self.mem_operands() > 1 {
            return Err(Error::UnsupportedClass(format!(
                "`{}` has more than one memory operand",
                operands_token(&self.operands)
            )));
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.operands.len()
    }

    pub fn mem_operands(&self) -> usize {
        self.operands
            .iter()
            .filter(|o| **o == OperandKind::Mem)
            .count()
    }
}

impl fmt::Display for InstructionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} cmd {} {}",
            self.mnemonic_count,
            operands_token(&self.operands),
            self.base_latency
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryLevel {
    pub name: String,
    pub size_bytes: u64,
    pub latency_cc: u32,
}

impl MemoryLevel {
    pub fn new(name: impl Into<String>, size_bytes: u64, latency_cc: u32) -> Self {
        MemoryLevel {
            name: name.into(),
            size_bytes,
            latency_cc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineSpec {
    pub name: String,
    pub int_regs: u64,
    pub vec_regs: u64,
    pub memory_levels: Vec<MemoryLevel>,
    pub word_bytes: u64,
    pub pipeline_width: u32,
    pub cores: u32,
    pub clock_hz: Option<f64>,
    pub classes: Vec<InstructionClass>,
}

impl MachineSpec {
    /// A register-only machine with one core, width 1, no clock and no classes.
    pub fn new(name: impl Into<String>, int_regs: u64, vec_regs: u64) -> Self {
        MachineSpec {
            name: name.into(),
            int_regs,
            vec_regs,
            memory_levels: Vec::new(),
            word_bytes: DEFAULT_WORD_BYTES,
            pipeline_width: 1,
            cores: 1,
            clock_hz: None,
            classes: Vec::new(),
        }
    }

    pub fn with_class(mut self, class: InstructionClass) -> Self {
        self.classes.push(class);
        self
    }

    pub fn with_level(mut self, level: MemoryLevel) -> Self {
        self.memory_levels.push(level);
        self
    }

    /// Memory levels ordered by size.
    pub fn sorted_levels(&self) -> Vec<&MemoryLevel> {
        let mut levels: Vec<&MemoryLevel> = self.memory_levels.iter().collect();
        levels.sort_by(|a, b| a.size_bytes.cmp(&b.size_bytes).then(a.name.cmp(&b.name)));
        levels
    }

    pub fn level(&self, name: &str) -> Option<&MemoryLevel> {
        self.memory_levels.iter().find(|l| l.name == name)
    }

    pub fn max_arity(&self) -> usize {
        self.classes.iter().map(|c| c.arity()).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.int_regs == 0 || self.vec_regs == 0 {
            return bad("register counts must be >= 1".into());
        }
        if self.pipeline_width == 0 {
            return bad("pipeline_width must be >= 1".into());
        }
        if self.cores == 0 {
            return bad("cores must be >= 1".into());
        }
        if self.word_bytes == 0 {
            return bad("word_bytes must be >= 1".into());
        }
        if let Some(hz) = self.clock_hz {
            if !(hz.is_finite() && hz > 0.0) {
                return bad(format!("clock must be positive, got {hz}"));
            }
        }
        if self.classes.is_empty() {
            return bad("at least one instruction class is required".into());
        }
        for class in &self.classes {
            class.validate()?;
        }
        for (i, a) in self.memory_levels.iter().enumerate() {
            if a.size_bytes == 0 || a.latency_cc == 0 {
                return bad(format!(
                    "memory level {} needs positive size and latency",
                    a.name
                ));
            }
            if a.size_bytes % self.word_bytes != 0 {
                return bad(format!(
                    "word size {} does not divide size of {} ({})",
                    self.word_bytes, a.name, a.size_bytes
                ));
            }
            if self.memory_levels[..i].iter().any(|b| b.name == a.name) {
                return bad(format!("duplicate memory level {}", a.name));
            }
        }
        for pair in self.sorted_levels().windows(2) {
            if pair[0].size_bytes == pair[1].size_bytes {
                return bad(format!(
                    "levels {} and {} have equal size",
                    pair[0].name, pair[1].name
                ));
            }
            if pair[0].latency_cc > pair[1].latency_cc {
                return bad(format!(
                    "latency decreases from {} to {}",
                    pair[0].name, pair[1].name
                ));
            }
        }
        Ok(())
    }
}

/// Map from execution time in cycles to the number of distinct instructions
/// with that time. Zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LatencySpectrum {
    terms: BTreeMap<u32, BigUint>,
}

impl LatencySpectrum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from `(latency, count)` pairs, summing repeated latencies.
    pub fn from_terms<I, C>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, C)>,
        C: Into<BigUint>,
    {
        let mut s = Self::new();
        for (t, n) in terms {
            s.add(t, n.into())?;
        }
        Ok(s)
    }

    pub fn add(&mut self, latency: u32, count: BigUint) -> Result<()> {
        if latency == 0 {
            return Err(Error::Contract("latency must be >= 1".into()));
        }
        if count.is_zero() {
            return Ok(());
        }
        *self.terms.entry(latency).or_default() += count;
        Ok(())
    }

    pub fn merge(&mut self, other: &LatencySpectrum) {
        for (t, n) in &other.terms {
            *self.terms.entry(*t).or_default() += n;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &BigUint)> + '_ {
        self.terms.iter().map(|(t, n)| (*t, n))
    }

    pub fn get(&self, latency: u32) -> Option<&BigUint> {
        self.terms.get(&latency)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total(&self) -> BigUint {
        self.terms.values().sum()
    }

    pub fn max_latency(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    /// gcd of all occupied latencies, 0 for an empty spectrum.
    pub fn latency_gcd(&self) -> u64 {
        self.terms
            .keys()
            .fold(0u64, |g, &t| num_integer::gcd(g, u64::from(t)))
    }

    /// Multiply every latency by `factor`.
    pub fn dilate(&self, factor: u32) -> Result<Self> {
        if factor == 0 {
            return Err(Error::Contract("dilation factor must be >= 1".into()));
        }
        let mut out = Self::new();
        for (t, n) in &self.terms {
            let t = t
                .checked_mul(factor)
                .ok_or_else(|| Error::Contract("dilated latency overflows u32".into()))?;
            out.terms.insert(t, n.clone());
        }
        Ok(out)
    }
}

/// log2 of an arbitrary-precision integer, accurate to f64 precision.
pub fn log2_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().map(f64::log2).unwrap_or(f64::NAN)
    } else {
        let shift = bits - 64;
        let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
        top.log2() + shift as f64
    }
}

pub fn operand_domain_size(kind: OperandKind, spec: &MachineSpec) -> Result<BigUint> {
    match kind {
        OperandKind::IntReg => Ok(BigUint::from(spec.int_regs)),
        OperandKind::VecReg => Ok(BigUint::from(spec.vec_regs)),
        OperandKind::Imm(w) => {
            kind.validate()?;
            Ok(BigUint::one() << u32::from(w))
        }
        OperandKind::Mem => Err(Error::Contract(
            "memory operands are expanded per level, not as a single domain".into(),
        )),
    }
}

/// Instances of one class, grouped by latency.
pub fn class_instances(
    class: &InstructionClass,
    spec: &MachineSpec,
) -> Result<Vec<(u32, BigUint)>> {
    class.validate()?;
    let mut base = BigUint::from(class.mnemonic_count);
    for op in class.operands.iter().filter(|o| **o != OperandKind::Mem) {
        base *= operand_domain_size(*op, spec)?;
    }
    if class.mem_operands() == 0 {
        return Ok(vec![(class.base_latency, base)]);
    }
    let levels = spec.sorted_levels();
    if levels.is_empty() {
        return Err(Error::UnsupportedClass(format!(
            "`{class}` has a memory operand but the machine has no memory levels"
        )));
    }
    if spec.word_bytes == 0 {
        return Err(Error::InvalidSpec("word_bytes must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(levels.len());
    let mut prev = 0u64;
    for level in levels {
        let cells = (level.size_bytes - prev) / spec.word_bytes;
        prev = level.size_bytes;
        let latency = class
            .base_latency
            .checked_add(level.latency_cc)
            .ok_or_else(|| Error::UnsupportedClass("latency overflows u32".into()))?;
        out.push((latency, &base * BigUint::from(cells)));
    }
    Ok(out)
}

pub fn enumerate_spectrum(spec: &MachineSpec) -> Result<LatencySpectrum> {
    spec.validate()?;
    let mut spectrum = LatencySpectrum::new();
    for class in &spec.classes {
        for (t, n) in class_instances(class, spec)? {
            spectrum.add(t, n)?;
        }
    }
    Ok(spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use OperandKind::*;

    fn regs(ri: u64, rv: u64) -> MachineSpec {
        MachineSpec::new("t", ri, rv)
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn domain_sizes() {
        assert_eq!(operand_domain_size(IntReg, &regs(16, 1)).unwrap(), big(16));
        assert_eq!(operand_domain_size(Imm(1), &regs(1, 1)).unwrap(), big(2));
        assert_eq!(
            operand_domain_size(VecReg, &regs(1, 144)).unwrap(),
            big(144)
        );
        assert_eq!(
            operand_domain_size(Imm(64), &regs(1, 1)).unwrap(),
            BigUint::from(u64::MAX) + 1u32
        );
        assert!(matches!(
            operand_domain_size(Mem, &regs(1, 1)),
            Err(Error::Contract(_))
        ));
        assert!(operand_domain_size(Imm(0), &regs(1, 1)).is_err());
        assert!(operand_domain_size(Imm(65), &regs(1, 1)).is_err());
    }

    #[test]
    fn register_pair_class() {
        let c = InstructionClass::new(1, vec![IntReg, IntReg], 1).unwrap();
        assert_eq!(
            class_instances(&c, &regs(16, 1)).unwrap(),
            vec![(1, big(256))]
        );
    }

    #[test]
    fn memory_class_splits_per_level() {
        let spec = regs(8, 1)
            .with_level(MemoryLevel::new("L1", 64, 3))
            .with_level(MemoryLevel::new("RAM", 128, 70));
        let c = InstructionClass::new(1, vec![IntReg, Mem], 1).unwrap();
        assert_eq!(
            class_instances(&c, &spec).unwrap(),
            vec![(4, big(64)), (71, big(64))]
        );
    }

    #[test]
    fn mnemonic_count_multiplies() {
        let c = InstructionClass::new(53, vec![IntReg], 1).unwrap();
        assert_eq!(
            class_instances(&c, &regs(8, 8)).unwrap(),
            vec![(1, big(424))]
        );
    }

    #[test]
    fn two_memory_operands_rejected() {
        let c = InstructionClass {
            mnemonic_count: 1,
            operands: vec![Mem, Mem],
            base_latency: 1,
        };
        assert!(matches!(c.validate(), Err(Error::UnsupportedClass(_))));
        assert!(class_instances(&c, &regs(1, 1)).is_err());
    }

    #[test]
    fn memory_class_without_levels() {
        let c = InstructionClass::new(1, vec![Mem], 1).unwrap();
        assert!(class_instances(&c, &regs(1, 1)).is_err());
    }

    #[test]
    fn merges_equal_latencies() {
        let c = InstructionClass::new(1, vec![], 1).unwrap();
        let spec = regs(1, 1).with_class(c.clone()).with_class(c);
        let s = enumerate_spectrum(&spec).unwrap();
        assert_eq!(s, LatencySpectrum::from_terms([(1, 2u32)]).unwrap());

        let spec = regs(3, 2)
            .with_class(InstructionClass::new(1, vec![IntReg], 1).unwrap())
            .with_class(InstructionClass::new(1, vec![VecReg, VecReg], 2).unwrap());
        let s = enumerate_spectrum(&spec).unwrap();
        assert_eq!(
            s,
            LatencySpectrum::from_terms([(1, 3u32), (2, 4u32)]).unwrap()
        );
    }

    #[test]
    fn invalid_specs() {
        let c = InstructionClass::new(1, vec![], 1).unwrap();
        assert!(regs(1, 1).validate().is_err(), "no classes");
        let mut s = regs(1, 1).with_class(c.clone());
        s.pipeline_width = 0;
        assert!(s.validate().is_err());
        let s = regs(1, 1)
            .with_class(c.clone())
            .with_level(MemoryLevel::new("L1", 60, 3));
        assert!(s.validate().is_err(), "word size does not divide");
        let s = regs(1, 1)
            .with_class(c.clone())
            .with_level(MemoryLevel::new("L1", 64, 10))
            .with_level(MemoryLevel::new("L2", 128, 5));
        assert!(s.validate().is_err(), "latency decreases");
        let s = regs(1, 1)
            .with_class(c)
            .with_level(MemoryLevel::new("L1", 64, 1))
            .with_level(MemoryLevel::new("L1", 128, 5));
        assert!(s.validate().is_err(), "duplicate name");
    }

    #[test]
    fn zero_counts_are_dropped() {
        let s = LatencySpectrum::from_terms([(3, 0u32), (1, 1u32)]).unwrap();
        assert_eq!(s.len(), 1);
        assert!(LatencySpectrum::from_terms([(0, 1u32)]).is_err());
    }

    #[test]
    fn gcd_and_dilate() {
        let s = LatencySpectrum::from_terms([(4, 1u32), (6, 1u32)]).unwrap();
        assert_eq!(s.latency_gcd(), 2);
        assert_eq!(s.dilate(3).unwrap().latency_gcd(), 6);
    }

    #[test]
    fn log2_of_huge_integers() {
        assert_eq!(log2_big(&big(1024)), 10.0);
        let n = BigUint::one() << 5000u32;
        assert!((log2_big(&n) - 5000.0).abs() < 1e-12);
        let n3 = (BigUint::one() << 4000u32) * 3u32;
        assert!((log2_big(&n3) - (4000.0 + 3f64.log2())).abs() < 1e-9);
    }

    fn operand() -> impl Strategy<Value = OperandKind> {
        prop_oneof![Just(IntReg), Just(VecReg), (1u8..=16).prop_map(Imm)]
    }

    fn class() -> impl Strategy<Value = InstructionClass> {
        (
            1u64..200,
            prop::collection::vec(operand(), 0..3),
            any::<bool>(),
            1u32..6,
        )
            .prop_map(|(k, mut ops, mem, lat)| {
                if mem {
                    ops.push(Mem);
                }
                InstructionClass::new(k, ops, lat).unwrap()
            })
    }

    fn machine() -> impl Strategy<Value = MachineSpec> {
        (
            1u64..64,
            1u64..64,
            prop::collection::vec(class(), 1..5),
            prop::collection::btree_set(1u64..64, 1..4),
        )
            .prop_map(|(ri, rv, classes, sizes)| {
                let mut spec = regs(ri, rv);
                for (i, s) in sizes.into_iter().enumerate() {
                    spec = spec.with_level(MemoryLevel::new(
                        format!("L{i}"),
                        s * 64,
                        2 + 10 * i as u32,
                    ));
                }
                spec.classes = classes;
                spec
            })
    }

    proptest! {
        #[test]
        fn order_invariant(spec in machine(), seed in any::<u64>()) {
            let base = enumerate_spectrum(&spec).unwrap();
            let mut shuffled = spec.clone();
            let n = shuffled.classes.len();
            shuffled.classes.rotate_left((seed as usize) % n);
            shuffled.classes.reverse();
            shuffled.memory_levels.reverse();
            prop_assert_eq!(enumerate_spectrum(&shuffled).unwrap(), base);
        }

        #[test]
        fn memory_levels_partition_address_space(spec in machine()) {
            let last = spec.sorted_levels().last().unwrap().size_bytes;
            for class in spec.classes.iter().filter(|c| c.mem_operands() == 1) {
                let sum: BigUint = class_instances(class, &spec).unwrap().into_iter().map(|(_, n)| n).sum();
                let mut expect = BigUint::from(class.mnemonic_count) * BigUint::from(last / spec.word_bytes);
                for op in class.operands.iter().filter(|o| **o != Mem) {
                    expect *= operand_domain_size(*op, &spec).unwrap();
                }
                prop_assert_eq!(sum, expect);
            }
        }

        #[test]
        fn counts_monotone_in_parameters(spec in machine(), which in 0usize..4) {
            let base = enumerate_spectrum(&spec).unwrap();
            let mut grown = spec.clone();
            match which {
                0 => grown.int_regs += 3,
                1 => grown.vec_regs += 3,
                2 => grown.classes[0].mnemonic_count += 1,
                _ => {
                    let last = grown.memory_levels.iter_mut().max_by_key(|l| l.size_bytes).unwrap();
                    last.size_bytes += 64;
                }
            }
            let after = enumerate_spectrum(&grown).unwrap();
            for (t, n) in base.iter() {
                prop_assert!(after.get(t).is_some_and(|m| m >= n));
            }
        }
    }
}
