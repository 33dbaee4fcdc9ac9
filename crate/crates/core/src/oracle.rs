//! Exact count of instruction sequences by total duration.
//!
//! `N(0) = 1` and `N(T) = sum_t n_t * N(T - t)`. The growth rate of `N`
//! is the capacity the solver computes analytically, so this module is an
//! independent check on it.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::machine::{log2_big, LatencySpectrum};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskCountTable {
    /// `counts[T] = N(T)` for `T = 0..=t_max`.
    pub counts: Vec<BigUint>,
    pub spectrum: LatencySpectrum,
}

impl TaskCountTable {
    pub fn t_max(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    pub fn get(&self, t: u64) -> Option<&BigUint> {
        self.counts.get(usize::try_from(t).ok()?)
    }

    /// `log2(N(T)) / T`, the direct (slowly converging) estimate.
    pub fn log_rate(&self, t: u64) -> Option<f64> {
        let n = self.get(t)?;
        if t == 0 || n.is_zero() {
            return None;
        }
        Some(log2_big(n) / t as f64)
    }
}

pub fn dp_task_count(spectrum: &LatencySpectrum, t_max: u64) -> TaskCountTable {
    let len = usize::try_from(t_max).expect("t_max fits in memory") + 1;
    let terms: Vec<(usize, &BigUint)> = spectrum.iter().map(|(t, n)| (t as usize, n)).collect();
    let mut counts: Vec<BigUint> = Vec::with_capacity(len);
    counts.push(BigUint::one());
    for t in 1..len {
        let mut acc = BigUint::zero();
        for &(lat, n) in &terms {
            if lat <= t {
                let prev = &counts[t - lat];
                if !prev.is_zero() {
                    acc += n * prev;
                }
            }
        }
        counts.push(acc);
    }
    TaskCountTable {
        counts,
        spectrum: spectrum.clone(),
    }
}

/// `log2(a / b)` for exact positive integers, without converting either to f64
/// at full size.
fn log2_ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = a.bits().min(b.bits()).saturating_sub(900);
    let (a, b) = (a >> shift, b >> shift);
    if a.bits() > 1000 || b.bits() > 1000 {
        return log2_big(&a) - log2_big(&b);
    }
    let (fa, fb) = (
        a.to_f64().unwrap_or(f64::NAN),
        b.to_f64().unwrap_or(f64::NAN),
    );
    (fa / fb).log2()
}

/// Growth estimate `(1/d) * log2(N(T+d) / N(T))` where `d` is the gcd of
/// occupied latencies.
pub fn oracle_rate(spectrum: &LatencySpectrum, t: u64) -> Result<f64> {
    if t == 0 {
        return Err(Error::Contract("T must be positive".into()));
    }
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let d = spectrum.latency_gcd();
    let table = dp_task_count(spectrum, t + d);
    rate_from_table(&table, t)
}

/// Same estimate on an existing table; `T + d` must be within the table.
pub fn rate_from_table(table: &TaskCountTable, t: u64) -> Result<f64> {
    let d = table.spectrum.latency_gcd();
    let (Some(now), Some(next)) = (table.get(t), table.get(t + d)) else {
        return Err(Error::Contract(format!(
            "table only reaches T = {}",
            table.t_max()
        )));
    };
    if now.is_zero() || next.is_zero() {
        return Err(Error::PeriodMisaligned { t, gcd: d });
    }
    Ok(log2_ratio(next, now) / d as f64)
}
