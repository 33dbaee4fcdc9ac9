//! Largest real root of the characteristic equation `sum_t n_t * Y^-t = 1`.
//!
//! Everything runs in log2 space: with `z = log2(Y)` the left side becomes
//! `2^g(z)` where `g(z) = log2 sum_t 2^(log2(n_t) - t*z)`, evaluated with a
//! log-sum-exp. `g` is strictly decreasing, so the root is unique and a
//! bisection on a provable bracket always converges.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::machine::{enumerate_spectrum, log2_big, LatencySpectrum, MachineSpec};

pub const DEFAULT_REL_TOL: f64 = 1e-12;

const MAX_BISECTIONS: usize = 2000;
const NEWTON_STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    /// log2 of the largest root: bits per cycle per issue slot.
    pub z0: f64,
    pub pipeline_width: u32,
    pub cores: u32,
    /// `pipeline_width * z0`, bits per clock cycle.
    pub capacity_per_cycle: f64,
    pub per_core_bps: Option<f64>,
    pub system_bps: Option<f64>,
    /// `|sum_t n_t * 2^(-t*z0) - 1|`.
    pub residual: f64,
}

/// Spectrum prepared for repeated evaluation: `(t, log2 n_t)`.
struct LogTerms {
    terms: Vec<(f64, f64)>,
}

impl LogTerms {
    fn new(spectrum: &LatencySpectrum) -> Self {
        LogTerms {
            terms: spectrum
                .iter()
                .map(|(t, n)| (f64::from(t), log2_big(n)))
                .collect(),
        }
    }

    /// `g(z)` and the weighted mean latency `sum_t t*w_t` (so `g'(z) = -mean`).
    fn eval(&self, z: f64) -> (f64, f64) {
        let peak = self
            .terms
            .iter()
            .map(|(t, l)| l - t * z)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        let mut tsum = 0.0;
        for (t, l) in &self.terms {
            let w = (l - t * z - peak).exp2();
            sum += w;
            tsum += t * w;
        }
        (peak + sum.log2(), tsum / sum)
    }
}

fn check_solvable(spectrum: &LatencySpectrum) -> Result<()> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let total = spectrum.total();
    if total <= BigUint::one() {
        return Err(Error::DegenerateSpectrum {
            total: total.to_string(),
        });
    }
    Ok(())
}

/// `|sum_t n_t * 2^(-t*z) - 1|`.
pub fn residual(spectrum: &LatencySpectrum, z: f64) -> f64 {
    let (g, _) = LogTerms::new(spectrum).eval(z);
    (g.exp2() - 1.0).abs()
}

/// Returns `z0 = log2(Y0)` for the largest real root `Y0`.
pub fn solve_root(spectrum: &LatencySpectrum, rel_tol: f64) -> Result<f64> {
    if !(rel_tol.is_finite() && rel_tol > 0.0) {
        return Err(Error::Contract(format!(
            "rel_tol must be positive, got {rel_tol}"
        )));
    }
    check_solvable(spectrum)?;
    let f = LogTerms::new(spectrum);

    // At `lo` the largest single term already equals 1, so g(lo) >= 0.
    // At `hi`, every 2^(-t*z) <= 2^(-z) because t >= 1 and z > 0, so g(hi) <= 0.
    let mut lo = f
        .terms
        .iter()
        .map(|(t, l)| l / t)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let mut hi = log2_big(&spectrum.total());

    if f.eval(lo).0 <= 0.0 {
        return Ok(lo);
    }
    if f.eval(hi).0 >= 0.0 {
        return Ok(hi);
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= rel_tol * lo.max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f.eval(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Newton polish on g, kept inside the final bracket.
    let mut z = 0.5 * (lo + hi);
    for _ in 0..NEWTON_STEPS {
        let (g, mean) = f.eval(z);
        if g == 0.0 {
            break;
        }
        let next = z + g / mean;
        if !(next >= lo && next <= hi) || next == z {
            break;
        }
        z = next;
    }
    Ok(z)
}

/// Per-core and system throughput in bits/s for a given per-cycle capacity.
/// The system figure is the sum over identical cores.
pub fn throughput_bps(capacity_per_cycle: f64, cores: u32, clock_hz: f64) -> (f64, f64) {
    let per_core = capacity_per_cycle * clock_hz;
    (per_core, f64::from(cores) * per_core)
}

pub fn capacity_from_spectrum(
    spectrum: &LatencySpectrum,
    pipeline_width: u32,
    cores: u32,
    clock_hz: Option<f64>,
) -> Result<CapacityResult> {
    if pipeline_width == 0 || cores == 0 {
        return Err(Error::Contract(
            "pipeline width and cores must be >= 1".into(),
        ));
    }
    if let Some(hz) = clock_hz {
        if !(hz.is_finite() && hz > 0.0) {
            return Err(Error::Contract(format!("clock must be positive, got {hz}")));
        }
    }
    let z0 = solve_root(spectrum, DEFAULT_REL_TOL)?;
    let capacity_per_cycle = f64::from(pipeline_width) * z0;
    let bps = clock_hz.map(|hz| throughput_bps(capacity_per_cycle, cores, hz));
    Ok(CapacityResult {
        z0,
        pipeline_width,
        cores,
        capacity_per_cycle,
        per_core_bps: bps.map(|b| b.0),
        system_bps: bps.map(|b| b.1),
        residual: residual(spectrum, z0),
    })
}

pub fn capacity(spec: &MachineSpec) -> Result<CapacityResult> {
    let spectrum = enumerate_spectrum(spec)?;
    capacity_from_spectrum(&spectrum, spec.pipeline_width, spec.cores, spec.clock_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{InstructionClass, OperandKind};
    use proptest::prelude::*;

    fn spectrum(terms: &[(u32, u64)]) -> LatencySpectrum {
        LatencySpectrum::from_terms(terms.iter().copied()).unwrap()
    }

    /// Plain-f64 bisection on `sum n_t * Y^-t - 1` in Y space; only usable
    /// for small spectra, but shares nothing with the log-domain path.
    fn naive_root(terms: &[(u32, u64)]) -> f64 {
        let f = |y: f64| {
            terms
                .iter()
                .map(|&(t, n)| n as f64 * y.powi(-(t as i32)))
                .sum::<f64>()
                - 1.0
        };
        let (mut lo, mut hi) = (1.0f64, terms.iter().map(|t| t.1 as f64).sum::<f64>() + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        lo.log2()
    }

    #[test]
    fn two_symbols_of_unit_time() {
        assert_eq!(
            solve_root(&spectrum(&[(1, 2)]), DEFAULT_REL_TOL).unwrap(),
            1.0
        );
    }

    #[test]
    fn golden_ratio() {
        let z = solve_root(&spectrum(&[(1, 1), (2, 1)]), DEFAULT_REL_TOL).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((z - phi.log2()).abs() < 1e-12, "{z}");
        assert!((z - 0.694242).abs() < 1e-6);
    }

    #[test]
    fn degenerate_and_empty() {
        assert_eq!(
            solve_root(&LatencySpectrum::new(), DEFAULT_REL_TOL),
            Err(Error::EmptySpectrum)
        );
        assert!(matches!(
            solve_root(&spectrum(&[(3, 1)]), DEFAULT_REL_TOL),
            Err(Error::DegenerateSpectrum { .. })
        ));
        assert!(solve_root(&spectrum(&[(1, 2)]), 0.0).is_err());
    }

    #[test]
    fn capacity_from_small_spectra() {
        let r = capacity_from_spectrum(&spectrum(&[(2, 4)]), 1, 1, None).unwrap();
        assert_eq!(r.capacity_per_cycle, 1.0);
        assert!(r.per_core_bps.is_none() && r.system_bps.is_none());

        let r = capacity_from_spectrum(&spectrum(&[(1, 2)]), 3, 2, Some(1e9)).unwrap();
        assert_eq!(r.capacity_per_cycle, 3.0);
        assert_eq!(r.per_core_bps, Some(3e9));
        assert_eq!(r.system_bps, Some(6e9));
    }

    #[test]
    fn capacity_of_machine() {
        let spec = MachineSpec::new("toy", 2, 1)
            .with_class(InstructionClass::new(1, vec![OperandKind::IntReg], 1).unwrap());
        let r = capacity(&spec).unwrap();
        assert_eq!(r.capacity_per_cycle, 1.0);
        assert!(r.system_bps.is_none());
    }

    #[test]
    fn huge_counts_and_latencies() {
        let mut s = LatencySpectrum::new();
        s.add(1, BigUint::one() << 200u32).unwrap();
        s.add(10_000, BigUint::one() << 180u32).unwrap();
        let z = solve_root(&s, DEFAULT_REL_TOL).unwrap();
        assert!((z - 200.0).abs() < 1e-9);
        assert!(residual(&s, z) < 1e-11);
    }

    #[test]
    fn agrees_with_naive_bisection() {
        for terms in [
            vec![(1, 3), (3, 5)],
            vec![(2, 7), (5, 100), (9, 1)],
            vec![(1, 1), (4, 1)],
            vec![(3, 2), (4, 2), (7, 40)],
        ] {
            let z = solve_root(&spectrum(&terms), DEFAULT_REL_TOL).unwrap();
            assert!((z - naive_root(&terms)).abs() < 1e-10, "{terms:?}");
        }
    }

    fn small_spectrum() -> impl Strategy<Value = Vec<(u32, u64)>> {
        prop::collection::btree_map(1u32..=10, 1u64..=1000, 1..=6)
            .prop_map(|m| m.into_iter().collect::<Vec<_>>())
            .prop_filter("needs total >= 2", |v| {
                v.iter().map(|t| t.1).sum::<u64>() >= 2
            })
    }

    proptest! {
        #[test]
        fn residual_is_tiny(terms in small_spectrum()) {
            let s = spectrum(&terms);
            let z = solve_root(&s, DEFAULT_REL_TOL).unwrap();
            prop_assert!(z > 0.0);
            prop_assert!(residual(&s, z) <= 10.0 * DEFAULT_REL_TOL, "residual {}", residual(&s, z));
        }

        #[test]
        fn single_term_closed_form(t in 1u32..=50, n in 2u64..=u64::MAX) {
            let z = solve_root(&spectrum(&[(t, n)]), DEFAULT_REL_TOL).unwrap();
            let exact = (n as f64).log2() / f64::from(t);
            prop_assert!((z - exact).abs() <= DEFAULT_REL_TOL * exact);
        }

        #[test]
        fn dilation_divides_root(terms in small_spectrum(), d in 1u32..=12) {
            let s = spectrum(&terms);
            let z = solve_root(&s, DEFAULT_REL_TOL).unwrap();
            let zd = solve_root(&s.dilate(d).unwrap(), DEFAULT_REL_TOL).unwrap();
            prop_assert!((zd * f64::from(d) - z).abs() <= 10.0 * DEFAULT_REL_TOL * z);
        }

        #[test]
        fn capacity_is_additive_over_cores(cores in 1u32..64, mhz in 1.0f64..5000.0) {
            let r = capacity_from_spectrum(&spectrum(&[(1, 3), (2, 9)]), 4, cores, Some(mhz * 1e6)).unwrap();
            prop_assert_eq!(r.system_bps.unwrap(), f64::from(cores) * r.per_core_bps.unwrap());
        }
    }
}
