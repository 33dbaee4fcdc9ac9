//! Acceptance criteria. Runs as a plain binary (`harness = false`) so each
//! criterion prints exactly one PASS/FAIL line on every `cargo test`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use compcap::bundled;
use compcap::machine::log2_big;
use compcap::report::{normalize, Format};
use compcap::solver::throughput_bps;
use compcap::whatif::relative_percent;
use compcap::{
    capacity_from_spectrum, enumerate_spectrum, oracle_rate, solve_root, LatencySpectrum,
    DEFAULT_REL_TOL,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spectrum(terms: &[(u32, u64)]) -> LatencySpectrum {
    LatencySpectrum::from_terms(terms.iter().copied()).unwrap()
}

/// `|sum_t n_t * Y0^-t - 1|` evaluated term by term, smallest first.
fn independent_residual(s: &LatencySpectrum, z0: f64) -> f64 {
    let mut terms: Vec<f64> = s
        .iter()
        .map(|(t, n)| (log2_big(n) - f64::from(t) * z0).exp2())
        .collect();
    terms.sort_by(f64::total_cmp);
    (terms.iter().sum::<f64>() - 1.0).abs()
}

fn random_toy(rng: &mut ChaCha8Rng) -> LatencySpectrum {
    loop {
        let k = rng.gen_range(1..=6);
        let mut s = LatencySpectrum::new();
        for _ in 0..k {
            let t = rng.gen_range(1..=10u32);
            if s.get(t).is_none() {
                s.add(t, BigUint::from(rng.gen_range(1..=1000u32))).unwrap();
            }
        }
        if s.total() >= BigUint::from(2u32) {
            return s;
        }
    }
}

fn ac1_haswell() -> Outcome {
    let start = Instant::now();
    let r = capacity_from_spectrum(
        &bundled::haswell_spectrum(),
        bundled::HASWELL_WIDTH,
        1,
        None,
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(
        (r.capacity_per_cycle - 115.86).abs() <= 0.02 && elapsed < Duration::from_secs(1),
        format!(
            "4 x z0 = {:.6} bits/c.c. (target 115.86 +/- 0.02), {:?}",
            r.capacity_per_cycle, elapsed
        ),
    )
}

fn ac2_residuals() -> Outcome {
    let mut spectra = vec![
        ("haswell".to_owned(), bundled::haswell_spectrum()),
        ("{1:2}".into(), spectrum(&[(1, 2)])),
        ("{1:1,2:1}".into(), spectrum(&[(1, 1), (2, 1)])),
        ("{2:4}".into(), spectrum(&[(2, 4)])),
        ("{1:3,3:5}".into(), spectrum(&[(1, 3), (3, 5)])),
    ];
    for m in bundled::machines() {
        spectra.push((m.name.clone(), enumerate_spectrum(&m).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..50 {
        spectra.push((format!("random #{i}"), random_toy(&mut rng)));
    }
    let mut worst = (0.0f64, String::new());
    for (name, s) in &spectra {
        let z0 = solve_root(s, DEFAULT_REL_TOL).map_err(|e| format!("{name}: {e}"))?;
        let r = independent_residual(s, z0);
        if r > worst.0 || worst.1.is_empty() {
            worst = (r, name.clone());
        }
    }
    check(
        worst.0 <= 1e-9,
        format!(
            "{} spectra, worst residual {:.2e} ({})",
            spectra.len(),
            worst.0,
            worst.1
        ),
    )
}

fn ac3_throughput() -> Outcome {
    let published: Vec<_> = bundled::benchmarks();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, tol_pct) in [
        ("Core 2 Duo T7300 (Intel Core)", 0.001),
        ("Intel Core i5-6600K (Skylake)", 0.01),
    ] {
        let sys = bundled::systems()
            .into_iter()
            .find(|s| s.name == name)
            .unwrap();
        let cap = bundled::published_capacity(&sys.microarchitecture).unwrap();
        let (_, system) = throughput_bps(cap.bits_per_cycle, sys.cores, sys.clock_mhz * 1e6);
        let target = published
            .iter()
            .find(|r| r.name == name)
            .unwrap()
            .capacity_bps;
        let err_pct = 100.0 * (system - target).abs() / target;
        ok &= err_pct <= tol_pct;
        parts.push(format!(
            "{name}: {:.3} x {} x {} MHz = {:.2} Mbit/s vs {:.2} ({:.5}% <= {tol_pct}%)",
            cap.bits_per_cycle,
            sys.cores,
            sys.clock_mhz,
            system / 1e6,
            target / 1e6,
            err_pct
        ));
    }
    check(ok, parts.join("; "))
}

fn ac4_normalization() -> Outcome {
    let series = normalize(&bundled::benchmarks()).map_err(|e| e.to_string())?;
    let row = series
        .rows
        .iter()
        .find(|r| r.name.contains("i5-6600K"))
        .ok_or("i5-6600K row missing")?;
    let cap = format!("{:.3}", row.capacity_rel);
    let bench = format!("{:.3}", row.benchmark_rel.unwrap_or(f64::NAN));
    let csv = compcap::render_table(&series, Format::Csv);
    check(
        cap == "16.336" && bench == "16.991" && csv.contains("16.336") && csv.contains("16.991"),
        format!("capacity {cap} (16.336), PassMark {bench} (16.991)"),
    )
}

fn ac5_cross_table() -> Outcome {
    let core = bundled::published_capacity("Intel Core")
        .unwrap()
        .bits_per_cycle;
    let ivy = bundled::published_capacity("Ivy Bridge")
        .unwrap()
        .bits_per_cycle;
    let pct = relative_percent(core, ivy);
    check(
        (pct - 153.16).abs() <= 0.01,
        format!("100 x {ivy} / {core} = {pct:.4}% (153.16 +/- 0.01)"),
    )
}

fn ac6_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = (0.0f64, String::new());
    let mut misses = 0;
    let n = 24;
    for _ in 0..n {
        let s = random_toy(&mut rng);
        let d = s.latency_gcd();
        let rate = oracle_rate(&s, 500 * d).map_err(|e| e.to_string())?;
        let z0 = solve_root(&s, DEFAULT_REL_TOL).map_err(|e| e.to_string())?;
        let diff = (rate - z0).abs();
        if diff > 1e-6 {
            misses += 1;
        }
        if diff >= worst.0 {
            let terms: Vec<String> = s.iter().map(|(t, c)| format!("{t}:{c}")).collect();
            worst = (diff, format!("{{{}}}", terms.join(", ")));
        }
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let fib = oracle_rate(&spectrum(&[(1, 1), (2, 1)]), 200).map_err(|e| e.to_string())?;
    let fib_err = (fib - phi.log2()).abs();
    let elapsed = start.elapsed();
    check(
        misses == 0 && fib_err <= 1e-9 && elapsed < Duration::from_secs(30),
        format!(
            "{misses}/{n} random toys off by more than 1e-6, worst |oracle - solver| = {:.2e} at {}; golden ratio error {fib_err:.2e}; {elapsed:?}",
            worst.0, worst.1
        ),
    )
}

fn ac7_closed_forms() -> Outcome {
    let tol = DEFAULT_REL_TOL;
    let mut cases = 0;
    for t in 1..=8u32 {
        for n in [2u64, 3, 7, 10, 255, 1000, 4096, 65537, 999_983, 1_000_000] {
            let z = solve_root(&spectrum(&[(t, n)]), tol).map_err(|e| e.to_string())?;
            let exact = (n as f64).log2() / f64::from(t);
            if (z - exact).abs() > tol * exact {
                return Err(format!("{{{t}:{n}}}: {z} vs {exact}"));
            }
            cases += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let s = random_toy(&mut rng);
        let z = solve_root(&s, tol).unwrap();
        let d = rng.gen_range(2..=8u32);
        let zd = solve_root(&s.dilate(d).unwrap(), tol).unwrap();
        if (zd * f64::from(d) - z).abs() > 10.0 * tol * z {
            return Err(format!("dilation by {d} of {s:?}: {zd} x {d} vs {z}"));
        }
    }

    // Dominated pairs: B adds instructions to A. A strict increase is
    // required whenever the added mass at A's root is above double-precision
    // resolution; otherwise z0 must not decrease.
    let mut strict = 0;
    for _ in 0..100 {
        let a = random_toy(&mut rng);
        let mut b = a.clone();
        let t = rng.gen_range(1..=10u32);
        let extra = rng.gen_range(1..=1000u32);
        b.add(t, BigUint::from(extra)).unwrap();
        let za = solve_root(&a, tol).unwrap();
        let zb = solve_root(&b, tol).unwrap();
        let mass = f64::from(extra) * (-f64::from(t) * za).exp2();
        if mass >= 1e-9 {
            strict += 1;
            if zb <= za {
                return Err(format!("{b:?} dominates {a:?} but {zb} <= {za}"));
            }
        } else if zb < za * (1.0 - tol) {
            return Err(format!("{b:?} dominates {a:?} but {zb} < {za}"));
        }
    }
    Ok(format!(
        "{cases} single-term cases exact, 50 dilations, 100 dominated pairs ({strict} strictly resolvable)"
    ))
}

fn ac8_sweep_shape() -> Outcome {
    let machine = concat!(env!("CARGO_MANIFEST_DIR"), "/data/pentium_m_toy.machine");
    let out = Command::new(env!("CARGO_BIN_EXE_compcap"))
        .args(["sweep", machine, "--format", "csv"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let tables: Vec<Vec<Vec<String>>> = text
        .split("\n\n")
        .map(|block| {
            csv::Reader::from_reader(block.as_bytes())
                .into_records()
                .map(|r| r.unwrap().iter().map(str::to_owned).collect())
                .collect::<Vec<Vec<String>>>()
        })
        .collect();
    let headers: Vec<String> = text
        .split("\n\n")
        .map(|b| b.lines().next().unwrap_or("").to_owned())
        .collect();
    let want = [
        "parameter,0.5,2,5,10,20",
        "parameter,1.1,1.25,1.5,2",
        "parameter,8,16,32,64",
    ];
    if headers != want {
        return Err(format!("table headers {headers:?}"));
    }
    let all_100 = |row: &Vec<String>| row[1..].iter().all(|c| c == "100.000");
    let first = &tables[0][0];
    let memory = ["L1", "L2", "M", "L1_t", "L2_t", "M_t"];
    let labels: Vec<&str> = first[0].split(", ").collect();
    if labels[0] != "identity" || !memory.iter().all(|m| labels.contains(m)) || !all_100(first) {
        return Err(format!("first row {first:?}"));
    }
    let step3_rows: Vec<&str> = tables[2].iter().map(|r| r[0].as_str()).collect();
    for f in ["x2", "x5", "x10"] {
        if !step3_rows.iter().any(|r| r.contains(f)) {
            return Err(format!("no register {f} row in {step3_rows:?}"));
        }
    }
    let registers_move = tables[0][1..].iter().all(|r| !all_100(r));
    check(
        registers_move && tables[1].len() >= 2,
        format!(
            "3 tables with grids x0.5..x20 / x1.1..x2 / +8..+64 at x2,x5,x10; identity row merged with {} unused memory parameters at 100",
            memory.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1 Haswell capacity", ac1_haswell),
        ("AC2 solver residual", ac2_residuals),
        ("AC3 system throughput", ac3_throughput),
        ("AC4 normalization", ac4_normalization),
        ("AC5 cross-table ratio", ac5_cross_table),
        ("AC6 oracle equivalence", ac6_oracle),
        ("AC7 closed forms", ac7_closed_forms),
        ("AC8 sweep protocol shape", ac8_sweep_shape),
    ];
    let mut failed = 0;
    println!();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "N/A   AC9 exact per-processor sweep percentages and non-Haswell capacities: need full vendor instruction tables; covered by the property suites"
    );
    println!();
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
