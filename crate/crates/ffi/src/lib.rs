//! C ABI over `compcap`.
//!
//! Machines and spectra are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns a
//! [`CompcapStatus`]; on failure the message is available from
//! [`compcap_last_error`] on the same thread. Strings returned through `out`
//! parameters are allocated here and must be released with
//! [`compcap_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use compcap::format::{
    parse_candidates, parse_machine, parse_spectrum, parse_sweep_config, render_machine,
};
use compcap::report::{emit_plot_data, parse_benchmark_csv, render_table, sweep_table, Format};
use compcap::whatif::{parse_modification, run_sweeps};
use compcap::{
    apply_modification, capacity, capacity_from_spectrum, enumerate_spectrum, evolution_rank,
    normalize, oracle_rate, solve_root, CapacityResult, Error, LatencySpectrum, MachineSpec,
    SweepConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompcapStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidMachine = 4,
    UnsupportedClass = 5,
    DegenerateSpectrum = 6,
    PeriodMisaligned = 7,
    InvalidArgument = 8,
    Panic = 255,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompcapFormat {
    Markdown = 0,
    Csv = 1,
}

impl From<CompcapFormat> for Format {
    fn from(f: CompcapFormat) -> Self {
        match f {
            CompcapFormat::Markdown => Format::Markdown,
            CompcapFormat::Csv => Format::Csv,
        }
    }
}

/// Opaque machine description.
pub struct CompcapMachine(MachineSpec);

/// Opaque latency spectrum.
pub struct CompcapSpectrum(LatencySpectrum);

/// Solved capacity. The throughput fields are meaningful only when
/// `has_throughput` is set, i.e. a clock was known.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompcapCapacity {
    pub z0: f64,
    pub capacity_per_cycle: f64,
    pub pipeline_width: u32,
    pub cores: u32,
    pub has_throughput: bool,
    pub per_core_bps: f64,
    pub system_bps: f64,
    pub residual: f64,
}

impl From<&CapacityResult> for CompcapCapacity {
    fn from(r: &CapacityResult) -> Self {
        CompcapCapacity {
            z0: r.z0,
            capacity_per_cycle: r.capacity_per_cycle,
            pipeline_width: r.pipeline_width,
            cores: r.cores,
            has_throughput: r.system_bps.is_some(),
            per_core_bps: r.per_core_bps.unwrap_or(0.0),
            system_bps: r.system_bps.unwrap_or(0.0),
            residual: r.residual,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CompcapStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } => CompcapStatus::Parse,
            Error::InvalidSpec(_) | Error::UnknownLevel(_) | Error::NoMatchingClass(_) => {
                CompcapStatus::InvalidMachine
            }
            Error::UnsupportedClass(_) => CompcapStatus::UnsupportedClass,
            Error::EmptySpectrum | Error::DegenerateSpectrum { .. } => {
                CompcapStatus::DegenerateSpectrum
            }
            Error::PeriodMisaligned { .. } => CompcapStatus::PeriodMisaligned,
            Error::Contract(_) | Error::InvalidFactor(_) | Error::Normalization(_) => {
                CompcapStatus::InvalidArgument
            }
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CompcapStatus::NullArgument, format!("`{what}` is null"))
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CompcapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CompcapStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CompcapStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CompcapStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn compcap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn compcap_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a machine file.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_machine_parse(
    text: *const c_char,
    out: *mut *mut CompcapMachine,
) -> CompcapStatus {
    guard(|| {
        let spec = parse_machine(str_arg(text, "text")?)?;
        write_out(out, Box::into_raw(Box::new(CompcapMachine(spec))), "out")
    })
}

/// # Safety
/// `machine` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn compcap_machine_free(machine: *mut CompcapMachine) {
    if !machine.is_null() {
        drop(Box::from_raw(machine));
    }
}

/// Render a machine back to the machine-file format.
///
/// # Safety
/// `machine` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_machine_render(
    machine: *const CompcapMachine,
    out: *mut *mut c_char,
) -> CompcapStatus {
    guard(|| {
        let m = ref_arg(machine, "machine")?;
        write_out(out, into_c_string(render_machine(&m.0)), "out")
    })
}

/// Apply one modification (candidate-file syntax, e.g. `scale_int_regs 2`)
/// and return a new machine. The input handle is unchanged.
///
/// # Safety
/// `machine` must be a live handle, `modification` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_machine_apply(
    machine: *const CompcapMachine,
    modification: *const c_char,
    out: *mut *mut CompcapMachine,
) -> CompcapStatus {
    guard(|| {
        let m = ref_arg(machine, "machine")?;
        let modification = parse_modification(str_arg(modification, "modification")?)?;
        let next = apply_modification(&m.0, &modification)?;
        write_out(out, Box::into_raw(Box::new(CompcapMachine(next))), "out")
    })
}

/// # Safety
/// `machine` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_machine_spectrum(
    machine: *const CompcapMachine,
    out: *mut *mut CompcapSpectrum,
) -> CompcapStatus {
    guard(|| {
        let m = ref_arg(machine, "machine")?;
        let s = enumerate_spectrum(&m.0)?;
        write_out(out, Box::into_raw(Box::new(CompcapSpectrum(s))), "out")
    })
}

/// # Safety
/// `machine` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_machine_capacity(
    machine: *const CompcapMachine,
    out: *mut CompcapCapacity,
) -> CompcapStatus {
    guard(|| {
        let m = ref_arg(machine, "machine")?;
        write_out(out, (&capacity(&m.0)?).into(), "out")
    })
}

/// An empty spectrum, to be filled with `compcap_spectrum_add*`.
#[no_mangle]
pub extern "C" fn compcap_spectrum_new() -> *mut CompcapSpectrum {
    Box::into_raw(Box::new(CompcapSpectrum(LatencySpectrum::new())))
}

/// Parse a spectrum file (`LATENCY COUNT` per line).
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_spectrum_parse(
    text: *const c_char,
    out: *mut *mut CompcapSpectrum,
) -> CompcapStatus {
    guard(|| {
        let s = parse_spectrum(str_arg(text, "text")?)?;
        write_out(out, Box::into_raw(Box::new(CompcapSpectrum(s))), "out")
    })
}

/// # Safety
/// `spectrum` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn compcap_spectrum_free(spectrum: *mut CompcapSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Add `count` instructions of the given latency (merging with existing terms).
///
/// # Safety
/// `spectrum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn compcap_spectrum_add(
    spectrum: *mut CompcapSpectrum,
    latency: u32,
    count: u64,
) -> CompcapStatus {
    guard(|| {
        let s = spectrum.as_mut().ok_or_else(|| null("spectrum"))?;
        Ok(s.0.add(latency, count.into())?)
    })
}

/// Like `compcap_spectrum_add` with the count as a decimal string of any size.
///
/// # Safety
/// `spectrum` must be a live handle; `count` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn compcap_spectrum_add_decimal(
    spectrum: *mut CompcapSpectrum,
    latency: u32,
    count: *const c_char,
) -> CompcapStatus {
    guard(|| {
        let s = spectrum.as_mut().ok_or_else(|| null("spectrum"))?;
        let text = str_arg(count, "count")?;
        let n = text.trim().parse().map_err(|_| {
            Failure(
                CompcapStatus::InvalidArgument,
                format!("`{text}` is not a non-negative integer"),
            )
        })?;
        Ok(s.0.add(latency, n)?)
    })
}

/// Number of distinct latencies, 0 for NULL.
///
/// # Safety
/// `spectrum` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn compcap_spectrum_len(spectrum: *const CompcapSpectrum) -> usize {
    spectrum.as_ref().map_or(0, |s| s.0.len())
}

/// `log2` of the largest root of the characteristic equation.
///
/// # Safety
/// `spectrum` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_solve_root(
    spectrum: *const CompcapSpectrum,
    rel_tol: f64,
    out: *mut f64,
) -> CompcapStatus {
    guard(|| {
        let s = ref_arg(spectrum, "spectrum")?;
        write_out(out, solve_root(&s.0, rel_tol)?, "out")
    })
}

/// Capacity of a spectrum at the given width and core count. A clock
/// `<= 0` means unknown and leaves the throughput fields unset.
///
/// # Safety
/// `spectrum` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_capacity_from_spectrum(
    spectrum: *const CompcapSpectrum,
    pipeline_width: u32,
    cores: u32,
    clock_hz: f64,
    out: *mut CompcapCapacity,
) -> CompcapStatus {
    guard(|| {
        let s = ref_arg(spectrum, "spectrum")?;
        let clock = (clock_hz > 0.0).then_some(clock_hz);
        let r = capacity_from_spectrum(&s.0, pipeline_width, cores, clock)?;
        write_out(out, (&r).into(), "out")
    })
}

/// Growth rate of exact sequence counts at duration `t`.
///
/// # Safety
/// `spectrum` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_oracle_rate(
    spectrum: *const CompcapSpectrum,
    t: u64,
    out: *mut f64,
) -> CompcapStatus {
    guard(|| {
        let s = ref_arg(spectrum, "spectrum")?;
        write_out(out, oracle_rate(&s.0, t)?, "out")
    })
}

/// Run sweeps and render every table. `config` may be NULL for the default
/// protocol.
///
/// # Safety
/// `machine` must be a live handle; `config` NULL or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_sweep(
    machine: *const CompcapMachine,
    config: *const c_char,
    format: CompcapFormat,
    out: *mut *mut c_char,
) -> CompcapStatus {
    guard(|| {
        let m = ref_arg(machine, "machine")?;
        let config = if config.is_null() {
            SweepConfig::protocol_defaults(&m.0)
        } else {
            parse_sweep_config(str_arg(config, "config")?, &m.0)?
        };
        let text = run_sweeps(&m.0, &config)?
            .iter()
            .map(|r| sweep_table(r, compcap::report::PERCENT_DECIMALS).render(format.into()))
            .collect::<Vec<_>>()
            .join("\n");
        write_out(out, into_c_string(text), "out")
    })
}

/// Rank candidates (candidate-file text) and render the ranking.
///
/// # Safety
/// `machine` must be a live handle; `candidates` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_evolve(
    machine: *const CompcapMachine,
    candidates: *const c_char,
    format: CompcapFormat,
    out: *mut *mut c_char,
) -> CompcapStatus {
    guard(|| {
        let m = ref_arg(machine, "machine")?;
        let candidates = parse_candidates(str_arg(candidates, "candidates")?)?;
        let ranked = evolution_rank(&m.0, &candidates)?;
        write_out(
            out,
            into_c_string(render_table(ranked.as_slice(), format.into())),
            "out",
        )
    })
}

/// Normalize a benchmark CSV (`name,passmark,capacity_mbps`) to its first
/// row. With `plot` set, emits x/y plot data instead of the table.
///
/// # Safety
/// `csv_text` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn compcap_compare(
    csv_text: *const c_char,
    plot: bool,
    format: CompcapFormat,
    out: *mut *mut c_char,
) -> CompcapStatus {
    guard(|| {
        let rows = parse_benchmark_csv(str_arg(csv_text, "csv_text")?)?;
        let series = normalize(&rows)?;
        let text = if plot {
            emit_plot_data(&series)
        } else {
            render_table(&series, format.into())
        };
        write_out(out, into_c_string(text), "out")
    })
}
