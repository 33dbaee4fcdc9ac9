use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use compcap::format::{
    parse_candidates, parse_machine, parse_spectrum, parse_sweep_config, render_spectrum,
};
use compcap::oracle::{dp_task_count, rate_from_table};
use compcap::report::{
    emit_plot_data, parse_benchmark_csv, render_table, sweep_table, Format, NamedCapacity,
    TextTable,
};
use compcap::{
    capacity_from_spectrum, enumerate_spectrum, evolution_rank, normalize, solve_root, Error,
    LatencySpectrum, MachineSpec, SweepConfig, DEFAULT_REL_TOL,
};

#[derive(Parser)]
#[command(name = "compcap", version, about = "Computer capacity of processors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the characteristic equation of a machine or spectrum file
    Solve {
        /// `.machine` description or `.spectrum` coefficient list
        file: PathBuf,
        /// Pipeline width (overrides the machine file; default 1 for spectra)
        #[arg(long)]
        width: Option<u32>,
        #[arg(long)]
        cores: Option<u32>,
        #[arg(long)]
        clock_mhz: Option<f64>,
        #[arg(long, default_value = "markdown")]
        format: Format,
    },
    /// Print the latency spectrum a machine description expands to
    Spectrum { machine: PathBuf },
    /// Run what-if sweeps (defaults to the full three-step protocol)
    Sweep {
        machine: PathBuf,
        config: Option<PathBuf>,
        #[arg(long, default_value = "markdown")]
        format: Format,
        /// Decimals for percentages
        #[arg(long, default_value_t = compcap::report::PERCENT_DECIMALS)]
        decimals: usize,
    },
    /// Compare the solver against exact sequence counting
    Oracle {
        spectrum: PathBuf,
        #[arg(long)]
        t_max: u64,
        #[arg(long, default_value = "markdown")]
        format: Format,
    },
    /// Normalize published capacities and benchmark scores to the first row
    Compare {
        benchmarks: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: Format,
        /// Emit x/y plot data instead of the table
        #[arg(long)]
        plot: bool,
    },
    /// Rank candidate modifications by capacity gain
    Evolve {
        machine: PathBuf,
        candidates: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: Format,
    },
}

#[derive(Debug)]
struct CliError(String);

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> compcap::Result<T>) -> Result<T, CliError> {
    let text = read(path)?;
    parse(&text).map_err(|e| e.in_file(&path.display().to_string()).into())
}

fn looks_like_machine(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with('['))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Solve {
            file,
            width,
            cores,
            clock_mhz,
            format,
        } => {
            let text = read(&file)?;
            let fname = file.display().to_string();
            let (name, spectrum, w, c, hz) = if looks_like_machine(&text) {
                let spec: MachineSpec = parse_machine(&text).map_err(|e| e.in_file(&fname))?;
                let spectrum = enumerate_spectrum(&spec)?;
                (
                    spec.name,
                    spectrum,
                    spec.pipeline_width,
                    spec.cores,
                    spec.clock_hz,
                )
            } else {
                let spectrum = parse_spectrum(&text).map_err(|e| e.in_file(&fname))?;
                (file_stem(&file), spectrum, 1, 1, None)
            };
            let result = capacity_from_spectrum(
                &spectrum,
                width.unwrap_or(w),
                cores.unwrap_or(c),
                clock_mhz.map(|m| m * 1e6).or(hz),
            )?;
            Ok(render_table(&NamedCapacity { name, result }, format))
        }
        Command::Spectrum { machine } => {
            let spec = load(&machine, parse_machine)?;
            Ok(render_spectrum(&enumerate_spectrum(&spec)?))
        }
        Command::Sweep {
            machine,
            config,
            format,
            decimals,
        } => {
            let spec = load(&machine, parse_machine)?;
            let config = match config {
                Some(path) => load(&path, |t| parse_sweep_config(t, &spec))?,
                None => SweepConfig::protocol_defaults(&spec),
            };
            let reports = compcap::whatif::run_sweeps(&spec, &config)?;
            let mut out = String::new();
            for (i, r) in reports.iter().enumerate() {
                let table = sweep_table(r, decimals);
                match format {
                    Format::Markdown => {
                        if i > 0 {
                            out.push('\n');
                        }
                        out.push_str(&table.to_markdown());
                    }
                    Format::Csv => {
                        // One CSV block per table, separated by a blank line.
                        if i > 0 {
                            out.push('\n');
                        }
                        out.push_str(&table.to_csv());
                    }
                }
            }
            Ok(out)
        }
        Command::Oracle {
            spectrum,
            t_max,
            format,
        } => {
            let spectrum: LatencySpectrum = load(&spectrum, parse_spectrum)?;
            let d = spectrum.latency_gcd();
            if t_max < 2 * d {
                return Err(CliError(format!("--t-max must be at least {}", 2 * d)));
            }
            let z0 = solve_root(&spectrum, DEFAULT_REL_TOL)?;
            let table = dp_task_count(&spectrum, t_max);
            let t = (t_max - d) / d * d;
            let rate = rate_from_table(&table, t)?;
            let direct = table.log_rate(t).unwrap_or(f64::NAN);
            let mut out = TextTable::new(
                [
                    "T",
                    "gcd",
                    "solver z0",
                    "oracle ratio",
                    "|diff|",
                    "log2 N(T) / T",
                ]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            );
            out.rows.push(vec![
                t.to_string(),
                d.to_string(),
                format!("{z0:.12}"),
                format!("{rate:.12}"),
                format!("{:.3e}", (rate - z0).abs()),
                format!("{direct:.12}"),
            ]);
            Ok(out.render(format))
        }
        Command::Compare {
            benchmarks,
            format,
            plot,
        } => {
            let rows = load(&benchmarks, parse_benchmark_csv)?;
            let series = normalize(&rows)?;
            Ok(if plot {
                emit_plot_data(&series)
            } else {
                render_table(&series, format)
            })
        }
        Command::Evolve {
            machine,
            candidates,
            format,
        } => {
            let spec = load(&machine, parse_machine)?;
            let candidates = load(&candidates, parse_candidates)?;
            let ranked = evolution_rank(&spec, &candidates)?;
            Ok(render_table(ranked.as_slice(), format))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(CliError(msg)) => {
            eprintln!("compcap: {msg}");
            ExitCode::FAILURE
        }
    }
}
