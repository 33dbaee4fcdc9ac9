//! Text rendering (markdown and CSV) and benchmark comparison series.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::solver::CapacityResult;
use crate::whatif::{Cell, RankedCandidate, SweepReport};

pub const CAPACITY_DECIMALS: usize = 3;
pub const PERCENT_DECIMALS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Contract(format!("unknown format `{other}`"))),
        }
    }
}

/// A header plus string cells, rendered as markdown or CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextTable {
    pub title: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl TextTable {
    pub fn new(header: Vec<String>) -> Self {
        TextTable {
            title: None,
            header,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn to_markdown(&self) -> String {
        let ncol = self.header.len();
        let mut widths: Vec<usize> = self
            .header
            .iter()
            .map(|h| h.chars().count().max(3))
            .collect();
        for row in &self.rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::from("|");
            for (i, w) in widths.iter().enumerate() {
                let c = cells.get(i).map(String::as_str).unwrap_or("");
                let pad = w - c.chars().count();
                // labels left, numbers right
                if i == 0 {
                    let _ = write!(s, " {c}{} |", " ".repeat(pad));
                } else {
                    let _ = write!(s, " {}{c} |", " ".repeat(pad));
                }
            }
            s.push('\n');
            s
        };
        let mut out = String::new();
        if let Some(t) = &self.title {
            let _ = writeln!(out, "### {t}\n");
        }
        out.push_str(&line(&self.header));
        out.push('|');
        for (i, w) in widths.iter().enumerate().take(ncol) {
            if i == 0 {
                let _ = write!(out, " {} |", "-".repeat(*w));
            } else {
                let _ = write!(out, " {}: |", "-".repeat(w - 1));
            }
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
        }
        for note in &self.notes {
            let _ = writeln!(out, "\n{note}");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // Writing to a Vec cannot fail.
        w.write_record(&self.header).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 input")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Markdown => self.to_markdown(),
            Format::Csv => self.to_csv(),
        }
    }
}

pub trait Tabular {
    fn to_table(&self) -> TextTable;
}

pub fn render_table<T: Tabular + ?Sized>(item: &T, format: Format) -> String {
    item.to_table().render(format)
}

fn fixed(x: f64, decimals: usize) -> String {
    format!("{x:.decimals$}")
}

pub fn sweep_table(report: &SweepReport, decimals: usize) -> TextTable {
    let mut header = vec!["parameter".to_owned()];
    header.extend(report.columns.iter().cloned());
    let mut table = TextTable::new(header);
    table.title = Some(format!(
        "{} (baseline {} bits/c.c. = 100)",
        report.title,
        fixed(report.baseline_capacity, CAPACITY_DECIMALS)
    ));
    for row in &report.rows {
        let mut cells = vec![row.label.clone()];
        for (col, cell) in report.columns.iter().zip(&row.cells) {
            match cell {
                Cell::Percent(p) => cells.push(fixed(*p, decimals)),
                Cell::Failed(msg) => {
                    cells.push("ERROR".to_owned());
                    table.notes.push(format!("{} @ {col}: {msg}", row.label));
                }
            }
        }
        table.rows.push(cells);
    }
    table
}

impl Tabular for SweepReport {
    fn to_table(&self) -> TextTable {
        sweep_table(self, PERCENT_DECIMALS)
    }
}

/// A capacity result with the name of the machine it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedCapacity {
    pub name: String,
    pub result: CapacityResult,
}

impl Tabular for [NamedCapacity] {
    fn to_table(&self) -> TextTable {
        let header = [
            "machine",
            "z0 (bits/c.c./slot)",
            "width",
            "capacity (bits/c.c.)",
            "cores",
            "per core (Mbit/s)",
            "system (Mbit/s)",
            "residual",
        ];
        let mut table = TextTable::new(header.iter().map(|s| s.to_string()).collect());
        let mbps = |b: Option<f64>| b.map_or_else(String::new, |v| fixed(v / 1e6, 2));
        for n in self {
            let r = &n.result;
            table.rows.push(vec![
                n.name.clone(),
                fixed(r.z0, 6),
                r.pipeline_width.to_string(),
                fixed(r.capacity_per_cycle, CAPACITY_DECIMALS),
                r.cores.to_string(),
                mbps(r.per_core_bps),
                mbps(r.system_bps),
                format!("{:.1e}", r.residual),
            ]);
        }
        table
    }
}

impl Tabular for NamedCapacity {
    fn to_table(&self) -> TextTable {
        std::slice::from_ref(self).to_table()
    }
}

impl Tabular for [RankedCandidate] {
    fn to_table(&self) -> TextTable {
        let header = ["rank", "candidate", "percent", "saturated"];
        let mut table = TextTable::new(header.iter().map(|s| s.to_string()).collect());
        for (i, r) in self.iter().enumerate() {
            let (pct, note) = match &r.result {
                Cell::Percent(p) => (fixed(*p, PERCENT_DECIMALS), None),
                Cell::Failed(msg) => ("ERROR".to_owned(), Some(msg)),
            };
            if let Some(msg) = note {
                table.notes.push(format!("{}: {msg}", r.candidate.label));
            }
            table.rows.push(vec![
                (i + 1).to_string(),
                r.candidate.label.clone(),
                pct,
                if r.saturated { "yes" } else { "no" }.to_owned(),
            ]);
        }
        table
    }
}

/// One processor with a published capacity and optional benchmark score.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub name: String,
    pub benchmark_score: Option<f64>,
    pub capacity_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedRow {
    pub name: String,
    pub benchmark_rel: Option<f64>,
    pub capacity_rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    pub rows: Vec<NormalizedRow>,
}

impl NormalizedSeries {
    /// The series as comparison rows whose values are the relative figures.
    pub fn as_rows(&self) -> Vec<ComparisonRow> {
        self.rows
            .iter()
            .map(|r| ComparisonRow {
                name: r.name.clone(),
                benchmark_score: r.benchmark_rel,
                capacity_bps: r.capacity_rel,
            })
            .collect()
    }

    pub fn has_benchmark(&self) -> bool {
        self.rows.iter().any(|r| r.benchmark_rel.is_some())
    }
}

/// Divide every row by the first one.
pub fn normalize(rows: &[ComparisonRow]) -> Result<NormalizedSeries> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Normalization("no rows".into()))?;
    for r in rows {
        if !(r.capacity_bps.is_finite() && r.capacity_bps > 0.0) {
            return Err(Error::Normalization(format!(
                "capacity of {} must be positive",
                r.name
            )));
        }
    }
    let bench_base = match first.benchmark_score {
        Some(b) if b.is_finite() && b > 0.0 => Some(b),
        Some(b) => {
            return Err(Error::Normalization(format!(
                "benchmark of {} must be positive, got {b}",
                first.name
            )))
        }
        None if rows.iter().any(|r| r.benchmark_score.is_some()) => {
            return Err(Error::Normalization(format!(
                "{} has no benchmark score to normalize against",
                first.name
            )))
        }
        None => None,
    };
    Ok(NormalizedSeries {
        rows: rows
            .iter()
            .map(|r| NormalizedRow {
                name: r.name.clone(),
                benchmark_rel: r.benchmark_score.zip(bench_base).map(|(b, base)| b / base),
                capacity_rel: r.capacity_bps / first.capacity_bps,
            })
            .collect(),
    })
}

fn opt_fixed(x: Option<f64>, decimals: usize) -> String {
    x.map_or_else(String::new, |v| fixed(v, decimals))
}

impl Tabular for NormalizedSeries {
    fn to_table(&self) -> TextTable {
        let header = ["name", "benchmark_rel", "capacity_rel"];
        let mut table = TextTable::new(header.iter().map(|s| s.to_string()).collect());
        for r in &self.rows {
            table.rows.push(vec![
                r.name.clone(),
                opt_fixed(r.benchmark_rel, 3),
                fixed(r.capacity_rel, 3),
            ]);
        }
        table
    }
}

/// x/y data for plotting: x is the 1-based row index.
pub fn emit_plot_data(series: &NormalizedSeries) -> String {
    let with_bench = series.has_benchmark();
    let header: Vec<String> = if with_bench {
        vec!["x".into(), "capacity_rel".into(), "benchmark_rel".into()]
    } else {
        vec!["x".into(), "capacity_rel".into()]
    };
    let mut table = TextTable::new(header);
    for (i, r) in series.rows.iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), fixed(r.capacity_rel, 3)];
        if with_bench {
            row.push(opt_fixed(r.benchmark_rel, 3));
        }
        table.rows.push(row);
    }
    table.to_csv()
}

/// Read `name,passmark,capacity_mbps` rows. The benchmark column may be
/// empty; capacities are Mbit/s in the file and bits/s in memory.
pub fn parse_benchmark_csv(text: &str) -> Result<Vec<ComparisonRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(ni), Some(bi), Some(ci)) = (col("name"), col("passmark"), col("capacity_mbps"))
    else {
        return Err(Error::parse(
            1,
            "header must contain name, passmark, capacity_mbps",
        ));
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let number = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line, format!("bad {what} `{s}`")))
        };
        let bench = match field(bi) {
            "" => None,
            s => Some(number(s, "passmark")?),
        };
        let mbps = number(field(ci), "capacity")?;
        if mbps <= 0.0 {
            return Err(Error::parse(line, "capacity must be positive"));
        }
        rows.push(ComparisonRow {
            name: field(ni).to_owned(),
            benchmark_score: bench,
            capacity_bps: mbps * 1e6,
        });
    }
    Ok(rows)
}

pub fn write_benchmark_csv(rows: &[ComparisonRow]) -> String {
    let mut table = TextTable::new(vec![
        "name".into(),
        "passmark".into(),
        "capacity_mbps".into(),
    ]);
    for r in rows {
        table.rows.push(vec![
            r.name.clone(),
            r.benchmark_score
                .map_or_else(String::new, |b| b.to_string()),
            fixed(r.capacity_bps / 1e6, 2),
        ]);
    }
    table.to_csv()
}
