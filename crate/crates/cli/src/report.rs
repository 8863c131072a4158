use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use uqcm::combinatorics::{rational_string, rational_to_f64, IdentityReport, PRINTED_FORM_NOTE};
use uqcm::fidelity::FidelityReport;
use uqcm::verify::{EquivalenceReport, IdentityGrid, SweepPoint};

use crate::Format;

#[derive(Debug, Serialize)]
pub struct TableReport {
    #[serde(flatten)]
    pub table: FidelityReport,
    pub tolerance: f64,
    pub max_abs_diff: f64,
    pub passed: bool,
}

impl TableReport {
    pub fn new(table: FidelityReport, tolerance: f64) -> Self {
        let max_abs_diff = table.max_abs_diff();
        Self { table, tolerance, max_abs_diff, passed: max_abs_diff < tolerance }
    }
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub d: usize,
    pub seed: u64,
    /// Absent for a single point.
    pub monotone: Option<bool>,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Serialize)]
pub struct IdentityRow {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub lhs: String,
    pub lhs_float: f64,
    pub rhs: String,
    pub rhs_float: f64,
    pub equal: bool,
}

impl From<&IdentityReport> for IdentityRow {
    fn from(r: &IdentityReport) -> Self {
        Self {
            n: r.n,
            m: r.m,
            d: r.d,
            lhs: rational_string(&r.lhs),
            lhs_float: rational_to_f64(&r.lhs),
            rhs: rational_string(&r.rhs),
            rhs_float: rational_to_f64(&r.rhs),
            equal: r.equal,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct IdentityCheckReport {
    pub grid: IdentityGrid,
    pub all_equal: bool,
    pub printed_form_evaluable: bool,
    pub note: &'static str,
    pub cases: Vec<IdentityRow>,
}

impl IdentityCheckReport {
    pub fn new(grid: IdentityGrid, reports: Vec<IdentityReport>) -> Self {
        Self {
            grid,
            all_equal: reports.iter().all(|r| r.equal),
            printed_form_evaluable: reports.iter().all(|r| r.printed_form_evaluable),
            note: PRINTED_FORM_NOTE,
            cases: reports.iter().map(IdentityRow::from).collect(),
        }
    }
}

pub enum Report {
    Table(TableReport),
    Verify(EquivalenceReport),
    Sweep(SweepReport),
    Identity(IdentityCheckReport),
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

fn write_csv<T: Serialize>(rows: &[T], out: &mut dyn Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

impl Report {
    pub fn passed(&self) -> bool {
        match self {
            Report::Table(t) => t.passed,
            Report::Verify(v) => v.passed,
            Report::Sweep(s) => s.monotone.unwrap_or(true),
            Report::Identity(i) => i.all_equal,
        }
    }

    fn encode(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match (format, self) {
            (Format::Json, Report::Table(t)) => write_json(t, out),
            (Format::Json, Report::Verify(v)) => write_json(v, out),
            (Format::Json, Report::Sweep(s)) => write_json(s, out),
            (Format::Json, Report::Identity(i)) => write_json(i, out),
            (Format::Csv, Report::Table(t)) => write_csv(&t.table.rows, out),
            (Format::Csv, Report::Verify(v)) => write_csv(&v.results, out),
            (Format::Csv, Report::Sweep(s)) => write_csv(&s.points, out),
            (Format::Csv, Report::Identity(i)) => write_csv(&i.cases, out),
        }
    }

    pub fn write(&self, format: Format, path: Option<&Path>) -> io::Result<()> {
        match path {
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                self.encode(format, &mut lock)?;
                lock.flush()
            }
            Some(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent)?;
                }
                let mut file = BufWriter::new(File::create(path)?);
                self.encode(format, &mut file)?;
                file.flush()
            }
        }
    }
}
