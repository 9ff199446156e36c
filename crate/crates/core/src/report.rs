//! CSV result files.
//!
//! One row per [`BerPoint`] under the fixed header
//!
//! ```text
//! technique,tx_power_dbm,n_t,symbols,errors,ber,ci95
//! ```
//!
//! with rows sorted by technique name, then power, then training length.
//! Floats are written in shortest round-trip form, so a file parses back to
//! exactly the in-memory points. Per-node runs emit one block per node, each
//! introduced by a `# node: <name>` comment line and its own header.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{table1_registry, DistributionSpec};
use crate::detect::Technique;
use crate::montecarlo::{BerPoint, LabelledResult};

pub const CSV_HEADER: &str = "technique,tx_power_dbm,n_t,symbols,errors,ber,ci95";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    technique: String,
    tx_power_dbm: f64,
    n_t: usize,
    symbols: u64,
    errors: u64,
    ber: f64,
    ci95: f64,
}

impl From<&BerPoint> for Row {
    fn from(p: &BerPoint) -> Self {
        Row {
            technique: p.technique.name().to_string(),
            tx_power_dbm: p.tx_power_dbm,
            n_t: p.n_t,
            symbols: p.symbol_count,
            errors: p.error_count,
            ber: p.ber,
            ci95: p.ci95,
        }
    }
}

fn sorted(points: &[BerPoint]) -> Vec<&BerPoint> {
    let mut rows: Vec<&BerPoint> = points.iter().collect();
    rows.sort_by(|a, b| {
        a.technique
            .name()
            .cmp(b.technique.name())
            .then(a.tx_power_dbm.total_cmp(&b.tx_power_dbm))
            .then(a.n_t.cmp(&b.n_t))
    });
    rows
}

/// Writes the header and one sorted row per point.
pub fn write_csv<W: Write>(points: &[BerPoint], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for p in sorted(points) {
        w.serialize(Row::from(p))?;
    }
    if points.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every result; labelled results get a `# node:` line first.
pub fn write_results<W: Write>(results: &[LabelledResult], mut out: W) -> Result<(), ReportError> {
    for r in results {
        if let Some(label) = &r.label {
            writeln!(out, "# node: {label}")?;
        }
        write_csv(&r.result.points, &mut out)?;
    }
    Ok(())
}

/// Renders [`write_results`] into a string.
pub fn results_to_string(results: &[LabelledResult]) -> String {
    let mut buf = Vec::new();
    write_results(results, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// Reads rows written by [`write_csv`] or [`write_results`]. Comment lines
/// and repeated headers are skipped.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<BerPoint>, ReportError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .from_reader(input);
    let header = csv::StringRecord::from(CSV_HEADER.split(',').collect::<Vec<_>>());
    let mut points = Vec::new();
    let mut seen_header = false;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record == header {
            seen_header = true;
            continue;
        }
        if !seen_header {
            return Err(ReportError::Row {
                line,
                message: format!("expected header `{CSV_HEADER}`"),
            });
        }
        let row: Row = record.deserialize(Some(&header))?;
        let technique = row.technique.parse::<Technique>().map_err(|e| ReportError::Row {
            line,
            message: e.to_string(),
        })?;
        points.push(BerPoint {
            technique,
            tx_power_dbm: row.tx_power_dbm,
            n_t: row.n_t,
            symbol_count: row.symbols,
            error_count: row.errors,
            ber: row.ber,
            ci95: row.ci95,
        });
    }
    Ok(points)
}

/// Lists the channel registry as CSV: name, family, parameters, condition.
pub fn write_registry<W: Write>(out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "family", "parameters", "condition"])?;
    for node in table1_registry() {
        let params = match node.dist {
            DistributionSpec::BurrXii(d) => format!("scale={:e} c={} k={}", d.scale(), d.c(), d.k()),
            DistributionSpec::Weibull(d) => format!("scale={:e} shape={}", d.scale(), d.shape()),
        };
        w.write_record([node.name.as_str(), node.dist.family(), &params, node.condition.as_str()])?;
    }
    w.flush()?;
    Ok(())
}
