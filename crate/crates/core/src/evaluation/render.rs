use std::fmt::Write as _;

use thiserror::Error;

use super::{Cell, EvaluationReport, VariantReport};
use crate::extraction::Variant;

pub const CSV_HEADER: [&str; 6] = ["variant", "dimension", "cell", "correct", "total", "accuracy"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "table" => Ok(Format::Text),
            _ => Err(format!("unknown report format `{s}` (json, csv, text)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv line {line}: {message}")]
    Row { line: u64, message: String },
}

pub fn render_report(report: &EvaluationReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => render_csv(report),
        Format::Text => render_text(report),
    }
}

fn render_csv(report: &EvaluationReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for v in &report.variants {
        for (dim, label, cell) in v.cells() {
            let acc = cell.accuracy().map(|a| a.to_string()).unwrap_or_default();
            w.write_record([v.variant.as_str(), dim, label, &cell.correct.to_string(), &cell.total.to_string(), &acc])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Reads cells back from a CSV rendering. Skips and metadata are not part
/// of the CSV and come back empty.
pub fn parse_csv(text: &str) -> Result<Vec<VariantReport>, RenderError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out: Vec<VariantReport> = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let err = |message: String| RenderError::Row { line, message };
        if row.len() != CSV_HEADER.len() {
            return Err(err(format!("expected {} fields, found {}", CSV_HEADER.len(), row.len())));
        }
        let variant: Variant = row[0].parse().map_err(err)?;
        let count = |i: usize| row[i].parse::<u64>().map_err(|e| err(format!("{}: {e}", CSV_HEADER[i])));
        let cell = Cell {
            correct: count(3)?,
            total: count(4)?,
        };
        if cell.correct > cell.total {
            return Err(err("correct exceeds total".into()));
        }
        let report = match out.iter().position(|v| v.variant == variant) {
            Some(i) => &mut out[i],
            None => {
                out.push(VariantReport::empty(variant));
                out.last_mut().expect("just pushed")
            }
        };
        match &row[1] {
            "overall" => report.overall = cell,
            dim => {
                let cells = report.cells_mut(dim).ok_or_else(|| err(format!("unknown dimension `{dim}`")))?;
                let slot = cells
                    .iter_mut()
                    .find(|c| c.label == row[2])
                    .ok_or_else(|| err(format!("unknown {dim} cell `{}`", &row[2])))?;
                slot.cell = cell;
            }
        }
    }
    for v in &mut out {
        v.instances = v.overall.total;
    }
    Ok(out)
}

fn percent(cell: Cell) -> String {
    cell.accuracy().map_or_else(|| "-".to_owned(), |a| format!("{:.1}", 100.0 * a))
}

fn render_text(report: &EvaluationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scorer: {}", report.scorer);
    if let Some(seed) = report.seed {
        let _ = writeln!(s, "seed: {seed}");
    }
    if !report.complete {
        let _ = writeln!(s, "INCOMPLETE: {}", report.abort_reason.as_deref().unwrap_or("scorer aborted"));
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let rule = "-".repeat(40);
    let _ = writeln!(s, "{rule}\n{:<20}{:>10}{:>10}\n{rule}", "", "size", "accuracy");
    for v in &report.variants {
        let mut title = v.variant.as_str().to_owned();
        super::super::synth::capitalize_first(&mut title);
        let _ = writeln!(s, "{title} test set");
        let row = |s: &mut String, label: &str, c: Cell| {
            let _ = writeln!(s, "  {label:<18}{:>10}{:>10}", c.total, percent(c));
        };
        row(&mut s, "overall", v.overall);
        for c in v.by_group.iter().rev() {
            let unit = if c.label == "1" { "heuristic" } else { "heuristics" };
            row(&mut s, &format!("{} {unit}", c.label), c.cell);
        }
        for c in &v.by_number {
            let label = if c.label == "Sing" { "singular" } else { "plural" };
            row(&mut s, label, c.cell);
        }
        for c in &v.by_distance {
            row(&mut s, &format!("distance {}", c.label), c.cell);
        }
        if !v.skips.is_empty() {
            let skips: Vec<String> = v.skips.iter().map(|(k, n)| format!("{k}={n}")).collect();
            let _ = writeln!(s, "  skipped: {}", skips.join(", "));
        }
        let _ = writeln!(s, "{rule}");
    }
    s
}
