//! Report serialization: json-lines, csv and plot-data.

use std::str::FromStr;

use crate::run::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("unknown report format `{0}` (expected json-lines, csv or plot-data)")]
    UnknownFormat(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    JsonLines,
    Csv,
    PlotData,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json-lines" => Ok(Format::JsonLines),
            "csv" => Ok(Format::Csv),
            "plot-data" => Ok(Format::PlotData),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

const CSV_HEADER: [&str; 15] = [
    "name",
    "kind",
    "seed",
    "pass",
    "bound",
    "lower_bound",
    "slack_ratio",
    "tolerance",
    "c1",
    "c2",
    "a",
    "mu",
    "grid_points",
    "error",
    "version",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn emit_report(reports: &[RunReport], format: Format) -> Result<Vec<u8>, ReportError> {
    match format {
        Format::JsonLines => {
            let mut out = Vec::new();
            for r in reports {
                serde_json::to_writer(&mut out, r)?;
                out.push(b'\n');
            }
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for r in reports {
                let c = |k: &str| opt(r.constants.get(k));
                w.write_record([
                    r.name.clone(),
                    r.kind.clone(),
                    r.seed.to_string(),
                    r.pass.to_string(),
                    opt(r.bound),
                    opt(r.lower_bound),
                    opt(r.slack_ratio),
                    opt(r.tolerance),
                    c("c1"),
                    c("c2"),
                    c("a"),
                    c("mu"),
                    opt(r.grid_points),
                    r.error.clone().unwrap_or_default(),
                    r.version.clone(),
                ])?;
            }
            Ok(w.into_inner()
                .map_err(|e| csv::Error::from(e.into_error()))?)
        }
        Format::PlotData => {
            // One (x, y) point per report with a grid size and a ratio; series
            // are the scenario study (or kind) and x is sorted within each.
            let mut points: Vec<(String, usize, f64)> = reports
                .iter()
                .filter_map(|r| {
                    let series = r.study.clone().unwrap_or_else(|| r.kind.clone());
                    Some((series, r.grid_points?, r.slack_ratio?))
                })
                .collect();
            points.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["series", "x", "y"])?;
            for (s, x, y) in points {
                w.write_record([s, x.to_string(), y.to_string()])?;
            }
            Ok(w.into_inner()
                .map_err(|e| csv::Error::from(e.into_error()))?)
        }
    }
}

pub fn parse_json_lines(bytes: &[u8]) -> Result<Vec<RunReport>, ReportError> {
    let text = String::from_utf8_lossy(bytes);
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(ReportError::from))
        .collect()
}
