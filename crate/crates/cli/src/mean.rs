//! Mean report.

use std::io::Write;

use anchorstream::{bootstrap_mean, tabulate, BootstrapConfig, IndividualRecord, MeanEstimate, MeanTarget};
use serde::Serialize;

use crate::error::{internal, CliError, Result};
use crate::output::{text_table, write_csv_rows, write_json, OutputFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TargetArg {
    Overall,
    Cases,
    Noncases,
    Difference,
    All,
}

impl TargetArg {
    fn targets(self) -> Vec<MeanTarget> {
        match self {
            TargetArg::Overall => vec![MeanTarget::Overall],
            TargetArg::Cases => vec![MeanTarget::Cases],
            TargetArg::Noncases => vec![MeanTarget::NonCases],
            TargetArg::Difference => vec![MeanTarget::Difference],
            TargetArg::All => MeanTarget::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Default)]
pub struct MeanReport {
    pub estimates: Vec<MeanEstimate>,
    pub warnings: Vec<String>,
}

/// Estimates each requested target. With several targets, one that fails is
/// reported as a warning and the rest are still returned.
pub fn mean_report(
    records: &[IndividualRecord<f64>],
    n_tot: u64,
    target: TargetArg,
    cfg: &BootstrapConfig,
) -> Result<MeanReport> {
    let (_, ctx) = tabulate(records, n_tot)?;
    let mut report = MeanReport::default();
    let mut first_error = None;
    for t in target.targets() {
        match bootstrap_mean(records, &ctx, t, cfg) {
            Ok(est) => {
                report.warnings.extend(est.warnings.iter().map(|w| format!("{}: {w}", t.label())));
                report.estimates.push(est);
            }
            Err(e) => {
                report.warnings.push(format!("{}: {e}", t.label()));
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) if report.estimates.is_empty() => Err(CliError::from(e)),
        _ => Ok(report),
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    target: &'a str,
    mu_hat: f64,
    se: f64,
    lower: f64,
    upper: f64,
    b_used: usize,
    b_requested: usize,
}

pub fn write_report(report: &MeanReport, format: OutputFormat, mut out: impl Write) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(&report.estimates, out),
        OutputFormat::Csv => {
            let rows: Vec<CsvRow> = report
                .estimates
                .iter()
                .map(|e| CsvRow {
                    target: e.target.label(),
                    mu_hat: e.mu_hat,
                    se: e.se,
                    lower: e.lower,
                    upper: e.upper,
                    b_used: e.b_used,
                    b_requested: e.b_requested,
                })
                .collect();
            write_csv_rows(&rows, out)
        }
        OutputFormat::Text => {
            let rows: Vec<Vec<String>> = report
                .estimates
                .iter()
                .map(|e| {
                    vec![
                        e.target.label().to_string(),
                        format!("{:.4}", e.mu_hat),
                        format!("{:.4}", e.se),
                        format!("{:.4}", e.lower),
                        format!("{:.4}", e.upper),
                        format!("{}/{}", e.b_used, e.b_requested),
                    ]
                })
                .collect();
            out.write_all(text_table(&["target", "mu_hat", "se", "lower", "upper", "replicates"], &rows).as_bytes())
                .map_err(internal)
        }
    }
}
