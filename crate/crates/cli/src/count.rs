//! Case-count report.

use std::io::Write;

use anchorstream::{
    dirichlet_unadjusted_interval, estimate_chapman, estimate_psi, estimate_psi_star, estimate_rs,
    jeffreys_fpc_interval, select_credible_interval, validate_design, wald_interval, CellCounts, CountEstimate,
    DesignContext, IntervalResult, PosteriorConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{text_table, write_csv_rows, write_json, OutputFormat};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountOptions {
    pub seed: u64,
    pub draws: usize,
    pub floor: bool,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalOut {
    pub lower: f64,
    pub upper: f64,
    pub method: String,
    pub floored: bool,
}

impl From<IntervalResult> for IntervalOut {
    fn from(iv: IntervalResult) -> Self {
        Self { lower: iv.lower, upper: iv.upper, method: iv.method.label().to_string(), floored: iv.floored }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub estimator: String,
    pub n_hat: f64,
    pub se: f64,
    pub interval: Option<IntervalOut>,
}

#[derive(Debug, Default)]
pub struct CountReport {
    pub rows: Vec<CountRow>,
    pub warnings: Vec<String>,
}

impl CountReport {
    fn push(&mut self, est: &CountEstimate<f64>, iv: anchorstream::Result<IntervalResult>) {
        let interval = match iv {
            Ok(iv) => Some(iv.into()),
            Err(e) => {
                self.warnings.push(format!("{}: interval unavailable: {e}", est.method.label()));
                None
            }
        };
        self.rows.push(CountRow { estimator: est.method.label().to_string(), n_hat: est.n_hat, se: est.se(), interval });
    }
}

/// Every estimator that applies to the table, each with its Wald interval
/// and, where one exists, its credible interval.
pub fn count_report(cells: &CellCounts, ctx: &DesignContext, opts: &CountOptions) -> Result<CountReport> {
    let mut report = CountReport { warnings: validate_design(cells, ctx).iter().map(|w| w.to_string()).collect(), ..Default::default() };
    let floor = opts.floor.then_some(ctx.n_c);
    let posterior = PosteriorConfig { draws: opts.draws, seed: opts.seed, level: opts.level, floor: opts.floor };
    posterior.validate()?;
    let mut first_error = None;
    let mut note = |report: &mut CountReport, label: &str, e: anchorstream::Error| {
        report.warnings.push(format!("{label}: {e}"));
        first_error.get_or_insert(e);
    };

    match estimate_rs::<f64>(cells, ctx) {
        Ok(est) => {
            report.push(&est, wald_interval(&est, floor, opts.level));
            report.push(&est, jeffreys_fpc_interval(cells, ctx, opts.level, opts.floor));
        }
        Err(e) => note(&mut report, "N_RS", e),
    }
    match estimate_chapman::<f64>(cells, ctx) {
        Ok(est) => report.push(&est, wald_interval(&est, floor, opts.level)),
        Err(e) => note(&mut report, "N_Chap", e),
    }
    match estimate_psi::<f64>(cells, ctx) {
        Ok(est) => {
            report.push(&est, wald_interval(&est, floor, opts.level));
            report.push(&est, dirichlet_unadjusted_interval(cells, ctx, &posterior));
        }
        Err(e) => note(&mut report, "N_psi", e),
    }
    match estimate_psi_star::<f64>(cells, ctx) {
        Ok(est) => {
            report.push(&est, wald_interval(&est, floor, opts.level));
            report.push(&est, select_credible_interval(cells, ctx, &posterior));
        }
        Err(e) => note(&mut report, "N_psi_star", e),
    }
    if report.rows.is_empty() {
        return Err(first_error.map(CliError::from).unwrap_or_else(|| CliError::Internal("no estimates".into())));
    }
    Ok(report)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    estimator: &'a str,
    n_hat: f64,
    se: f64,
    lower: Option<f64>,
    upper: Option<f64>,
    method: Option<&'a str>,
    floored: Option<bool>,
}

pub fn write_report(report: &CountReport, format: OutputFormat, out: impl Write) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(&report.rows, out),
        OutputFormat::Csv => {
            let rows: Vec<CsvRow> = report
                .rows
                .iter()
                .map(|r| CsvRow {
                    estimator: &r.estimator,
                    n_hat: r.n_hat,
                    se: r.se,
                    lower: r.interval.as_ref().map(|i| i.lower),
                    upper: r.interval.as_ref().map(|i| i.upper),
                    method: r.interval.as_ref().map(|i| i.method.as_str()),
                    floored: r.interval.as_ref().map(|i| i.floored),
                })
                .collect();
            write_csv_rows(&rows, out)
        }
        OutputFormat::Text => {
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    let (lo, hi, method, floored) = match &r.interval {
                        Some(i) => (format!("{:.1}", i.lower), format!("{:.1}", i.upper), i.method.clone(), if i.floored { "yes" } else { "no" }),
                        None => ("-".into(), "-".into(), "-".into(), "-"),
                    };
                    vec![r.estimator.clone(), format!("{:.1}", r.n_hat), format!("{:.2}", r.se), method, lo, hi, floored.into()]
                })
                .collect();
            let mut out = out;
            out.write_all(text_table(&["estimator", "n_hat", "se", "interval", "lower", "upper", "floored"], &rows).as_bytes())
                .map_err(crate::error::internal)
        }
    }
}
