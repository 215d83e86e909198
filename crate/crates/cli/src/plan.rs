//! Stream 2 sample-size planning.

use std::io::Write;

use anchorstream::{plan_sampling_rate, PlanInputs};
use serde::{Deserialize, Serialize};

use crate::error::{internal, Result};
use crate::output::{write_json, OutputFormat};

/// Prevalence above which the planner tends to overestimate the rate.
const HIGH_PREVALENCE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub psi: f64,
    /// `ceil(psi · n_tot)`.
    pub n_rs: u64,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn plan(inputs: &PlanInputs<f64>) -> Result<PlanReport> {
    let psi = plan_sampling_rate(inputs)?;
    // Guard against products like 0.2 · 500 landing a hair above an integer.
    let raw = psi * inputs.n_tot as f64;
    let n_rs = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw.ceil() } as u64;
    let notes = vec!["the planning formula is meant for relatively low prevalence settings".to_string()];
    let mut warnings = Vec::new();
    if inputs.p > HIGH_PREVALENCE {
        warnings.push(format!(
            "at an assumed prevalence of {} (above about {HIGH_PREVALENCE}) the formula tends to overestimate the Stream 2 sampling rate",
            inputs.p
        ));
    }
    Ok(PlanReport { psi, n_rs, notes, warnings })
}

pub fn write_report(report: &PlanReport, format: OutputFormat, mut out: impl Write) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(report, out),
        OutputFormat::Csv => {
            writeln!(out, "psi,n_rs\n{},{}", report.psi, report.n_rs).map_err(internal)
        }
        OutputFormat::Text => {
            writeln!(out, "psi   {:.6}\nn_rs  {}", report.psi, report.n_rs).map_err(internal)?;
            for note in &report.notes {
                writeln!(out, "note: {note}").map_err(internal)?;
            }
            for warning in &report.warnings {
                writeln!(out, "warning: {warning}").map_err(internal)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(p: f64, phi1: f64) -> PlanInputs<f64> {
        PlanInputs { p, phi1, n_tot: 500, sigma_p: 0.01 }
    }

    #[test]
    fn examples() {
        let r = plan(&inputs(0.1, 1.0)).unwrap();
        assert_eq!((r.psi, r.n_rs), (0.0, 0));
        let r = plan(&inputs(0.1, 0.5)).unwrap();
        assert!((r.psi - 0.001996).abs() < 1e-6);
        assert_eq!(r.n_rs, 1);
        assert!(r.warnings.is_empty());
        let r = plan(&inputs(0.3, 0.5)).unwrap();
        assert!(r.warnings.iter().any(|n| n.contains("tends to overestimate")));
    }
}
