//! Simulation runs and their output files.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anchorstream::simlab::with_threads;
use anchorstream::{run_series1, run_series2, write_csv, Series1Config, Series2Config, SimSummaryRow};
use serde::Serialize;

use crate::error::{internal, CliError, Result};
use crate::output::{fmt_opt, text_table, write_json, OutputFormat};

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(untagged)]
pub enum SeriesConfig {
    One(Series1Config),
    Two(Series2Config),
}

impl SeriesConfig {
    fn name(&self) -> &'static str {
        match self {
            SeriesConfig::One(_) => "series1",
            SeriesConfig::Two(_) => "series2",
        }
    }

    fn run(&self) -> anchorstream::Result<Vec<SimSummaryRow>> {
        match self {
            SeriesConfig::One(c) => run_series1(c),
            SeriesConfig::Two(c) => run_series2(c),
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    threads: Option<usize>,
    wall_time_secs: f64,
    config: &'a SeriesConfig,
    files: Vec<String>,
}

pub fn simulate(
    cfg: &SeriesConfig,
    seed: u64,
    threads: Option<usize>,
    out_dir: Option<&Path>,
    format: OutputFormat,
    mut out: impl Write,
) -> Result<()> {
    let start = Instant::now();
    let rows = match threads {
        Some(n) => with_threads(n, || cfg.run())??,
        None => cfg.run()?,
    };
    let wall = start.elapsed().as_secs_f64();

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        let name = cfg.name();
        let csv_name = format!("{name}.csv");
        let json_name = format!("{name}.json");
        let file = |n: &str| fs::File::create(dir.join(n)).map_err(|e| internal(format!("cannot write {n}: {e}")));
        write_csv(&rows, file(&csv_name)?)?;
        write_json(&rows, file(&json_name)?)?;
        let manifest = Manifest {
            command: name,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            threads,
            wall_time_secs: wall,
            config: cfg,
            files: vec![csv_name, json_name],
        };
        write_json(&manifest, file("manifest.json")?)?;
    }

    match format {
        OutputFormat::Json => write_json(&rows, out),
        OutputFormat::Csv => Ok(write_csv(&rows, out)?),
        OutputFormat::Text => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.estimator.clone(),
                        r.interval.clone(),
                        format!("{:.3}", r.truth),
                        fmt_opt(r.mc_mean, 3),
                        fmt_opt(r.mc_sd, 3),
                        fmt_opt(r.avg_se, 3),
                        fmt_opt(r.coverage.map(|c| 100.0 * c), 1),
                        fmt_opt(r.avg_width, 2),
                        format!("{}/{}", r.intervals, r.reps),
                    ]
                })
                .collect();
            let headers = ["estimator", "interval", "truth", "mean", "sd", "avg_se", "coverage%", "width", "intervals"];
            out.write_all(text_table(&headers, &table).as_bytes()).map_err(internal)
        }
    }
}
