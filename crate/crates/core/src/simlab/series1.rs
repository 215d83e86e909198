//! Case-count study.

use rayon::prelude::*;

use super::{generate_population, summarize, Outcome, Series1Config, SimSummaryRow};
use crate::error::Result;
use crate::estimators::{estimate_psi, estimate_psi_star, estimate_rs, CountEstimate};
use crate::intervals::{jeffreys_fpc_interval, needs_adjustment, wald_interval, DirichletPosterior, IntervalResult};
use crate::rng::substream;
use crate::tableau::DesignContext;

const ROWS: [(&str, &str); 6] = [
    ("N_RS", "wald"),
    ("N_RS", "jeffreys_fpc"),
    ("N_psi", "wald"),
    ("N_psi", "dirichlet_unadjusted"),
    ("N_psi_star", "wald"),
    ("N_psi_star", "dirichlet_selected"),
];

fn outcome(est: &Option<CountEstimate<f64>>, iv: Option<IntervalResult>, truth: f64) -> Outcome {
    Outcome {
        estimate: est.as_ref().map(|e| e.n_hat),
        se: est.as_ref().map(|e| e.se()),
        interval: iv.map(|iv| (iv.lower, iv.upper)),
        truth,
    }
}

fn replicate(cfg: &Series1Config, index: u64) -> [Outcome; 6] {
    let mut rng = substream(cfg.seed, index);
    let pop = generate_population(cfg, None, &mut rng);
    let truth = pop.n_cases as f64;
    let cells = pop.cells();
    let ctx = DesignContext::from_cells(&cells).expect("population is not empty");
    let level = cfg.level;

    let rs = estimate_rs::<f64>(&cells, &ctx).ok();
    let psi = estimate_psi::<f64>(&cells, &ctx).ok();
    let star = estimate_psi_star::<f64>(&cells, &ctx).ok();
    let floor = Some(ctx.n_c);

    let wald = |e: &Option<CountEstimate<f64>>, floor| e.as_ref().and_then(|e| wald_interval(e, floor, level).ok());
    let posterior = DirichletPosterior::sample(&ctx, cfg.posterior_draws, true, &mut rng).ok();
    let unadjusted = posterior.as_ref().map(|p| p.unadjusted(level));
    let selected = posterior.as_ref().and_then(|p| match needs_adjustment(&cells, &ctx).ok()? {
        true => p.adjusted(&cells, &ctx, level).ok(),
        false => Some(p.unadjusted(level)),
    });

    [
        outcome(&rs, wald(&rs, None), truth),
        outcome(&rs, jeffreys_fpc_interval(&cells, &ctx, level, true).ok(), truth),
        outcome(&psi, wald(&psi, floor), truth),
        outcome(&psi, unadjusted, truth),
        outcome(&star, wald(&star, floor), truth),
        outcome(&star, selected, truth),
    ]
}

/// Case-count study: random-sample, known-psi and full-multinomial
/// estimators, each with a Wald interval and its credible counterpart.
/// Only the random-sample Wald interval is left unfloored.
pub fn run_series1(cfg: &Series1Config) -> Result<Vec<SimSummaryRow>> {
    cfg.validate()?;
    let outcomes: Vec<[Outcome; 6]> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|i| replicate(cfg, i))
        .collect();
    Ok(ROWS
        .iter()
        .enumerate()
        .map(|(k, (est, iv))| summarize(est, iv, outcomes.iter().map(|o| o[k]), cfg.seed))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simlab::with_threads;

    fn small() -> Series1Config {
        Series1Config { reps: 40, posterior_draws: 200, seed: 5, ..Series1Config::default() }
    }

    #[test]
    fn census_recovers_truth() {
        let cfg = Series1Config { psi: 1.0, ..small() };
        let rows = run_series1(&cfg).unwrap();
        for row in &rows {
            assert_eq!(row.mc_mean, Some(50.0), "{row:?}");
            assert_eq!(row.mc_sd, Some(0.0), "{row:?}");
        }
        // Jeffreys, and both floored Dirichlet intervals, collapse on the truth.
        for k in [1, 3, 5] {
            assert_eq!(rows[k].coverage, Some(1.0), "{:?}", rows[k]);
            assert!(rows[k].avg_width.unwrap() < 1e-9, "{:?}", rows[k]);
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = small();
        let one = with_threads(1, || run_series1(&cfg)).unwrap().unwrap();
        let four = with_threads(4, || run_series1(&cfg)).unwrap().unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn rows_and_labels() {
        let rows = run_series1(&small()).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.reps == 40 && r.truth == 50.0));
        assert_eq!(rows[0].mc_mean, rows[1].mc_mean);
    }
}
