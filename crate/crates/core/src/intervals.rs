//! Interval estimation for case counts.
//!
//! - Wald intervals around any [`CountEstimate`].
//! - An FPC-adjusted Jeffreys credible interval from the Stream 2 sample.
//! - Dirichlet-multinomial posterior intervals that use both streams, in an
//!   unadjusted form and a scale-shifted, widened adjusted form, plus the
//!   prevalence-threshold rule that picks between them.
//!
//! Every interval can be floored at `n_c`, the number of distinct cases
//! already observed.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_chapman, estimate_psi, estimate_psi_star, estimate_rs, fpc_factor, CountEstimate};
use crate::rng::substream;
use crate::special::{beta_inc_inv, normal_quantile};
use crate::stats::central_interval;
use crate::tableau::{CellCounts, DesignContext};

/// Estimated prevalence at or above which the adjusted Dirichlet interval is
/// used.
pub const ADJUSTMENT_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntervalMethod {
    Wald,
    JeffreysFpc,
    DirichletUnadjusted,
    DirichletAdjusted,
}

impl IntervalMethod {
    pub fn label(self) -> &'static str {
        match self {
            IntervalMethod::Wald => "wald",
            IntervalMethod::JeffreysFpc => "jeffreys_fpc",
            IntervalMethod::DirichletUnadjusted => "dirichlet_unadjusted",
            IntervalMethod::DirichletAdjusted => "dirichlet_adjusted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalResult {
    pub lower: f64,
    pub upper: f64,
    pub method: IntervalMethod,
    /// The lower limit was raised to `n_c`.
    pub floored: bool,
    /// Posterior draws behind the interval, zero for analytic methods.
    pub draws_used: usize,
}

impl IntervalResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    fn analytic(lower: f64, upper: f64, method: IntervalMethod, floor_at: Option<u64>) -> Self {
        let (lower, upper, floored) = apply_floor(lower, upper, floor_at);
        Self { lower, upper, method, floored, draws_used: 0 }
    }
}

/// Raises `lower` to the floor when it falls at or below it. The upper limit
/// is raised too if needed so the interval stays ordered.
fn apply_floor(lower: f64, upper: f64, floor_at: Option<u64>) -> (f64, f64, bool) {
    match floor_at {
        Some(n_c) => {
            let n_c = n_c as f64;
            if lower <= n_c {
                (n_c, upper.max(n_c), true)
            } else {
                (lower, upper, false)
            }
        }
        None => (lower, upper, false),
    }
}

/// Normal critical value for a two-sided interval. The 95% level uses the
/// conventional 1.96.
pub fn z_for_level(level: f64) -> f64 {
    if (level - 0.95).abs() < 1e-12 {
        1.96
    } else {
        normal_quantile(0.5 + level / 2.0)
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("confidence level {level} must lie in (0, 1)")))
    }
}

/// `n_hat ± z·se`. With a floor the lower limit is at least `n_c`; without
/// one it is at least zero.
pub fn wald_interval(est: &CountEstimate<f64>, floor: Option<u64>, level: f64) -> Result<IntervalResult> {
    check_level(level)?;
    let se = est.se();
    if !se.is_finite() {
        return Err(Error::InvalidParameter("standard error is not finite".into()));
    }
    let z = z_for_level(level);
    let lower = est.n_hat - z * se;
    let upper = est.n_hat + z * se;
    let lower = if floor.is_none() { lower.max(0.0) } else { lower };
    Ok(IntervalResult::analytic(lower, upper, IntervalMethod::Wald, floor))
}

/// Jeffreys credible interval for the Stream 2 prevalence, rescaled so the
/// posterior variance shrinks by the finite population correction and
/// re-centred on the sample proportion, then expressed as a count.
pub fn jeffreys_fpc_interval(
    cells: &CellCounts,
    ctx: &DesignContext,
    level: f64,
    floor: bool,
) -> Result<IntervalResult> {
    check_level(level)?;
    let fpc: f64 = fpc_factor(ctx.n_rs, ctx.n_tot)?;
    let pos = (cells.n2 + cells.n6) as f64;
    let n_rs = ctx.n_rs as f64;
    let (alpha, beta) = (pos + 0.5, n_rs - pos + 0.5);
    let tail = (1.0 - level) / 2.0;
    let q_lo = beta_inc_inv(alpha, beta, tail);
    let q_hi = beta_inc_inv(alpha, beta, 1.0 - tail);

    let p_hat = pos / n_rs;
    let scale = fpc.sqrt();
    let shift = p_hat * (1.0 - scale);
    let n_tot = ctx.n_tot as f64;
    Ok(IntervalResult::analytic(
        n_tot * (scale * q_lo + shift),
        n_tot * (scale * q_hi + shift),
        IntervalMethod::JeffreysFpc,
        floor.then_some(ctx.n_c),
    ))
}

/// Settings for posterior-draw intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorConfig {
    pub draws: usize,
    pub seed: u64,
    pub level: f64,
    /// Floor draws and limits at `n_c`.
    pub floor: bool,
}

impl Default for PosteriorConfig {
    fn default() -> Self {
        Self { draws: 10_000, seed: 0, level: 0.95, floor: true }
    }
}

impl PosteriorConfig {
    pub const MIN_DRAWS: usize = 100;

    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.draws < Self::MIN_DRAWS {
            return Err(Error::InvalidParameter(format!(
                "{} posterior draws requested; at least {} are required",
                self.draws,
                Self::MIN_DRAWS
            )));
        }
        check_level(self.level)
    }
}

/// Posterior draws of the known-psi estimand under a Dirichlet(1/2, 1/2, 1/2)
/// prior on the conditional capture-history probabilities.
#[derive(Debug, Clone)]
pub struct DirichletPosterior {
    draws: Vec<f64>,
    n_c: u64,
    floor: bool,
}

impl DirichletPosterior {
    /// Draws `count` posterior values of the known-psi estimand.
    ///
    /// For each draw: sample the conditional cell probabilities, convert them
    /// to the probability of being caught at all, draw the population count
    /// implied by `n_c`, redraw the number caught from a binomial, and
    /// evaluate the estimator on the implied cell counts.
    pub fn sample<R: Rng + ?Sized>(
        ctx: &DesignContext,
        count: usize,
        floor: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if ctx.n_c == 0 {
            return Err(Error::NoIdentifiedCases);
        }
        if !(ctx.psi > 0.0 && ctx.psi <= 1.0) {
            return Err(Error::ZeroSamplingRate);
        }
        let psi = ctx.psi;
        let n_c = ctx.n_c as f64;
        let shape = |n: u64| Gamma::new(n as f64 + 0.5, 1.0).expect("positive gamma shape");
        let (g11, g10, g01) = (shape(ctx.n11), shape(ctx.n10), shape(ctx.n01));

        let mut draws = Vec::with_capacity(count);
        for _ in 0..count {
            let (x11, x10, x01) = (g11.sample(rng), g10.sample(rng), g01.sample(rng));
            let total = x11 + x10 + x01;
            let (p11, p10, p01) = (x11 / total, x10 / total, x01 / total);

            let stream1 = p11 + p10;
            let p1 = psi * stream1 / (psi * stream1 + p01);
            let p_caught = p1 * (1.0 - psi) + psi;
            let n_pop = (n_c / p_caught).round() as u64;
            let caught = Binomial::new(n_pop, p_caught.min(1.0))
                .expect("valid binomial parameters")
                .sample(rng) as f64;

            let mut value = caught * p11 + caught * p10 + caught * p01 / psi;
            if floor && value < n_c {
                value = n_c;
            }
            draws.push(value);
        }
        Ok(Self { draws, n_c: ctx.n_c, floor })
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    fn floor_at(&self) -> Option<u64> {
        self.floor.then_some(self.n_c)
    }

    fn percentile_interval(&self, values: &mut [f64], level: f64, method: IntervalMethod) -> IntervalResult {
        let (lower, upper) = central_interval(values, level);
        let (lower, upper, floored) = apply_floor(lower, upper, self.floor_at());
        IntervalResult { lower, upper, method, floored, draws_used: values.len() }
    }

    pub fn unadjusted(&self, level: f64) -> IntervalResult {
        let mut values = self.draws.clone();
        self.percentile_interval(&mut values, level, IntervalMethod::DirichletUnadjusted)
    }

    /// Percentiles of the draws after the affine map `a·x + b`.
    pub fn scaled_percentiles(&self, scale: f64, shift: f64, level: f64) -> (f64, f64) {
        let mut values: Vec<f64> = self.draws.iter().map(|&d| scale * d + shift).collect();
        central_interval(&mut values, level)
    }

    /// Adjusted interval: draws rescaled so their spread matches the
    /// full-multinomial variance and re-centred on that estimate, then widened
    /// halfway towards a Wald interval built from the averaged random-sample
    /// and Chapman variances wherever that Wald interval is wider.
    pub fn adjusted(&self, cells: &CellCounts, ctx: &DesignContext, level: f64) -> Result<IntervalResult> {
        let parts = AdjustmentParts::compute(cells, ctx)?;
        let (ll_ab, ul_ab) = self.scaled_percentiles(parts.scale, parts.shift, level);
        let z = z_for_level(level);
        let ll_avg = parts.center - z * parts.sigma_avg;
        let ul_avg = parts.center + z * parts.sigma_avg;
        let lower = ll_ab.min((ll_ab + ll_avg) / 2.0);
        let upper = ul_ab.max((ul_ab + ul_avg) / 2.0);
        let (lower, upper, floored) = apply_floor(lower, upper, self.floor_at());
        Ok(IntervalResult {
            lower,
            upper,
            method: IntervalMethod::DirichletAdjusted,
            floored,
            draws_used: self.draws.len(),
        })
    }
}

/// Constants of the adjusted interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustmentParts {
    /// `sqrt(Var(psi*) / Var(psi))`.
    pub scale: f64,
    /// `N_psi* (1 - scale)`.
    pub shift: f64,
    /// The full-multinomial point estimate.
    pub center: f64,
    /// Standard error of the average of the random-sample and Chapman
    /// estimators.
    pub sigma_avg: f64,
}

impl AdjustmentParts {
    pub fn compute(cells: &CellCounts, ctx: &DesignContext) -> Result<Self> {
        let star = estimate_psi_star::<f64>(cells, ctx)?;
        let psi = estimate_psi::<f64>(cells, ctx)?;
        if psi.variance == 0.0 {
            return Err(Error::ZeroPsiVariance);
        }
        let scale = (star.variance / psi.variance).sqrt();
        let var_rs = estimate_rs::<f64>(cells, ctx)?.variance;
        let var_chap = estimate_chapman::<f64>(cells, ctx)?.variance;
        Ok(Self {
            scale,
            shift: star.n_hat * (1.0 - scale),
            center: star.n_hat,
            sigma_avg: ((var_rs + var_chap) / 4.0).sqrt(),
        })
    }
}

fn sample_posterior(ctx: &DesignContext, cfg: &PosteriorConfig) -> Result<DirichletPosterior> {
    cfg.validate()?;
    let mut rng = substream(cfg.seed, 0);
    DirichletPosterior::sample(ctx, cfg.draws, cfg.floor, &mut rng)
}

pub fn dirichlet_unadjusted_interval(
    _cells: &CellCounts,
    ctx: &DesignContext,
    cfg: &PosteriorConfig,
) -> Result<IntervalResult> {
    Ok(sample_posterior(ctx, cfg)?.unadjusted(cfg.level))
}

pub fn dirichlet_adjusted_interval(
    cells: &CellCounts,
    ctx: &DesignContext,
    cfg: &PosteriorConfig,
) -> Result<IntervalResult> {
    // Fail on the closed-form pieces before paying for the draws.
    AdjustmentParts::compute(cells, ctx)?;
    sample_posterior(ctx, cfg)?.adjusted(cells, ctx, cfg.level)
}

/// Whether the adjusted interval applies to this table.
pub fn needs_adjustment(cells: &CellCounts, ctx: &DesignContext) -> Result<bool> {
    Ok(estimate_psi_star::<f64>(cells, ctx)?.prevalence_hat >= ADJUSTMENT_THRESHOLD)
}

/// Unadjusted interval below the prevalence threshold, adjusted at or above.
pub fn select_credible_interval(
    cells: &CellCounts,
    ctx: &DesignContext,
    cfg: &PosteriorConfig,
) -> Result<IntervalResult> {
    if needs_adjustment(cells, ctx)? {
        dirichlet_adjusted_interval(cells, ctx, cfg)
    } else {
        dirichlet_unadjusted_interval(cells, ctx, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::stats::{mean, sample_variance};
    use rand_distr::Beta;

    fn worked_example() -> (CellCounts, DesignContext) {
        let cells = CellCounts::new(6, 5, 100, 46, 33, 6, 304);
        let ctx = DesignContext::from_cells(&cells).unwrap();
        (cells, ctx)
    }

    fn ctx_of(cells: CellCounts) -> (CellCounts, DesignContext) {
        (cells, DesignContext::from_cells(&cells).unwrap())
    }

    #[test]
    fn jeffreys_on_worked_example() {
        let (cells, ctx) = worked_example();
        let iv = jeffreys_fpc_interval(&cells, &ctx, 0.95, true).unwrap();
        assert!((iv.lower - 63.5).abs() < 0.5, "{iv:?}");
        assert!((iv.upper - 171.5).abs() < 0.5, "{iv:?}");
        assert!(!iv.floored);
        assert_eq!(iv.draws_used, 0);
    }

    #[test]
    fn jeffreys_census_collapses() {
        // Everyone in Stream 2: the correction is zero.
        let (cells, ctx) = ctx_of(CellCounts::new(4, 3, 0, 0, 10, 3, 0));
        let iv = jeffreys_fpc_interval(&cells, &ctx, 0.95, false).unwrap();
        assert_eq!(iv.lower, 6.0);
        assert_eq!(iv.upper, 6.0);
    }

    #[test]
    fn jeffreys_zero_positives() {
        // No positives among 10 sampled out of 20; Beta(0.5, 10.5) quantiles
        // 4.789e-5 and 0.21720 from scipy, FPC = 10·10/(20·9).
        let (cells, ctx) = ctx_of(CellCounts::new(5, 0, 2, 0, 5, 0, 8));
        let iv = jeffreys_fpc_interval(&cells, &ctx, 0.95, false).unwrap();
        let a = (100.0_f64 / 180.0).sqrt();
        assert!((iv.lower - 20.0 * a * 4.78904331575818757e-05).abs() < 1e-8);
        assert!((iv.upper - 20.0 * a * 2.17196267509210533e-01).abs() < 1e-8);
        assert!(iv.lower >= 0.0 && iv.upper < 20.0);
    }

    #[test]
    fn jeffreys_transform_moments() {
        let (cells, ctx) = worked_example();
        let fpc: f64 = fpc_factor(ctx.n_rs, ctx.n_tot).unwrap();
        let (a, p_hat) = (fpc.sqrt(), 0.22);
        let beta = Beta::new(11.5, 39.5).unwrap();
        let mut rng = substream(11, 0);
        let raw: Vec<f64> = (0..20_000).map(|_| beta.sample(&mut rng)).collect();
        let moved: Vec<f64> = raw.iter().map(|q| a * q + p_hat * (1.0 - a)).collect();
        let ratio = sample_variance(&moved) / sample_variance(&raw);
        assert!((ratio - fpc).abs() < 1e-9);
        let expected_mean = a * mean(&raw) + (1.0 - a) * p_hat;
        assert!((mean(&moved) - expected_mean).abs() < 1e-12);
        let _ = cells;
    }

    #[test]
    fn wald_examples() {
        let (cells, ctx) = worked_example();
        let est = estimate_psi::<f64>(&cells, &ctx).unwrap();
        let iv = wald_interval(&est, None, 0.95).unwrap();
        let half = 1.96 * 540f64.sqrt();
        assert!((iv.lower - (111.0 - half)).abs() < 1e-9 && (iv.upper - (111.0 + half)).abs() < 1e-9);
        // 65.45 and 156.55 to two decimals.
        assert!((iv.lower - 65.45).abs() < 0.01 && (iv.upper - 156.55).abs() < 0.01);

        let mut degenerate = est.clone();
        degenerate.variance = 0.0;
        let iv = wald_interval(&degenerate, None, 0.95).unwrap();
        assert_eq!((iv.lower, iv.upper), (111.0, 111.0));

        let mut small = est.clone();
        small.n_hat = 5.0;
        small.variance = 100.0;
        let iv = wald_interval(&small, Some(3), 0.95).unwrap();
        assert_eq!(iv.lower, 3.0);
        assert!(iv.floored);
        let iv = wald_interval(&small, None, 0.95).unwrap();
        assert_eq!(iv.lower, 0.0);
        assert!(!iv.floored);
    }

    #[test]
    fn wald_other_levels() {
        let (cells, ctx) = worked_example();
        let est = estimate_psi::<f64>(&cells, &ctx).unwrap();
        let iv = wald_interval(&est, None, 0.90).unwrap();
        assert!((iv.upper - (111.0 + 1.6448536269514722 * 540f64.sqrt())).abs() < 1e-9);
        assert!(wald_interval(&est, None, 1.0).is_err());
    }

    #[test]
    fn dirichlet_draws_respect_floor() {
        let (_, ctx) = worked_example();
        let post = DirichletPosterior::sample(&ctx, 2_000, true, &mut substream(3, 0)).unwrap();
        assert!(post.draws().iter().all(|&d| d >= 57.0));
    }

    #[test]
    fn dirichlet_concentrated_posterior_binds_floor() {
        // No Stream-2-only cases: every draw sits near n_c.
        let (cells, ctx) = ctx_of(CellCounts::new(10, 4, 30, 8, 40, 0, 100));
        let cfg = PosteriorConfig { draws: 2_000, seed: 5, ..Default::default() };
        let iv = dirichlet_unadjusted_interval(&cells, &ctx, &cfg).unwrap();
        assert_eq!(iv.lower, 12.0);
        assert!(iv.floored);
    }

    #[test]
    fn dirichlet_reproducible() {
        let (cells, ctx) = worked_example();
        let cfg = PosteriorConfig { draws: 1_000, seed: 42, ..Default::default() };
        let a = dirichlet_adjusted_interval(&cells, &ctx, &cfg).unwrap();
        let b = dirichlet_adjusted_interval(&cells, &ctx, &cfg).unwrap();
        assert_eq!(a.lower.to_bits(), b.lower.to_bits());
        assert_eq!(a.upper.to_bits(), b.upper.to_bits());
        let other = dirichlet_adjusted_interval(&cells, &ctx, &PosteriorConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.lower, other.lower);
    }

    #[test]
    fn identity_transform_reproduces_unadjusted() {
        let (_, ctx) = worked_example();
        let post = DirichletPosterior::sample(&ctx, 1_000, true, &mut substream(9, 0)).unwrap();
        let un = post.unadjusted(0.95);
        assert_eq!(post.scaled_percentiles(1.0, 0.0, 0.95), (un.lower, un.upper));
    }

    #[test]
    fn adjusted_contains_scaled_interval() {
        let (cells, ctx) = worked_example();
        let post = DirichletPosterior::sample(&ctx, 2_000, true, &mut substream(1, 0)).unwrap();
        let parts = AdjustmentParts::compute(&cells, &ctx).unwrap();
        let (ll_ab, ul_ab) = post.scaled_percentiles(parts.scale, parts.shift, 0.95);
        let adj = post.adjusted(&cells, &ctx, 0.95).unwrap();
        assert!(adj.lower <= ll_ab && adj.upper >= ul_ab);
    }

    #[test]
    fn adjusted_needs_psi_variance() {
        let (cells, ctx) = ctx_of(CellCounts::new(10, 4, 30, 8, 40, 0, 100));
        let cfg = PosteriorConfig { draws: 200, ..Default::default() };
        assert_eq!(dirichlet_adjusted_interval(&cells, &ctx, &cfg), Err(Error::ZeroPsiVariance));
    }

    #[test]
    fn no_cases_is_an_error() {
        let (cells, ctx) = ctx_of(CellCounts::new(10, 0, 30, 0, 40, 0, 100));
        let cfg = PosteriorConfig { draws: 200, ..Default::default() };
        assert_eq!(dirichlet_unadjusted_interval(&cells, &ctx, &cfg), Err(Error::NoIdentifiedCases));
    }

    #[test]
    fn too_few_draws_rejected() {
        let (cells, ctx) = worked_example();
        let cfg = PosteriorConfig { draws: 99, ..Default::default() };
        assert!(matches!(
            dirichlet_unadjusted_interval(&cells, &ctx, &cfg),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn threshold_selection() {
        let cfg = PosteriorConfig { draws: 500, seed: 2, ..Default::default() };
        let (cells, ctx) = worked_example();
        assert_eq!(
            select_credible_interval(&cells, &ctx, &cfg).unwrap().method,
            IntervalMethod::DirichletAdjusted
        );

        // Estimated prevalence exactly 0.2: 2 + 8 + 2·50/10 = 20 of 100.
        let (cells, ctx) = ctx_of(CellCounts::new(2, 2, 38, 8, 8, 2, 40));
        assert_eq!(estimate_psi_star::<f64>(&cells, &ctx).unwrap().prevalence_hat, 0.2);
        assert_eq!(
            select_credible_interval(&cells, &ctx, &cfg).unwrap().method,
            IntervalMethod::DirichletAdjusted
        );

        // 1 + 4 + 1·50/10 = 10 of 100.
        let (cells, ctx) = ctx_of(CellCounts::new(3, 1, 42, 4, 9, 1, 40));
        assert_eq!(estimate_psi_star::<f64>(&cells, &ctx).unwrap().prevalence_hat, 0.1);
        assert_eq!(
            select_credible_interval(&cells, &ctx, &cfg).unwrap().method,
            IntervalMethod::DirichletUnadjusted
        );
    }
}
