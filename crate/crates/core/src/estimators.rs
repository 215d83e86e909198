//! Closed-form case-count estimators and the sampling-rate planner.
//!
//! Everything here is generic over [`Scalar`]: evaluating with an exact
//! rational type gives exact point estimates and variances, which the tests
//! use to check unbiasedness by enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::tableau::{CellCounts, DesignContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// Stream 2 random sample alone.
    RS,
    /// Bias-corrected two-stream capture-recapture.
    Chapman,
    /// Known sampling rate.
    Psi,
    /// Full-multinomial maximum likelihood.
    PsiStar,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::RS => "N_RS",
            EstimatorKind::Chapman => "N_Chap",
            EstimatorKind::Psi => "N_psi",
            EstimatorKind::PsiStar => "N_psi_star",
        }
    }
}

/// A case-count estimate with its estimated variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountEstimate<T> {
    pub method: EstimatorKind,
    pub n_hat: T,
    pub variance: T,
    /// `n_hat / n_tot`.
    pub prevalence_hat: T,
    pub n_tot: u64,
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub psi: T,
}

impl<T: Scalar> CountEstimate<T> {
    fn new(method: EstimatorKind, ctx: &DesignContext, n_hat: T, variance: T) -> Self {
        let prevalence_hat = n_hat.clone() / T::count(ctx.n_tot);
        Self {
            method,
            n_hat,
            variance,
            prevalence_hat,
            n_tot: ctx.n_tot,
            n11: ctx.n11,
            n10: ctx.n10,
            n01: ctx.n01,
            psi: ctx.psi_as(),
        }
    }
}

impl<T: Real> CountEstimate<T> {
    pub fn se(&self) -> T {
        self.variance.sqrt()
    }
}

/// Finite population correction `n(N - n) / (N(n - 1))` for a without-replacement
/// sample of `n` from `big_n`, capped at 1.
pub fn fpc_factor<T: Scalar>(n: u64, big_n: u64) -> Result<T> {
    if n < 2 {
        return Err(Error::SampleTooSmall(n));
    }
    if n > big_n {
        return Err(Error::InvalidParameter(format!(
            "sample size {n} exceeds population size {big_n}"
        )));
    }
    let raw = T::count(n) * T::count(big_n - n) / (T::count(big_n) * T::count(n - 1));
    Ok(raw.min_of(T::one()))
}

/// Estimator based on the Stream 2 random sample alone, with FPC-corrected
/// variance.
pub fn estimate_rs<T: Scalar>(cells: &CellCounts, ctx: &DesignContext) -> Result<CountEstimate<T>> {
    let fpc = fpc_factor::<T>(ctx.n_rs, ctx.n_tot)?;
    let n_rs = T::count(ctx.n_rs);
    let n_tot = T::count(ctx.n_tot);
    let p = T::count(cells.n2 + cells.n6) / n_rs.clone();
    let variance =
        n_tot.clone() * n_tot.clone() * fpc * p.clone() * (T::one() - p.clone()) / n_rs;
    Ok(CountEstimate::new(EstimatorKind::RS, ctx, n_tot * p, variance))
}

/// Chapman's bias-corrected two-stream estimator.
pub fn estimate_chapman<T: Scalar>(cells: &CellCounts, ctx: &DesignContext) -> Result<CountEstimate<T>> {
    debug_assert_eq!(cells.n2, ctx.n11);
    let a = T::count(ctx.n1_dot + 1);
    let b = T::count(ctx.n_dot1 + 1);
    let m = T::count(ctx.n11 + 1);
    let n_hat = a.clone() * b.clone() / m.clone() - T::one();
    let variance = a * b * T::count(ctx.n10) * T::count(ctx.n01)
        / (m.clone() * m * T::count(ctx.n11 + 2));
    Ok(CountEstimate::new(EstimatorKind::Chapman, ctx, n_hat, variance))
}

/// Estimator exploiting the known Stream 2 sampling rate:
/// `n11 + n10 + n01 / psi`, variance `n01 (1 - psi) / psi^2`.
pub fn estimate_psi<T: Scalar>(_cells: &CellCounts, ctx: &DesignContext) -> Result<CountEstimate<T>> {
    if ctx.n_rs == 0 {
        return Err(Error::ZeroSamplingRate);
    }
    let psi: T = ctx.psi_as();
    let n01 = T::count(ctx.n01);
    let n_hat = T::count(ctx.n11 + ctx.n10) + n01.clone() / psi.clone();
    let variance = n01 * (T::one() - psi.clone()) / (psi.clone() * psi);
    Ok(CountEstimate::new(EstimatorKind::Psi, ctx, n_hat, variance))
}

/// Lincoln-Petersen variance with zero cells among n11, n10, n01 replaced by 1/2.
pub fn lincoln_petersen_variance<T: Scalar>(ctx: &DesignContext) -> T {
    let sub = |n: u64| if n == 0 { T::half() } else { T::count(n) };
    let (n11, n10, n01) = (sub(ctx.n11), sub(ctx.n10), sub(ctx.n01));
    (n11.clone() + n10.clone()) * (n11.clone() + n01.clone()) * n10 * n01
        / (n11.clone() * n11.clone() * n11)
}

/// Full-multinomial MLE `n2 + n4 + n6 (n5 + n6 + n7) / (n5 + n6)`, with the
/// inverse-variance combination of the random-sample and Lincoln-Petersen
/// variances.
pub fn estimate_psi_star<T: Scalar>(cells: &CellCounts, ctx: &DesignContext) -> Result<CountEstimate<T>> {
    let stream2_only = cells.n5 + cells.n6;
    if stream2_only == 0 {
        return Err(Error::EmptyStream2Only);
    }
    let ratio = T::count(cells.n5 + cells.n6 + cells.n7) / T::count(stream2_only);
    let n_hat = T::count(cells.n2 + cells.n4) + T::count(cells.n6) * ratio;

    let var_rs = estimate_rs::<T>(cells, ctx)?.variance;
    let var_lp = lincoln_petersen_variance::<T>(ctx);
    Ok(CountEstimate::new(
        EstimatorKind::PsiStar,
        ctx,
        n_hat,
        harmonic_combination(var_rs, var_lp),
    ))
}

/// `[1/a + 1/b]^-1`, or zero when either variance is zero.
fn harmonic_combination<T: Scalar>(a: T, b: T) -> T {
    if a.is_zero() || b.is_zero() {
        return T::zero();
    }
    a.clone() * b.clone() / (a + b)
}

/// Planning assumptions for the Stream 2 sampling rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanInputs<T = f64> {
    /// Assumed prevalence.
    pub p: T,
    /// Assumed share of cases Stream 1 will identify.
    pub phi1: T,
    pub n_tot: u64,
    /// Target standard error of the prevalence estimate.
    pub sigma_p: T,
}

impl<T: Scalar> PlanInputs<T> {
    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (T::zero(), T::one());
        if !(self.p > zero && self.p < one) {
            return Err(Error::InvalidParameter(format!("prevalence {:?} must lie in (0, 1)", self.p)));
        }
        if !(self.phi1 >= zero && self.phi1 <= one) {
            return Err(Error::InvalidParameter(format!("phi1 {:?} must lie in [0, 1]", self.phi1)));
        }
        if self.n_tot == 0 {
            return Err(Error::EmptyPopulation);
        }
        if !(self.sigma_p > zero) {
            return Err(Error::InvalidParameter(format!("sigma_p {:?} must be positive", self.sigma_p)));
        }
        Ok(())
    }
}

/// Required Stream 2 sampling rate
/// `p(1 - phi1) / (n_tot^2 sigma_p^2 + p(1 - phi1))`, clamped to [0, 1].
pub fn plan_sampling_rate<T: Scalar>(inputs: &PlanInputs<T>) -> Result<T> {
    inputs.validate()?;
    let q = inputs.p.clone() * (T::one() - inputs.phi1.clone());
    let n = T::count(inputs.n_tot);
    let denom = n.clone() * n * inputs.sigma_p.clone() * inputs.sigma_p.clone() + q.clone();
    let psi = q / denom;
    Ok(psi.max_of(T::zero()).min_of(T::one()))
}
