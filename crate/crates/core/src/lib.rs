//! Anchor-stream capture-recapture estimation for enumerated closed populations.
//!
//! A voluntary, arbitrarily non-representative testing stream (Stream 1) is
//! combined with a simple random sample of the full roster drawn after the
//! voluntary window closes (Stream 2, the "anchor" stream). Because the
//! Stream 2 sampling rate is known by design, the combined data identify
//! efficient estimators of the case count, the prevalence and general means.
//!
//! The crate is organised as:
//!
//! - [`tableau`]: individual records, the seven-cell tally and design checks.
//! - [`estimators`]: closed-form case-count estimators, their variances and the
//!   Stream 2 sampling-rate planner.
//! - [`intervals`]: Wald, FPC-adjusted Jeffreys and Dirichlet-multinomial
//!   credible intervals.
//! - [`means`]: standardization estimators of general means with bootstrap
//!   percentile inference.
//! - [`simlab`]: seeded, parallel Monte Carlo studies.
//!
//! Point estimators and variances are generic over [`Scalar`], so the same
//! code runs on `f64`, `f32` or exact rationals.

pub mod error;
pub mod estimators;
pub mod intervals;
pub mod means;
pub mod rng;
pub mod scalar;
pub mod simlab;
pub mod special;
pub mod stats;
pub mod tableau;

pub use error::{Error, Result};
pub use estimators::{
    estimate_chapman, estimate_psi, estimate_psi_star, estimate_rs, fpc_factor,
    plan_sampling_rate, CountEstimate, EstimatorKind, PlanInputs,
};
pub use intervals::{
    dirichlet_adjusted_interval, dirichlet_unadjusted_interval, jeffreys_fpc_interval,
    select_credible_interval, wald_interval, IntervalMethod, IntervalResult, PosteriorConfig,
};
pub use means::{
    bootstrap_mean, mean_overall, mean_subgroup, stream_means, BootstrapConfig, FpcTriple, MeanEstimate,
    MeanTarget, NonCaseTotal, StreamMeans, Subgroup,
};
pub use scalar::{Real, Scalar};
pub use simlab::{
    generate_population, run_series1, run_series2, CaseCountMode, Series1Config, Series2Config,
    SimSummaryRow,
    write_csv,
};
pub use tableau::{
    tabulate, validate_design, CellCounts, DesignContext, DesignWarning, IndividualRecord,
};

/// Double-precision count estimate.
pub type CountEstimateF64 = CountEstimate<f64>;
/// Single-precision count estimate.
pub type CountEstimateF32 = CountEstimate<f32>;
/// Record carrying a double-precision measurement.
pub type Record = IndividualRecord<f64>;
