//! Monte Carlo studies of the count and mean estimators.
//!
//! Each replicate draws a fresh population from random stream `i` of the
//! master seed, so a run is reproducible bit for bit and does not depend on
//! how many worker threads evaluate it. Replicates run on the current rayon
//! pool; [`with_threads`] runs a closure on a pool of a given size.

mod series1;
mod series2;

pub use series1::run_series1;
pub use series2::run_series2;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Bernoulli, Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::PosteriorConfig;
use crate::stats::{mean, sample_sd};
use crate::tableau::{CellCounts, IndividualRecord, ObservedCell};

/// Chance of symptoms among cases and non-cases.
pub const SYMPTOM_RATE: (f64, f64) = (0.5, 0.1);
/// Chance of volunteering for Stream 1 with and without symptoms.
pub const VOLUNTEER_RATE: (f64, f64) = (0.9, 0.2);

/// How many cases a simulated population holds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseCountMode {
    /// Exactly `round(p · n_tot)` in every replicate.
    #[default]
    Fixed,
    /// `Binomial(n_tot, p)` per replicate.
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Series1Config {
    pub n_tot: u64,
    pub prevalence: f64,
    pub psi: f64,
    pub reps: usize,
    pub posterior_draws: usize,
    pub seed: u64,
    pub case_mode: CaseCountMode,
    pub level: f64,
}

impl Default for Series1Config {
    fn default() -> Self {
        Self {
            n_tot: 500,
            prevalence: 0.1,
            psi: 0.2,
            reps: 10_000,
            posterior_draws: 10_000,
            seed: 0,
            case_mode: CaseCountMode::Fixed,
            level: 0.95,
        }
    }
}

impl Series1Config {
    pub fn case_count(&self) -> u64 {
        (self.prevalence * self.n_tot as f64).round() as u64
    }

    pub fn stream2_size(&self) -> u64 {
        (self.psi * self.n_tot as f64).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_tot == 0 {
            return Err(Error::EmptyPopulation);
        }
        if !(self.prevalence > 0.0 && self.prevalence <= 1.0) {
            return bad(format!("prevalence {} must lie in (0, 1]", self.prevalence));
        }
        if !(self.psi > 0.0 && self.psi <= 1.0) {
            return bad(format!("sampling rate {} must lie in (0, 1]", self.psi));
        }
        if self.case_count() < 1 {
            return bad(format!("prevalence {} gives no cases among {}", self.prevalence, self.n_tot));
        }
        if self.stream2_size() < 2 {
            return bad(format!("sampling rate {} gives a Stream 2 sample below 2", self.psi));
        }
        if self.reps == 0 {
            return bad("at least one replicate is required".into());
        }
        PosteriorConfig { draws: self.posterior_draws, seed: self.seed, level: self.level, floor: true }.validate()
    }
}

/// Mean and standard deviation of X within one (symptom, disease) stratum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub mean: f64,
    pub sd: f64,
}

/// X distributions for strata (symptom, disease) = (1, 1), (0, 1), (1, 0),
/// (0, 0), in that order.
pub type StrataParams = [Stratum; 4];

pub const DEFAULT_STRATA: StrataParams = [
    Stratum { mean: 10.0, sd: 0.75 },
    Stratum { mean: 5.0, sd: 0.5 },
    Stratum { mean: 2.5, sd: 1.2 },
    Stratum { mean: 1.0, sd: 1.5 },
];

fn stratum_index(symptom: bool, case: bool) -> usize {
    match (symptom, case) {
        (true, true) => 0,
        (false, true) => 1,
        (true, false) => 2,
        (false, false) => 3,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Series2Config {
    pub base: Series1Config,
    pub bootstrap_b: usize,
    pub strata: StrataParams,
}

impl Default for Series2Config {
    fn default() -> Self {
        Self {
            base: Series1Config { prevalence: 0.2, ..Series1Config::default() },
            bootstrap_b: 1_000,
            strata: DEFAULT_STRATA,
        }
    }
}

impl Series2Config {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.bootstrap_b < 2 {
            return Err(Error::InvalidParameter("at least 2 bootstrap replicates are required".into()));
        }
        for s in &self.strata {
            if !(s.sd > 0.0 && s.sd.is_finite() && s.mean.is_finite()) {
                return Err(Error::InvalidParameter(format!("stratum {s:?} needs a finite mean and sd > 0")));
            }
        }
        Ok(())
    }

    /// Superpopulation mean of X among cases.
    pub fn case_mean(&self) -> f64 {
        let s = SYMPTOM_RATE.0;
        s * self.strata[0].mean + (1.0 - s) * self.strata[1].mean
    }

    pub fn noncase_mean(&self) -> f64 {
        let s = SYMPTOM_RATE.1;
        s * self.strata[2].mean + (1.0 - s) * self.strata[3].mean
    }

    pub fn overall_mean(&self) -> f64 {
        let p = self.base.prevalence;
        p * self.case_mean() + (1.0 - p) * self.noncase_mean()
    }
}

/// One simulated individual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Person {
    pub is_case: bool,
    pub symptomatic: bool,
    pub in_stream1: bool,
    pub in_stream2: bool,
    pub x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub people: Vec<Person>,
    pub n_cases: u64,
}

impl Population {
    pub fn n_tot(&self) -> u64 {
        self.people.len() as u64
    }

    pub fn cells(&self) -> CellCounts {
        let mut n = [0u64; 7];
        for p in &self.people {
            match ObservedCell::from_flags(p.in_stream1, p.in_stream2, p.is_case) {
                Some(cell) => n[cell.index()] += 1,
                None => n[6] += 1,
            }
        }
        CellCounts::from_array(n)
    }

    /// What an analyst would hold: case status and X only for the sampled.
    pub fn records(&self) -> Vec<IndividualRecord<f64>> {
        self.people
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let sampled = p.in_stream1 || p.in_stream2;
                IndividualRecord {
                    id: i.to_string(),
                    in_stream1: p.in_stream1,
                    in_stream2: p.in_stream2,
                    is_case: sampled.then_some(p.is_case),
                    x_value: if sampled { p.x } else { None },
                }
            })
            .collect()
    }
}

/// Draws a population: cases, symptoms, Stream 1 volunteering, a Stream 2
/// simple random sample of the whole roster, and X when `strata` is given.
pub fn generate_population<R: Rng + ?Sized>(
    cfg: &Series1Config,
    strata: Option<&StrataParams>,
    rng: &mut R,
) -> Population {
    let n_tot = cfg.n_tot;
    let n_cases = match cfg.case_mode {
        CaseCountMode::Fixed => cfg.case_count().min(n_tot),
        CaseCountMode::Binomial => Binomial::new(n_tot, cfg.prevalence).expect("valid prevalence").sample(rng),
    };
    let coin = |p: f64| Bernoulli::new(p).expect("probability in [0, 1]");
    let (sym_case, sym_non) = (coin(SYMPTOM_RATE.0), coin(SYMPTOM_RATE.1));
    let (vol_sym, vol_non) = (coin(VOLUNTEER_RATE.0), coin(VOLUNTEER_RATE.1));
    let normals = strata.map(|s| s.map(|st| Normal::new(st.mean, st.sd).expect("valid stratum")));

    let mut people: Vec<Person> = (0..n_tot)
        .map(|i| {
            let is_case = i < n_cases;
            let symptomatic = if is_case { sym_case.sample(rng) } else { sym_non.sample(rng) };
            let in_stream1 = if symptomatic { vol_sym.sample(rng) } else { vol_non.sample(rng) };
            let x = normals.as_ref().map(|d| d[stratum_index(symptomatic, is_case)].sample(rng));
            Person { is_case, symptomatic, in_stream1, in_stream2: false, x }
        })
        .collect();
    let m = cfg.stream2_size().min(n_tot) as usize;
    for i in sample_indices(rng, n_tot as usize, m) {
        people[i].in_stream2 = true;
    }
    Population { people, n_cases }
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Monte Carlo summary for one estimator and interval pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummaryRow {
    pub estimator: String,
    pub interval: String,
    /// Average target value over replicates.
    pub truth: f64,
    pub mc_mean: Option<f64>,
    pub mc_sd: Option<f64>,
    pub avg_se: Option<f64>,
    /// Share of computable intervals containing the target.
    pub coverage: Option<f64>,
    pub avg_width: Option<f64>,
    pub reps: usize,
    /// Replicates where the estimate was defined.
    pub estimates: usize,
    /// Replicates where the interval was defined.
    pub intervals: usize,
    pub seed: u64,
}

/// Writes summary rows as CSV with a header line.
pub fn write_csv<W: std::io::Write>(rows: &[SimSummaryRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row).map_err(|e| Error::Output(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::Output(e.to_string()))
}

/// What one replicate contributes to one row.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Outcome {
    pub estimate: Option<f64>,
    pub se: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub truth: f64,
}

/// Folds per-replicate outcomes, in replicate order, into one row.
pub(crate) fn summarize(
    estimator: &str,
    interval: &str,
    outcomes: impl Iterator<Item = Outcome>,
    seed: u64,
) -> SimSummaryRow {
    let mut estimates = Vec::new();
    let mut ses = Vec::new();
    let mut widths = Vec::new();
    let mut truths = Vec::new();
    let mut covered = 0usize;
    for o in outcomes {
        truths.push(o.truth);
        if let Some(e) = o.estimate {
            estimates.push(e);
        }
        if let Some(se) = o.se {
            ses.push(se);
        }
        if let Some((lo, hi)) = o.interval {
            widths.push(hi - lo);
            if lo <= o.truth && o.truth <= hi {
                covered += 1;
            }
        }
    }
    let avg = |v: &[f64]| (!v.is_empty()).then(|| mean(v));
    SimSummaryRow {
        estimator: estimator.to_string(),
        interval: interval.to_string(),
        truth: avg(&truths).unwrap_or(f64::NAN),
        mc_mean: avg(&estimates),
        mc_sd: (estimates.len() >= 2).then(|| sample_sd(&estimates)),
        avg_se: avg(&ses),
        coverage: (!widths.is_empty()).then(|| covered as f64 / widths.len() as f64),
        avg_width: avg(&widths),
        reps: truths.len(),
        estimates: estimates.len(),
        intervals: widths.len(),
        seed,
    }
}
