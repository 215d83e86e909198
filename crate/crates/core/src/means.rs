//! Standardization estimators of general means and their bootstrap
//! percentile intervals.
//!
//! The overall mean standardizes over Stream 1 capture status: the Stream 1
//! sample mean is weighted by the known Stream 1 share of the roster, and the
//! mean of everyone Stream 1 missed is estimated from the Stream-2-only
//! records, which are a random sample of that group by design. Subgroup
//! means (cases, non-cases) use the same split with the subgroup size taken
//! from the full-multinomial count estimator.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::fpc_factor;
use crate::rng::substream;
use crate::scalar::{Real, Scalar};
use crate::stats::{central_interval, sample_sd};
use crate::tableau::{CellCounts, DesignContext, IndividualRecord, ObservedCell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeanTarget {
    Overall,
    Cases,
    NonCases,
    /// Cases minus non-cases.
    Difference,
}

impl MeanTarget {
    pub const ALL: [MeanTarget; 4] =
        [MeanTarget::Overall, MeanTarget::Cases, MeanTarget::NonCases, MeanTarget::Difference];

    pub fn label(self) -> &'static str {
        match self {
            MeanTarget::Overall => "overall",
            MeanTarget::Cases => "cases",
            MeanTarget::NonCases => "noncases",
            MeanTarget::Difference => "difference",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subgroup {
    Cases,
    NonCases,
}

impl Subgroup {
    /// Cells of the subgroup: (captured by both, Stream 1 only, Stream 2 only).
    fn cells(self) -> [ObservedCell; 3] {
        match self {
            Subgroup::Cases => [
                ObservedCell::BothPositive,
                ObservedCell::Stream1OnlyPositive,
                ObservedCell::Stream2OnlyPositive,
            ],
            Subgroup::NonCases => [
                ObservedCell::BothNegative,
                ObservedCell::Stream1OnlyNegative,
                ObservedCell::Stream2OnlyNegative,
            ],
        }
    }

    fn stream2_only_label(self) -> &'static str {
        match self {
            Subgroup::Cases => "Stream-2-only case cell",
            Subgroup::NonCases => "Stream-2-only non-case cell",
        }
    }

    fn stream1_label(self) -> &'static str {
        match self {
            Subgroup::Cases => "Stream 1 case group",
            Subgroup::NonCases => "Stream 1 non-case group",
        }
    }
}

/// How the non-case population size is estimated.
///
/// Both forms are algebraically identical for any table; the complement form
/// is kept for sensitivity checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NonCaseTotal {
    /// `n1 + n3 + n5 (n5 + n6 + n7) / (n5 + n6)`.
    #[default]
    Mirrored,
    /// `n_tot` minus the estimated case count.
    Complement,
}

/// Counts, sums and sums of squares of the measurement per observed cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSums<T> {
    pub count: [u64; 6],
    pub sum: [T; 6],
    pub sum_sq: [T; 6],
    /// Records in the cell with no measurement.
    pub missing: [u64; 6],
    pub n7: u64,
}

const CELL_NAMES: [&str; 6] = ["cell n1", "cell n2", "cell n3", "cell n4", "cell n5", "cell n6"];

impl<T: Scalar> CellSums<T> {
    pub fn empty(n7: u64) -> Self {
        Self {
            count: [0; 6],
            sum: std::array::from_fn(|_| T::zero()),
            sum_sq: std::array::from_fn(|_| T::zero()),
            missing: [0; 6],
            n7,
        }
    }

    pub fn add(&mut self, cell: ObservedCell, x: Option<&T>) {
        let i = cell.index();
        self.count[i] += 1;
        match x {
            Some(x) => {
                self.sum[i] = self.sum[i].clone() + x.clone();
                self.sum_sq[i] = self.sum_sq[i].clone() + x.clone() * x.clone();
            }
            None => self.missing[i] += 1,
        }
    }

    /// Accumulates every sampled record; n7 is whatever of `n_tot` was not
    /// sampled.
    pub fn from_records(records: &[IndividualRecord<T>], n_tot: u64) -> Result<Self> {
        let mut sums = Self::empty(0);
        for record in records.iter().filter(|r| r.is_sampled()) {
            let cell = record
                .cell()
                .ok_or_else(|| Error::MissingCaseStatus(record.id.clone()))?;
            sums.add(cell, record.x_value.as_ref());
        }
        let sampled: u64 = sums.count.iter().sum();
        if sampled > n_tot {
            return Err(Error::TooManySampled { sampled, n_tot });
        }
        sums.n7 = n_tot - sampled;
        Ok(sums)
    }

    pub fn cells(&self) -> CellCounts {
        let c = self.count;
        CellCounts::new(c[0], c[1], c[2], c[3], c[4], c[5], self.n7)
    }

    pub fn n_tot(&self) -> u64 {
        self.count.iter().sum::<u64>() + self.n7
    }

    fn require_measured(&self, cells: &[ObservedCell]) -> Result<()> {
        for cell in cells {
            let i = cell.index();
            if self.missing[i] > 0 {
                return Err(Error::MissingMeasurements { cell: CELL_NAMES[i], count: self.missing[i] });
            }
        }
        Ok(())
    }

    fn count_of(&self, cells: &[ObservedCell]) -> u64 {
        cells.iter().map(|c| self.count[c.index()]).sum()
    }

    fn sum_of(&self, cells: &[ObservedCell]) -> T {
        cells.iter().fold(T::zero(), |acc, c| acc + self.sum[c.index()].clone())
    }

    fn mean_of(&self, cells: &[ObservedCell]) -> Option<T> {
        let n = self.count_of(cells);
        (n > 0).then(|| self.sum_of(cells) / T::count(n))
    }

    /// Plain sample mean over Stream 1, optionally restricted to a subgroup.
    pub fn stream1_mean(&self, subgroup: Option<Subgroup>) -> Option<T> {
        self.mean_of(&select(subgroup, |c| c.in_stream1()))
    }

    /// Plain sample mean over Stream 2, optionally restricted to a subgroup.
    pub fn stream2_mean(&self, subgroup: Option<Subgroup>) -> Option<T> {
        self.mean_of(&select(subgroup, |c| c.in_stream2()))
    }

    /// Full-multinomial size estimate of a subgroup.
    pub fn subgroup_total(&self, subgroup: Subgroup, rule: NonCaseTotal) -> Result<T> {
        let stream2_only = self.count[4] + self.count[5];
        if stream2_only == 0 {
            return Err(Error::EmptyStream2Only);
        }
        let ratio = T::count(stream2_only + self.n7) / T::count(stream2_only);
        let cases = T::count(self.count[1] + self.count[3]) + T::count(self.count[5]) * ratio.clone();
        Ok(match (subgroup, rule) {
            (Subgroup::Cases, _) => cases,
            (Subgroup::NonCases, NonCaseTotal::Mirrored) => {
                T::count(self.count[0] + self.count[2]) + T::count(self.count[4]) * ratio
            }
            (Subgroup::NonCases, NonCaseTotal::Complement) => T::count(self.n_tot()) - cases,
        })
    }
}

fn select(subgroup: Option<Subgroup>, keep: impl Fn(ObservedCell) -> bool) -> Vec<ObservedCell> {
    ObservedCell::ALL
        .into_iter()
        .filter(|&c| keep(c))
        .filter(|c| match subgroup {
            None => true,
            Some(Subgroup::Cases) => c.is_case(),
            Some(Subgroup::NonCases) => !c.is_case(),
        })
        .collect()
}

const STREAM1: [ObservedCell; 4] = [
    ObservedCell::BothNegative,
    ObservedCell::BothPositive,
    ObservedCell::Stream1OnlyNegative,
    ObservedCell::Stream1OnlyPositive,
];
const STREAM2_ONLY: [ObservedCell; 2] = [ObservedCell::Stream2OnlyNegative, ObservedCell::Stream2OnlyPositive];

/// Overall mean standardized over Stream 1 capture status.
pub fn overall_from_sums<T: Scalar>(sums: &CellSums<T>) -> Result<T> {
    sums.require_measured(&ObservedCell::ALL)?;
    let n_tot = T::count(sums.n_tot());
    let x01 = sums.mean_of(&STREAM2_ONLY).ok_or(Error::EmptyStream2Only)?;
    let share1 = T::count(sums.count_of(&STREAM1)) / n_tot.clone();
    // x̄1• · p̂1• written as the Stream 1 total over n_tot.
    Ok(sums.sum_of(&STREAM1) / n_tot + x01 * (T::one() - share1))
}

/// Subgroup mean; `floor` raises the estimated subgroup size before use.
pub fn subgroup_from_sums<T: Scalar>(
    sums: &CellSums<T>,
    subgroup: Subgroup,
    rule: NonCaseTotal,
    floor: Option<u64>,
) -> Result<T> {
    let [both, s1_only, s2_only] = subgroup.cells();
    sums.require_measured(&[both, s1_only, s2_only])?;
    let in_stream1 = sums.count_of(&[both, s1_only]);
    if in_stream1 == 0 {
        return Err(Error::EmptyCell(subgroup.stream1_label()));
    }
    let x01 = sums
        .mean_of(&[s2_only])
        .ok_or(Error::EmptyCell(subgroup.stream2_only_label()))?;
    let mut total = sums.subgroup_total(subgroup, rule)?;
    if let Some(f) = floor {
        total = total.max_of(T::count(f));
    }
    let share1 = T::count(in_stream1) / total.clone();
    Ok(sums.sum_of(&[both, s1_only]) / total + x01 * (T::one() - share1))
}

/// Overall mean of the measurement.
pub fn mean_overall<T: Scalar>(records: &[IndividualRecord<T>], ctx: &DesignContext) -> Result<T> {
    overall_from_sums(&CellSums::from_records(records, ctx.n_tot)?)
}

/// Mean of the measurement among cases or non-cases.
pub fn mean_subgroup<T: Scalar>(
    records: &[IndividualRecord<T>],
    ctx: &DesignContext,
    subgroup: Subgroup,
) -> Result<T> {
    let sums = CellSums::from_records(records, ctx.n_tot)?;
    subgroup_from_sums(&sums, subgroup, NonCaseTotal::Mirrored, None)
}

/// Naive stream means used as benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamMeans<T = f64> {
    /// Stream 1 sample mean; biased under preferential self-selection.
    pub stream1_mean: T,
    pub stream2_mean: T,
    /// FPC-adjusted standard error of the Stream 2 mean.
    pub stream2_se: T,
}

pub fn stream_means_from_sums<T: Real>(sums: &CellSums<T>) -> Result<StreamMeans<T>> {
    let stream2 = select(None, |c| c.in_stream2());
    sums.require_measured(&ObservedCell::ALL)?;
    let stream1_mean = sums.stream1_mean(None).ok_or(Error::EmptyCell("Stream 1"))?;
    let n_rs = sums.count_of(&stream2);
    let stream2_mean = sums.mean_of(&stream2).ok_or(Error::EmptyCell("Stream 2"))?;
    let fpc: T = fpc_factor(n_rs, sums.n_tot())?;
    let n = T::count(n_rs);
    let ss: T = stream2.iter().fold(T::zero(), |acc, c| acc + sums.sum_sq[c.index()]);
    let var = ((ss - n * stream2_mean * stream2_mean) / (n - T::one())).max(T::zero());
    Ok(StreamMeans { stream1_mean, stream2_mean, stream2_se: fpc.sqrt() * var.sqrt() / n.sqrt() })
}

pub fn stream_means<T: Real>(records: &[IndividualRecord<T>], ctx: &DesignContext) -> Result<StreamMeans<T>> {
    stream_means_from_sums(&CellSums::from_records(records, ctx.n_tot)?)
}

/// Finite population corrections for the three observed capture histories,
/// each treated as a random sample of its part of the roster: both streams
/// and Stream 1 only out of the Stream 1 group, Stream 2 only out of everyone
/// Stream 1 missed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FpcTriple<T = f64> {
    pub fpc11: T,
    pub fpc10: T,
    pub fpc01: T,
}

impl<T: Scalar> FpcTriple<T> {
    pub fn from_cells(cells: &CellCounts) -> Result<Self> {
        let stream1 = cells.stream1_size();
        Ok(Self {
            fpc11: fpc_factor(cells.n1 + cells.n2, stream1)?,
            fpc10: fpc_factor(cells.n3 + cells.n4, stream1)?,
            fpc01: fpc_factor(cells.n5 + cells.n6, cells.n5 + cells.n6 + cells.n7)?,
        })
    }
}

/// Scale and shift applied to a replicate cell mean: `a·x + b` with
/// `a = sqrt(FPC)` and `b = x_orig (1 - a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct MeanShrink {
    scale: f64,
    shift: f64,
}

impl MeanShrink {
    fn new(fpc: f64, original_mean: f64) -> Self {
        let scale = fpc.sqrt();
        Self { scale, shift: original_mean * (1.0 - scale) }
    }

    fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.shift
    }
}

const BOTH: [ObservedCell; 2] = [ObservedCell::BothNegative, ObservedCell::BothPositive];
const STREAM1_ONLY: [ObservedCell; 2] = [ObservedCell::Stream1OnlyNegative, ObservedCell::Stream1OnlyPositive];

/// Evaluates bootstrap replicates against constants fixed by the original
/// sample.
#[derive(Debug, Clone)]
pub struct ReplicateEvaluator {
    shrink: Option<[MeanShrink; 3]>,
    case_floor: u64,
    noncase_floor: u64,
    rule: NonCaseTotal,
}

impl ReplicateEvaluator {
    /// Fixes FPC shrinkage and subgroup floors from the original sample. The
    /// overall target is unavailable when any of the three FPC factors is
    /// undefined.
    pub fn new(original: &CellSums<f64>, rule: NonCaseTotal) -> Self {
        let shrink = FpcTriple::<f64>::from_cells(&original.cells()).ok().and_then(|fpc| {
            Some([
                MeanShrink::new(fpc.fpc11, original.mean_of(&BOTH)?),
                MeanShrink::new(fpc.fpc10, original.mean_of(&STREAM1_ONLY)?),
                MeanShrink::new(fpc.fpc01, original.mean_of(&STREAM2_ONLY)?),
            ])
        });
        let c = original.count;
        Self {
            shrink,
            case_floor: c[1] + c[3] + c[5],
            noncase_floor: c[0] + c[2] + c[4],
            rule,
        }
    }

    pub fn supports(&self, target: MeanTarget) -> bool {
        target != MeanTarget::Overall || self.shrink.is_some()
    }

    /// One replicate of `target`, or `None` when the resample cannot produce
    /// it.
    pub fn evaluate(&self, target: MeanTarget, sums: &CellSums<f64>) -> Option<f64> {
        match target {
            MeanTarget::Overall => self.overall(sums),
            MeanTarget::Cases => {
                subgroup_from_sums(sums, Subgroup::Cases, self.rule, Some(self.case_floor)).ok()
            }
            MeanTarget::NonCases => {
                subgroup_from_sums(sums, Subgroup::NonCases, self.rule, Some(self.noncase_floor)).ok()
            }
            MeanTarget::Difference => {
                Some(self.evaluate(MeanTarget::Cases, sums)? - self.evaluate(MeanTarget::NonCases, sums)?)
            }
        }
    }

    fn overall(&self, sums: &CellSums<f64>) -> Option<f64> {
        let [s11, s10, s01] = self.shrink?;
        let n_tot = sums.n_tot() as f64;
        let x01 = s01.apply(sums.mean_of(&STREAM2_ONLY)?);
        let term = |cells: &[ObservedCell], shrink: MeanShrink| match sums.mean_of(cells) {
            Some(x) => sums.count_of(cells) as f64 / n_tot * shrink.apply(x),
            None => 0.0,
        };
        let share1 = sums.count_of(&STREAM1) as f64 / n_tot;
        Some(term(&BOTH, s11) + term(&STREAM1_ONLY, s10) + x01 * (1.0 - share1))
    }
}

/// The captured records, reduced to what resampling needs.
#[derive(Debug, Clone)]
pub struct CapturedSample {
    items: Vec<(ObservedCell, Option<f64>)>,
    n7: u64,
}

impl CapturedSample {
    pub fn from_records(records: &[IndividualRecord<f64>], n_tot: u64) -> Result<Self> {
        let mut items = Vec::new();
        for record in records.iter().filter(|r| r.is_sampled()) {
            let cell = record
                .cell()
                .ok_or_else(|| Error::MissingCaseStatus(record.id.clone()))?;
            items.push((cell, record.x_value));
        }
        let sampled = items.len() as u64;
        if sampled > n_tot {
            return Err(Error::TooManySampled { sampled, n_tot });
        }
        Ok(Self { items, n7: n_tot - sampled })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn sums(&self) -> CellSums<f64> {
        let mut sums = CellSums::empty(self.n7);
        for (cell, x) in &self.items {
            sums.add(*cell, x.as_ref());
        }
        sums
    }

    /// Draws `len()` records with replacement; n7 is held at its original
    /// value.
    pub fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> CellSums<f64> {
        let mut sums = CellSums::empty(self.n7);
        let n = self.items.len();
        for _ in 0..n {
            let (cell, x) = &self.items[rng.random_range(0..n)];
            sums.add(*cell, x.as_ref());
        }
        sums
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub level: f64,
    pub noncase_total: NonCaseTotal,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { replicates: 1_000, seed: 0, level: 0.95, noncase_total: NonCaseTotal::Mirrored }
    }
}

impl BootstrapConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub target: MeanTarget,
    pub mu_hat: f64,
    /// Standard deviation of the usable replicates.
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
    pub b_used: usize,
    pub b_requested: usize,
    pub warnings: Vec<String>,
}

/// Point estimate on the original sample.
pub fn point_estimate(sums: &CellSums<f64>, target: MeanTarget, rule: NonCaseTotal) -> Result<f64> {
    match target {
        MeanTarget::Overall => overall_from_sums(sums),
        MeanTarget::Cases => subgroup_from_sums(sums, Subgroup::Cases, rule, None),
        MeanTarget::NonCases => subgroup_from_sums(sums, Subgroup::NonCases, rule, None),
        MeanTarget::Difference => Ok(point_estimate(sums, MeanTarget::Cases, rule)?
            - point_estimate(sums, MeanTarget::NonCases, rule)?),
    }
}

/// Percentile bootstrap for a mean target. Replicate `b` uses random stream
/// `b` of `cfg.seed`, so results do not depend on evaluation order.
pub fn bootstrap_mean(
    records: &[IndividualRecord<f64>],
    ctx: &DesignContext,
    target: MeanTarget,
    cfg: &BootstrapConfig,
) -> Result<MeanEstimate> {
    let sample = CapturedSample::from_records(records, ctx.n_tot)?;
    bootstrap_sample(&sample, target, cfg)
}

pub fn bootstrap_sample(sample: &CapturedSample, target: MeanTarget, cfg: &BootstrapConfig) -> Result<MeanEstimate> {
    let original = sample.sums();
    let mu_hat = point_estimate(&original, target, cfg.noncase_total)?;
    let evaluator = ReplicateEvaluator::new(&original, cfg.noncase_total);
    if !evaluator.supports(target) {
        FpcTriple::<f64>::from_cells(&original.cells())?;
    }
    let mut values: Vec<f64> = (0..cfg.replicates as u64)
        .filter_map(|b| evaluator.evaluate(target, &sample.resample(&mut substream(cfg.seed, b))))
        .collect();
    summarize_replicates(target, mu_hat, &mut values, cfg.replicates, cfg.level)
}

/// Standard error and percentile interval from replicate values.
pub fn summarize_replicates(
    target: MeanTarget,
    mu_hat: f64,
    values: &mut [f64],
    requested: usize,
    level: f64,
) -> Result<MeanEstimate> {
    let used = values.len();
    if used < 2 {
        return Err(Error::TooFewReplicates { used, requested });
    }
    let se = sample_sd(values);
    let (lower, upper) = central_interval(values, level);
    let mut warnings = Vec::new();
    if (used as f64) < 0.9 * requested as f64 {
        warnings.push(format!(
            "only {used} of {requested} bootstrap replicates were usable"
        ));
    }
    Ok(MeanEstimate { target, mu_hat, se, lower, upper, b_used: used, b_requested: requested, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::tabulate;
    use num_rational::Rational64;

    fn rec(id: &str, s1: bool, s2: bool, case: bool, x: f64) -> IndividualRecord<f64> {
        IndividualRecord::sampled(id, s1, s2, case).with_x(x)
    }

    fn six_person_roster() -> (Vec<IndividualRecord<f64>>, DesignContext) {
        let records = vec![
            rec("a", true, false, false, 1.0),
            rec("b", true, false, true, 3.0),
            rec("c", true, true, false, 2.0),
            rec("d", false, true, false, 4.0),
            rec("e", false, true, true, 6.0),
        ];
        let (_, ctx) = tabulate(&records, 6).unwrap();
        (records, ctx)
    }

    #[test]
    fn overall_on_toy_roster() {
        // Stream 1 mean 2 with share 1/2; Stream-2-only mean 5 with share 1/2.
        let (records, ctx) = six_person_roster();
        assert!((mean_overall(&records, &ctx).unwrap() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn overall_constant() {
        let records: Vec<_> = six_person_roster()
            .0
            .into_iter()
            .map(|mut r| {
                r.x_value = Some(2.75);
                r
            })
            .collect();
        let (_, ctx) = tabulate(&records, 6).unwrap();
        assert!((mean_overall(&records, &ctx).unwrap() - 2.75).abs() < 1e-12);
    }

    #[test]
    fn overall_requires_stream2_only() {
        let records = vec![rec("a", true, false, false, 1.0), rec("b", true, true, true, 3.0)];
        let (_, ctx) = tabulate(&records, 6).unwrap();
        assert_eq!(mean_overall(&records, &ctx), Err(Error::EmptyStream2Only));
    }

    #[test]
    fn missing_measurement_is_reported() {
        let mut records = six_person_roster().0;
        records[3].x_value = None;
        let (_, ctx) = tabulate(&records, 6).unwrap();
        assert!(matches!(mean_overall(&records, &ctx), Err(Error::MissingMeasurements { .. })));
        // The case mean does not touch the non-case record.
        let cases = mean_subgroup(&records, &ctx, Subgroup::Cases);
        assert!(!matches!(cases, Err(Error::MissingMeasurements { .. })));
    }

    fn case_roster() -> Vec<IndividualRecord<Rational64>> {
        let r = |id: &str, s1, s2, case, x: i64| {
            IndividualRecord::sampled(id, s1, s2, case).with_x(Rational64::from_integer(x))
        };
        vec![
            r("c1", true, false, true, 4),
            r("c2", true, false, true, 6),
            r("c3", false, true, true, 2),
            r("n1", false, true, false, 1),
            r("n2", true, false, false, 1),
        ]
    }

    #[test]
    fn case_mean_by_hand() {
        // Case total 2 + 1·(1 + 1 + 2)/2 = 4, Stream 1 share 2/4:
        // 5·(1/2) + 2·(1/2) = 7/2.
        let records = case_roster();
        let (cells, ctx) = tabulate(&records, 7).unwrap();
        assert_eq!(cells.n7, 2);
        assert_eq!(
            mean_subgroup(&records, &ctx, Subgroup::Cases).unwrap(),
            Rational64::new(7, 2)
        );
    }

    #[test]
    fn subgroup_requires_stream2_only_member() {
        let mut records = case_roster();
        records.retain(|r| r.id != "c3");
        let (_, ctx) = tabulate(&records, 7).unwrap();
        assert_eq!(
            mean_subgroup(&records, &ctx, Subgroup::Cases),
            Err(Error::EmptyCell("Stream-2-only case cell"))
        );
        assert!(mean_subgroup(&records, &ctx, Subgroup::NonCases).is_ok());
    }

    #[test]
    fn noncase_totals_agree() {
        let sums: CellSums<Rational64> = {
            let mut s = CellSums::empty(304);
            for (cell, n) in ObservedCell::ALL.into_iter().zip([6, 5, 100, 46, 33, 6]) {
                for _ in 0..n {
                    s.add(cell, Some(&Rational64::from_integer(1)));
                }
            }
            s
        };
        assert_eq!(
            sums.subgroup_total(Subgroup::NonCases, NonCaseTotal::Mirrored).unwrap(),
            sums.subgroup_total(Subgroup::NonCases, NonCaseTotal::Complement).unwrap()
        );
    }

    #[test]
    fn stream_means_by_hand() {
        // Stream 2 values {1, 2, 3} out of 6: s = 1, FPC = 3·3/(6·2).
        let records = vec![
            rec("a", false, true, false, 1.0),
            rec("b", true, true, true, 2.0),
            rec("c", false, true, false, 3.0),
            rec("d", true, false, true, 10.0),
        ];
        let (_, ctx) = tabulate(&records, 6).unwrap();
        let m = stream_means(&records, &ctx).unwrap();
        assert!((m.stream2_mean - 2.0).abs() < 1e-12);
        assert!((m.stream1_mean - 6.0).abs() < 1e-12);
        assert!((m.stream2_se - 0.75f64.sqrt() / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn stream_means_census() {
        let records: Vec<_> = (0..5).map(|i| rec(&i.to_string(), i % 2 == 0, true, false, i as f64)).collect();
        let (_, ctx) = tabulate(&records, 5).unwrap();
        assert_eq!(stream_means(&records, &ctx).unwrap().stream2_se, 0.0);
    }

    #[test]
    fn fpc_triple_definition() {
        let cells = CellCounts::new(6, 5, 100, 46, 33, 6, 304);
        let t = FpcTriple::<Rational64>::from_cells(&cells).unwrap();
        // 11 of 157 (raw 1606/1570, capped), 146 of 157, 39 of 343.
        assert_eq!(t.fpc11, Rational64::from_integer(1));
        assert_eq!(t.fpc10, Rational64::new(146 * 11, 157 * 145));
        assert_eq!(t.fpc01, Rational64::new(39 * 304, 343 * 38));
        let tiny = CellCounts::new(1, 0, 4, 2, 3, 1, 10);
        assert_eq!(FpcTriple::<f64>::from_cells(&tiny), Err(Error::SampleTooSmall(1)));
    }

    #[test]
    fn bootstrap_constant_measurement() {
        let mut records = Vec::new();
        for (i, (s1, s2, case)) in [
            (true, true, true),
            (true, true, false),
            (true, true, false),
            (true, false, true),
            (true, false, false),
            (true, false, false),
            (false, true, true),
            (false, true, false),
            (false, true, false),
            (false, true, true),
        ]
        .into_iter()
        .enumerate()
        {
            records.push(rec(&i.to_string(), s1, s2, case, 3.0));
        }
        let (_, ctx) = tabulate(&records, 30).unwrap();
        for target in [MeanTarget::Overall, MeanTarget::Cases, MeanTarget::NonCases] {
            let est = bootstrap_mean(&records, &ctx, target, &BootstrapConfig { replicates: 200, ..Default::default() })
                .unwrap();
            assert!((est.mu_hat - 3.0).abs() < 1e-12);
            assert!((est.lower - 3.0).abs() < 1e-12 && (est.upper - 3.0).abs() < 1e-12, "{est:?}");
            assert!(est.se < 1e-12);
            assert!(est.b_used <= est.b_requested);
        }
        let diff = bootstrap_mean(&records, &ctx, MeanTarget::Difference, &BootstrapConfig::default()).unwrap();
        assert!(diff.mu_hat.abs() < 1e-12 && diff.lower.abs() < 1e-12 && diff.upper.abs() < 1e-12);
    }

    #[test]
    fn bootstrap_reproducible() {
        let (records, ctx) = six_person_roster();
        let cfg = BootstrapConfig { replicates: 300, seed: 17, ..Default::default() };
        let a = bootstrap_mean(&records, &ctx, MeanTarget::Cases, &cfg);
        let b = bootstrap_mean(&records, &ctx, MeanTarget::Cases, &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn bootstrap_overall_needs_fpc_triple() {
        let (records, ctx) = six_person_roster();
        assert_eq!(
            bootstrap_mean(&records, &ctx, MeanTarget::Overall, &BootstrapConfig::default()),
            Err(Error::SampleTooSmall(1))
        );
    }

    #[test]
    fn replicate_on_original_with_unit_fpc_is_the_estimate() {
        // n*11 = 2 of 4 and n*10 = 2 of 4 give raw FPC 2·2/(4·1) = 1;
        // n*01 = 2 of 4 likewise.
        let records = vec![
            rec("a", true, true, true, 1.5),
            rec("b", true, true, false, 2.5),
            rec("c", true, false, true, 7.0),
            rec("d", true, false, false, 0.5),
            rec("e", false, true, true, 4.0),
            rec("f", false, true, false, 1.0),
        ];
        let (cells, ctx) = tabulate(&records, 8).unwrap();
        let t = FpcTriple::<f64>::from_cells(&cells).unwrap();
        assert_eq!((t.fpc11, t.fpc10, t.fpc01), (1.0, 1.0, 1.0));
        let sample = CapturedSample::from_records(&records, ctx.n_tot).unwrap();
        let sums = sample.sums();
        let eval = ReplicateEvaluator::new(&sums, NonCaseTotal::Mirrored);
        let replicate = eval.evaluate(MeanTarget::Overall, &sums).unwrap();
        assert!((replicate - overall_from_sums(&sums).unwrap()).abs() < 1e-12);
    }
}
