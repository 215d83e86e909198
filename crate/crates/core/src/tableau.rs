//! Records, the seven-cell tally and design validation.
//!
//! | cell | Stream 1 | Stream 2 | test result |
//! |------|----------|----------|-------------|
//! | n1   | yes      | yes      | negative    |
//! | n2   | yes      | yes      | positive    |
//! | n3   | yes      | no       | negative    |
//! | n4   | yes      | no       | positive    |
//! | n5   | no       | yes      | negative    |
//! | n6   | no       | yes      | positive    |
//! | n7   | no       | no       | unobserved  |

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One member of the enumerated population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualRecord<X = f64> {
    pub id: String,
    pub in_stream1: bool,
    pub in_stream2: bool,
    /// Test result; only observable for sampled individuals.
    pub is_case: Option<bool>,
    /// Measurement of the characteristic of interest; only observable for
    /// sampled individuals.
    pub x_value: Option<X>,
}

impl<X> IndividualRecord<X> {
    pub fn sampled(id: impl Into<String>, in_stream1: bool, in_stream2: bool, is_case: bool) -> Self {
        Self {
            id: id.into(),
            in_stream1,
            in_stream2,
            is_case: Some(is_case),
            x_value: None,
        }
    }

    pub fn with_x(mut self, x: X) -> Self {
        self.x_value = Some(x);
        self
    }

    pub fn is_sampled(&self) -> bool {
        self.in_stream1 || self.in_stream2
    }

    /// The observed cell of a sampled record, `None` for unsampled records or
    /// records without a case status.
    pub fn cell(&self) -> Option<ObservedCell> {
        let case = self.is_case?;
        ObservedCell::from_flags(self.in_stream1, self.in_stream2, case)
    }
}

/// The six observable cells, n1 through n6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObservedCell {
    BothNegative,
    BothPositive,
    Stream1OnlyNegative,
    Stream1OnlyPositive,
    Stream2OnlyNegative,
    Stream2OnlyPositive,
}

impl ObservedCell {
    pub const ALL: [ObservedCell; 6] = [
        ObservedCell::BothNegative,
        ObservedCell::BothPositive,
        ObservedCell::Stream1OnlyNegative,
        ObservedCell::Stream1OnlyPositive,
        ObservedCell::Stream2OnlyNegative,
        ObservedCell::Stream2OnlyPositive,
    ];

    pub fn from_flags(in_stream1: bool, in_stream2: bool, is_case: bool) -> Option<Self> {
        use ObservedCell::*;
        Some(match (in_stream1, in_stream2, is_case) {
            (true, true, false) => BothNegative,
            (true, true, true) => BothPositive,
            (true, false, false) => Stream1OnlyNegative,
            (true, false, true) => Stream1OnlyPositive,
            (false, true, false) => Stream2OnlyNegative,
            (false, true, true) => Stream2OnlyPositive,
            (false, false, _) => return None,
        })
    }

    /// Zero-based position, so `index() + 1` is the cell number.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn in_stream1(self) -> bool {
        self.index() < 4
    }

    pub fn in_stream2(self) -> bool {
        matches!(self.index(), 0 | 1 | 4 | 5)
    }

    pub fn is_case(self) -> bool {
        self.index() % 2 == 1
    }
}

/// The seven tallies n1..n7.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellCounts {
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
    pub n4: u64,
    pub n5: u64,
    pub n6: u64,
    pub n7: u64,
}

impl CellCounts {
    pub fn new(n1: u64, n2: u64, n3: u64, n4: u64, n5: u64, n6: u64, n7: u64) -> Self {
        Self { n1, n2, n3, n4, n5, n6, n7 }
    }

    pub fn from_array(n: [u64; 7]) -> Self {
        Self::new(n[0], n[1], n[2], n[3], n[4], n[5], n[6])
    }

    pub fn to_array(self) -> [u64; 7] {
        [self.n1, self.n2, self.n3, self.n4, self.n5, self.n6, self.n7]
    }

    pub fn total(&self) -> u64 {
        self.to_array().iter().sum()
    }

    pub fn observed(&self, cell: ObservedCell) -> u64 {
        self.to_array()[cell.index()]
    }

    fn observed_mut(&mut self, cell: ObservedCell) -> &mut u64 {
        match cell {
            ObservedCell::BothNegative => &mut self.n1,
            ObservedCell::BothPositive => &mut self.n2,
            ObservedCell::Stream1OnlyNegative => &mut self.n3,
            ObservedCell::Stream1OnlyPositive => &mut self.n4,
            ObservedCell::Stream2OnlyNegative => &mut self.n5,
            ObservedCell::Stream2OnlyPositive => &mut self.n6,
        }
    }

    /// Number of individuals tested in Stream 1.
    pub fn stream1_size(&self) -> u64 {
        self.n1 + self.n2 + self.n3 + self.n4
    }

    /// Number of individuals tested in Stream 2.
    pub fn stream2_size(&self) -> u64 {
        self.n1 + self.n2 + self.n5 + self.n6
    }
}

impl fmt::Display for CellCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n1={} n2={} n3={} n4={} n5={} n6={} n7={}",
            self.n1, self.n2, self.n3, self.n4, self.n5, self.n6, self.n7
        )
    }
}

/// Design quantities implied by a tally.
///
/// The sampling rate is always `n_rs / n_tot`; it cannot be set independently
/// of the counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignContext {
    pub n_tot: u64,
    pub n_rs: u64,
    pub psi: f64,
    /// Cases found by both streams (n2).
    pub n11: u64,
    /// Cases found by Stream 1 only (n4).
    pub n10: u64,
    /// Cases found by Stream 2 only (n6).
    pub n01: u64,
    pub n1_dot: u64,
    pub n_dot1: u64,
    /// Positives in the Stream 2 sample (n2 + n6).
    pub n_rs_pos: u64,
    /// Distinct cases identified by either stream.
    pub n_c: u64,
}

impl DesignContext {
    pub fn from_cells(cells: &CellCounts) -> Result<Self> {
        let n_tot = cells.total();
        if n_tot == 0 {
            return Err(Error::EmptyPopulation);
        }
        let n_rs = cells.stream2_size();
        let (n11, n10, n01) = (cells.n2, cells.n4, cells.n6);
        Ok(Self {
            n_tot,
            n_rs,
            psi: n_rs as f64 / n_tot as f64,
            n11,
            n10,
            n01,
            n1_dot: n11 + n10,
            n_dot1: n11 + n01,
            n_rs_pos: cells.n2 + cells.n6,
            n_c: n11 + n10 + n01,
        })
    }

    /// Checks a tally against a separately stated population size.
    pub fn from_cells_checked(cells: &CellCounts, n_tot: u64) -> Result<Self> {
        let sum = cells.total();
        if sum != n_tot {
            return Err(Error::PartitionMismatch { sum, n_tot });
        }
        Self::from_cells(cells)
    }

    /// The sampling rate as an exact ratio in the requested scalar type.
    pub fn psi_as<T: Scalar>(&self) -> T {
        T::count(self.n_rs) / T::count(self.n_tot)
    }
}

/// Reduces a roster to its tally.
///
/// `n_tot` is the enumerated population size; unsampled individuals need not
/// be listed, and n7 is whatever remains.
pub fn tabulate<X>(records: &[IndividualRecord<X>], n_tot: u64) -> Result<(CellCounts, DesignContext)> {
    if n_tot == 0 {
        return Err(Error::EmptyPopulation);
    }
    let mut seen = HashSet::with_capacity(records.len());
    let mut cells = CellCounts::default();
    let mut sampled = 0u64;
    for record in records {
        if !seen.insert(record.id.as_str()) {
            return Err(Error::DuplicateId(record.id.clone()));
        }
        if !record.is_sampled() {
            if record.is_case.is_some() {
                return Err(Error::UnsampledCaseStatus(record.id.clone()));
            }
            if record.x_value.is_some() {
                return Err(Error::UnsampledMeasurement(record.id.clone()));
            }
            continue;
        }
        let cell = record
            .cell()
            .ok_or_else(|| Error::MissingCaseStatus(record.id.clone()))?;
        *cells.observed_mut(cell) += 1;
        sampled += 1;
    }
    if sampled > n_tot {
        return Err(Error::TooManySampled { sampled, n_tot });
    }
    cells.n7 = n_tot - sampled;
    let ctx = DesignContext::from_cells(&cells)?;
    Ok((cells, ctx))
}

/// Degenerate configurations that downstream estimators reject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignWarning {
    /// n5 + n6 = 0: the full-multinomial estimator is undefined.
    Stream2OnlyEmpty,
    /// n_rs <= 1: the finite population correction divides by zero.
    FpcDenominatorZero,
    /// n01 = 0: the known-psi variance is zero.
    NoStream2OnlyCases,
}

impl fmt::Display for DesignWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignWarning::Stream2OnlyEmpty => "Stream-2-only cell empty; full-multinomial estimator undefined",
            DesignWarning::FpcDenominatorZero => "FPC denominator zero",
            DesignWarning::NoStream2OnlyCases => {
                "no Stream-2-only cases; known-psi variance is zero"
            }
        })
    }
}

pub fn validate_design(cells: &CellCounts, ctx: &DesignContext) -> Vec<DesignWarning> {
    let mut warnings = Vec::new();
    if cells.n5 + cells.n6 == 0 {
        warnings.push(DesignWarning::Stream2OnlyEmpty);
    }
    if ctx.n_rs <= 1 {
        warnings.push(DesignWarning::FpcDenominatorZero);
    }
    if ctx.n01 == 0 {
        warnings.push(DesignWarning::NoStream2OnlyCases);
    }
    warnings
}
