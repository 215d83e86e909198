use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("record `{0}` was sampled but has no case status")]
    MissingCaseStatus(String),
    #[error("record `{0}` was never sampled but carries a case status")]
    UnsampledCaseStatus(String),
    #[error("record `{0}` was never sampled but carries a measurement")]
    UnsampledMeasurement(String),
    #[error("{sampled} sampled records exceed the population size {n_tot}")]
    TooManySampled { sampled: u64, n_tot: u64 },
    #[error("population size must be positive")]
    EmptyPopulation,
    #[error("cell counts sum to {sum} but the population size is {n_tot}")]
    PartitionMismatch { sum: u64, n_tot: u64 },
    #[error("Stream 2 sample size is {0}; at least 2 are needed for the finite population correction")]
    SampleTooSmall(u64),
    #[error("Stream 2 sampling rate is zero")]
    ZeroSamplingRate,
    #[error("Stream-2-only cell (n5 + n6) is empty; the full-multinomial estimator is undefined")]
    EmptyStream2Only,
    #[error("no cases were identified in either stream")]
    NoIdentifiedCases,
    #[error("variance of the known-psi estimator is zero; the adjusted interval scale factor is undefined")]
    ZeroPsiVariance,
    #[error("{0} is empty")]
    EmptyCell(&'static str),
    #[error("{count} records in {cell} have no measurement")]
    MissingMeasurements { cell: &'static str, count: u64 },
    #[error("only {used} of {requested} bootstrap replicates were usable")]
    TooFewReplicates { used: usize, requested: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl Error {
    /// Whether the error comes from malformed input rather than an unmet
    /// estimator precondition.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DuplicateId(_)
                | Error::MissingCaseStatus(_)
                | Error::UnsampledCaseStatus(_)
                | Error::UnsampledMeasurement(_)
                | Error::TooManySampled { .. }
                | Error::EmptyPopulation
                | Error::PartitionMismatch { .. }
                | Error::InvalidParameter(_)
        )
    }
}
