use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {text:?} as an exact number: {reason}")]
pub struct ParseNumberError {
    pub text: String,
    pub reason: String,
}

impl ParseNumberError {
    pub(crate) fn new(text: &str, reason: impl Into<String>) -> Self {
        Self { text: text.to_owned(), reason: reason.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TariffError {
    #[error("tariff schedule has no tiers")]
    EmptyTiers,
    #[error("tier {index}: upper bound {bound} is not above the previous bound {previous}")]
    NonIncreasingBounds { index: usize, bound: String, previous: String },
    #[error("tier {index}: only the last tier may be unbounded")]
    UnboundedMiddleTier { index: usize },
    #[error("last tier must be unbounded")]
    BoundedLastTier,
    #[error("tier {index}: rate {rate} is below the previous rate {previous}; set allow_decreasing_rates to accept a non-progressive schedule")]
    DecreasingRate { index: usize, rate: String, previous: String },
    #[error("tier {index}: negative {field} {value}")]
    Negative { index: usize, field: &'static str, value: String },
    #[error("base period must be a positive number of days")]
    InvalidBasePeriod,
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(String),
    #[error("slot length {0} h does not divide a 24 h day into whole slots")]
    SlotNotDivisorOfDay(String),
    #[error("negative energy amount {0}")]
    NegativeEnergy(String),
    #[error("negative money amount {0}")]
    NegativeMoney(String),
    #[error("negative rate {0}")]
    NegativeRate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupingError {
    #[error("group has no consumers")]
    EmptyGroup,
    #[error("consumer id must not be empty")]
    EmptyConsumerId,
    #[error("consumer {0} appears more than once")]
    DuplicateConsumer(String),
    #[error("individual prices sum to zero but the group price {0} is positive; proportions are undefined")]
    UndefinedProportions(String),
    #[error("individual price for {0} is negative")]
    NegativeIndividualPrice(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BillingError {
    #[error(transparent)]
    Tariff(#[from] TariffError),
    #[error(transparent)]
    Grouping(#[from] GroupingError),
    #[error("reading for {consumer} at {start} lies outside the billing period {period_start} .. {period_end}")]
    OutsidePeriod { consumer: String, start: String, period_start: String, period_end: String },
    #[error("readings for {consumer} overlap at {start}")]
    OverlappingReadings { consumer: String, start: String },
    #[error("reading for {consumer} at {start} has a non-positive duration")]
    EmptyInterval { consumer: String, start: String },
    #[error("schedule is quoted for {schedule_days} days but the billing grid spans {grid_days} days")]
    PeriodMismatch { schedule_days: String, grid_days: String },
    #[error("schedule has already been scaled by {0}; an unscaled base schedule is required")]
    ScaledSchedule(String),
    #[error("usage matrix has {matrix} slots but the grid defines {grid}")]
    SlotCountMismatch { matrix: usize, grid: usize },
    #[error("usage matrix has no slots")]
    NoSlots,
    #[error("unknown consumer {0}")]
    UnknownConsumer(String),
    #[error("slot {slot} is out of range (0..{slots})")]
    UnknownSlot { slot: usize, slots: usize },
    #[error("cannot shift {requested} kWh out of slot {slot}: only {available} kWh available")]
    InsufficientEnergy { slot: usize, requested: String, available: String },
    #[error("matrix row for {0} has the wrong number of slots")]
    RaggedMatrix(String),
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Json { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {field}: {message}")]
    Field { path: PathBuf, field: String, message: String },
    #[error("{path}: {source}")]
    Schedule { path: PathBuf, source: TariffError },
    #[error("{path}: bad header {found:?}, expected \"consumer_id,interval_start,energy_kwh\"")]
    BadHeader { path: PathBuf, found: String },
    #[error("{path}: row {row}: {message}")]
    Row { path: PathBuf, row: usize, message: String },
}
