//! Batch billing over consumption traces: slotting readings, running the
//! three pricing schemes, load metrics and what-if shifts.

mod metrics;
mod partition;
mod scheme;
mod shift;

pub use metrics::{demand_metrics, DemandMetrics};
pub use partition::{slot_partition, MeterReading, SlotGrid, SlotUsageMatrix};
pub(crate) use scheme::signed_money;
pub use scheme::{
    compare_schemes, run_scheme, BillingOptions, BillingReport, ComparisonRow, ConsumerBill, OrderingViolation,
    SchemeComparison, SchemeKind,
};
pub use shift::{apply_shifts, daily_shifts, what_if_shift, what_if_shifts, SchemeDelta, Shift, ShiftReport};
