//! Exact progressive-tariff billing over short time slots.
//!
//! A monthly block tariff is rescaled to time slots and applied per consumer
//! or collectively to a consumer group; the group bill is shared back out in
//! proportion to stand-alone bills. All arithmetic is on exact rationals and
//! rounding happens only when values are rendered.

pub mod billing;
pub mod cli;
pub mod error;
pub mod exact;
pub mod grouping;
pub mod io;
pub mod par;
pub mod tariff;

pub use billing::{
    compare_schemes, demand_metrics, run_scheme, slot_partition, what_if_shift, BillingOptions, BillingReport,
    DemandMetrics, MeterReading, SchemeComparison, SchemeKind, Shift, ShiftReport, SlotGrid, SlotUsageMatrix,
};
pub use error::{BillingError, GroupingError, InputError, ParseNumberError, TariffError};
pub use grouping::{
    group_saving, group_slot_price, individual_slot_prices, proportional_allocation, AllocationPolicy,
    AllocationResult, ConsumerId, GroupPricingResult, SlotUsageVector,
};
pub use par::Execution;
pub use tariff::{
    kepco_residential, round_money, slot_factor, validate_schedule, DisplayMoney, EnergyAmount, MoneyAmount, Rate,
    ScaleFactor, ScheduleDescription, TariffSchedule, TariffTier, TierCharge, TierDescription,
};
