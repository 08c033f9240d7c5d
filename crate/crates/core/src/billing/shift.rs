//! What-if evaluation of moving energy between slots.
//!
//! This only prices a proposed move; choosing moves is left to the caller.

use num_rational::BigRational;

use super::partition::{SlotGrid, SlotUsageMatrix};
use super::scheme::{compare_schemes, BillingOptions, SchemeComparison, SchemeKind};
use crate::error::BillingError;
use crate::grouping::ConsumerId;
use crate::tariff::{EnergyAmount, TariffSchedule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shift {
    pub consumer: ConsumerId,
    pub from_slot: usize,
    pub to_slot: usize,
    pub amount: EnergyAmount,
}

/// Returns a copy of `matrix` with every shift applied in order.
pub fn apply_shifts(matrix: &SlotUsageMatrix, shifts: &[Shift]) -> Result<SlotUsageMatrix, BillingError> {
    let mut out = matrix.clone();
    for shift in shifts {
        let c = out
            .consumer_index(&shift.consumer)
            .ok_or_else(|| BillingError::UnknownConsumer(shift.consumer.to_string()))?;
        for slot in [shift.from_slot, shift.to_slot] {
            if slot >= out.slots() {
                return Err(BillingError::UnknownSlot { slot, slots: out.slots() });
            }
        }
        let available = out.get(c, shift.from_slot).clone();
        let remaining = available.checked_sub(&shift.amount).ok_or_else(|| BillingError::InsufficientEnergy {
            slot: shift.from_slot,
            requested: shift.amount.display(),
            available: available.display(),
        })?;
        let target = out.get(c, shift.to_slot) + &shift.amount;
        out.set(c, shift.from_slot, remaining);
        out.set(c, shift.to_slot, target);
    }
    Ok(out)
}

/// Before/after comparison for a set of shifts by one or more consumers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftReport {
    pub shifts: Vec<Shift>,
    pub before: SchemeComparison,
    pub after: SchemeComparison,
}

/// Change in one scheme caused by the shifts, all signed `after - before`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeDelta {
    pub scheme: SchemeKind,
    pub consumer_cost: BigRational,
    pub consumer_cost_after: BigRational,
    pub group_total: BigRational,
    pub upstream_total: BigRational,
}

impl ShiftReport {
    /// Change in `consumer`'s bill under `scheme` (allocated cost for the
    /// group scheme).
    pub fn consumer_delta(&self, consumer: &ConsumerId, scheme: SchemeKind) -> Option<BigRational> {
        let before = self.before.report(scheme).bill_for(consumer)?;
        let after = self.after.report(scheme).bill_for(consumer)?;
        Some(after.total.delta(&before.total))
    }

    pub fn deltas(&self, consumer: &ConsumerId) -> Vec<SchemeDelta> {
        SchemeKind::ALL
            .into_iter()
            .filter_map(|scheme| {
                let before = self.before.report(scheme);
                let after = self.after.report(scheme);
                Some(SchemeDelta {
                    scheme,
                    consumer_cost: self.consumer_delta(consumer, scheme)?,
                    consumer_cost_after: after.bill_for(consumer)?.total.value().clone(),
                    group_total: after.total().delta(&before.total()),
                    upstream_total: after.upstream_total().delta(&before.upstream_total()),
                })
            })
            .collect()
    }

    pub fn peak_delta(&self) -> BigRational {
        self.after.monthly.metrics.peak.value() - self.before.monthly.metrics.peak.value()
    }

    pub fn par_before(&self) -> Option<&BigRational> {
        self.before.monthly.metrics.peak_to_average.as_ref()
    }

    pub fn par_after(&self) -> Option<&BigRational> {
        self.after.monthly.metrics.peak_to_average.as_ref()
    }

    pub fn par_delta(&self) -> Option<BigRational> {
        Some(self.par_after()? - self.par_before()?)
    }
}

pub fn what_if_shifts(
    matrix: &SlotUsageMatrix,
    schedule: &TariffSchedule,
    grid: &SlotGrid,
    shifts: &[Shift],
    options: &BillingOptions,
) -> Result<ShiftReport, BillingError> {
    let shifted = apply_shifts(matrix, shifts)?;
    Ok(ShiftReport {
        shifts: shifts.to_vec(),
        before: compare_schemes(matrix, schedule, grid, options)?,
        after: compare_schemes(&shifted, schedule, grid, options)?,
    })
}

pub fn what_if_shift(
    matrix: &SlotUsageMatrix,
    schedule: &TariffSchedule,
    grid: &SlotGrid,
    shift: &Shift,
    options: &BillingOptions,
) -> Result<ShiftReport, BillingError> {
    what_if_shifts(matrix, schedule, grid, std::slice::from_ref(shift), options)
}

/// The same within-day move repeated on every day of the grid.
pub fn daily_shifts(grid: &SlotGrid, consumer: &ConsumerId, from: usize, to: usize, amount: &EnergyAmount) -> Vec<Shift> {
    let per_day = grid.slots_per_day();
    (0..grid.period_days() as usize)
        .map(|day| Shift {
            consumer: consumer.clone(),
            from_slot: day * per_day + from,
            to_slot: day * per_day + to,
            amount: amount.clone(),
        })
        .collect()
}
