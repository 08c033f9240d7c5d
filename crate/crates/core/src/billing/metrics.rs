use num_rational::BigRational;
use num_traits::Zero;

use super::partition::SlotUsageMatrix;
use crate::error::BillingError;
use crate::exact;
use crate::tariff::EnergyAmount;

/// Aggregate load shape of a usage matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandMetrics {
    /// Column sums: the group's load in each slot.
    pub slot_loads: Vec<EnergyAmount>,
    pub peak: EnergyAmount,
    pub mean: EnergyAmount,
    /// Peak-to-average ratio; `None` when the period carries no load at all.
    pub peak_to_average: Option<BigRational>,
}

impl DemandMetrics {
    pub fn par_display(&self, places: u32) -> String {
        self.peak_to_average
            .as_ref()
            .map_or_else(|| "undefined".to_owned(), |par| exact::to_fixed(par, places))
    }
}

/// Per-slot aggregate load, peak, mean and PAR. An empty roster yields an
/// all-zero load with an undefined PAR.
pub fn demand_metrics(matrix: &SlotUsageMatrix) -> Result<DemandMetrics, BillingError> {
    if matrix.slots() == 0 {
        return Err(BillingError::NoSlots);
    }
    let slot_loads: Vec<EnergyAmount> = (0..matrix.slots()).map(|t| matrix.column_total(t)).collect();
    let peak = slot_loads.iter().max().cloned().unwrap_or_default();
    let total: EnergyAmount = slot_loads.iter().sum();
    let mean = total.scaled(&exact::ratio(1, matrix.slots() as i64));
    let peak_to_average = (!mean.is_zero()).then(|| peak.value() / mean.value());
    debug_assert!(peak_to_average.as_ref().is_none_or(|p| *p >= BigRational::zero()));
    Ok(DemandMetrics { slot_loads, peak, mean, peak_to_average })
}
