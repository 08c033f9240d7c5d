use std::collections::BTreeMap;

use chrono::{DateTime, TimeDelta, Utc};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{BillingError, TariffError};
use crate::exact;
use crate::grouping::{ConsumerId, SlotUsageVector};
use crate::tariff::{slot_factor, EnergyAmount, ScaleFactor};

/// Energy a consumer drew over `[interval_start, interval_start + interval)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeterReading {
    pub consumer: ConsumerId,
    pub interval_start: DateTime<Utc>,
    pub interval: TimeDelta,
    pub energy: EnergyAmount,
}

impl MeterReading {
    pub fn interval_end(&self) -> DateTime<Utc> {
        self.interval_start + self.interval
    }
}

/// A billing period cut into equal slots that tile each day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotGrid {
    slot_hours: BigRational,
    period_days: u32,
    period_start: DateTime<Utc>,
}

impl SlotGrid {
    pub fn new(slot_hours: BigRational, period_days: u32, period_start: DateTime<Utc>) -> Result<Self, TariffError> {
        slot_factor(&slot_hours, period_days)?;
        Ok(Self { slot_hours, period_days, period_start })
    }

    pub fn slot_hours(&self) -> &BigRational {
        &self.slot_hours
    }

    pub fn period_days(&self) -> u32 {
        self.period_days
    }

    pub fn period_start(&self) -> DateTime<Utc> {
        self.period_start
    }

    pub fn period_end(&self) -> DateTime<Utc> {
        self.period_start + TimeDelta::days(i64::from(self.period_days))
    }

    pub fn slots_per_day(&self) -> usize {
        (exact::integer(24) / &self.slot_hours)
            .to_integer()
            .to_usize()
            .expect("slot count fits in usize")
    }

    pub fn slot_count(&self) -> usize {
        self.slots_per_day() * self.period_days as usize
    }

    /// Factor turning the period tariff into the per-slot tariff.
    pub fn slot_factor(&self) -> ScaleFactor {
        slot_factor(&self.slot_hours, self.period_days).expect("validated at construction")
    }

    fn slot_seconds(&self) -> BigRational {
        &self.slot_hours * exact::integer(3600)
    }

    /// Exact offset from the period start, in seconds.
    fn offset_seconds(&self, at: DateTime<Utc>) -> BigRational {
        seconds(at - self.period_start)
    }
}

fn seconds(delta: TimeDelta) -> BigRational {
    let nanos = BigInt::from(delta.num_seconds()) * BigInt::from(1_000_000_000u32)
        + BigInt::from(delta.subsec_nanos());
    BigRational::new(nanos, BigInt::from(1_000_000_000u32))
}

/// Consumers x slots grid of energy, rows sorted by consumer id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotUsageMatrix {
    consumers: Vec<ConsumerId>,
    slots: usize,
    cells: Vec<EnergyAmount>,
    /// Whether any reading touched the cell. Cells without one count as zero.
    observed: Vec<bool>,
}

impl SlotUsageMatrix {
    /// Fully observed matrix from explicit rows.
    pub fn from_rows(slots: usize, rows: Vec<(ConsumerId, Vec<EnergyAmount>)>) -> Result<Self, BillingError> {
        let mut rows = rows;
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(crate::error::GroupingError::DuplicateConsumer(w[0].0.to_string()).into());
        }
        let mut consumers = Vec::with_capacity(rows.len());
        let mut cells = Vec::with_capacity(rows.len() * slots);
        for (id, row) in rows {
            if row.len() != slots {
                return Err(BillingError::RaggedMatrix(id.to_string()));
            }
            consumers.push(id);
            cells.extend(row);
        }
        let observed = vec![true; cells.len()];
        Ok(Self { consumers, slots, cells, observed })
    }

    /// Rows named `c1`, `c2`, ... in order.
    pub fn from_anonymous_rows(rows: Vec<Vec<EnergyAmount>>) -> Result<Self, BillingError> {
        let slots = rows.first().map_or(0, Vec::len);
        let named = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| (ConsumerId::new(format!("c{}", i + 1)).expect("non-empty id"), r))
            .collect();
        Self::from_rows(slots, named)
    }

    pub fn consumers(&self) -> &[ConsumerId] {
        &self.consumers
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn consumer_index(&self, id: &ConsumerId) -> Option<usize> {
        self.consumers.binary_search(id).ok()
    }

    pub fn get(&self, consumer: usize, slot: usize) -> &EnergyAmount {
        &self.cells[consumer * self.slots + slot]
    }

    pub fn row(&self, consumer: usize) -> &[EnergyAmount] {
        &self.cells[consumer * self.slots..(consumer + 1) * self.slots]
    }

    pub fn row_total(&self, consumer: usize) -> EnergyAmount {
        self.row(consumer).iter().sum()
    }

    pub fn total(&self) -> EnergyAmount {
        self.cells.iter().sum()
    }

    /// Every consumer's usage in `slot`, including zeros.
    pub fn column(&self, slot: usize) -> SlotUsageVector {
        let entries = self
            .consumers
            .iter()
            .enumerate()
            .map(|(c, id)| (id.clone(), self.get(c, slot).clone()))
            .collect();
        SlotUsageVector::new(entries).expect("matrix ids are distinct")
    }

    pub fn column_total(&self, slot: usize) -> EnergyAmount {
        (0..self.consumers.len()).map(|c| self.get(c, slot)).sum()
    }

    pub fn is_observed(&self, consumer: usize, slot: usize) -> bool {
        self.observed[consumer * self.slots + slot]
    }

    /// Number of slots with no reading for `consumer`.
    pub fn missing_slots(&self, consumer: usize) -> usize {
        (0..self.slots).filter(|&t| !self.is_observed(consumer, t)).count()
    }

    pub(crate) fn set(&mut self, consumer: usize, slot: usize, value: EnergyAmount) {
        let i = consumer * self.slots + slot;
        self.cells[i] = value;
        self.observed[i] = true;
    }
}

/// Distributes readings over the slots of `grid`.
///
/// A reading that straddles slot boundaries is split in proportion to its
/// time overlap with each slot, so the matrix total always equals the sum of
/// the readings.
pub fn slot_partition(readings: &[MeterReading], grid: &SlotGrid) -> Result<SlotUsageMatrix, BillingError> {
    let mut by_consumer: BTreeMap<&ConsumerId, Vec<&MeterReading>> = BTreeMap::new();
    for r in readings {
        by_consumer.entry(&r.consumer).or_default().push(r);
    }
    let slots = grid.slot_count();
    let slot_len = grid.slot_seconds();
    let period_len = grid.offset_seconds(grid.period_end());
    let consumers: Vec<ConsumerId> = by_consumer.keys().map(|&c| c.clone()).collect();
    let mut cells = vec![BigRational::zero(); consumers.len() * slots];
    let mut observed = vec![false; consumers.len() * slots];

    for (row, list) in by_consumer.values_mut().enumerate() {
        list.sort_by_key(|r| r.interval_start);
        for pair in list.windows(2) {
            if pair[1].interval_start < pair[0].interval_end() {
                return Err(BillingError::OverlappingReadings {
                    consumer: pair[1].consumer.to_string(),
                    start: pair[1].interval_start.to_rfc3339(),
                });
            }
        }
        for reading in list.iter() {
            if reading.interval <= TimeDelta::zero() {
                return Err(BillingError::EmptyInterval {
                    consumer: reading.consumer.to_string(),
                    start: reading.interval_start.to_rfc3339(),
                });
            }
            let start = grid.offset_seconds(reading.interval_start);
            let end = grid.offset_seconds(reading.interval_end());
            if start.is_negative() || end > period_len {
                return Err(BillingError::OutsidePeriod {
                    consumer: reading.consumer.to_string(),
                    start: reading.interval_start.to_rfc3339(),
                    period_start: grid.period_start().to_rfc3339(),
                    period_end: grid.period_end().to_rfc3339(),
                });
            }
            let duration = &end - &start;
            let first = (&start / &slot_len).floor().to_integer().to_usize().expect("slot index");
            for slot in first..slots {
                let slot_start = &slot_len * exact::integer(slot as i64);
                if slot_start >= end {
                    break;
                }
                let slot_end = &slot_start + &slot_len;
                let lo = if start > slot_start { &start } else { &slot_start };
                let hi = if end < slot_end { &end } else { &slot_end };
                let overlap = hi - lo;
                if overlap.is_positive() {
                    let i = row * slots + slot;
                    cells[i] += reading.energy.value() * &overlap / &duration;
                    observed[i] = true;
                }
            }
        }
    }

    let cells = cells.into_iter().map(|v| EnergyAmount::new(v).expect("non-negative")).collect();
    Ok(SlotUsageMatrix { consumers, slots, cells, observed })
}
