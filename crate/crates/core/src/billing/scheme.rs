use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;

use super::metrics::{demand_metrics, DemandMetrics};
use super::partition::{SlotGrid, SlotUsageMatrix};
use crate::error::BillingError;
use crate::exact;
use crate::grouping::{group_slot_price, individual_slot_prices, proportional_allocation, AllocationPolicy, ConsumerId};
use crate::par::Execution;
use crate::tariff::{DisplayMoney, MoneyAmount, TariffSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeKind {
    /// The quoted tariff applied once to each consumer's period total.
    MonthlyIndividual,
    /// The slot-scaled tariff applied to each consumer in each slot.
    SlottedIndividual,
    /// The slot-scaled tariff applied to the pooled group in each slot, then
    /// allocated back to consumers.
    SlottedGroup,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [Self::MonthlyIndividual, Self::SlottedIndividual, Self::SlottedGroup];

    pub fn name(self) -> &'static str {
        match self {
            Self::MonthlyIndividual => "monthly-individual",
            Self::SlottedIndividual => "slotted-individual",
            Self::SlottedGroup => "slotted-group",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scheme {s:?} (expected monthly-individual, slotted-individual or slotted-group)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BillingOptions {
    pub policy: AllocationPolicy,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumerBill {
    pub consumer: ConsumerId,
    /// Per-slot charges; `None` under the monthly scheme, which has no slot
    /// structure. Group charges are already rounded allocations.
    pub slot_charges: Option<Vec<MoneyAmount>>,
    /// Exact sum of `slot_charges` (or the monthly price).
    pub total: MoneyAmount,
    /// Slots with no reading, billed as zero usage.
    pub missing_slots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BillingReport {
    pub scheme: SchemeKind,
    /// Allocation policy, for the group scheme only.
    pub policy: Option<AllocationPolicy>,
    pub currency: String,
    pub bills: Vec<ConsumerBill>,
    /// What the gateway pays per slot under the group scheme.
    pub group_slot_prices: Option<Vec<MoneyAmount>>,
    pub metrics: DemandMetrics,
}

impl BillingReport {
    /// Exact sum of all consumer totals.
    pub fn total(&self) -> MoneyAmount {
        self.bills.iter().map(|b| &b.total).sum()
    }

    /// Sum of the rounded consumer totals, i.e. what the printed bills add
    /// up to.
    pub fn billed_total(&self) -> DisplayMoney {
        self.bills.iter().map(|b| b.total.round()).sum()
    }

    /// Exact price paid upstream for the whole group. Equal to [`Self::total`]
    /// except under the group scheme.
    pub fn upstream_total(&self) -> MoneyAmount {
        match &self.group_slot_prices {
            Some(prices) => prices.iter().sum(),
            None => self.total(),
        }
    }

    pub fn bill_for(&self, consumer: &ConsumerId) -> Option<&ConsumerBill> {
        self.bills.iter().find(|b| &b.consumer == consumer)
    }
}

fn check_inputs(
    matrix: &SlotUsageMatrix,
    schedule: &TariffSchedule,
    grid: &SlotGrid,
) -> Result<(), BillingError> {
    if !schedule.scale().is_identity() {
        return Err(BillingError::ScaledSchedule(schedule.scale().to_string()));
    }
    if schedule.base_period_days() != grid.period_days() {
        return Err(BillingError::PeriodMismatch {
            schedule_days: schedule.base_period_days().to_string(),
            grid_days: grid.period_days().to_string(),
        });
    }
    if matrix.slots() != grid.slot_count() {
        return Err(BillingError::SlotCountMismatch { matrix: matrix.slots(), grid: grid.slot_count() });
    }
    Ok(())
}

/// Bills every consumer in `matrix` under one scheme.
///
/// `schedule` is the tariff as quoted for the grid's whole period.
pub fn run_scheme(
    matrix: &SlotUsageMatrix,
    schedule: &TariffSchedule,
    grid: &SlotGrid,
    scheme: SchemeKind,
    options: &BillingOptions,
) -> Result<BillingReport, BillingError> {
    check_inputs(matrix, schedule, grid)?;
    let exec = options.execution;
    let consumers = matrix.consumers().len();
    let slot_schedule = schedule.scale_by(&grid.slot_factor());

    let (rows, group_slot_prices): (Vec<Option<Vec<MoneyAmount>>>, _) = match scheme {
        SchemeKind::MonthlyIndividual => (vec![None; consumers], None),
        SchemeKind::SlottedIndividual => {
            let rows = exec.map_range(consumers, |c| {
                Some(matrix.row(c).iter().map(|u| slot_schedule.progressive_price(u)).collect())
            });
            (rows, None)
        }
        SchemeKind::SlottedGroup => {
            if consumers == 0 {
                (Vec::new(), Some(vec![MoneyAmount::zero(); matrix.slots()]))
            } else {
                let per_slot = exec.map_range(matrix.slots(), |t| -> Result<_, BillingError> {
                    let column = matrix.column(t);
                    let group = group_slot_price(&slot_schedule, &column)?;
                    let individual = individual_slot_prices(&slot_schedule, &column);
                    let shares = proportional_allocation(&group, &individual, options.policy)?;
                    Ok((group, shares.shares))
                });
                let mut rows = vec![Vec::with_capacity(matrix.slots()); consumers];
                let mut group_prices = Vec::with_capacity(matrix.slots());
                for slot in per_slot {
                    let (group, shares) = slot?;
                    for (c, (_, share)) in shares.into_iter().enumerate() {
                        rows[c].push(share.to_money());
                    }
                    group_prices.push(group);
                }
                (rows.into_iter().map(Some).collect(), Some(group_prices))
            }
        }
    };

    let bills = rows
        .into_iter()
        .enumerate()
        .map(|(c, slot_charges)| {
            let total = match &slot_charges {
                Some(charges) => charges.iter().sum(),
                None => schedule.progressive_price(&matrix.row_total(c)),
            };
            ConsumerBill {
                consumer: matrix.consumers()[c].clone(),
                slot_charges,
                total,
                missing_slots: matrix.missing_slots(c),
            }
        })
        .collect();

    Ok(BillingReport {
        scheme,
        policy: (scheme == SchemeKind::SlottedGroup).then_some(options.policy),
        currency: schedule.currency().to_owned(),
        bills,
        group_slot_prices,
        metrics: demand_metrics(matrix)?,
    })
}

/// All three schemes over the same matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeComparison {
    pub monthly: BillingReport,
    pub slotted: BillingReport,
    pub group: BillingReport,
    progressive: bool,
}

/// One consumer's totals across the schemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonRow {
    pub consumer: ConsumerId,
    pub monthly: MoneyAmount,
    pub slotted: MoneyAmount,
    pub group: MoneyAmount,
}

impl ComparisonRow {
    pub fn slotted_minus_monthly(&self) -> BigRational {
        self.slotted.delta(&self.monthly)
    }

    pub fn slotted_minus_group(&self) -> BigRational {
        self.slotted.delta(&self.group)
    }
}

/// A broken ordering between schemes. Only reported for progressive
/// schedules, where none should ever occur.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderingViolation {
    SlottedBelowMonthly { consumer: ConsumerId },
    GroupAboveIndividual { slot: usize },
}

impl fmt::Display for OrderingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SlottedBelowMonthly { consumer } => {
                write!(f, "{consumer}: slotted-individual total is below the monthly total")
            }
            Self::GroupAboveIndividual { slot } => {
                write!(f, "slot {slot}: group price exceeds the sum of individual prices")
            }
        }
    }
}

impl SchemeComparison {
    pub fn report(&self, scheme: SchemeKind) -> &BillingReport {
        match scheme {
            SchemeKind::MonthlyIndividual => &self.monthly,
            SchemeKind::SlottedIndividual => &self.slotted,
            SchemeKind::SlottedGroup => &self.group,
        }
    }

    pub fn rows(&self) -> Vec<ComparisonRow> {
        self.monthly
            .bills
            .iter()
            .zip(&self.slotted.bills)
            .zip(&self.group.bills)
            .map(|((m, s), g)| ComparisonRow {
                consumer: m.consumer.clone(),
                monthly: m.total.clone(),
                slotted: s.total.clone(),
                group: g.total.clone(),
            })
            .collect()
    }

    /// Exact aggregate saving of the group scheme over slotted individual
    /// billing, measured on what the gateway pays upstream.
    pub fn group_saving(&self) -> BigRational {
        self.slotted.upstream_total().delta(&self.group.upstream_total())
    }

    /// The same saving as it shows on rounded bills.
    pub fn billed_group_saving(&self) -> DisplayMoney {
        self.slotted.billed_total() - self.group.billed_total()
    }

    pub fn slotted_premium(&self) -> BigRational {
        self.slotted.total().delta(&self.monthly.total())
    }

    pub fn billed_slotted_premium(&self) -> DisplayMoney {
        self.slotted.billed_total() - self.monthly.billed_total()
    }

    /// Checks, on exact values, that slotting never lowers a consumer's bill
    /// and that pooling never raises a slot's price. Empty for
    /// non-progressive schedules, where neither ordering is guaranteed.
    pub fn ordering_violations(&self) -> Vec<OrderingViolation> {
        if !self.progressive {
            return Vec::new();
        }
        let mut out = Vec::new();
        for row in self.rows() {
            if row.slotted_minus_monthly().is_negative() {
                out.push(OrderingViolation::SlottedBelowMonthly { consumer: row.consumer });
            }
        }
        if let Some(group_prices) = &self.group.group_slot_prices {
            for (slot, group) in group_prices.iter().enumerate() {
                let individual: MoneyAmount = self
                    .slotted
                    .bills
                    .iter()
                    .filter_map(|b| b.slot_charges.as_ref().map(|c| &c[slot]))
                    .sum();
                if group > &individual {
                    out.push(OrderingViolation::GroupAboveIndividual { slot });
                }
            }
        }
        out
    }
}

pub fn compare_schemes(
    matrix: &SlotUsageMatrix,
    schedule: &TariffSchedule,
    grid: &SlotGrid,
    options: &BillingOptions,
) -> Result<SchemeComparison, BillingError> {
    let run = |scheme| run_scheme(matrix, schedule, grid, scheme, options);
    Ok(SchemeComparison {
        monthly: run(SchemeKind::MonthlyIndividual)?,
        slotted: run(SchemeKind::SlottedIndividual)?,
        group: run(SchemeKind::SlottedGroup)?,
        progressive: schedule.is_progressive(),
    })
}

pub(crate) fn signed_money(value: &BigRational) -> String {
    exact::to_fixed(value, MoneyAmount::MINOR_PLACES)
}
