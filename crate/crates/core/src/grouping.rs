//! Pricing a group of consumers collectively and splitting the bill.
//!
//! Within one slot the group is billed as a single virtual consumer whose tier
//! ranges are the slot ranges multiplied by the roster size. Because the
//! price is convex, the pooled bill never exceeds the sum of stand-alone
//! bills; the pooled bill is then shared out in proportion to the stand-alone
//! bills.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::GroupingError;
use crate::exact;
use crate::tariff::{DisplayMoney, EnergyAmount, MoneyAmount, ScaleFactor, TariffSchedule};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(transparent)]
pub struct ConsumerId(String);

impl ConsumerId {
    pub fn new(id: impl Into<String>) -> Result<Self, GroupingError> {
        let id = id.into();
        if id.is_empty() {
            return Err(GroupingError::EmptyConsumerId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConsumerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Each consumer's usage in one time slot. Ids are distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotUsageVector {
    entries: Vec<(ConsumerId, EnergyAmount)>,
}

impl SlotUsageVector {
    pub fn new(entries: Vec<(ConsumerId, EnergyAmount)>) -> Result<Self, GroupingError> {
        ensure_distinct(entries.iter().map(|(id, _)| id))?;
        Ok(Self { entries })
    }

    /// Builds a vector with ids `c1`, `c2`, ... in order.
    pub fn anonymous(usages: impl IntoIterator<Item = EnergyAmount>) -> Self {
        let entries = usages
            .into_iter()
            .enumerate()
            .map(|(i, u)| (ConsumerId(format!("c{}", i + 1)), u))
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[(ConsumerId, EnergyAmount)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> EnergyAmount {
        self.entries.iter().map(|(_, u)| u).sum()
    }
}

fn ensure_distinct<'a>(ids: impl Iterator<Item = &'a ConsumerId>) -> Result<(), GroupingError> {
    let mut seen: Vec<&ConsumerId> = ids.collect();
    seen.sort();
    match seen.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(GroupingError::DuplicateConsumer(w[0].to_string())),
        None => Ok(()),
    }
}

/// Stand-alone price of every consumer under the slot schedule.
pub fn individual_slot_prices(
    slot_schedule: &TariffSchedule,
    usages: &SlotUsageVector,
) -> Vec<(ConsumerId, MoneyAmount)> {
    usages
        .entries
        .iter()
        .map(|(id, u)| (id.clone(), slot_schedule.progressive_price(u)))
        .collect()
}

/// Price of the pooled usage under the slot schedule scaled by the roster
/// size. Consumers with zero usage still count towards the roster.
pub fn group_slot_price(
    slot_schedule: &TariffSchedule,
    usages: &SlotUsageVector,
) -> Result<MoneyAmount, GroupingError> {
    if usages.is_empty() {
        return Err(GroupingError::EmptyGroup);
    }
    let factor = ScaleFactor::group(usages.len()).expect("non-empty group");
    Ok(slot_schedule.scale_by(&factor).progressive_price(&usages.total()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPricingResult {
    pub group_price: MoneyAmount,
    pub individual_prices: Vec<(ConsumerId, MoneyAmount)>,
    /// Exact `sum(individual) - group`. Negative only for non-progressive
    /// schedules.
    pub saving: BigRational,
}

impl GroupPricingResult {
    pub fn individual_total(&self) -> MoneyAmount {
        self.individual_prices.iter().map(|(_, p)| p).sum()
    }

    /// Sum of the individually rounded stand-alone bills.
    pub fn billed_individual_total(&self) -> DisplayMoney {
        self.individual_prices.iter().map(|(_, p)| p.round()).sum()
    }

    /// Saving as it appears on rounded bills: the sum of rounded stand-alone
    /// bills minus the rounded group bill.
    pub fn billed_saving(&self) -> DisplayMoney {
        self.billed_individual_total() - self.group_price.round()
    }
}

pub fn group_saving(
    slot_schedule: &TariffSchedule,
    usages: &SlotUsageVector,
) -> Result<GroupPricingResult, GroupingError> {
    let group_price = group_slot_price(slot_schedule, usages)?;
    let individual_prices = individual_slot_prices(slot_schedule, usages);
    let individual_total: MoneyAmount = individual_prices.iter().map(|(_, p)| p).sum();
    let saving = individual_total.delta(&group_price);
    Ok(GroupPricingResult { group_price, individual_prices, saving })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AllocationPolicy {
    /// Each share rounded half-up on its own; shares may not add up to the
    /// rounded group price.
    ProportionalIndependentRounding,
    /// Shares floored to minor units, then the missing units handed to the
    /// largest remainders so that the shares add up exactly.
    #[default]
    ProportionalExactSum,
}

impl AllocationPolicy {
    pub fn name(self) -> &'static str {
        match self {
            Self::ProportionalIndependentRounding => "independent",
            Self::ProportionalExactSum => "exact-sum",
        }
    }
}

impl fmt::Display for AllocationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AllocationPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "independent" | "proportional-independent-rounding" => Ok(Self::ProportionalIndependentRounding),
            "exact-sum" | "proportional-exact-sum" => Ok(Self::ProportionalExactSum),
            other => Err(format!("unknown allocation policy {other:?} (expected independent or exact-sum)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationResult {
    pub policy: AllocationPolicy,
    /// Exact proportional shares before rounding.
    pub raw_shares: Vec<(ConsumerId, MoneyAmount)>,
    pub shares: Vec<(ConsumerId, DisplayMoney)>,
    /// Minor units by which a share differs from its independently rounded
    /// value. Empty under the independent policy.
    pub adjustments: Vec<(ConsumerId, BigInt)>,
}

impl AllocationResult {
    pub fn total(&self) -> DisplayMoney {
        self.shares.iter().map(|(_, s)| s).sum()
    }

    pub fn share_of(&self, id: &ConsumerId) -> Option<&DisplayMoney> {
        self.shares.iter().find(|(c, _)| c == id).map(|(_, s)| s)
    }
}

/// Splits `group_price` across consumers in proportion to their stand-alone
/// prices.
pub fn proportional_allocation(
    group_price: &MoneyAmount,
    individual_prices: &[(ConsumerId, MoneyAmount)],
    policy: AllocationPolicy,
) -> Result<AllocationResult, GroupingError> {
    ensure_distinct(individual_prices.iter().map(|(id, _)| id))?;
    if let Some((id, _)) = individual_prices.iter().find(|(_, p)| p.value().is_negative()) {
        return Err(GroupingError::NegativeIndividualPrice(id.to_string()));
    }
    let total: MoneyAmount = individual_prices.iter().map(|(_, p)| p).sum();
    let raw_shares: Vec<(ConsumerId, MoneyAmount)> = if total.is_zero() {
        if !group_price.is_zero() {
            return Err(GroupingError::UndefinedProportions(group_price.round().to_string()));
        }
        individual_prices.iter().map(|(id, _)| (id.clone(), MoneyAmount::zero())).collect()
    } else {
        let factor = group_price.value() / total.value();
        individual_prices
            .iter()
            .map(|(id, p)| {
                let share = MoneyAmount::new(p.value() * &factor).expect("non-negative share");
                (id.clone(), share)
            })
            .collect()
    };

    let rounded: Vec<(ConsumerId, DisplayMoney)> =
        raw_shares.iter().map(|(id, s)| (id.clone(), s.round())).collect();
    let (shares, adjustments) = match policy {
        AllocationPolicy::ProportionalIndependentRounding => (rounded, Vec::new()),
        AllocationPolicy::ProportionalExactSum => {
            let shares = largest_remainder(group_price, &raw_shares);
            let adjustments = shares
                .iter()
                .zip(&rounded)
                .filter(|((_, s), (_, r))| s != r)
                .map(|((id, s), (_, r))| (id.clone(), s.minor_units() - r.minor_units()))
                .collect();
            (shares, adjustments)
        }
    };
    Ok(AllocationResult { policy, raw_shares, shares, adjustments })
}

fn largest_remainder(
    group_price: &MoneyAmount,
    raw_shares: &[(ConsumerId, MoneyAmount)],
) -> Vec<(ConsumerId, DisplayMoney)> {
    let places = MoneyAmount::MINOR_PLACES;
    let target = exact::round_half_up_scaled(group_price.value(), places);
    let scale = BigRational::from_integer(exact::pow10(places));
    let mut floors: Vec<BigInt> = Vec::with_capacity(raw_shares.len());
    let mut remainders: Vec<(BigRational, usize)> = Vec::with_capacity(raw_shares.len());
    for (i, (_, share)) in raw_shares.iter().enumerate() {
        let scaled = share.value() * &scale;
        let floor = scaled.floor();
        remainders.push((scaled - &floor, i));
        floors.push(floor.to_integer());
    }
    let floor_sum: BigInt = floors.iter().sum();
    let mut shortfall = target - floor_sum;
    debug_assert!(!shortfall.is_negative());
    debug_assert!(shortfall <= BigInt::from(raw_shares.len()));
    remainders.sort_by(|(ra, ia), (rb, ib)| {
        rb.cmp(ra).then_with(|| raw_shares[*ia].0.cmp(&raw_shares[*ib].0))
    });
    for (_, i) in remainders {
        if !shortfall.is_positive() {
            break;
        }
        floors[i] += 1;
        shortfall -= 1;
    }
    raw_shares
        .iter()
        .zip(floors)
        .map(|((id, _), units)| (id.clone(), DisplayMoney::from_minor_units(units)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{integer, parse_rational, ratio};
    use num_traits::Zero;
    use crate::tariff::{kepco_residential, slot_factor};

    fn slot_schedule() -> TariffSchedule {
        kepco_residential().scale_by(&slot_factor(&integer(6), 30).unwrap())
    }

    fn three_consumer_usages() -> SlotUsageVector {
        SlotUsageVector::anonymous([
            EnergyAmount::from_ratio(5, 2),
            EnergyAmount::from_ratio(5, 3),
            EnergyAmount::from_ratio(5, 6),
        ])
    }

    fn money(text: &str) -> MoneyAmount {
        MoneyAmount::new(parse_rational(text).unwrap()).unwrap()
    }

    fn priced(values: &[&str]) -> Vec<(ConsumerId, MoneyAmount)> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| (ConsumerId::new(format!("c{}", i + 1)).unwrap(), money(v)))
            .collect()
    }

    fn shown(result: &AllocationResult) -> Vec<String> {
        result.shares.iter().map(|(_, s)| s.to_string()).collect()
    }

    #[test]
    fn rejects_bad_ids() {
        assert_eq!(ConsumerId::new(""), Err(GroupingError::EmptyConsumerId));
        let a = ConsumerId::new("a").unwrap();
        let dup = SlotUsageVector::new(vec![(a.clone(), EnergyAmount::zero()), (a, EnergyAmount::zero())]);
        assert_eq!(dup, Err(GroupingError::DuplicateConsumer("a".into())));
    }

    #[test]
    fn individual_prices_three_consumers() {
        let prices = individual_slot_prices(&slot_schedule(), &three_consumer_usages());
        let shown: Vec<String> = prices.iter().map(|(_, p)| p.round().to_string()).collect();
        assert_eq!(shown, ["312.08", "155.50", "50.58"]);
        assert_eq!(prices[0].1.value(), &ratio(3745, 12));
    }

    #[test]
    fn zero_and_single_consumer() {
        let zeros = SlotUsageVector::anonymous(vec![EnergyAmount::zero(); 3]);
        assert!(individual_slot_prices(&slot_schedule(), &zeros).iter().all(|(_, p)| p.is_zero()));
        let one = SlotUsageVector::anonymous([EnergyAmount::from_ratio(7, 4)]);
        let alone = slot_schedule().progressive_price(&EnergyAmount::from_ratio(7, 4));
        assert_eq!(individual_slot_prices(&slot_schedule(), &one)[0].1, alone);
        assert_eq!(group_slot_price(&slot_schedule(), &one).unwrap(), alone);
    }

    #[test]
    fn group_price_three_consumers() {
        let group = group_slot_price(&slot_schedule(), &three_consumer_usages()).unwrap();
        // 2.5 kWh at 60.7 plus 2.5 kWh at 125.9
        assert_eq!(group.value(), &(ratio(5, 2) * ratio(607, 10) + ratio(5, 2) * ratio(1259, 10)));
        assert_eq!(group.round().to_string(), "466.50");
        let empty = SlotUsageVector::anonymous(Vec::new());
        assert_eq!(group_slot_price(&slot_schedule(), &empty), Err(GroupingError::EmptyGroup));
    }

    #[test]
    fn equal_usages_are_homogeneous() {
        let u = EnergyAmount::from_ratio(9, 4);
        let group = group_slot_price(&slot_schedule(), &SlotUsageVector::anonymous(vec![u.clone(); 5])).unwrap();
        assert_eq!(group.value(), &(integer(5) * slot_schedule().progressive_price(&u).value()));
    }

    #[test]
    fn saving_three_consumers() {
        let r = group_saving(&slot_schedule(), &three_consumer_usages()).unwrap();
        assert_eq!(r.billed_individual_total().to_string(), "518.16");
        assert_eq!(r.billed_saving().to_string(), "51.66");
        assert_eq!(r.saving, ratio(155, 3));
    }

    #[test]
    fn saving_cases() {
        let within = SlotUsageVector::anonymous(vec![EnergyAmount::from_ratio(1, 2); 3]);
        assert!(group_saving(&slot_schedule(), &within).unwrap().saving.is_zero());
        // 0 and 2u with u = 1 kWh: stand-alone 2 kWh crosses into tier 3 of
        // the slot schedule, pooled 2 kWh over a doubled range only reaches
        // tier 2.
        let split = SlotUsageVector::anonymous([EnergyAmount::zero(), EnergyAmount::kwh(2)]);
        let r = group_saving(&slot_schedule(), &split).unwrap();
        let alone = ratio(5, 6) * ratio(607, 10) + ratio(5, 6) * ratio(1259, 10) + ratio(1, 3) * ratio(1879, 10);
        let pooled = ratio(5, 3) * ratio(607, 10) + ratio(1, 3) * ratio(1259, 10);
        assert_eq!(r.saving, alone - pooled);
        assert!(r.saving.is_positive());
    }

    #[test]
    fn independent_allocation_three_consumers() {
        let r = proportional_allocation(
            &money("466.50"),
            &priced(&["312.08", "155.50", "50.58"]),
            AllocationPolicy::ProportionalIndependentRounding,
        )
        .unwrap();
        assert_eq!(shown(&r), ["280.97", "140.00", "45.54"]);
        assert_eq!(r.total().to_string(), "466.51");
        assert!(r.adjustments.is_empty());
    }

    #[test]
    fn exact_sum_allocation_matches_largest_remainder() {
        // Raw shares 280.9653, 139.9968, 45.5379 -> floors sum to 466.48; the
        // two missing cents go to the .79 and .68 remainders.
        let r = proportional_allocation(
            &money("466.50"),
            &priced(&["312.08", "155.50", "50.58"]),
            AllocationPolicy::ProportionalExactSum,
        )
        .unwrap();
        assert_eq!(shown(&r), ["280.96", "140.00", "45.54"]);
        assert_eq!(r.total().to_string(), "466.50");
        assert_eq!(r.adjustments, vec![(ConsumerId::new("c1").unwrap(), BigInt::from(-1))]);
    }

    #[test]
    fn allocation_from_exact_prices() {
        let usages = three_consumer_usages();
        let group = group_slot_price(&slot_schedule(), &usages).unwrap();
        let prices = individual_slot_prices(&slot_schedule(), &usages);
        let indep =
            proportional_allocation(&group, &prices, AllocationPolicy::ProportionalIndependentRounding).unwrap();
        assert_eq!(shown(&indep), ["280.97", "140.00", "45.54"]);
        let exact_sum = proportional_allocation(&group, &prices, AllocationPolicy::ProportionalExactSum).unwrap();
        assert_eq!(exact_sum.total().to_string(), "466.50");
        assert_eq!(exact_sum.adjustments.len(), 1);
    }

    #[test]
    fn degenerate_allocations() {
        for policy in [AllocationPolicy::ProportionalExactSum, AllocationPolicy::ProportionalIndependentRounding] {
            let r = proportional_allocation(&MoneyAmount::zero(), &priced(&["0", "0", "0"]), policy).unwrap();
            assert_eq!(shown(&r), ["0.00", "0.00", "0.00"]);
            let r = proportional_allocation(&money("123.456"), &priced(&["99"]), policy).unwrap();
            assert_eq!(shown(&r), ["123.46"]);
            assert!(matches!(
                proportional_allocation(&money("1"), &priced(&["0", "0"]), policy),
                Err(GroupingError::UndefinedProportions(_))
            ));
        }
    }

    #[test]
    fn ties_break_by_consumer_id() {
        // 0.01 split three ways: every remainder is 1/3 cent, the cent goes to
        // the smallest id regardless of input order.
        let ids = ["b", "a", "c"];
        let prices: Vec<_> = ids.iter().map(|id| (ConsumerId::new(*id).unwrap(), money("1"))).collect();
        let r = proportional_allocation(&money("0.01"), &prices, AllocationPolicy::ProportionalExactSum).unwrap();
        assert_eq!(r.share_of(&ConsumerId::new("a").unwrap()).unwrap().to_string(), "0.01");
        assert_eq!(r.total().to_string(), "0.01");
    }

    #[test]
    fn zero_price_gets_zero_share() {
        let r = proportional_allocation(
            &money("0.04"),
            &priced(&["1", "0", "1", "1", "1", "1"]),
            AllocationPolicy::ProportionalExactSum,
        )
        .unwrap();
        assert!(r.shares[1].1.minor_units().is_zero());
        assert_eq!(shown(&r), ["0.01", "0.00", "0.01", "0.01", "0.01", "0.00"]);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_usages() -> impl Strategy<Value = Vec<EnergyAmount>> {
            prop::collection::vec((0i64..=120, 1i64..=12).prop_map(|(n, d)| EnergyAmount::from_ratio(n, d)), 1..=8)
        }

        proptest! {
            #[test]
            fn group_never_exceeds_individuals(usages in arb_usages()) {
                let r = group_saving(&slot_schedule(), &SlotUsageVector::anonymous(usages)).unwrap();
                prop_assert!(!r.saving.is_negative());
            }

            #[test]
            fn permutation_invariant(mut usages in arb_usages(), seed in 0usize..64) {
                let before = group_slot_price(&slot_schedule(), &SlotUsageVector::anonymous(usages.clone())).unwrap();
                let n = usages.len();
                usages.rotate_left(seed % n);
                usages.reverse();
                let after = group_slot_price(&slot_schedule(), &SlotUsageVector::anonymous(usages)).unwrap();
                prop_assert_eq!(before, after);
            }

            #[test]
            fn allocation_invariants(usages in arb_usages()) {
                let v = SlotUsageVector::anonymous(usages);
                let group = group_slot_price(&slot_schedule(), &v).unwrap();
                let prices = individual_slot_prices(&slot_schedule(), &v);
                if prices.iter().all(|(_, p)| p.is_zero()) {
                    return Ok(());
                }
                let exact_sum = proportional_allocation(&group, &prices, AllocationPolicy::ProportionalExactSum).unwrap();
                prop_assert_eq!(exact_sum.total(), group.round());
                let indep = proportional_allocation(&group, &prices, AllocationPolicy::ProportionalIndependentRounding).unwrap();
                let gap = (indep.total().minor_units() - group.round().minor_units()).abs() * 2;
                prop_assert!(gap <= BigInt::from(prices.len()));
                for ((_, share), (_, indiv)) in exact_sum.raw_shares.iter().zip(&prices) {
                    prop_assert!(share <= indiv);
                    if indiv.is_zero() {
                        prop_assert!(share.is_zero());
                    }
                }
                for (i, (_, a)) in prices.iter().enumerate() {
                    for (j, (_, b)) in prices.iter().enumerate() {
                        if a >= b {
                            prop_assert!(exact_sum.raw_shares[i].1 >= exact_sum.raw_shares[j].1);
                        }
                    }
                }
                for ((_, share), (_, indiv)) in exact_sum.shares.iter().zip(&prices) {
                    if indiv.is_zero() {
                        prop_assert!(share.minor_units().is_zero());
                    }
                }
            }
        }
    }
}
