//! Progressive (block) tariffs over exact rationals.
//!
//! A schedule is an ordered list of tiers; usage fills the tiers from the
//! bottom and each tier charges its own rate for the energy that lands in it.
//! Scaling a schedule multiplies every tier bound by a factor, which is how a
//! monthly tariff is adapted to a time slot and to a group of consumers.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::TariffError;
use crate::exact;

/// Energy in kWh, exact and non-negative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EnergyAmount(BigRational);

impl EnergyAmount {
    pub const DISPLAY_PLACES: u32 = 4;

    pub fn new(kwh: BigRational) -> Result<Self, TariffError> {
        if kwh.is_negative() {
            return Err(TariffError::NegativeEnergy(exact::to_lossless(&kwh)));
        }
        Ok(Self(kwh))
    }

    /// Panics on negative input; meant for literals and test fixtures.
    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::new(exact::ratio(numer, denom)).expect("non-negative energy literal")
    }

    pub fn kwh(kwh: i64) -> Self {
        Self::from_ratio(kwh, 1)
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Subtraction that refuses to go below zero.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        (other.0 <= self.0).then(|| Self(&self.0 - &other.0))
    }

    pub fn scaled(&self, factor: &BigRational) -> Self {
        debug_assert!(!factor.is_negative());
        Self(&self.0 * factor)
    }

    /// Rounded to four decimals, half-up.
    pub fn display(&self) -> String {
        exact::to_fixed(&self.0, Self::DISPLAY_PLACES)
    }
}

impl fmt::Display for EnergyAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.display())
    }
}

impl Add for EnergyAmount {
    type Output = EnergyAmount;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a EnergyAmount> for &'a EnergyAmount {
    type Output = EnergyAmount;
    fn add(self, rhs: Self) -> EnergyAmount {
        EnergyAmount(&self.0 + &rhs.0)
    }
}

impl Sum for EnergyAmount {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        Self(iter.map(|e| e.0).sum())
    }
}

impl<'a> Sum<&'a EnergyAmount> for EnergyAmount {
    fn sum<I: Iterator<Item = &'a EnergyAmount>>(iter: I) -> Self {
        Self(iter.fold(BigRational::zero(), |acc, e| acc + &e.0))
    }
}

/// A price in currency units, exact and unrounded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MoneyAmount(BigRational);

impl MoneyAmount {
    pub const MINOR_PLACES: u32 = 2;

    pub fn new(value: BigRational) -> Result<Self, TariffError> {
        if value.is_negative() {
            return Err(TariffError::NegativeMoney(exact::to_lossless(&value)));
        }
        Ok(Self(value))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn round(&self) -> DisplayMoney {
        round_money(self)
    }

    /// Signed difference `self - other`.
    pub fn delta(&self, other: &Self) -> BigRational {
        &self.0 - &other.0
    }
}

impl fmt::Display for MoneyAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.round().fmt(f)
    }
}

impl Add for MoneyAmount {
    type Output = MoneyAmount;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sum for MoneyAmount {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        Self(iter.map(|m| m.0).sum())
    }
}

impl<'a> Sum<&'a MoneyAmount> for MoneyAmount {
    fn sum<I: Iterator<Item = &'a MoneyAmount>>(iter: I) -> Self {
        Self(iter.fold(BigRational::zero(), |acc, m| acc + &m.0))
    }
}

/// Money rounded to minor units (hundredths), stored as an integer count.
///
/// Can be negative when it carries a difference between two bills.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DisplayMoney {
    minor_units: BigInt,
}

impl DisplayMoney {
    pub fn from_minor_units(minor_units: impl Into<BigInt>) -> Self {
        Self { minor_units: minor_units.into() }
    }

    /// Rounds any signed amount half away from zero.
    pub fn from_rational(value: &BigRational) -> Self {
        Self::from_minor_units(exact::round_half_up_scaled(value, MoneyAmount::MINOR_PLACES))
    }

    pub fn minor_units(&self) -> &BigInt {
        &self.minor_units
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.minor_units.clone(), exact::pow10(MoneyAmount::MINOR_PLACES))
    }

    pub fn to_money(&self) -> MoneyAmount {
        MoneyAmount::new(self.to_rational()).expect("non-negative display money")
    }
}

impl fmt::Display for DisplayMoney {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&exact::format_scaled(&self.minor_units, MoneyAmount::MINOR_PLACES))
    }
}

impl Add for DisplayMoney {
    type Output = DisplayMoney;
    fn add(self, rhs: Self) -> Self {
        Self::from_minor_units(self.minor_units + rhs.minor_units)
    }
}

impl Sub for DisplayMoney {
    type Output = DisplayMoney;
    fn sub(self, rhs: Self) -> Self {
        Self::from_minor_units(self.minor_units - rhs.minor_units)
    }
}

impl Sum for DisplayMoney {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        Self::from_minor_units(iter.map(|m| m.minor_units).sum::<BigInt>())
    }
}

impl<'a> Sum<&'a DisplayMoney> for DisplayMoney {
    fn sum<I: Iterator<Item = &'a DisplayMoney>>(iter: I) -> Self {
        Self::from_minor_units(iter.map(|m| &m.minor_units).sum::<BigInt>())
    }
}

/// Half-up rounding to minor units. The only place money loses precision.
pub fn round_money(amount: &MoneyAmount) -> DisplayMoney {
    DisplayMoney::from_rational(amount.value())
}

/// Currency per kWh.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(BigRational);

impl Rate {
    pub fn new(per_kwh: BigRational) -> Result<Self, TariffError> {
        if per_kwh.is_negative() {
            return Err(TariffError::NegativeRate(exact::to_lossless(&per_kwh)));
        }
        Ok(Self(per_kwh))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn charge(&self, energy: &EnergyAmount) -> MoneyAmount {
        MoneyAmount(&self.0 * energy.value())
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&exact::to_lossless(&self.0))
    }
}

/// Strictly positive multiplier applied to tier bounds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScaleFactor(BigRational);

impl ScaleFactor {
    pub fn new(value: BigRational) -> Result<Self, TariffError> {
        if !value.is_positive() {
            return Err(TariffError::NonPositiveScale(exact::to_lossless(&value)));
        }
        Ok(Self(value))
    }

    pub fn identity() -> Self {
        Self(BigRational::one())
    }

    /// Group scaling: tier ranges grow with the number of consumers sharing
    /// them.
    pub fn group(consumers: usize) -> Result<Self, TariffError> {
        Self::new(BigRational::from_integer(BigInt::from(consumers)))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_one()
    }
}

impl Mul for ScaleFactor {
    type Output = ScaleFactor;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl fmt::Display for ScaleFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&exact::to_fraction(&self.0))
    }
}

/// Fraction of a `days_per_period`-day billing period covered by one slot of
/// `slot_hours` hours: `slot_hours / (24 * days_per_period)`.
///
/// The slot must tile a day exactly, i.e. `24 / slot_hours` is a whole number.
pub fn slot_factor(slot_hours: &BigRational, days_per_period: u32) -> Result<ScaleFactor, TariffError> {
    if !slot_hours.is_positive() || days_per_period == 0 {
        return Err(TariffError::SlotNotDivisorOfDay(exact::to_lossless(slot_hours)));
    }
    let slots_per_day = exact::integer(24) / slot_hours;
    if !slots_per_day.is_integer() {
        return Err(TariffError::SlotNotDivisorOfDay(exact::to_lossless(slot_hours)));
    }
    ScaleFactor::new(slot_hours / exact::integer(24 * i64::from(days_per_period)))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TariffTier {
    /// `None` for the open-ended top tier.
    pub upper_bound: Option<EnergyAmount>,
    pub rate: Rate,
}

/// Unvalidated schedule, as read from a file or built by hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleDescription {
    pub currency: String,
    pub base_period_days: u32,
    pub tiers: Vec<TierDescription>,
    pub allow_decreasing_rates: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TierDescription {
    pub upper_kwh: Option<BigRational>,
    pub rate: BigRational,
}

/// A validated progressive tariff.
///
/// `scale` records the cumulative factor applied to the quoted tier bounds,
/// so a monthly schedule has scale 1 and its 6-hour slot version 1/120.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TariffSchedule {
    tiers: Vec<TariffTier>,
    base_period_days: u32,
    scale: ScaleFactor,
    currency: String,
    progressive: bool,
}

/// One row of a tier breakdown. `tier` is 1-based, matching how tariffs are
/// usually printed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TierCharge {
    pub tier: usize,
    pub energy: EnergyAmount,
    pub charge: MoneyAmount,
}

pub fn validate_schedule(raw: &ScheduleDescription) -> Result<TariffSchedule, TariffError> {
    if raw.tiers.is_empty() {
        return Err(TariffError::EmptyTiers);
    }
    if raw.base_period_days == 0 {
        return Err(TariffError::InvalidBasePeriod);
    }
    let last = raw.tiers.len() - 1;
    let mut tiers = Vec::with_capacity(raw.tiers.len());
    let mut previous_bound = BigRational::zero();
    let mut progressive = true;
    for (i, tier) in raw.tiers.iter().enumerate() {
        let index = i + 1;
        if tier.rate.is_negative() {
            return Err(TariffError::Negative {
                index,
                field: "rate",
                value: exact::to_lossless(&tier.rate),
            });
        }
        let upper_bound = match &tier.upper_kwh {
            None if i != last => return Err(TariffError::UnboundedMiddleTier { index }),
            None => None,
            Some(_) if i == last => return Err(TariffError::BoundedLastTier),
            Some(bound) => {
                if bound.is_negative() {
                    return Err(TariffError::Negative {
                        index,
                        field: "upper bound",
                        value: exact::to_lossless(bound),
                    });
                }
                if *bound <= previous_bound {
                    return Err(TariffError::NonIncreasingBounds {
                        index,
                        bound: exact::to_lossless(bound),
                        previous: exact::to_lossless(&previous_bound),
                    });
                }
                previous_bound = bound.clone();
                Some(EnergyAmount(bound.clone()))
            }
        };
        if i > 0 && tier.rate < raw.tiers[i - 1].rate {
            let prev = &raw.tiers[i - 1];
            {
                if !raw.allow_decreasing_rates {
                    return Err(TariffError::DecreasingRate {
                        index,
                        rate: exact::to_lossless(&tier.rate),
                        previous: exact::to_lossless(&prev.rate),
                    });
                }
                progressive = false;
            }
        }
        tiers.push(TariffTier { upper_bound, rate: Rate(tier.rate.clone()) });
    }
    Ok(TariffSchedule {
        tiers,
        base_period_days: raw.base_period_days,
        scale: ScaleFactor::identity(),
        currency: raw.currency.clone(),
        progressive,
    })
}

impl TariffSchedule {
    pub fn tiers(&self) -> &[TariffTier] {
        &self.tiers
    }

    pub fn base_period_days(&self) -> u32 {
        self.base_period_days
    }

    pub fn scale(&self) -> &ScaleFactor {
        &self.scale
    }

    pub fn currency(&self) -> &str {
        &self.currency
    }

    /// True when rates never decrease, which makes the price convex in usage.
    pub fn is_progressive(&self) -> bool {
        self.progressive
    }

    /// Inverse of [`validate_schedule`] for the bounds as they currently are
    /// (after any scaling).
    pub fn describe(&self) -> ScheduleDescription {
        ScheduleDescription {
            currency: self.currency.clone(),
            base_period_days: self.base_period_days,
            tiers: self
                .tiers
                .iter()
                .map(|t| TierDescription {
                    upper_kwh: t.upper_bound.as_ref().map(|b| b.value().clone()),
                    rate: t.rate.value().clone(),
                })
                .collect(),
            allow_decreasing_rates: !self.progressive,
        }
    }

    /// Multiplies every bounded tier's upper limit by `factor`. Rates are
    /// untouched.
    pub fn scale_by(&self, factor: &ScaleFactor) -> TariffSchedule {
        TariffSchedule {
            tiers: self
                .tiers
                .iter()
                .map(|t| TariffTier {
                    upper_bound: t.upper_bound.as_ref().map(|b| b.scaled(factor.value())),
                    rate: t.rate.clone(),
                })
                .collect(),
            base_period_days: self.base_period_days,
            scale: self.scale.compose(factor),
            currency: self.currency.clone(),
            progressive: self.progressive,
        }
    }

    /// Exact price of `usage` under this schedule.
    pub fn progressive_price(&self, usage: &EnergyAmount) -> MoneyAmount {
        let mut total = BigRational::zero();
        self.fill(usage, |_, energy, rate| total += rate.value() * energy);
        MoneyAmount(total)
    }

    /// Per-tier energy and charge, omitting tiers the usage does not reach.
    pub fn tier_breakdown(&self, usage: &EnergyAmount) -> Vec<TierCharge> {
        let mut rows = Vec::new();
        self.fill(usage, |tier, energy, rate| {
            let energy = EnergyAmount(energy);
            rows.push(TierCharge { tier, charge: rate.charge(&energy), energy });
        });
        rows
    }

    /// Calls `visit(tier, energy_in_tier, rate)` for every tier holding a
    /// positive amount of `usage`, bottom-up.
    fn fill(&self, usage: &EnergyAmount, mut visit: impl FnMut(usize, BigRational, &Rate)) {
        let usage = usage.value();
        let mut lower = BigRational::zero();
        for (i, tier) in self.tiers.iter().enumerate() {
            if *usage <= lower {
                break;
            }
            let top = match &tier.upper_bound {
                Some(bound) if bound.value() < usage => bound.value(),
                _ => usage,
            };
            visit(i + 1, top - &lower, &tier.rate);
            match &tier.upper_bound {
                Some(bound) => lower = bound.value().clone(),
                None => break,
            }
        }
    }
}

impl fmt::Display for TariffSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} tiers, {} per kWh, quoted for {} days, scale {}{}",
            self.tiers.len(),
            self.currency,
            self.base_period_days,
            self.scale,
            if self.progressive { "" } else { " (non-progressive)" }
        )?;
        let mut lower = BigRational::zero();
        for (i, tier) in self.tiers.iter().enumerate() {
            let range = match &tier.upper_bound {
                Some(b) => format!("{} - {}", exact::to_readable(&lower, 4), exact::to_readable(b.value(), 4)),
                None => format!("{} and above", exact::to_readable(&lower, 4)),
            };
            writeln!(f, "  tier {}: {range} kWh @ {}", i + 1, tier.rate)?;
            if let Some(b) = &tier.upper_bound {
                lower = b.value().clone();
            }
        }
        Ok(())
    }
}

/// The residential low-voltage schedule from KEPCO: bounds 100..500 kWh per
/// 30-day month, rates 60.7..709.5 KRW/kWh.
pub fn kepco_residential() -> TariffSchedule {
    let bounds = [Some(100), Some(200), Some(300), Some(400), Some(500), None];
    let rates = ["60.7", "125.9", "187.9", "280.6", "417.7", "709.5"];
    let raw = ScheduleDescription {
        currency: "KRW".to_owned(),
        base_period_days: 30,
        tiers: bounds
            .iter()
            .zip(rates)
            .map(|(b, r)| TierDescription {
                upper_kwh: b.map(exact::integer),
                rate: exact::parse_rational(r).expect("literal rate"),
            })
            .collect(),
        allow_decreasing_rates: false,
    };
    validate_schedule(&raw).expect("KEPCO table is a valid schedule")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{integer, ratio};
    use proptest::prelude::*;

    fn desc(bounds: &[Option<i64>], rates: &[i64]) -> ScheduleDescription {
        ScheduleDescription {
            currency: "KRW".into(),
            base_period_days: 30,
            tiers: bounds
                .iter()
                .zip(rates)
                .map(|(b, r)| TierDescription { upper_kwh: b.map(integer), rate: integer(*r) })
                .collect(),
            allow_decreasing_rates: false,
        }
    }

    fn slot_schedule() -> TariffSchedule {
        kepco_residential().scale_by(&slot_factor(&integer(6), 30).unwrap())
    }

    #[test]
    fn table_schedule_validates() {
        let s = kepco_residential();
        assert_eq!(s.tiers().len(), 6);
        assert_eq!(s.tiers()[1].upper_bound, Some(EnergyAmount::kwh(200)));
        assert_eq!(s.tiers()[5].upper_bound, None);
        assert_eq!(s.tiers()[0].rate.value(), &ratio(607, 10));
        assert!(s.is_progressive());
    }

    #[test]
    fn flat_free_tariff_is_valid() {
        let s = validate_schedule(&desc(&[None], &[0])).unwrap();
        assert!(s.progressive_price(&EnergyAmount::kwh(1000)).is_zero());
    }

    #[test]
    fn validation_errors() {
        assert_eq!(validate_schedule(&desc(&[], &[])), Err(TariffError::EmptyTiers));
        assert!(matches!(
            validate_schedule(&desc(&[Some(100), Some(100), None], &[1, 2, 3])),
            Err(TariffError::NonIncreasingBounds { index: 2, .. })
        ));
        assert!(matches!(
            validate_schedule(&desc(&[Some(0), None], &[1, 2])),
            Err(TariffError::NonIncreasingBounds { index: 1, .. })
        ));
        assert_eq!(
            validate_schedule(&desc(&[Some(100), Some(200)], &[1, 2])),
            Err(TariffError::BoundedLastTier)
        );
        assert_eq!(
            validate_schedule(&desc(&[Some(100), None, None], &[1, 2, 3])),
            Err(TariffError::UnboundedMiddleTier { index: 2 })
        );
        assert!(matches!(
            validate_schedule(&desc(&[Some(100), None], &[2, 1])),
            Err(TariffError::DecreasingRate { index: 2, .. })
        ));
        assert!(matches!(
            validate_schedule(&desc(&[Some(-5), None], &[1, 2])),
            Err(TariffError::Negative { index: 1, .. })
        ));
        assert!(matches!(
            validate_schedule(&desc(&[Some(5), None], &[1, -2])),
            Err(TariffError::Negative { index: 2, .. })
        ));
        let mut zero_days = desc(&[None], &[1]);
        zero_days.base_period_days = 0;
        assert_eq!(validate_schedule(&zero_days), Err(TariffError::InvalidBasePeriod));
    }

    #[test]
    fn decreasing_rates_need_override() {
        let mut raw = desc(&[Some(100), None], &[5, 3]);
        raw.allow_decreasing_rates = true;
        let s = validate_schedule(&raw).unwrap();
        assert!(!s.is_progressive());
        assert_eq!(s.progressive_price(&EnergyAmount::kwh(150)).value(), &integer(650));
    }

    #[test]
    fn worked_monthly_example() {
        let s = kepco_residential();
        assert_eq!(s.progressive_price(&EnergyAmount::kwh(350)).value(), &integer(51480));
        assert_eq!(s.progressive_price(&EnergyAmount::kwh(100)).value(), &integer(6070));
        assert!(s.progressive_price(&EnergyAmount::zero()).is_zero());
    }

    #[test]
    fn breakdown_of_worked_example() {
        let rows = kepco_residential().tier_breakdown(&EnergyAmount::kwh(350));
        let expect = [(1, 100, 6070), (2, 100, 12590), (3, 100, 18790), (4, 50, 14030)];
        assert_eq!(rows.len(), expect.len());
        for (row, (tier, kwh, charge)) in rows.iter().zip(expect) {
            assert_eq!(row.tier, tier);
            assert_eq!(row.energy, EnergyAmount::kwh(kwh));
            assert_eq!(row.charge.value(), &integer(charge));
        }
        assert!(kepco_residential().tier_breakdown(&EnergyAmount::zero()).is_empty());
    }

    #[test]
    fn breakdown_reaches_open_tier() {
        // 100 kWh per tier times each rate, computed by hand.
        let rows = kepco_residential().tier_breakdown(&EnergyAmount::kwh(600));
        assert_eq!(rows.len(), 6);
        let last = rows.last().unwrap();
        assert_eq!((last.tier, &last.energy), (6, &EnergyAmount::kwh(100)));
        assert_eq!(last.charge.value(), &integer(70950));
    }

    #[test]
    fn slot_factors() {
        assert_eq!(slot_factor(&integer(6), 30).unwrap().value(), &ratio(1, 120));
        assert_eq!(slot_factor(&integer(24), 30).unwrap().value(), &ratio(1, 30));
        assert_eq!(slot_factor(&integer(12), 30).unwrap().value(), &ratio(1, 60));
        assert_eq!(slot_factor(&ratio(1, 2), 30).unwrap().value(), &ratio(1, 1440));
        assert!(slot_factor(&integer(5), 30).is_err());
        assert!(slot_factor(&integer(48), 30).is_err());
        assert!(slot_factor(&integer(0), 30).is_err());
        assert!(slot_factor(&integer(6), 0).is_err());
    }

    #[test]
    fn slot_scaled_first_bound() {
        let s = slot_schedule();
        let first = s.tiers()[0].upper_bound.as_ref().unwrap();
        assert_eq!(first, &EnergyAmount::from_ratio(5, 6));
        assert_eq!(first.display(), "0.8333");
        assert_eq!(s.scale().value(), &ratio(1, 120));
        let group = s.scale_by(&ScaleFactor::group(3).unwrap());
        assert_eq!(group.tiers()[0].upper_bound, Some(EnergyAmount::from_ratio(5, 2)));
        assert_eq!(kepco_residential().scale_by(&ScaleFactor::identity()), kepco_residential());
    }

    #[test]
    fn slot_price_uses_exact_bound() {
        let price = slot_schedule().progressive_price(&EnergyAmount::from_ratio(5, 2));
        assert_eq!(price.value(), &ratio(3745, 12));
        assert_eq!(price.round().to_string(), "312.08");
    }

    #[test]
    fn money_rounding() {
        assert_eq!(round_money(&MoneyAmount::zero()).to_string(), "0.00");
        // 466.50 * 155.50 / 518.16
        let share = MoneyAmount::new(ratio(46650, 100) * ratio(15550, 51816)).unwrap();
        assert_eq!(share.round().to_string(), "140.00");
        assert!(MoneyAmount::new(integer(-1)).is_err());
        assert_eq!(DisplayMoney::from_rational(&ratio(-5, 3)).to_string(), "-1.67");
    }

    /// Walks the tiers one quantum at a time. Bounds must be multiples of
    /// `quantum`.
    fn quantum_walk(s: &TariffSchedule, usage: &BigRational, quantum: &BigRational) -> BigRational {
        let mut total = BigRational::zero();
        let mut at = BigRational::zero();
        while &at < usage {
            let mid = &at + quantum / integer(2);
            let tier = s
                .tiers()
                .iter()
                .find(|t| t.upper_bound.as_ref().is_none_or(|b| &mid < b.value()))
                .unwrap();
            total += tier.rate.value() * quantum;
            at += quantum;
        }
        total
    }

    #[test]
    fn agrees_with_quantum_walk() {
        let monthly = kepco_residential();
        let q = integer(1);
        for kwh in (0..=700).step_by(7) {
            let u = integer(kwh);
            assert_eq!(
                monthly.progressive_price(&EnergyAmount(u.clone())).value(),
                &quantum_walk(&monthly, &u, &q)
            );
        }
        let slotted = slot_schedule();
        let q = ratio(1, 12);
        for k in 0..=80 {
            let u = &q * integer(k);
            assert_eq!(
                slotted.progressive_price(&EnergyAmount(u.clone())).value(),
                &quantum_walk(&slotted, &u, &q)
            );
        }
    }

    fn arb_ratio(max_numer: i64) -> impl Strategy<Value = BigRational> {
        (0..=max_numer, 1i64..=24).prop_map(|(n, d)| ratio(n, d))
    }

    fn arb_schedule() -> impl Strategy<Value = TariffSchedule> {
        (
            prop::collection::vec(1i64..=50, 0..5),
            prop::collection::vec(0i64..=40, 1..6),
        )
            .prop_map(|(widths, steps)| {
                let n = widths.len().min(steps.len() - 1) + 1;
                let mut bound = 0;
                let mut rate = 0;
                let tiers = (0..n)
                    .map(|i| {
                        rate += steps[i];
                        let upper = (i + 1 < n).then(|| {
                            bound += widths[i];
                            integer(bound)
                        });
                        TierDescription { upper_kwh: upper, rate: ratio(rate, 10) }
                    })
                    .collect();
                validate_schedule(&ScheduleDescription {
                    currency: "X".into(),
                    base_period_days: 30,
                    tiers,
                    allow_decreasing_rates: false,
                })
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn monotone(s in arb_schedule(), a in arb_ratio(3000), b in arb_ratio(3000)) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(s.progressive_price(&EnergyAmount(lo)) <= s.progressive_price(&EnergyAmount(hi)));
        }

        #[test]
        fn convex(s in arb_schedule(), a in arb_ratio(3000), b in arb_ratio(3000), l in 0i64..=16) {
            let lambda = ratio(l, 16);
            let mix = &lambda * &a + (BigRational::one() - &lambda) * &b;
            let lhs = s.progressive_price(&EnergyAmount(mix)).into_inner();
            let rhs = &lambda * s.progressive_price(&EnergyAmount(a)).value()
                + (BigRational::one() - &lambda) * s.progressive_price(&EnergyAmount(b)).value();
            prop_assert!(lhs <= rhs);
        }

        #[test]
        fn homogeneous(s in arb_schedule(), u in arb_ratio(3000), fnum in 1i64..200, fden in 1i64..200) {
            let f = ScaleFactor::new(ratio(fnum, fden)).unwrap();
            let lhs = s.scale_by(&f).progressive_price(&EnergyAmount(&u * f.value()));
            let rhs = f.value() * s.progressive_price(&EnergyAmount(u)).value();
            prop_assert_eq!(lhs.value(), &rhs);
        }

        #[test]
        fn breakdown_sums(s in arb_schedule(), u in arb_ratio(3000)) {
            let usage = EnergyAmount(u);
            let rows = s.tier_breakdown(&usage);
            prop_assert_eq!(rows.iter().map(|r| &r.energy).sum::<EnergyAmount>(), usage.clone());
            prop_assert_eq!(rows.iter().map(|r| &r.charge).sum::<MoneyAmount>(), s.progressive_price(&usage));
            prop_assert!(rows.windows(2).all(|w| w[0].tier < w[1].tier));
            prop_assert!(rows.iter().all(|r| !r.energy.is_zero()));
        }

        #[test]
        fn scaling_composes(s in arb_schedule(), a in 1i64..50, b in 1i64..50, c in 1i64..50) {
            let fa = ScaleFactor::new(ratio(a, c)).unwrap();
            let fb = ScaleFactor::new(ratio(b, 7)).unwrap();
            prop_assert_eq!(s.scale_by(&fa).scale_by(&fb), s.scale_by(&fa.compose(&fb)));
        }
    }
}
