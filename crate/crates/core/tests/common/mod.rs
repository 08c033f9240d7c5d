//! Straight-line reference implementation used to cross-check the engine.
//!
//! Nothing here calls the pricing, grouping or billing code under test: tiers
//! are plain `(upper, rate)` pairs, prices use the closed form
//! `sum(rate_i * clamp(u - lower_i, 0, width_i))`, and allocation is a
//! separate largest-remainder routine over integer cents.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Debug)]
pub struct DeskTariff {
    /// `(upper bound, rate)`; `None` bound only on the last tier.
    pub tiers: Vec<(Option<Q>, Q)>,
}

impl DeskTariff {
    pub fn scaled(&self, f: &Q) -> DeskTariff {
        DeskTariff { tiers: self.tiers.iter().map(|(b, r)| (b.as_ref().map(|b| b * f), r.clone())).collect() }
    }

    pub fn price(&self, usage: &Q) -> Q {
        let mut lower = Q::zero();
        let mut total = Q::zero();
        for (upper, rate) in &self.tiers {
            let top = match upper {
                Some(b) if b < usage => b.clone(),
                _ => usage.clone(),
            };
            let inside = &top - &lower;
            if inside.is_positive() {
                total += rate * inside;
            }
            if let Some(b) = upper {
                lower = b.clone();
            }
        }
        total
    }
}

/// Half-up rounding of a non-negative amount to integer cents.
pub fn cents(x: &Q) -> BigInt {
    (x * Q::from_integer(BigInt::from(100)) + q(1, 2)).floor().to_integer()
}

/// Largest-remainder split of `group` over `weights`, in cents. Ties go to
/// the lower index (callers pass weights in id order).
pub fn desk_allocate(group: &Q, weights: &[Q]) -> Vec<BigInt> {
    let total: Q = weights.iter().fold(Q::zero(), |a, w| a + w);
    if total.is_zero() {
        assert!(group.is_zero());
        return vec![BigInt::zero(); weights.len()];
    }
    let hundred = Q::from_integer(BigInt::from(100));
    let raw: Vec<Q> = weights.iter().map(|w| group * w / &total * &hundred).collect();
    let mut units: Vec<BigInt> = raw.iter().map(|r| r.floor().to_integer()).collect();
    let mut left = cents(group) - units.iter().fold(BigInt::zero(), |a, u| a + u);
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (&raw[b] - raw[b].floor()).cmp(&(&raw[a] - raw[a].floor())).then(a.cmp(&b)));
    for i in order {
        if !left.is_positive() {
            break;
        }
        units[i] += BigInt::one();
        left -= BigInt::one();
    }
    units
}

/// Per-consumer totals for the three schemes, exact (group totals are sums
/// of cent allocations expressed as rationals).
#[derive(Debug, PartialEq, Eq)]
pub struct DeskBills {
    pub monthly: Vec<Q>,
    pub slotted: Vec<Q>,
    pub group: Vec<Q>,
    pub group_slot_prices: Vec<Q>,
}

/// `rows[c][t]` usage; `slot_fraction` is the share of the period one slot
/// covers.
pub fn desk_bills(tariff: &DeskTariff, rows: &[Vec<Q>], slot_fraction: &Q) -> DeskBills {
    let n = rows.len();
    let slots = rows.first().map_or(0, Vec::len);
    let slot_tariff = tariff.scaled(slot_fraction);
    let group_tariff = slot_tariff.scaled(&Q::from_integer(BigInt::from(n)));

    let monthly = rows.iter().map(|r| tariff.price(&r.iter().fold(Q::zero(), |a, u| a + u))).collect();
    let slotted = rows.iter().map(|r| r.iter().fold(Q::zero(), |a, u| a + slot_tariff.price(u))).collect();

    let mut group = vec![Q::zero(); n];
    let mut group_slot_prices = Vec::with_capacity(slots);
    for t in 0..slots {
        let pooled = rows.iter().fold(Q::zero(), |a, r| a + &r[t]);
        let price = group_tariff.price(&pooled);
        let weights: Vec<Q> = rows.iter().map(|r| slot_tariff.price(&r[t])).collect();
        for (c, units) in desk_allocate(&price, &weights).into_iter().enumerate() {
            group[c] += Q::new(units, BigInt::from(100));
        }
        group_slot_prices.push(price);
    }
    DeskBills { monthly, slotted, group, group_slot_prices }
}

/// The residential table from the fixture, as desk tiers.
pub fn desk_residential() -> DeskTariff {
    let bounds = [Some(100), Some(200), Some(300), Some(400), Some(500), None];
    let rates = [607, 1259, 1879, 2806, 4177, 7095];
    DeskTariff {
        tiers: bounds.iter().zip(rates).map(|(b, r)| (b.map(|b| q(b, 1)), q(r, 10))).collect(),
    }
}
