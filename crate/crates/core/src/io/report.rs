//! Human-readable tables and JSON for every result the CLI prints.
//!
//! Money is always shown to minor units. Energy and ratios are shown as exact
//! decimals when short enough, otherwise rounded to `precision` places; with
//! `exact` set, JSON carries an additional lossless `*_exact` field.

use std::fmt::Write as _;

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::billing::{signed_money, BillingReport, DemandMetrics, SchemeComparison, ShiftReport};
use crate::exact;
use crate::grouping::{AllocationResult, ConsumerId};
use crate::tariff::{EnergyAmount, MoneyAmount, TariffSchedule, TierCharge};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    /// Decimal places for energies and ratios without a short exact form.
    pub precision: u32,
    /// Add `p/q` fields to JSON output.
    pub exact: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { precision: 6, exact: false }
    }
}

impl RenderOptions {
    fn energy(&self, value: &EnergyAmount) -> String {
        exact::to_readable(value.value(), self.precision)
    }

    fn ratio(&self, value: &BigRational) -> String {
        exact::to_readable(value, self.precision)
    }

    fn put_money(&self, obj: &mut Map<String, Value>, key: &str, value: &MoneyAmount) {
        obj.insert(key.to_owned(), Value::String(value.round().to_string()));
        if self.exact {
            obj.insert(format!("{key}_exact"), Value::String(exact::to_fraction(value.value())));
        }
    }

    fn put_signed(&self, obj: &mut Map<String, Value>, key: &str, value: &BigRational) {
        obj.insert(key.to_owned(), Value::String(signed_money(value)));
        if self.exact {
            obj.insert(format!("{key}_exact"), Value::String(exact::to_fraction(value)));
        }
    }

    fn put_energy(&self, obj: &mut Map<String, Value>, key: &str, value: &EnergyAmount) {
        obj.insert(key.to_owned(), Value::String(self.energy(value)));
        if self.exact {
            obj.insert(format!("{key}_exact"), Value::String(exact::to_fraction(value.value())));
        }
    }
}

pub fn schedule_table(schedule: &TariffSchedule) -> String {
    schedule.to_string()
}

pub fn bill_json(usage: &EnergyAmount, price: &MoneyAmount, rows: &[TierCharge], currency: &str, opts: &RenderOptions) -> Value {
    let mut obj = Map::new();
    obj.insert("currency".into(), currency.into());
    opts.put_energy(&mut obj, "usage_kwh", usage);
    opts.put_money(&mut obj, "price", price);
    let breakdown: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut row = Map::new();
            row.insert("tier".into(), r.tier.into());
            opts.put_energy(&mut row, "energy_kwh", &r.energy);
            opts.put_money(&mut row, "charge", &r.charge);
            Value::Object(row)
        })
        .collect();
    obj.insert("breakdown".into(), breakdown.into());
    Value::Object(obj)
}

pub fn bill_table(usage: &EnergyAmount, price: &MoneyAmount, rows: &[TierCharge], currency: &str, opts: &RenderOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "usage: {} kWh", opts.energy(usage));
    let _ = writeln!(out, "price: {} {currency}", price.round());
    if !rows.is_empty() {
        let _ = writeln!(out, "{:>4}  {:>14}  {:>14}", "tier", "kWh", "charge");
        for r in rows {
            let _ = writeln!(out, "{:>4}  {:>14}  {:>14}", r.tier, opts.energy(&r.energy), r.charge.round());
        }
    }
    out
}

fn metrics_json(m: &DemandMetrics, opts: &RenderOptions) -> Value {
    let mut obj = Map::new();
    obj.insert("slot_loads_kwh".into(), m.slot_loads.iter().map(|l| Value::String(opts.energy(l))).collect());
    opts.put_energy(&mut obj, "peak_kwh", &m.peak);
    opts.put_energy(&mut obj, "mean_kwh", &m.mean);
    match &m.peak_to_average {
        Some(par) => {
            obj.insert("peak_to_average".into(), opts.ratio(par).into());
            if opts.exact {
                obj.insert("peak_to_average_exact".into(), exact::to_fraction(par).into());
            }
        }
        None => {
            obj.insert("peak_to_average".into(), "undefined".into());
        }
    }
    Value::Object(obj)
}

fn metrics_line(m: &DemandMetrics, opts: &RenderOptions) -> String {
    format!(
        "peak {} kWh, mean {} kWh, peak-to-average {}",
        opts.energy(&m.peak),
        opts.energy(&m.mean),
        m.peak_to_average.as_ref().map_or_else(|| "undefined".to_owned(), |p| opts.ratio(p)),
    )
}

pub fn billing_report_json(report: &BillingReport, opts: &RenderOptions) -> Value {
    let mut obj = Map::new();
    obj.insert("scheme".into(), report.scheme.name().into());
    obj.insert("policy".into(), report.policy.map_or(Value::Null, |p| p.name().into()));
    obj.insert("currency".into(), report.currency.clone().into());
    let consumers: Vec<Value> = report
        .bills
        .iter()
        .map(|b| {
            let mut row = Map::new();
            row.insert("id".into(), b.consumer.as_str().into());
            opts.put_money(&mut row, "total", &b.total);
            row.insert("missing_slots".into(), b.missing_slots.into());
            row.insert(
                "slot_charges".into(),
                b.slot_charges
                    .as_ref()
                    .map_or(Value::Null, |c| c.iter().map(|m| Value::String(m.round().to_string())).collect()),
            );
            Value::Object(row)
        })
        .collect();
    obj.insert("consumers".into(), consumers.into());
    opts.put_money(&mut obj, "total", &report.total());
    obj.insert("billed_total".into(), report.billed_total().to_string().into());
    opts.put_money(&mut obj, "upstream_total", &report.upstream_total());
    obj.insert(
        "group_slot_prices".into(),
        report
            .group_slot_prices
            .as_ref()
            .map_or(Value::Null, |p| p.iter().map(|m| Value::String(m.round().to_string())).collect()),
    );
    obj.insert("demand".into(), metrics_json(&report.metrics, opts));
    Value::Object(obj)
}

pub fn billing_report_table(report: &BillingReport, opts: &RenderOptions) -> String {
    let mut out = String::new();
    let _ = write!(out, "scheme: {}", report.scheme);
    if let Some(policy) = report.policy {
        let _ = write!(out, " (allocation: {policy})");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<16}  {:>14}  {:>8}  non-zero slot charges", "consumer", report.currency, "missing");
    for b in &report.bills {
        let slots = b.slot_charges.as_ref().map_or_else(
            || "-".to_owned(),
            |charges| {
                let nonzero: Vec<String> = charges
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(t, c)| format!("{t}:{}", c.round()))
                    .collect();
                if nonzero.is_empty() {
                    "none".to_owned()
                } else {
                    nonzero.join(" ")
                }
            },
        );
        let _ = writeln!(out, "{:<16}  {:>14}  {:>8}  {slots}", b.consumer.as_str(), b.total.round().to_string(), b.missing_slots);
    }
    let _ = writeln!(out, "{:<16}  {:>14}", "total (billed)", report.billed_total().to_string());
    let _ = writeln!(out, "{:<16}  {:>14}", "upstream", report.upstream_total().round().to_string());
    let _ = writeln!(out, "{}", metrics_line(&report.metrics, opts));
    out
}

pub fn comparison_json(c: &SchemeComparison, opts: &RenderOptions) -> Value {
    let consumers: Vec<Value> = c
        .rows()
        .iter()
        .map(|r| {
            let mut row = Map::new();
            row.insert("id".into(), r.consumer.as_str().into());
            opts.put_money(&mut row, "monthly_individual", &r.monthly);
            opts.put_money(&mut row, "slotted_individual", &r.slotted);
            opts.put_money(&mut row, "slotted_group", &r.group);
            opts.put_signed(&mut row, "slotted_minus_monthly", &r.slotted_minus_monthly());
            opts.put_signed(&mut row, "slotted_minus_group", &r.slotted_minus_group());
            Value::Object(row)
        })
        .collect();
    let mut totals = Map::new();
    for report in [&c.monthly, &c.slotted, &c.group] {
        let mut t = Map::new();
        opts.put_money(&mut t, "exact", &report.total());
        t.insert("billed".into(), report.billed_total().to_string().into());
        opts.put_money(&mut t, "upstream", &report.upstream_total());
        totals.insert(report.scheme.name().into(), Value::Object(t));
    }
    let mut saving = Map::new();
    opts.put_signed(&mut saving, "exact", &c.group_saving());
    saving.insert("billed".into(), c.billed_group_saving().to_string().into());
    let mut premium = Map::new();
    opts.put_signed(&mut premium, "exact", &c.slotted_premium());
    premium.insert("billed".into(), c.billed_slotted_premium().to_string().into());
    json!({
        "currency": c.monthly.currency,
        "policy": c.group.policy.map(|p| p.name()),
        "consumers": consumers,
        "totals": totals,
        "group_saving": saving,
        "slotted_premium": premium,
        "demand": metrics_json(&c.monthly.metrics, opts),
        "violations": c.ordering_violations().iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

pub fn comparison_table(c: &SchemeComparison, opts: &RenderOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16}  {:>14}  {:>14}  {:>14}  {:>12}",
        "consumer", "monthly", "slotted", "group", "saving"
    );
    for r in c.rows() {
        let _ = writeln!(
            out,
            "{:<16}  {:>14}  {:>14}  {:>14}  {:>12}",
            r.consumer.as_str(),
            r.monthly.round().to_string(),
            r.slotted.round().to_string(),
            r.group.round().to_string(),
            signed_money(&r.slotted_minus_group()),
        );
    }
    let _ = writeln!(
        out,
        "{:<16}  {:>14}  {:>14}  {:>14}  {:>12}",
        "total (billed)",
        c.monthly.billed_total().to_string(),
        c.slotted.billed_total().to_string(),
        c.group.billed_total().to_string(),
        c.billed_group_saving().to_string(),
    );
    let _ = writeln!(
        out,
        "{:<16}  {:>14}  {:>14}  {:>14}  {:>12}",
        "upstream",
        c.monthly.upstream_total().round().to_string(),
        c.slotted.upstream_total().round().to_string(),
        c.group.upstream_total().round().to_string(),
        signed_money(&c.group_saving()),
    );
    let _ = writeln!(out, "currency {}, allocation {}", c.monthly.currency, c.group.policy.map_or("-", |p| p.name()));
    let _ = writeln!(out, "{}", metrics_line(&c.monthly.metrics, opts));
    for v in c.ordering_violations() {
        let _ = writeln!(out, "VIOLATION: {v}");
    }
    out
}

pub fn allocation_json(result: &AllocationResult, group_price: &MoneyAmount, opts: &RenderOptions) -> Value {
    let shares: Vec<Value> = result
        .shares
        .iter()
        .zip(&result.raw_shares)
        .map(|((id, share), (_, raw))| {
            let mut row = Map::new();
            row.insert("id".into(), id.as_str().into());
            row.insert("share".into(), share.to_string().into());
            if opts.exact {
                row.insert("raw_exact".into(), exact::to_fraction(raw.value()).into());
            }
            Value::Object(row)
        })
        .collect();
    let adjustments: Vec<Value> = result
        .adjustments
        .iter()
        .map(|(id, units)| json!({ "id": id.as_str(), "minor_units": units.to_string() }))
        .collect();
    json!({
        "policy": result.policy.name(),
        "group_price": group_price.round().to_string(),
        "shares": shares,
        "total": result.total().to_string(),
        "adjustments": adjustments,
    })
}

/// Comma-separated shares on the first line, details after.
pub fn allocation_table(result: &AllocationResult, group_price: &MoneyAmount) -> String {
    let mut out = String::new();
    let shares: Vec<String> = result.shares.iter().map(|(_, s)| s.to_string()).collect();
    let _ = writeln!(out, "{}", shares.join(","));
    let _ = writeln!(out, "policy {}, total {} of group price {}", result.policy, result.total(), group_price.round());
    for (id, units) in &result.adjustments {
        let _ = writeln!(out, "adjusted {id} by {units} minor unit(s)");
    }
    out
}

pub fn shift_json(report: &ShiftReport, consumer: &ConsumerId, opts: &RenderOptions) -> Value {
    let schemes: Vec<Value> = report
        .deltas(consumer)
        .iter()
        .map(|d| {
            let mut row = Map::new();
            row.insert("scheme".into(), d.scheme.name().into());
            opts.put_signed(&mut row, "consumer_cost_delta", &d.consumer_cost);
            opts.put_signed(&mut row, "consumer_cost_after", &d.consumer_cost_after);
            opts.put_signed(&mut row, "group_total_delta", &d.group_total);
            opts.put_signed(&mut row, "upstream_total_delta", &d.upstream_total);
            Value::Object(row)
        })
        .collect();
    let par = |p: Option<&BigRational>| p.map_or_else(|| "undefined".to_owned(), |p| opts.ratio(p));
    let shifts: Vec<Value> = report
        .shifts
        .iter()
        .map(|s| {
            json!({
                "consumer": s.consumer.as_str(),
                "from_slot": s.from_slot,
                "to_slot": s.to_slot,
                "amount_kwh": opts.energy(&s.amount),
            })
        })
        .collect();
    json!({
        "consumer": consumer.as_str(),
        "shifts": shifts,
        "schemes": schemes,
        "peak_delta_kwh": opts.ratio(&report.peak_delta()),
        "peak_to_average_before": par(report.par_before()),
        "peak_to_average_after": par(report.par_after()),
        "peak_to_average_delta": report.par_delta().map_or_else(|| "undefined".to_owned(), |d| opts.ratio(&d)),
    })
}

pub fn shift_table(report: &ShiftReport, consumer: &ConsumerId, opts: &RenderOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} shift(s) for {consumer}", report.shifts.len());
    let _ = writeln!(out, "{:<20}  {:>14}  {:>14}  {:>14}", "scheme", "cost delta", "cost after", "group delta");
    for d in report.deltas(consumer) {
        let _ = writeln!(
            out,
            "{:<20}  {:>14}  {:>14}  {:>14}",
            d.scheme.name(),
            signed_money(&d.consumer_cost),
            signed_money(&d.consumer_cost_after),
            signed_money(&d.group_total),
        );
    }
    let par = |p: Option<&BigRational>| p.map_or_else(|| "undefined".to_owned(), |p| opts.ratio(p));
    let _ = writeln!(
        out,
        "peak-to-average {} -> {}, peak change {} kWh",
        par(report.par_before()),
        par(report.par_after()),
        opts.ratio(&report.peak_delta()),
    );
    out
}
