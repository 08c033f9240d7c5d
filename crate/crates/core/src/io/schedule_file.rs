//! Tariff schedule JSON.
//!
//! ```json
//! { "currency": "KRW", "base_period_days": 30,
//!   "tiers": [ { "upper_kwh": 100, "rate": "60.7" }, { "upper_kwh": null, "rate": "709.5" } ] }
//! ```
//!
//! Numbers may be JSON numbers or strings (`"60.7"`, `"5/6"`); either way the
//! literal text is parsed straight to an exact rational.

use std::fmt;
use std::path::Path;

use num_rational::BigRational;
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::InputError;
use crate::exact;
use crate::tariff::{validate_schedule, ScheduleDescription, TariffSchedule, TierDescription};

struct ExactNumber(BigRational);

impl<'de> Deserialize<'de> for ExactNumber {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExactVisitor;

        impl<'de> Visitor<'de> for ExactVisitor {
            type Value = ExactNumber;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a decimal / fraction string")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExactNumber, E> {
                exact::parse_rational(v).map(ExactNumber).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExactNumber, E> {
                self.visit_str(&v.to_string())
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExactNumber, E> {
                self.visit_str(&v.to_string())
            }

            // With arbitrary precision enabled, JSON numbers reach us as a
            // single-entry map carrying their literal text.
            fn visit_map<A: de::MapAccess<'de>>(self, mut map: A) -> Result<ExactNumber, A::Error> {
                let (_, literal): (String, String) =
                    map.next_entry()?.ok_or_else(|| de::Error::custom("empty number"))?;
                self.visit_str(&literal)
            }
        }

        deserializer.deserialize_any(ExactVisitor)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    currency: String,
    base_period_days: u32,
    tiers: Vec<TierFile>,
    #[serde(default)]
    allow_decreasing_rates: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TierFile {
    upper_kwh: Option<ExactNumber>,
    rate: ExactNumber,
}

impl From<ScheduleFile> for ScheduleDescription {
    fn from(file: ScheduleFile) -> Self {
        ScheduleDescription {
            currency: file.currency,
            base_period_days: file.base_period_days,
            tiers: file
                .tiers
                .into_iter()
                .map(|t| TierDescription { upper_kwh: t.upper_kwh.map(|n| n.0), rate: t.rate.0 })
                .collect(),
            allow_decreasing_rates: file.allow_decreasing_rates,
        }
    }
}

/// Parses schedule JSON without validating the tier structure.
pub fn parse_schedule_description(text: &str, path: &Path) -> Result<ScheduleDescription, InputError> {
    let file: ScheduleFile = serde_json::from_str(text).map_err(|e| InputError::Json {
        path: path.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(file.into())
}

pub fn parse_schedule_str(text: &str, path: &Path) -> Result<TariffSchedule, InputError> {
    let raw = parse_schedule_description(text, path)?;
    validate_schedule(&raw).map_err(|source| InputError::Schedule { path: path.to_owned(), source })
}

pub fn parse_schedule_file(path: &Path) -> Result<TariffSchedule, InputError> {
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.to_owned(), source })?;
    parse_schedule_str(&text, path)
}

fn number(value: &BigRational) -> Value {
    match exact::to_exact_decimal(value) {
        Some(text) => Value::Number(text.parse().expect("decimal literal is valid JSON")),
        None => Value::String(exact::to_fraction(value)),
    }
}

/// JSON form of `schedule`, in the same format [`parse_schedule_file`] reads.
/// Rates are written as exact decimal strings; bounds that have no finite
/// decimal form (after slot scaling) are written as `"p/q"` strings.
pub fn schedule_to_json(schedule: &TariffSchedule) -> Value {
    let desc = schedule.describe();
    let tiers: Vec<Value> = desc
        .tiers
        .iter()
        .map(|t| {
            json!({
                "upper_kwh": t.upper_kwh.as_ref().map_or(Value::Null, number),
                "rate": exact::to_lossless(&t.rate),
            })
        })
        .collect();
    let mut out = json!({
        "currency": desc.currency,
        "base_period_days": desc.base_period_days,
        "tiers": tiers,
    });
    if desc.allow_decreasing_rates {
        out["allow_decreasing_rates"] = Value::Bool(true);
    }
    out
}
