//! File formats: tariff schedule JSON, meter trace CSV and report rendering.

pub mod report;
mod schedule_file;
mod trace_csv;

pub use schedule_file::{parse_schedule_description, parse_schedule_file, parse_schedule_str, schedule_to_json};
pub use trace_csv::{parse_trace, parse_trace_csv, TRACE_HEADER};
