//! Meter trace CSV: `consumer_id,interval_start,energy_kwh`.
//!
//! The CSV carries only interval starts; every reading is taken to cover the
//! same `reading_interval`.

use std::io::Read;
use std::path::Path;

use chrono::{DateTime, TimeDelta, Utc};

use crate::billing::MeterReading;
use crate::error::InputError;
use crate::exact;
use crate::grouping::ConsumerId;
use crate::tariff::EnergyAmount;

pub const TRACE_HEADER: [&str; 3] = ["consumer_id", "interval_start", "energy_kwh"];

pub fn parse_trace<R: Read>(input: R, path: &Path, reading_interval: TimeDelta) -> Result<Vec<MeterReading>, InputError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let row_error = |row: usize, message: String| InputError::Row { path: path.to_owned(), row, message };

    let header = reader.headers().map_err(|e| row_error(1, e.to_string()))?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(InputError::BadHeader { path: path.to_owned(), found: header.iter().collect::<Vec<_>>().join(",") });
    }

    let mut readings = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            row_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let consumer = ConsumerId::new(&record[0]).map_err(|e| row_error(line, e.to_string()))?;
        let interval_start = DateTime::parse_from_rfc3339(&record[1])
            .map_err(|e| row_error(line, format!("malformed timestamp {:?}: {e}", &record[1])))?
            .with_timezone(&Utc);
        let kwh = exact::parse_rational(&record[2]).map_err(|e| row_error(line, e.to_string()))?;
        let energy = EnergyAmount::new(kwh).map_err(|e| row_error(line, e.to_string()))?;
        readings.push(MeterReading { consumer, interval_start, interval: reading_interval, energy });
    }
    Ok(readings)
}

pub fn parse_trace_csv(path: &Path, reading_interval: TimeDelta) -> Result<Vec<MeterReading>, InputError> {
    let file = std::fs::File::open(path).map_err(|source| InputError::Io { path: path.to_owned(), source })?;
    parse_trace(std::io::BufReader::new(file), path, reading_interval)
}
