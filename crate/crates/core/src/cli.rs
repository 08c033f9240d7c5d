//! Command-line front end. [`run`] is the whole program; `main` only forwards
//! process arguments and the exit status.

use std::io::Write;
use std::path::PathBuf;

use chrono::{DateTime, TimeDelta, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::Value;

use crate::billing::{
    compare_schemes, daily_shifts, run_scheme, slot_partition, what_if_shifts, BillingOptions, SchemeKind, Shift,
    SlotGrid, SlotUsageMatrix,
};
use crate::error::{BillingError, InputError};
use crate::exact;
use crate::grouping::{proportional_allocation, AllocationPolicy, ConsumerId};
use crate::io::report::{self, RenderOptions};
use crate::io::{parse_schedule_file, parse_trace_csv, schedule_to_json};
use crate::par::Execution;
use crate::tariff::{EnergyAmount, MoneyAmount, ScaleFactor, TariffSchedule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "slotted-tariff", version, about = "Progressive-tariff billing over time slots with consumer grouping")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Validate a schedule file and print its tiers
    Validate {
        #[arg(long)]
        schedule: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Price one usage figure and show the tier breakdown
    Bill {
        #[arg(long)]
        schedule: PathBuf,
        /// kWh, decimal or p/q
        #[arg(long)]
        usage: String,
        /// Price against the slot-scaled schedule instead of the quoted one
        #[arg(long)]
        slot_hours: Option<String>,
        #[arg(long)]
        period_days: Option<u32>,
        /// Scale tier ranges for a group of this many consumers
        #[arg(long, default_value_t = 1)]
        group_size: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Bill a trace under one or more schemes
    Simulate {
        #[command(flatten)]
        trace: TraceArgs,
        /// Comma-separated scheme list
        #[arg(long, value_delimiter = ',', default_values_t = SchemeKind::ALL.map(|k| k.name().to_owned()))]
        scheme: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare all three schemes side by side
    Compare {
        #[command(flatten)]
        trace: TraceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Split a group price in proportion to individual prices
    Allocate {
        #[arg(long)]
        group: String,
        /// Comma-separated individual prices
        #[arg(long, value_delimiter = ',', required = true)]
        individual: Vec<String>,
        /// Comma-separated consumer ids (default c1, c2, ...)
        #[arg(long, value_delimiter = ',')]
        ids: Vec<String>,
        #[arg(long, default_value = "exact-sum")]
        policy: AllocationPolicy,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate moving a consumer's energy from one slot to another
    Shift {
        #[command(flatten)]
        trace: TraceArgs,
        #[arg(long)]
        consumer: String,
        #[arg(long)]
        from_slot: usize,
        #[arg(long)]
        to_slot: usize,
        /// kWh, decimal or p/q
        #[arg(long)]
        amount: String,
        /// Treat the slots as within-day indices and repeat the move every day
        #[arg(long)]
        daily: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value = "6")]
    slot_hours: String,
    /// Defaults to the schedule's base period
    #[arg(long)]
    period_days: Option<u32>,
    /// RFC 3339; defaults to midnight UTC on the day of the earliest reading
    #[arg(long)]
    period_start: Option<String>,
    /// Length covered by each trace reading
    #[arg(long, default_value_t = 60)]
    interval_minutes: i64,
    #[arg(long, default_value = "exact-sum")]
    policy: AllocationPolicy,
    /// Disable data-parallel evaluation
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Decimal places for non-terminating energies
    #[arg(long, default_value_t = 6)]
    precision: u32,
    /// Include exact p/q fields in JSON
    #[arg(long)]
    exact: bool,
}

impl OutputArgs {
    fn render(&self) -> RenderOptions {
        RenderOptions { precision: self.precision, exact: self.exact }
    }
}

/// Failure categories mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Input(String),
    Invariant(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<BillingError> for Failure {
    fn from(e: BillingError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

/// Runs the CLI on `argv` (including the program name), writing results to
/// `out` and diagnostics to `err`. Returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: writing output: {e}");
                EXIT_INPUT
            }
        },
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Invariant(msg)) => {
            let _ = writeln!(err, "internal invariant violated: {msg}");
            EXIT_INVARIANT
        }
    }
}

fn json_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialise");
    text.push('\n');
    text
}

fn parse_energy(text: &str) -> Result<EnergyAmount, Failure> {
    EnergyAmount::new(exact::parse_rational(text).map_err(input)?).map_err(input)
}

fn parse_money(text: &str) -> Result<MoneyAmount, Failure> {
    MoneyAmount::new(exact::parse_rational(text).map_err(input)?).map_err(input)
}

fn dispatch(command: CliCommand) -> Result<String, Failure> {
    match command {
        CliCommand::Validate { schedule, output } => {
            let s = parse_schedule_file(&schedule)?;
            Ok(match output.format {
                Format::Table => report::schedule_table(&s),
                Format::Json => json_text(&schedule_to_json(&s)),
            })
        }
        CliCommand::Bill { schedule, usage, slot_hours, period_days, group_size, output } => {
            let mut s = parse_schedule_file(&schedule)?;
            if let Some(hours) = slot_hours {
                let hours = exact::parse_rational(&hours).map_err(input)?;
                let days = period_days.unwrap_or(s.base_period_days());
                s = s.scale_by(&crate::tariff::slot_factor(&hours, days).map_err(input)?);
            }
            if group_size != 1 {
                s = s.scale_by(&ScaleFactor::group(group_size).map_err(input)?);
            }
            let usage = parse_energy(&usage)?;
            let price = s.progressive_price(&usage);
            let rows = s.tier_breakdown(&usage);
            let opts = output.render();
            Ok(match output.format {
                Format::Table => report::bill_table(&usage, &price, &rows, s.currency(), &opts),
                Format::Json => json_text(&report::bill_json(&usage, &price, &rows, s.currency(), &opts)),
            })
        }
        CliCommand::Simulate { trace, scheme, output } => {
            let schemes = scheme
                .iter()
                .map(|s| s.parse::<SchemeKind>().map_err(Failure::Input))
                .collect::<Result<Vec<_>, _>>()?;
            let loaded = load_trace(&trace)?;
            let opts = output.render();
            let reports = schemes
                .into_iter()
                .map(|k| run_scheme(&loaded.matrix, &loaded.schedule, &loaded.grid, k, &loaded.options))
                .collect::<Result<Vec<_>, _>>()?;
            for r in &reports {
                check_allocation_totals(r, loaded.options.policy)?;
            }
            Ok(match output.format {
                Format::Table => reports.iter().map(|r| report::billing_report_table(r, &opts)).collect::<Vec<_>>().join("\n"),
                Format::Json => json_text(&Value::Array(
                    reports.iter().map(|r| report::billing_report_json(r, &opts)).collect(),
                )),
            })
        }
        CliCommand::Compare { trace, output } => {
            let loaded = load_trace(&trace)?;
            let c = compare_schemes(&loaded.matrix, &loaded.schedule, &loaded.grid, &loaded.options)?;
            if let Some(v) = c.ordering_violations().first() {
                return Err(Failure::Invariant(v.to_string()));
            }
            check_allocation_totals(&c.group, loaded.options.policy)?;
            let opts = output.render();
            Ok(match output.format {
                Format::Table => report::comparison_table(&c, &opts),
                Format::Json => json_text(&report::comparison_json(&c, &opts)),
            })
        }
        CliCommand::Allocate { group, individual, ids, policy, output } => {
            let group = parse_money(&group)?;
            if !ids.is_empty() && ids.len() != individual.len() {
                return Err(Failure::Input(format!(
                    "{} ids given for {} individual prices",
                    ids.len(),
                    individual.len()
                )));
            }
            let priced = individual
                .iter()
                .enumerate()
                .map(|(i, text)| {
                    let id = match ids.get(i) {
                        Some(id) => ConsumerId::new(id.clone()).map_err(input)?,
                        None => ConsumerId::new(format!("c{}", i + 1)).expect("non-empty id"),
                    };
                    Ok((id, parse_money(text)?))
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let result = proportional_allocation(&group, &priced, policy).map_err(input)?;
            if policy == AllocationPolicy::ProportionalExactSum && result.total() != group.round() {
                return Err(Failure::Invariant(format!(
                    "exact-sum allocation totals {} instead of {}",
                    result.total(),
                    group.round()
                )));
            }
            Ok(match output.format {
                Format::Table => report::allocation_table(&result, &group),
                Format::Json => json_text(&report::allocation_json(&result, &group, &output.render())),
            })
        }
        CliCommand::Shift { trace, consumer, from_slot, to_slot, amount, daily, output } => {
            let loaded = load_trace(&trace)?;
            let consumer = ConsumerId::new(consumer).map_err(input)?;
            let amount = parse_energy(&amount)?;
            let shifts = if daily {
                let per_day = loaded.grid.slots_per_day();
                if from_slot >= per_day || to_slot >= per_day {
                    return Err(BillingError::UnknownSlot { slot: from_slot.max(to_slot), slots: per_day }.into());
                }
                daily_shifts(&loaded.grid, &consumer, from_slot, to_slot, &amount)
            } else {
                vec![Shift { consumer: consumer.clone(), from_slot, to_slot, amount }]
            };
            let r = what_if_shifts(&loaded.matrix, &loaded.schedule, &loaded.grid, &shifts, &loaded.options)?;
            let before = r.before.report(SchemeKind::MonthlyIndividual).bill_for(&consumer).map(|b| b.total.clone());
            let after = r.after.report(SchemeKind::MonthlyIndividual).bill_for(&consumer).map(|b| b.total.clone());
            if before != after {
                return Err(Failure::Invariant("shift changed the consumer's period total".into()));
            }
            let opts = output.render();
            Ok(match output.format {
                Format::Table => report::shift_table(&r, &consumer, &opts),
                Format::Json => json_text(&report::shift_json(&r, &consumer, &opts)),
            })
        }
    }
}

fn check_allocation_totals(r: &crate::billing::BillingReport, policy: AllocationPolicy) -> Result<(), Failure> {
    if r.scheme != SchemeKind::SlottedGroup || policy != AllocationPolicy::ProportionalExactSum {
        return Ok(());
    }
    let Some(prices) = &r.group_slot_prices else { return Ok(()) };
    for (slot, price) in prices.iter().enumerate() {
        let allocated: MoneyAmount =
            r.bills.iter().filter_map(|b| b.slot_charges.as_ref().map(|c| c[slot].clone())).sum();
        if allocated.round() != price.round() {
            return Err(Failure::Invariant(format!("slot {slot}: allocations do not add up to the group price")));
        }
    }
    Ok(())
}

struct LoadedTrace {
    schedule: TariffSchedule,
    grid: SlotGrid,
    matrix: SlotUsageMatrix,
    options: BillingOptions,
}

fn load_trace(args: &TraceArgs) -> Result<LoadedTrace, Failure> {
    let schedule = parse_schedule_file(&args.schedule)?;
    if args.interval_minutes <= 0 {
        return Err(Failure::Input("--interval-minutes must be positive".into()));
    }
    let readings = parse_trace_csv(&args.trace, TimeDelta::minutes(args.interval_minutes))?;
    let slot_hours: BigRational = exact::parse_rational(&args.slot_hours).map_err(input)?;
    let period_days = args.period_days.unwrap_or(schedule.base_period_days());
    let period_start = match &args.period_start {
        Some(text) => DateTime::parse_from_rfc3339(text)
            .map_err(|e| Failure::Input(format!("--period-start {text:?}: {e}")))?
            .with_timezone(&Utc),
        None => default_period_start(readings.iter().map(|r| r.interval_start)),
    };
    let grid = SlotGrid::new(slot_hours, period_days, period_start).map_err(input)?;
    let matrix = slot_partition(&readings, &grid)?;
    let execution = if args.sequential { Execution::Sequential } else { Execution::default() };
    Ok(LoadedTrace { schedule, grid, matrix, options: BillingOptions { policy: args.policy, execution } })
}

fn default_period_start(starts: impl Iterator<Item = DateTime<Utc>>) -> DateTime<Utc> {
    let earliest = starts.min().unwrap_or(DateTime::UNIX_EPOCH);
    earliest.date_naive().and_hms_opt(0, 0, 0).expect("midnight exists").and_utc()
}
