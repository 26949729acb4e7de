//! `mw` — batch entry point for the mobility warehouse.
//!
//! Exit codes: 0 success, 1 validation errors present, 2 usage error,
//! 3 I/O error. Data goes to stdout, logs to stderr; every number printed
//! comes from a library call, never from CLI-side arithmetic.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use mobility_warehouse::api::{self, ApiState};
use mobility_warehouse::ingest::{self, DuplicatePolicy, IngestError, ValidationReport};
use mobility_warehouse::model::{
    suppress_low_device_cbgs, Warehouse, DEFAULT_SUPPRESSION_THRESHOLD,
};
use mobility_warehouse::query::{Answerability, QueryEngine, QueryError};
use mobility_warehouse::report::{fmt_sig6, render_report, ReportError, ReportSpec};
use mobility_warehouse::synth::{self, SynthError};

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "mw", version, about = "Mobility warehouse toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic input files from a config or a named preset.
    Synth {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in config: `desk` or `mn-scale`.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse, validate, and load flat files into a snapshot directory.
    Ingest {
        #[arg(long)]
        weekly: PathBuf,
        #[arg(long)]
        sd: Option<PathBuf>,
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SUPPRESSION_THRESHOLD)]
        suppress_threshold: u64,
    },
    /// Run a query against a snapshot.
    Query {
        #[command(subcommand)]
        query: QueryCommand,
    },
    /// Render a report bundle from a snapshot and a JSON report spec.
    Report {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        spec: PathBuf,
        /// Social-distancing CSV for compliance/sampling sections.
        #[arg(long)]
        sd: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve query aggregates over HTTP.
    Serve {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

#[derive(Args)]
struct RangeArgs {
    #[arg(long)]
    start: String,
    #[arg(long)]
    end: String,
}

impl RangeArgs {
    fn parse(&self) -> Result<(NaiveDate, NaiveDate), CliError> {
        let parse = |field: &str, raw: &str| {
            mobility_warehouse::model::parse_date(raw)
                .ok_or_else(|| CliError::usage(format!("--{field}: unparseable date {raw:?}")))
        };
        Ok((parse("start", &self.start)?, parse("end", &self.end)?))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum QueryCommand {
    /// Total visits by dwell-time bucket for one category.
    Dwell {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        code: u32,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Categories ranked by total visits.
    TopCategories {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Places ranked by long-duration visits within a category.
    Hangouts {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        code: u32,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Categories ranked by intervention/baseline visit ratio.
    LeastImpacted {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        baseline_start: String,
        #[arg(long)]
        baseline_end: String,
        #[arg(long)]
        intervention_start: String,
        #[arg(long)]
        intervention_end: String,
        #[arg(long, default_value_t = 1)]
        min_baseline_visits: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Whether a numbered policy question is answerable from warehouse data.
    Answerability {
        #[arg(long)]
        id: u8,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl ToString) -> CliError {
        CliError {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
    fn io(message: impl ToString) -> CliError {
        CliError {
            code: EXIT_IO,
            message: message.to_string(),
        }
    }
    fn validation(message: impl ToString) -> CliError {
        CliError {
            code: EXIT_VALIDATION,
            message: message.to_string(),
        }
    }
}

impl From<QueryError> for CliError {
    fn from(e: QueryError) -> CliError {
        CliError::usage(e)
    }
}

fn snapshot_dir(flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
    flag.or_else(|| std::env::var_os("MW_SNAPSHOT_DIR").map(PathBuf::from))
        .ok_or_else(|| CliError::usage("--snapshot or MW_SNAPSHOT_DIR required"))
}

fn load_snapshot(flag: Option<PathBuf>) -> Result<Warehouse, CliError> {
    let dir = snapshot_dir(flag)?;
    Warehouse::load(&dir).map_err(CliError::io)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth {
            config,
            preset,
            out,
        } => cmd_synth(config, preset, &out),
        Command::Ingest {
            weekly,
            sd,
            snapshot,
            suppress_threshold,
        } => cmd_ingest(&weekly, sd.as_deref(), snapshot, suppress_threshold),
        Command::Query { query } => cmd_query(query),
        Command::Report {
            snapshot,
            spec,
            sd,
            out,
        } => cmd_report(snapshot, &spec, sd.as_deref(), &out),
        Command::Serve { snapshot, bind } => cmd_serve(snapshot, &bind),
    }
}

fn cmd_synth(
    config: Option<PathBuf>,
    preset: Option<String>,
    out: &Path,
) -> Result<(), CliError> {
    let config = match (config, preset) {
        (Some(path), None) => {
            let json = std::fs::read_to_string(&path)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&json)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(name)) => synth::preset(&name).map_err(CliError::usage)?,
        _ => return Err(CliError::usage("exactly one of --config or --preset required")),
    };
    let manifest = synth::generate(&config, out).map_err(|e| match e {
        SynthError::Io { .. } => CliError::io(e),
        other => CliError::usage(other),
    })?;
    for (file, rows) in &manifest.files {
        println!("{file}\t{rows}");
    }
    Ok(())
}

fn print_report_summary(label: &str, report: &ValidationReport) {
    println!(
        "{label}: {} records, {} ok, {} errors, {} warnings",
        report.records_total,
        report.records_ok,
        report.error_count(),
        report.warning_count()
    );
    for issue in &report.issues {
        eprintln!(
            "{label} row {} [{}] {}: {}",
            issue.row,
            match issue.severity {
                ingest::Severity::Error => "error",
                ingest::Severity::Warning => "warning",
            },
            issue.field,
            issue.message
        );
    }
}

fn ingest_io(e: IngestError) -> CliError {
    match e {
        IngestError::Io { .. } => CliError::io(e),
        other => CliError::validation(other),
    }
}

fn cmd_ingest(
    weekly: &Path,
    sd: Option<&Path>,
    snapshot: Option<PathBuf>,
    suppress_threshold: u64,
) -> Result<(), CliError> {
    let dir = snapshot_dir(snapshot)?;
    let (records, weekly_report) = ingest::parse_flat_weekly(weekly).map_err(ingest_io)?;
    print_report_summary("weekly", &weekly_report);
    let mut had_errors = weekly_report.has_errors();

    if let Some(sd_path) = sd {
        let (sd_records, sd_report) =
            ingest::parse_social_distancing(sd_path).map_err(ingest_io)?;
        print_report_summary("social-distancing", &sd_report);
        had_errors |= sd_report.has_errors();
        let (kept, suppressed) = suppress_low_device_cbgs(sd_records, suppress_threshold);
        println!(
            "social-distancing: kept {} rows, suppressed {} block groups below {} devices",
            kept.len(),
            suppressed.len(),
            suppress_threshold
        );
    }

    let warehouse =
        ingest::load_warehouse(&records, DuplicatePolicy::Reject).map_err(ingest_io)?;
    warehouse.save(&dir).map_err(CliError::io)?;
    for (table, count) in warehouse.table_counts() {
        println!("{table}\t{count}");
    }
    if had_errors {
        return Err(CliError::validation("input had validation errors; snapshot written from clean rows"));
    }
    Ok(())
}

fn print_value(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serialize"));
}

fn cmd_query(query: QueryCommand) -> Result<(), CliError> {
    match query {
        QueryCommand::Dwell {
            snapshot,
            code,
            range,
            format,
        } => {
            let (start, end) = range.parse()?;
            let warehouse = load_snapshot(snapshot)?;
            let engine = QueryEngine::new(&warehouse);
            let totals = engine.dwell_aggregation(code, start, end)?;
            match format {
                Format::Json => print_value(&api::visits_body(&engine, code, start, end)),
                Format::Csv => {
                    println!("bucket,visits");
                    for (bucket, total) in totals {
                        println!("{},{}", bucket.label(), total);
                    }
                }
            }
        }
        QueryCommand::TopCategories {
            snapshot,
            k,
            range,
            format,
        } => {
            if k == 0 {
                return Err(CliError::usage("--k must be positive"));
            }
            let (start, end) = range.parse()?;
            let warehouse = load_snapshot(snapshot)?;
            let engine = QueryEngine::new(&warehouse);
            let ranked = engine.q2_top_categories(start, end, k)?;
            match format {
                Format::Json => print_value(&api::top_categories_body(&engine, start, end, k)),
                Format::Csv => {
                    println!("rank,naics,total_visits");
                    for (i, (code, total)) in ranked.rows.iter().enumerate() {
                        println!("{},{},{}", i + 1, code, *total as u64);
                    }
                }
            }
        }
        QueryCommand::Hangouts {
            snapshot,
            code,
            state,
            k,
            range,
            format,
        } => {
            if k == 0 {
                return Err(CliError::usage("--k must be positive"));
            }
            let (start, end) = range.parse()?;
            let warehouse = load_snapshot(snapshot)?;
            let engine = QueryEngine::new(&warehouse);
            let ranked = engine.q3_top_hangouts(code, state.as_deref(), start, end, k)?;
            match format {
                Format::Json => print_value(&api::hangouts_body(
                    &engine,
                    code,
                    state.as_deref(),
                    start,
                    end,
                    k,
                )),
                Format::Csv => {
                    println!("rank,place_id,long_duration_visits");
                    for (i, (place, total)) in ranked.rows.iter().enumerate() {
                        println!("{},{},{}", i + 1, place, *total as u64);
                    }
                }
            }
        }
        QueryCommand::LeastImpacted {
            snapshot,
            baseline_start,
            baseline_end,
            intervention_start,
            intervention_end,
            min_baseline_visits,
            format,
        } => {
            let parse = |field: &str, raw: &str| {
                mobility_warehouse::model::parse_date(raw).ok_or_else(|| {
                    CliError::usage(format!("--{field}: unparseable date {raw:?}"))
                })
            };
            let baseline = (
                parse("baseline-start", &baseline_start)?,
                parse("baseline-end", &baseline_end)?,
            );
            let intervention = (
                parse("intervention-start", &intervention_start)?,
                parse("intervention-end", &intervention_end)?,
            );
            let warehouse = load_snapshot(snapshot)?;
            let engine = QueryEngine::new(&warehouse);
            let result =
                engine.q4_least_impacted_category(baseline, intervention, min_baseline_visits)?;
            match format {
                Format::Json => {
                    let rows: Vec<serde_json::Value> = result
                        .rows
                        .iter()
                        .map(|(category, ratio)| {
                            serde_json::json!({"naics": category, "impact_ratio": ratio})
                        })
                        .collect();
                    print_value(&serde_json::json!({"rows": rows, "note": result.note}));
                }
                Format::Csv => {
                    println!("naics,impact_ratio");
                    for (category, ratio) in &result.rows {
                        println!("{},{}", category, fmt_sig6(*ratio));
                    }
                    if let Some(note) = &result.note {
                        eprintln!("note: {note}");
                    }
                }
            }
        }
        QueryCommand::Answerability { id } => {
            match mobility_warehouse::query::answerability(id)? {
                Answerability::Answerable => println!("Answerable"),
                Answerability::RequiresExternalData(what) => {
                    println!("RequiresExternalData: {what}")
                }
            }
        }
    }
    Ok(())
}

fn cmd_report(
    snapshot: Option<PathBuf>,
    spec_path: &Path,
    sd: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let json = std::fs::read_to_string(spec_path)
        .map_err(|e| CliError::io(format!("{}: {e}", spec_path.display())))?;
    let spec = ReportSpec::from_json(&json).map_err(CliError::usage)?;
    let warehouse = load_snapshot(snapshot)?;
    let sd_records = match sd {
        Some(path) => ingest::parse_social_distancing(path).map_err(ingest_io)?.0,
        None => Vec::new(),
    };
    let bundle = render_report(&warehouse, &sd_records, &spec, out).map_err(|e| match e {
        ReportError::Io { .. } => CliError::io(e),
        ReportError::InvalidSpec(_) | ReportError::SpecJson(_) => CliError::usage(e),
        ReportError::Section { .. } => CliError::validation(e),
    })?;
    for path in &bundle.artifacts {
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_serve(snapshot: Option<PathBuf>, bind: &str) -> Result<(), CliError> {
    // Load before binding: a bad snapshot must never reach the listen state.
    let warehouse = load_snapshot(snapshot)?;
    let state = std::sync::Arc::new(ApiState::new(warehouse));
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::io)?;
    runtime
        .block_on(api::serve(state, bind))
        .map_err(CliError::io)
}
