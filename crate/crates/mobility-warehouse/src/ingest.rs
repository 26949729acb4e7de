//! Parsing and loading: flat vendor files -> validated records -> 3NF warehouse.
//!
//! The weekly-pattern file is CSV whose nested columns
//! (`bucketed_dwell_times`, `visits_by_day`, `visitor_home_cbgs`) hold
//! JSON-encoded values inside the cells. Parsing is row-independent:
//! malformed rows are reported and skipped, never fatal.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Days, NaiveDate};
use thiserror::Error;

use crate::model::{
    parse_date, DwellBucket, DwellRow, FlatWeeklyRecord, PoiEntity, RegionLevel,
    SocialDistancingRecord, VisitFact, Warehouse, region_prefix,
};

pub const WEEKLY_HEADER: [&str; 16] = [
    "safegraph_place_id",
    "location_name",
    "brands",
    "naics_code",
    "poi_cbg",
    "latitude",
    "longitude",
    "date_range_start",
    "date_range_end",
    "raw_visit_counts",
    "raw_visitor_counts",
    "median_dwell",
    "bucketed_dwell_times",
    "visits_by_day",
    "visitor_home_cbgs",
    "distance_from_home",
];

pub const SOCIAL_DISTANCING_HEADER: [&str; 6] = [
    "origin_census_block_group",
    "date",
    "device_count",
    "distance_traveled_from_home",
    "median_home_dwell_time",
    "completely_home_device_count",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone)]
pub struct Issue {
    /// 1-based data row number (header is row 1).
    pub row: usize,
    pub field: String,
    pub severity: Severity,
    pub message: String,
}

impl Issue {
    fn error(row: usize, field: &str, message: impl Into<String>) -> Issue {
        Issue {
            row,
            field: field.to_string(),
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(row: usize, field: &str, message: impl Into<String>) -> Issue {
        Issue {
            row,
            field: field.to_string(),
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

#[derive(Debug, Default)]
pub struct ValidationReport {
    pub records_total: usize,
    pub records_ok: usize,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn error_count(&self) -> usize {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Error)
            .count()
    }

    pub fn warning_count(&self) -> usize {
        self.issues.len() - self.error_count()
    }

    pub fn has_errors(&self) -> bool {
        self.error_count() > 0
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: missing required column {column:?}")]
    MissingColumn { path: String, column: String },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("conflicting duplicate rows for poi {place_id:?} period {period_start}")]
    DuplicateConflict {
        place_id: String,
        period_start: NaiveDate,
    },
}

/// How `load_warehouse` treats repeated (poi, period) rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    /// Any repeat is a conflict, even if identical.
    #[default]
    Reject,
    /// Identical repeats collapse to one row; differing repeats conflict.
    DedupIdentical,
}

fn open_csv(
    path: &Path,
    required: &[&str],
) -> Result<(csv::Reader<std::fs::File>, BTreeMap<String, usize>), IngestError> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| IngestError::Io {
            path: display.clone(),
            source: std::io::Error::other(e.to_string()),
        })?;
    let headers = reader.headers().map_err(|source| IngestError::Csv {
        path: display.clone(),
        source,
    })?;
    let index: BTreeMap<String, usize> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim().to_lowercase(), i))
        .collect();
    for column in required {
        if !index.contains_key(*column) {
            return Err(IngestError::MissingColumn {
                path: display,
                column: column.to_string(),
            });
        }
    }
    Ok((reader, index))
}

/// Parses the weekly-pattern file. Malformed rows are skipped with an error
/// issue; rows with only warnings are kept.
pub fn parse_flat_weekly(
    path: &Path,
) -> Result<(Vec<FlatWeeklyRecord>, ValidationReport), IngestError> {
    let display = path.display().to_string();
    let (mut reader, index) = open_csv(path, &WEEKLY_HEADER)?;
    let col = |name: &str| index[name];

    let mut records = Vec::new();
    let mut report = ValidationReport::default();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        report.records_total += 1;
        let row = match row {
            Ok(r) => r,
            Err(source) => {
                if let csv::ErrorKind::Io(source) = source.into_kind() {
                    return Err(IngestError::Io {
                        path: display.clone(),
                        source,
                    });
                }
                report
                    .issues
                    .push(Issue::error(row_no, "<row>", "malformed CSV row"));
                continue;
            }
        };
        let get = |name: &str| row.get(col(name)).unwrap_or("").trim();

        let mut issues = Vec::new();
        let place_id = get("safegraph_place_id").to_string();
        if place_id.is_empty() {
            issues.push(Issue::error(row_no, "safegraph_place_id", "empty place id"));
        }
        let naics_code = match get("naics_code").parse::<u32>() {
            Ok(n) if (100_000..1_000_000).contains(&n) => n,
            _ => {
                issues.push(Issue::error(
                    row_no,
                    "naics_code",
                    "expected 6-digit integer",
                ));
                0
            }
        };
        let poi_cbg = get("poi_cbg").to_string();
        if poi_cbg.len() != 12 || !poi_cbg.bytes().all(|b| b.is_ascii_digit()) {
            issues.push(Issue::error(
                row_no,
                "poi_cbg",
                "expected 12-digit census block group id",
            ));
        }
        let mut date = |field: &str| match parse_date(get(field)) {
            Some(d) => d,
            None => {
                issues.push(Issue::error(row_no, field, "unparseable date"));
                NaiveDate::MIN
            }
        };
        let period_start = date("date_range_start");
        let period_end = date("date_range_end");
        let mut count = |field: &str| match get(field).parse::<u64>() {
            Ok(n) => n,
            Err(_) => {
                issues.push(Issue::error(row_no, field, "expected nonnegative integer"));
                0
            }
        };
        let raw_visit_counts = count("raw_visit_counts");
        let raw_visitor_counts = count("raw_visitor_counts");
        let median_dwell_minutes = match get("median_dwell").parse::<f64>() {
            Ok(v) if v >= 0.0 => v,
            _ => {
                issues.push(Issue::error(
                    row_no,
                    "median_dwell",
                    "expected nonnegative number",
                ));
                0.0
            }
        };
        let mut json_map = |field: &str| -> BTreeMap<String, u64> {
            let cell = get(field);
            if cell.is_empty() {
                return BTreeMap::new();
            }
            match serde_json::from_str(cell) {
                Ok(map) => map,
                Err(_) => {
                    issues.push(Issue::error(row_no, field, "malformed JSON object"));
                    BTreeMap::new()
                }
            }
        };
        let bucketed_dwell_times = json_map("bucketed_dwell_times");
        let visitor_home_cbgs = json_map("visitor_home_cbgs");
        let visits_by_day: Vec<u64> = match serde_json::from_str(get("visits_by_day")) {
            Ok(v) => v,
            Err(_) => {
                issues.push(Issue::error(row_no, "visits_by_day", "malformed JSON array"));
                Vec::new()
            }
        };
        let mut opt_float = |field: &str| -> Option<f64> {
            let cell = get(field);
            if cell.is_empty() {
                return None;
            }
            match cell.parse::<f64>() {
                Ok(v) => Some(v),
                Err(_) => {
                    issues.push(Issue::error(row_no, field, "expected number"));
                    None
                }
            }
        };
        let latitude = opt_float("latitude");
        let longitude = opt_float("longitude");
        let distance_from_home_meters = opt_float("distance_from_home");
        let brand = match get("brands") {
            "" => None,
            b => Some(b.to_string()),
        };

        let record = FlatWeeklyRecord {
            place_id,
            location_name: get("location_name").to_string(),
            brand,
            naics_code,
            poi_cbg,
            latitude,
            longitude,
            period_start,
            period_end,
            raw_visit_counts,
            raw_visitor_counts,
            median_dwell_minutes,
            bucketed_dwell_times,
            visits_by_day,
            visitor_home_cbgs,
            distance_from_home_meters,
        };
        let parse_ok = issues.iter().all(|i| i.severity != Severity::Error);
        if parse_ok {
            issues.extend(
                validate_record(&record)
                    .into_iter()
                    .map(|mut i| {
                        i.row = row_no;
                        i
                    }),
            );
        }
        let keep = issues.iter().all(|i| i.severity != Severity::Error);
        report.issues.extend(issues);
        if keep {
            report.records_ok += 1;
            records.push(record);
        }
    }
    Ok((records, report))
}

/// Parses the daily social-distancing file (flat columns only).
pub fn parse_social_distancing(
    path: &Path,
) -> Result<(Vec<SocialDistancingRecord>, ValidationReport), IngestError> {
    let (mut reader, index) = open_csv(path, &SOCIAL_DISTANCING_HEADER)?;
    let col = |name: &str| index[name];
    let mut records = Vec::new();
    let mut report = ValidationReport::default();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        report.records_total += 1;
        let row = match row {
            Ok(r) => r,
            Err(_) => {
                report
                    .issues
                    .push(Issue::error(row_no, "<row>", "malformed CSV row"));
                continue;
            }
        };
        let get = |name: &str| row.get(col(name)).unwrap_or("").trim();
        let mut issues = Vec::new();
        let origin_cbg = get("origin_census_block_group").to_string();
        if origin_cbg.len() != 12 {
            issues.push(Issue::error(
                row_no,
                "origin_census_block_group",
                "expected 12-digit census block group id",
            ));
        }
        let date = parse_date(get("date")).unwrap_or_else(|| {
            issues.push(Issue::error(row_no, "date", "unparseable date"));
            NaiveDate::MIN
        });
        let mut count = |field: &str| match get(field).parse::<u64>() {
            Ok(n) => n,
            Err(_) => {
                issues.push(Issue::error(row_no, field, "expected nonnegative integer"));
                0
            }
        };
        let device_count = count("device_count");
        let completely_home_device_count = count("completely_home_device_count");
        let mut metric = |field: &str| match get(field).parse::<f64>() {
            Ok(v) if v >= 0.0 => v,
            _ => {
                issues.push(Issue::error(row_no, field, "expected nonnegative number"));
                0.0
            }
        };
        let distance = metric("distance_traveled_from_home");
        let dwell = metric("median_home_dwell_time");
        if issues.is_empty() && completely_home_device_count > device_count {
            issues.push(Issue::error(
                row_no,
                "completely_home_device_count",
                "exceeds device_count",
            ));
        }
        let keep = issues.is_empty();
        report.issues.extend(issues);
        if keep {
            report.records_ok += 1;
            records.push(SocialDistancingRecord {
                origin_cbg,
                date,
                device_count,
                median_distance_traveled_from_home_meters: distance,
                median_home_dwell_time_minutes: dwell,
                completely_home_device_count,
            });
        }
    }
    Ok((records, report))
}

/// Checks a parsed record against the weekly-pattern invariants.
///
/// Errors: non-7-day period, unknown bucket label, visitors above visits,
/// wrong day-array length. Warnings: nested sums disagreeing with
/// `raw_visit_counts`.
pub fn validate_record(record: &FlatWeeklyRecord) -> Vec<Issue> {
    let mut issues = Vec::new();
    if record.period_start.checked_add_days(Days::new(7)) != Some(record.period_end) {
        issues.push(Issue::error(
            0,
            "date_range_end",
            "period must be 7 days",
        ));
    }
    for label in record.bucketed_dwell_times.keys() {
        if DwellBucket::from_label(label).is_none() {
            issues.push(Issue::error(
                0,
                "bucketed_dwell_times",
                format!("unknown bucket {label:?}"),
            ));
        }
    }
    if record.raw_visitor_counts > record.raw_visit_counts {
        issues.push(Issue::error(
            0,
            "raw_visitor_counts",
            "visitor count exceeds visit count",
        ));
    }
    if record.visits_by_day.len() != 7 {
        issues.push(Issue::error(
            0,
            "visits_by_day",
            format!("expected 7 entries, got {}", record.visits_by_day.len()),
        ));
    } else if record.visits_by_day.iter().sum::<u64>() != record.raw_visit_counts {
        issues.push(Issue::warning(
            0,
            "visits_by_day",
            "daily visits do not sum to raw_visit_counts",
        ));
    }
    if issues
        .iter()
        .all(|i| i.field != "bucketed_dwell_times")
        && record.bucketed_dwell_times.values().sum::<u64>() != record.raw_visit_counts
    {
        issues.push(Issue::warning(
            0,
            "bucketed_dwell_times",
            "bucket visits do not sum to raw_visit_counts",
        ));
    }
    issues
}

/// Explodes the nested dwell map into atomic 1NF rows, one per bucket key.
pub fn explode_to_1nf(record: &FlatWeeklyRecord) -> Vec<DwellRow> {
    record
        .bucketed_dwell_times
        .iter()
        .filter_map(|(label, visits)| {
            DwellBucket::from_label(label).map(|dwell_bucket| DwellRow {
                place_id: record.place_id.clone(),
                period_start: record.period_start,
                period_end: record.period_end,
                naics_code: record.naics_code,
                dwell_bucket,
                visits: *visits,
            })
        })
        .collect()
}

/// Folds validated records into the 3NF warehouse. Entities are
/// deduplicated; the state chain (CBG -> state -> country) is derived from
/// FIPS prefixes. Order of input records never changes the result.
pub fn load_warehouse(
    records: &[FlatWeeklyRecord],
    policy: DuplicatePolicy,
) -> Result<Warehouse, IngestError> {
    let mut w = Warehouse::default();
    let mut seen: BTreeMap<(String, NaiveDate), &FlatWeeklyRecord> = BTreeMap::new();
    // period that supplied each POI's entity row; earliest wins so the
    // result is independent of input order
    let mut entity_src: BTreeMap<String, NaiveDate> = BTreeMap::new();
    for record in records {
        let key = (record.place_id.clone(), record.period_start);
        if let Some(previous) = seen.get(&key) {
            if policy == DuplicatePolicy::Reject || *previous != record {
                return Err(IngestError::DuplicateConflict {
                    place_id: key.0,
                    period_start: key.1,
                });
            }
            continue;
        }
        seen.insert(key, record);

        register_cbg(&mut w, &record.poi_cbg);
        let supplies_entity = entity_src
            .get(&record.place_id)
            .is_none_or(|period| record.period_start < *period);
        if supplies_entity {
            entity_src.insert(record.place_id.clone(), record.period_start);
            w.pois.insert(
                record.place_id.clone(),
                PoiEntity {
                    name: record.location_name.clone(),
                    naics_code: record.naics_code,
                    cbg: record.poi_cbg.clone(),
                    latitude: record.latitude,
                    longitude: record.longitude,
                },
            );
        }
        if let Some(brand) = &record.brand {
            w.brands.insert(brand.clone());
            w.brand_poi.insert((brand.clone(), record.place_id.clone()));
        }
        w.periods.insert(record.period_start, record.period_end);
        w.visit_facts.insert(
            (record.place_id.clone(), record.period_start),
            VisitFact {
                raw_visits: record.raw_visit_counts,
                raw_visitors: record.raw_visitor_counts,
                median_dwell_minutes: record.median_dwell_minutes,
                distance_from_home_meters: record.distance_from_home_meters,
            },
        );
        for row in explode_to_1nf(record) {
            w.dwell_facts
                .insert((row.place_id, row.period_start, row.dwell_bucket), row.visits);
        }
        for (day, visits) in record.visits_by_day.iter().enumerate().take(7) {
            w.interval_facts.insert(
                (record.place_id.clone(), record.period_start, day as u8),
                *visits,
            );
        }
        for (origin, visitors) in &record.visitor_home_cbgs {
            register_cbg(&mut w, origin);
            w.origin_facts.insert(
                (record.place_id.clone(), record.period_start, origin.clone()),
                *visitors,
            );
        }
    }
    Ok(w)
}

fn register_cbg(w: &mut Warehouse, cbg: &str) {
    let state = region_prefix(cbg, RegionLevel::State).to_string();
    w.countries.insert("US".to_string());
    w.states.insert(state.clone(), "US".to_string());
    w.cbgs.insert(cbg.to_string(), state);
}
