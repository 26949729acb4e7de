//! Domain types and the 3NF warehouse.
//!
//! The warehouse keeps one entity table per real-world thing (state, CBG,
//! POI, brand, measurement period) and four fact tables keyed by
//! `(place_id, period_start, ...)`. All tables are ordered maps so snapshots
//! and comparisons are deterministic. A warehouse is immutable once ingest
//! finishes; readers may share it freely across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Discretized visit duration, in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DwellBucket {
    Under5,
    From5To20,
    From21To60,
    From61To240,
    Over240,
}

impl DwellBucket {
    /// All buckets in lower-bound order.
    pub const ALL: [DwellBucket; 5] = [
        DwellBucket::Under5,
        DwellBucket::From5To20,
        DwellBucket::From21To60,
        DwellBucket::From61To240,
        DwellBucket::Over240,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DwellBucket::Under5 => "<5",
            DwellBucket::From5To20 => "5-20",
            DwellBucket::From21To60 => "21-60",
            DwellBucket::From61To240 => "61-240",
            DwellBucket::Over240 => ">240",
        }
    }

    pub fn from_label(label: &str) -> Option<DwellBucket> {
        Self::ALL.iter().copied().find(|b| b.label() == label)
    }

    /// A long-duration visit lasts longer than 20 minutes.
    pub fn is_long_duration(self) -> bool {
        matches!(
            self,
            DwellBucket::From21To60 | DwellBucket::From61To240 | DwellBucket::Over240
        )
    }

    /// Midpoint (minutes) used when a representative scalar is needed.
    pub fn midpoint_minutes(self) -> f64 {
        match self {
            DwellBucket::Under5 => 2.5,
            DwellBucket::From5To20 => 12.5,
            DwellBucket::From21To60 => 40.5,
            DwellBucket::From61To240 => 150.5,
            DwellBucket::Over240 => 300.0,
        }
    }
}

impl fmt::Display for DwellBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One row of the vendor's denormalized weekly-pattern table, nested columns
/// already decoded from their JSON cell encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatWeeklyRecord {
    pub place_id: String,
    pub location_name: String,
    pub brand: Option<String>,
    pub naics_code: u32,
    pub poi_cbg: String,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub period_start: NaiveDate,
    pub period_end: NaiveDate,
    pub raw_visit_counts: u64,
    pub raw_visitor_counts: u64,
    pub median_dwell_minutes: f64,
    pub bucketed_dwell_times: BTreeMap<String, u64>,
    pub visits_by_day: Vec<u64>,
    pub visitor_home_cbgs: BTreeMap<String, u64>,
    pub distance_from_home_meters: Option<f64>,
}

/// One atomic (1NF) dwell-time row exploded from a flat record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DwellRow {
    pub place_id: String,
    pub period_start: NaiveDate,
    pub period_end: NaiveDate,
    pub naics_code: u32,
    pub dwell_bucket: DwellBucket,
    pub visits: u64,
}

/// Daily aggregated social-distancing metrics for one origin CBG.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialDistancingRecord {
    pub origin_cbg: String,
    pub date: NaiveDate,
    pub device_count: u64,
    pub median_distance_traveled_from_home_meters: f64,
    pub median_home_dwell_time_minutes: f64,
    pub completely_home_device_count: u64,
}

/// Dated intervention labels, strictly increasing by date.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolicyCalendar {
    pub entries: Vec<(NaiveDate, String)>,
}

#[derive(Debug, Error)]
pub enum CalendarError {
    #[error("calendar dates must be strictly increasing (entry {0})")]
    OutOfOrder(usize),
    #[error("calendar label must be nonempty (entry {0})")]
    EmptyLabel(usize),
    #[error("reading calendar: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing calendar: {0}")]
    Csv(#[from] csv::Error),
    #[error("calendar row {0}: bad date {1:?}")]
    BadDate(usize, String),
}

impl PolicyCalendar {
    pub fn new(entries: Vec<(NaiveDate, String)>) -> Result<Self, CalendarError> {
        for (i, (date, label)) in entries.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(CalendarError::EmptyLabel(i));
            }
            if i > 0 && entries[i - 1].0 >= *date {
                return Err(CalendarError::OutOfOrder(i));
            }
        }
        Ok(PolicyCalendar { entries })
    }

    /// Loads a `date,label` CSV.
    pub fn load_csv(path: &Path) -> Result<Self, CalendarError> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                CalendarError::Io(std::io::Error::other(format!("{}: {e}", path.display())))
            }
            _ => CalendarError::Csv(e),
        })?;
        let mut entries = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let date_str = row.get(0).unwrap_or("").to_string();
            let date = parse_date(&date_str)
                .ok_or_else(|| CalendarError::BadDate(i + 2, date_str.clone()))?;
            entries.push((date, row.get(1).unwrap_or("").to_string()));
        }
        PolicyCalendar::new(entries)
    }
}

/// Geographic granularity of a population table or roll-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionLevel {
    Cbg,
    Tract,
    County,
    State,
}

impl RegionLevel {
    pub fn id_len(self) -> usize {
        match self {
            RegionLevel::Cbg => 12,
            RegionLevel::Tract => 11,
            RegionLevel::County => 5,
            RegionLevel::State => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RegionLevel::Cbg => "cbg",
            RegionLevel::Tract => "tract",
            RegionLevel::County => "county",
            RegionLevel::State => "state",
        }
    }

    pub fn from_name(s: &str) -> Option<RegionLevel> {
        match s {
            "cbg" => Some(RegionLevel::Cbg),
            "tract" => Some(RegionLevel::Tract),
            "county" => Some(RegionLevel::County),
            "state" => Some(RegionLevel::State),
            _ => None,
        }
    }
}

/// Truncates a 12-char CBG id to the requested FIPS level.
pub fn region_prefix(cbg: &str, level: RegionLevel) -> &str {
    let n = level.id_len().min(cbg.len());
    &cbg[..n]
}

#[derive(Debug, Error)]
pub enum PopulationError {
    #[error("region id {0:?} has wrong length for level {1}")]
    BadIdLength(String, &'static str),
    #[error("duplicate region id {0:?}")]
    DuplicateRegion(String),
    #[error("reading population table: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing population table: {0}")]
    Csv(#[from] csv::Error),
    #[error("population row {0}: {1}")]
    BadRow(usize, String),
}

/// Resident population per region at one geographic level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationTable {
    pub region_level: RegionLevel,
    pub rows: BTreeMap<String, u64>,
}

impl PopulationTable {
    pub fn new(
        region_level: RegionLevel,
        rows: Vec<(String, u64)>,
    ) -> Result<Self, PopulationError> {
        let mut map = BTreeMap::new();
        for (id, pop) in rows {
            if id.len() != region_level.id_len() {
                return Err(PopulationError::BadIdLength(id, region_level.name()));
            }
            if map.insert(id.clone(), pop).is_some() {
                return Err(PopulationError::DuplicateRegion(id));
            }
        }
        Ok(PopulationTable {
            region_level,
            rows: map,
        })
    }

    /// Loads a `region_level,region_id,population` CSV, keeping rows at `level`.
    pub fn load_csv(path: &Path, level: RegionLevel) -> Result<Self, PopulationError> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut rows = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let row_level = row.get(0).unwrap_or("");
            if RegionLevel::from_name(row_level).is_none() {
                return Err(PopulationError::BadRow(
                    i + 2,
                    format!("unknown region level {row_level:?}"),
                ));
            }
            if row_level != level.name() {
                continue;
            }
            let id = row.get(1).unwrap_or("").to_string();
            let pop: u64 = row
                .get(2)
                .unwrap_or("")
                .parse()
                .map_err(|_| PopulationError::BadRow(i + 2, "bad population count".into()))?;
            rows.push((id, pop));
        }
        PopulationTable::new(level, rows)
    }
}

/// Entity row for one point of interest.
#[derive(Debug, Clone, PartialEq)]
pub struct PoiEntity {
    pub name: String,
    pub naics_code: u32,
    pub cbg: String,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
}

/// Per-(poi, period) visit summary.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitFact {
    pub raw_visits: u64,
    pub raw_visitors: u64,
    pub median_dwell_minutes: f64,
    pub distance_from_home_meters: Option<f64>,
}

/// The 3NF store. Entity tables first, fact tables after.
///
/// Latent entities (mobile device, visitor, visit) have no tables of their
/// own; they surface only through the aggregated fact rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Warehouse {
    pub countries: BTreeSet<String>,
    /// state FIPS -> country code
    pub states: BTreeMap<String, String>,
    /// CBG id -> state FIPS
    pub cbgs: BTreeMap<String, String>,
    pub pois: BTreeMap<String, PoiEntity>,
    pub brands: BTreeSet<String>,
    /// (brand, place_id) association links
    pub brand_poi: BTreeSet<(String, String)>,
    /// period start -> period end
    pub periods: BTreeMap<NaiveDate, NaiveDate>,
    pub visit_facts: BTreeMap<(String, NaiveDate), VisitFact>,
    pub dwell_facts: BTreeMap<(String, NaiveDate, DwellBucket), u64>,
    /// day_index runs 0..=6 from the period start
    pub interval_facts: BTreeMap<(String, NaiveDate, u8), u64>,
    pub origin_facts: BTreeMap<(String, NaiveDate, String), u64>,
}

pub const SNAPSHOT_FILES: [&str; 11] = [
    "countries.csv",
    "states.csv",
    "cbgs.csv",
    "pois.csv",
    "brands.csv",
    "brand_poi.csv",
    "periods.csv",
    "visit_facts.csv",
    "dwell_facts.csv",
    "interval_facts.csv",
    "origin_facts.csv",
];

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("writing {file}: {source}")]
    Write {
        file: String,
        source: std::io::Error,
    },
    #[error("reading {file}: {source}")]
    Read {
        file: String,
        source: std::io::Error,
    },
    #[error("{file} row {row}: {message}")]
    BadRow {
        file: String,
        row: usize,
        message: String,
    },
    #[error("{file} row {row}: unknown {kind} {id:?}")]
    DanglingReference {
        file: String,
        row: usize,
        kind: &'static str,
        id: String,
    },
}

/// Formats an optional float for CSV; `None` becomes the empty field.
fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Shortest round-trippable representation, stable across runs.
pub fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

fn parse_opt_f64(field: &str) -> Result<Option<f64>, String> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| format!("bad float {field:?}"))
}

/// Parses ISO-8601 first, then the vendor's MM-DD-YYYY style.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%m-%d-%Y"))
        .ok()
}

impl Warehouse {
    /// Writes one CSV per table into `dir`, creating it if needed. Rows are
    /// emitted in primary-key order so two saves of equal warehouses are
    /// byte-identical.
    pub fn save(&self, dir: &Path) -> Result<(), SnapshotError> {
        let wrap = |file: &str| {
            let file = file.to_string();
            move |source: std::io::Error| SnapshotError::Write { file, source }
        };
        fs::create_dir_all(dir).map_err(wrap("<snapshot dir>"))?;

        let write = |name: &str, header: &str, rows: Vec<String>| -> Result<(), SnapshotError> {
            let mut out = String::with_capacity(rows.len() * 32 + header.len() + 1);
            out.push_str(header);
            out.push('\n');
            for row in rows {
                out.push_str(&row);
                out.push('\n');
            }
            fs::write(dir.join(name), out).map_err(wrap(name))
        };

        write(
            "countries.csv",
            "code",
            self.countries.iter().cloned().collect(),
        )?;
        write(
            "states.csv",
            "code,country",
            self.states
                .iter()
                .map(|(s, c)| format!("{s},{c}"))
                .collect(),
        )?;
        write(
            "cbgs.csv",
            "id,state",
            self.cbgs.iter().map(|(c, s)| format!("{c},{s}")).collect(),
        )?;
        write(
            "pois.csv",
            "place_id,name,naics,cbg,latitude,longitude",
            self.pois
                .iter()
                .map(|(id, p)| {
                    format!(
                        "{},{},{},{},{},{}",
                        id,
                        csv_escape(&p.name),
                        p.naics_code,
                        p.cbg,
                        opt_f64(p.latitude),
                        opt_f64(p.longitude)
                    )
                })
                .collect(),
        )?;
        write("brands.csv", "name", {
            self.brands.iter().map(|b| csv_escape(b)).collect()
        })?;
        write(
            "brand_poi.csv",
            "brand,place_id",
            self.brand_poi
                .iter()
                .map(|(b, p)| format!("{},{}", csv_escape(b), p))
                .collect(),
        )?;
        write(
            "periods.csv",
            "start,end",
            self.periods
                .iter()
                .map(|(s, e)| format!("{s},{e}"))
                .collect(),
        )?;
        write(
            "visit_facts.csv",
            "place_id,period_start,raw_visits,raw_visitors,median_dwell,distance_from_home",
            self.visit_facts
                .iter()
                .map(|((id, start), f)| {
                    format!(
                        "{},{},{},{},{},{}",
                        id,
                        start,
                        f.raw_visits,
                        f.raw_visitors,
                        fmt_f64(f.median_dwell_minutes),
                        opt_f64(f.distance_from_home_meters)
                    )
                })
                .collect(),
        )?;
        write(
            "dwell_facts.csv",
            "place_id,period_start,bucket,visits",
            self.dwell_facts
                .iter()
                .map(|((id, start, b), v)| format!("{id},{start},{b},{v}"))
                .collect(),
        )?;
        write(
            "interval_facts.csv",
            "place_id,period_start,day_index,visits",
            self.interval_facts
                .iter()
                .map(|((id, start, d), v)| format!("{id},{start},{d},{v}"))
                .collect(),
        )?;
        write(
            "origin_facts.csv",
            "place_id,period_start,origin_cbg,visitors",
            self.origin_facts
                .iter()
                .map(|((id, start, cbg), v)| format!("{id},{start},{cbg},{v}"))
                .collect(),
        )?;
        Ok(())
    }

    /// Loads a snapshot, validating referential integrity.
    pub fn load(dir: &Path) -> Result<Warehouse, SnapshotError> {
        let read_table = |name: &str| -> Result<Vec<csv::StringRecord>, SnapshotError> {
            let path = dir.join(name);
            let mut reader = csv::Reader::from_path(&path).map_err(|e| SnapshotError::Read {
                file: name.to_string(),
                source: std::io::Error::other(e.to_string()),
            })?;
            reader
                .records()
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| SnapshotError::Read {
                    file: name.to_string(),
                    source: std::io::Error::other(e.to_string()),
                })
        };
        let bad = |file: &str, row: usize, message: String| SnapshotError::BadRow {
            file: file.to_string(),
            row,
            message,
        };
        let field = |rec: &csv::StringRecord, i: usize| rec.get(i).unwrap_or("").to_string();
        let date_field = |file: &str, row: usize, rec: &csv::StringRecord, i: usize| {
            let s = field(rec, i);
            parse_date(&s).ok_or_else(|| bad(file, row, format!("bad date {s:?}")))
        };
        let int_field = |file: &str, row: usize, rec: &csv::StringRecord, i: usize| {
            let s = field(rec, i);
            s.parse::<u64>()
                .map_err(|_| bad(file, row, format!("bad integer {s:?}")))
        };

        let mut w = Warehouse::default();
        for rec in read_table("countries.csv")? {
            w.countries.insert(field(&rec, 0));
        }
        for (i, rec) in read_table("states.csv")?.into_iter().enumerate() {
            let (code, country) = (field(&rec, 0), field(&rec, 1));
            if !w.countries.contains(&country) {
                return Err(SnapshotError::DanglingReference {
                    file: "states.csv".into(),
                    row: i + 2,
                    kind: "country",
                    id: country,
                });
            }
            w.states.insert(code, country);
        }
        for (i, rec) in read_table("cbgs.csv")?.into_iter().enumerate() {
            let (id, state) = (field(&rec, 0), field(&rec, 1));
            if !w.states.contains_key(&state) {
                return Err(SnapshotError::DanglingReference {
                    file: "cbgs.csv".into(),
                    row: i + 2,
                    kind: "state",
                    id: state,
                });
            }
            w.cbgs.insert(id, state);
        }
        for (i, rec) in read_table("pois.csv")?.into_iter().enumerate() {
            let row = i + 2;
            let cbg = field(&rec, 3);
            if !w.cbgs.contains_key(&cbg) {
                return Err(SnapshotError::DanglingReference {
                    file: "pois.csv".into(),
                    row,
                    kind: "cbg",
                    id: cbg,
                });
            }
            let naics = field(&rec, 2)
                .parse()
                .map_err(|_| bad("pois.csv", row, "bad naics".into()))?;
            w.pois.insert(
                field(&rec, 0),
                PoiEntity {
                    name: field(&rec, 1),
                    naics_code: naics,
                    cbg,
                    latitude: parse_opt_f64(rec.get(4).unwrap_or(""))
                        .map_err(|m| bad("pois.csv", row, m))?,
                    longitude: parse_opt_f64(rec.get(5).unwrap_or(""))
                        .map_err(|m| bad("pois.csv", row, m))?,
                },
            );
        }
        for rec in read_table("brands.csv")? {
            w.brands.insert(field(&rec, 0));
        }
        for (i, rec) in read_table("brand_poi.csv")?.into_iter().enumerate() {
            let (brand, poi) = (field(&rec, 0), field(&rec, 1));
            let (row, file) = (i + 2, "brand_poi.csv");
            if !w.brands.contains(&brand) {
                return Err(SnapshotError::DanglingReference {
                    file: file.into(),
                    row,
                    kind: "brand",
                    id: brand,
                });
            }
            if !w.pois.contains_key(&poi) {
                return Err(SnapshotError::DanglingReference {
                    file: file.into(),
                    row,
                    kind: "poi",
                    id: poi,
                });
            }
            w.brand_poi.insert((brand, poi));
        }
        for (i, rec) in read_table("periods.csv")?.into_iter().enumerate() {
            let row = i + 2;
            let start = date_field("periods.csv", row, &rec, 0)?;
            let end = date_field("periods.csv", row, &rec, 1)?;
            w.periods.insert(start, end);
        }

        // Fact tables; each reference must resolve.
        let check_fact_key = |w: &Warehouse,
                              file: &str,
                              row: usize,
                              poi: &str,
                              start: NaiveDate|
         -> Result<(), SnapshotError> {
            if !w.pois.contains_key(poi) {
                return Err(SnapshotError::DanglingReference {
                    file: file.into(),
                    row,
                    kind: "poi",
                    id: poi.into(),
                });
            }
            if !w.periods.contains_key(&start) {
                return Err(SnapshotError::DanglingReference {
                    file: file.into(),
                    row,
                    kind: "period",
                    id: start.to_string(),
                });
            }
            Ok(())
        };

        for (i, rec) in read_table("visit_facts.csv")?.into_iter().enumerate() {
            let (row, file) = (i + 2, "visit_facts.csv");
            let poi = field(&rec, 0);
            let start = date_field(file, row, &rec, 1)?;
            check_fact_key(&w, file, row, &poi, start)?;
            let median: f64 = field(&rec, 4)
                .parse()
                .map_err(|_| bad(file, row, "bad median_dwell".into()))?;
            w.visit_facts.insert(
                (poi, start),
                VisitFact {
                    raw_visits: int_field(file, row, &rec, 2)?,
                    raw_visitors: int_field(file, row, &rec, 3)?,
                    median_dwell_minutes: median,
                    distance_from_home_meters: parse_opt_f64(rec.get(5).unwrap_or(""))
                        .map_err(|m| bad(file, row, m))?,
                },
            );
        }
        for (i, rec) in read_table("dwell_facts.csv")?.into_iter().enumerate() {
            let (row, file) = (i + 2, "dwell_facts.csv");
            let poi = field(&rec, 0);
            let start = date_field(file, row, &rec, 1)?;
            check_fact_key(&w, file, row, &poi, start)?;
            let label = field(&rec, 2);
            let bucket = DwellBucket::from_label(&label)
                .ok_or_else(|| bad(file, row, format!("unknown bucket {label:?}")))?;
            w.dwell_facts
                .insert((poi, start, bucket), int_field(file, row, &rec, 3)?);
        }
        for (i, rec) in read_table("interval_facts.csv")?.into_iter().enumerate() {
            let (row, file) = (i + 2, "interval_facts.csv");
            let poi = field(&rec, 0);
            let start = date_field(file, row, &rec, 1)?;
            check_fact_key(&w, file, row, &poi, start)?;
            let day: u8 = field(&rec, 2)
                .parse()
                .map_err(|_| bad(file, row, "bad day_index".into()))?;
            if day > 6 {
                return Err(bad(file, row, format!("day_index {day} out of range")));
            }
            w.interval_facts
                .insert((poi, start, day), int_field(file, row, &rec, 3)?);
        }
        for (i, rec) in read_table("origin_facts.csv")?.into_iter().enumerate() {
            let (row, file) = (i + 2, "origin_facts.csv");
            let poi = field(&rec, 0);
            let start = date_field(file, row, &rec, 1)?;
            check_fact_key(&w, file, row, &poi, start)?;
            let cbg = field(&rec, 2);
            if !w.cbgs.contains_key(&cbg) {
                return Err(SnapshotError::DanglingReference {
                    file: file.into(),
                    row,
                    kind: "cbg",
                    id: cbg,
                });
            }
            w.origin_facts
                .insert((poi, start, cbg), int_field(file, row, &rec, 3)?);
        }
        Ok(w)
    }

    /// Table sizes keyed by snapshot file stem, for health reporting.
    pub fn table_counts(&self) -> BTreeMap<&'static str, usize> {
        BTreeMap::from([
            ("countries", self.countries.len()),
            ("states", self.states.len()),
            ("cbgs", self.cbgs.len()),
            ("pois", self.pois.len()),
            ("brands", self.brands.len()),
            ("brand_poi", self.brand_poi.len()),
            ("periods", self.periods.len()),
            ("visit_facts", self.visit_facts.len()),
            ("dwell_facts", self.dwell_facts.len()),
            ("interval_facts", self.interval_facts.len()),
            ("origin_facts", self.origin_facts.len()),
        ])
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Drops social-distancing records whose CBG reported fewer than `threshold`
/// devices and returns the distinct CBG ids that lost at least one record.
pub fn suppress_low_device_cbgs(
    records: Vec<SocialDistancingRecord>,
    threshold: u64,
) -> (Vec<SocialDistancingRecord>, BTreeSet<String>) {
    let mut kept = Vec::with_capacity(records.len());
    let mut suppressed = BTreeSet::new();
    for record in records {
        if record.device_count < threshold {
            suppressed.insert(record.origin_cbg.clone());
        } else {
            kept.push(record);
        }
    }
    (kept, suppressed)
}

/// Default device-count suppression threshold.
pub const DEFAULT_SUPPRESSION_THRESHOLD: u64 = 5;
