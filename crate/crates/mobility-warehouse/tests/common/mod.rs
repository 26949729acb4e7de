//! Shared fixtures and brute-force oracles. The oracles scan the raw flat
//! records directly, so they share no code with the warehouse query path.
#![allow(dead_code)] // each test target uses a different subset

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::LazyLock;

use chrono::NaiveDate;
use mobility_warehouse::ingest::{self, DuplicatePolicy};
use mobility_warehouse::model::{
    region_prefix, DwellBucket, FlatWeeklyRecord, RegionLevel, SocialDistancingRecord, Warehouse,
};
use mobility_warehouse::synth;

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

pub struct DeskFixture {
    _dir: tempfile::TempDir,
    pub data_dir: PathBuf,
    pub snapshot_dir: PathBuf,
    pub records: Vec<FlatWeeklyRecord>,
    pub sd_records: Vec<SocialDistancingRecord>,
    pub warehouse: Warehouse,
}

/// Generates the desk preset once, parses it, and saves a snapshot.
pub static DESK: LazyLock<DeskFixture> = LazyLock::new(|| {
    let dir = tempfile::tempdir().expect("tempdir");
    let data_dir = dir.path().join("data");
    let snapshot_dir = dir.path().join("snapshot");
    let config = synth::preset("desk").expect("desk preset");
    synth::generate(&config, &data_dir).expect("generate desk data");
    let (records, report) =
        ingest::parse_flat_weekly(&data_dir.join("weekly_patterns.csv")).expect("parse weekly");
    assert_eq!(report.error_count(), 0, "desk data must be clean");
    assert_eq!(report.warning_count(), 0, "desk data must be warning-free");
    let (sd_records, sd_report) =
        ingest::parse_social_distancing(&data_dir.join("social_distancing.csv"))
            .expect("parse social distancing");
    assert_eq!(sd_report.error_count(), 0);
    let warehouse = ingest::load_warehouse(&records, DuplicatePolicy::Reject).expect("load");
    warehouse.save(&snapshot_dir).expect("save snapshot");
    DeskFixture {
        _dir: dir,
        data_dir,
        snapshot_dir,
        records,
        sd_records,
        warehouse,
    }
});

fn in_range(r: &FlatWeeklyRecord, start: NaiveDate, end: NaiveDate) -> bool {
    r.period_start >= start && r.period_end <= end
}

fn rank(totals: BTreeMap<String, u64>, k: usize) -> Vec<(String, f64)> {
    let mut rows: Vec<(String, f64)> = totals
        .into_iter()
        .map(|(key, v)| (key, v as f64))
        .collect();
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    rows.truncate(k);
    rows
}

fn long_visits(r: &FlatWeeklyRecord) -> u64 {
    r.bucketed_dwell_times
        .iter()
        .filter(|(label, _)| {
            DwellBucket::from_label(label).is_some_and(|b| b.is_long_duration())
        })
        .map(|(_, v)| v)
        .sum()
}

pub fn oracle_dwell(
    records: &[FlatWeeklyRecord],
    code: u32,
    start: NaiveDate,
    end: NaiveDate,
) -> BTreeMap<DwellBucket, u64> {
    let mut totals: BTreeMap<DwellBucket, u64> =
        DwellBucket::ALL.iter().map(|b| (*b, 0)).collect();
    for r in records {
        if r.naics_code != code || !in_range(r, start, end) {
            continue;
        }
        for (label, v) in &r.bucketed_dwell_times {
            if let Some(bucket) = DwellBucket::from_label(label) {
                *totals.get_mut(&bucket).unwrap() += v;
            }
        }
    }
    totals
}

/// (pois sorted by place id, category share distribution) for one CBG.
pub fn oracle_q1(
    records: &[FlatWeeklyRecord],
    cbg: &str,
    start: NaiveDate,
    end: NaiveDate,
) -> (Vec<(String, u32, u64)>, BTreeMap<u32, f64>) {
    let mut per_poi: BTreeMap<String, (u32, u64)> = BTreeMap::new();
    for r in records {
        if r.poi_cbg != cbg {
            continue;
        }
        let entry = per_poi.entry(r.place_id.clone()).or_insert((r.naics_code, 0));
        if in_range(r, start, end) {
            entry.1 += r.raw_visit_counts;
        }
    }
    let mut category_totals: BTreeMap<u32, u64> = BTreeMap::new();
    let pois: Vec<(String, u32, u64)> = per_poi
        .into_iter()
        .map(|(place, (naics, total))| {
            *category_totals.entry(naics).or_default() += total;
            (place, naics, total)
        })
        .collect();
    let grand: u64 = category_totals.values().sum();
    let distribution = category_totals
        .into_iter()
        .map(|(naics, total)| {
            let share = if grand == 0 {
                0.0
            } else {
                total as f64 / grand as f64
            };
            (naics, share)
        })
        .collect();
    (pois, distribution)
}

pub fn oracle_q2(
    records: &[FlatWeeklyRecord],
    start: NaiveDate,
    end: NaiveDate,
    k: usize,
) -> Vec<(String, f64)> {
    let mut totals: BTreeMap<String, u64> = BTreeMap::new();
    for r in records {
        totals.entry(r.naics_code.to_string()).or_default();
        if in_range(r, start, end) {
            *totals.get_mut(&r.naics_code.to_string()).unwrap() += r.raw_visit_counts;
        }
    }
    rank(totals, k)
}

pub fn oracle_q3(
    records: &[FlatWeeklyRecord],
    code: u32,
    state: Option<&str>,
    start: NaiveDate,
    end: NaiveDate,
    k: usize,
) -> Vec<(String, f64)> {
    let mut totals: BTreeMap<String, u64> = BTreeMap::new();
    for r in records {
        if r.naics_code != code {
            continue;
        }
        if let Some(state) = state {
            if region_prefix(&r.poi_cbg, RegionLevel::State) != state {
                continue;
            }
        }
        totals.entry(r.place_id.clone()).or_default();
        if in_range(r, start, end) {
            *totals.get_mut(&r.place_id).unwrap() += long_visits(r);
        }
    }
    rank(totals, k)
}

pub fn oracle_q4(
    records: &[FlatWeeklyRecord],
    baseline: (NaiveDate, NaiveDate),
    intervention: (NaiveDate, NaiveDate),
    min_baseline_visits: u64,
) -> Vec<(String, f64)> {
    let weeks = |start: NaiveDate, end: NaiveDate| -> BTreeSet<NaiveDate> {
        records
            .iter()
            .filter(|r| in_range(r, start, end))
            .map(|r| r.period_start)
            .collect()
    };
    let baseline_weeks = weeks(baseline.0, baseline.1);
    let intervention_weeks = weeks(intervention.0, intervention.1);
    let codes: BTreeSet<u32> = records.iter().map(|r| r.naics_code).collect();
    let mut rows = Vec::new();
    for code in codes {
        let total = |weeks: &BTreeSet<NaiveDate>| -> u64 {
            records
                .iter()
                .filter(|r| r.naics_code == code && weeks.contains(&r.period_start))
                .map(|r| r.raw_visit_counts)
                .sum()
        };
        let baseline_total = total(&baseline_weeks);
        if baseline_total < min_baseline_visits.max(1) || baseline_weeks.is_empty() {
            continue;
        }
        let baseline_mean = baseline_total as f64 / baseline_weeks.len() as f64;
        let intervention_mean = if intervention_weeks.is_empty() {
            0.0
        } else {
            total(&intervention_weeks) as f64 / intervention_weeks.len() as f64
        };
        rows.push((code.to_string(), intervention_mean / baseline_mean));
    }
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    rows
}

/// Weekly totals per category; a point for every distinct in-range week in
/// the whole dataset, zeros where the category is absent.
pub fn oracle_series(
    records: &[FlatWeeklyRecord],
    code: u32,
    long_only: bool,
    start: NaiveDate,
    end: NaiveDate,
) -> Vec<(NaiveDate, f64)> {
    let weeks: BTreeSet<NaiveDate> = records
        .iter()
        .filter(|r| in_range(r, start, end))
        .map(|r| r.period_start)
        .collect();
    weeks
        .into_iter()
        .map(|week| {
            let total: u64 = records
                .iter()
                .filter(|r| r.naics_code == code && r.period_start == week)
                .map(|r| {
                    if long_only {
                        long_visits(r)
                    } else {
                        r.raw_visit_counts
                    }
                })
                .sum();
            (week, total as f64)
        })
        .collect()
}
