//! Time-series and study-design computations: category trend series,
//! calendar annotation, sampling rates, compliance metrics, and the
//! matched-pair outbreak comparison.
//!
//! Weeks are keyed by the fact's `period_start` (vendor weeks, never
//! re-binned). Social-distancing weeks are anchored at the requested range
//! start since those records are daily.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

use crate::model::{
    PolicyCalendar, PopulationTable, RegionLevel, SocialDistancingRecord, Warehouse, region_prefix,
};
use crate::query::QueryEngine;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("start date {start} is after end date {end}")]
    InvalidRange { start: NaiveDate, end: NaiveDate },
    #[error("no categories requested")]
    NoCategories,
    #[error("population table is empty")]
    EmptyPopulation,
    #[error("population table level {have} does not match requested level {want}")]
    LevelMismatch { have: String, want: String },
    #[error("{group} group has zero visits in the baseline week")]
    ZeroBaseline { group: &'static str },
}

/// One labelled weekly line, optionally annotated with calendar events.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct WeeklySeries {
    pub label: String,
    pub points: Vec<(NaiveDate, f64)>,
    pub annotations: Vec<(NaiveDate, String)>,
}

/// Restrict a series to all visits or only long-duration buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwellFilter {
    All,
    LongOnly,
}

/// Display names for NAICS codes; unknown codes display as the code itself.
#[derive(Debug, Clone, Default)]
pub struct NaicsNames {
    names: BTreeMap<u32, String>,
}

impl NaicsNames {
    /// The small lookup table bundled with the crate.
    pub fn bundled() -> NaicsNames {
        let mut names = BTreeMap::new();
        for line in include_str!("../data/naics.csv").lines().skip(1) {
            if let Some((code, name)) = line.split_once(',') {
                if let Ok(code) = code.parse() {
                    names.insert(code, name.to_string());
                }
            }
        }
        NaicsNames { names }
    }

    /// Loads a `code,name` CSV.
    pub fn load_csv(path: &Path) -> std::io::Result<NaicsNames> {
        let mut reader = csv::Reader::from_path(path).map_err(std::io::Error::other)?;
        let mut names = BTreeMap::new();
        for row in reader.records() {
            let row = row.map_err(std::io::Error::other)?;
            if let (Some(code), Some(name)) = (row.get(0), row.get(1)) {
                if let Ok(code) = code.parse() {
                    names.insert(code, name.to_string());
                }
            }
        }
        Ok(NaicsNames { names })
    }

    pub fn display(&self, code: u32) -> String {
        self.names
            .get(&code)
            .cloned()
            .unwrap_or_else(|| code.to_string())
    }
}

/// One weekly series per requested category. A point exists for every
/// warehouse period fully inside the range; weeks where the category has no
/// facts report 0.
pub fn weekly_category_series(
    warehouse: &Warehouse,
    categories: &BTreeSet<u32>,
    dwell_filter: DwellFilter,
    start: NaiveDate,
    end: NaiveDate,
    names: &NaicsNames,
) -> Result<Vec<WeeklySeries>, AnalyticsError> {
    if categories.is_empty() {
        return Err(AnalyticsError::NoCategories);
    }
    if start > end {
        return Err(AnalyticsError::InvalidRange { start, end });
    }
    let engine = QueryEngine::new(warehouse);
    let periods = engine.periods_in_range(start, end);
    let mut result = Vec::new();
    for naics in categories {
        let places: Vec<&String> = warehouse
            .pois
            .iter()
            .filter(|(_, p)| p.naics_code == *naics)
            .map(|(id, _)| id)
            .collect();
        let points = periods
            .iter()
            .map(|period| {
                let total: u64 = places
                    .iter()
                    .map(|place| match dwell_filter {
                        DwellFilter::All => warehouse
                            .visit_facts
                            .get(&((*place).clone(), *period))
                            .map(|f| f.raw_visits)
                            .unwrap_or(0),
                        DwellFilter::LongOnly => engine
                            .long_duration_visits(place, std::slice::from_ref(period)),
                    })
                    .sum();
                (*period, total as f64)
            })
            .collect();
        result.push(WeeklySeries {
            label: names.display(*naics),
            points,
            annotations: Vec::new(),
        });
    }
    Ok(result)
}

/// Attaches calendar entries falling inside the series span. Points are
/// never altered.
pub fn annotate_with_calendar(mut series: WeeklySeries, calendar: &PolicyCalendar) -> WeeklySeries {
    let Some((first, _)) = series.points.first() else {
        return series;
    };
    let (last, _) = series.points.last().unwrap();
    let span_end = *last + chrono::Days::new(6);
    series.annotations = calendar
        .entries
        .iter()
        .filter(|(date, _)| *date >= *first && *date <= span_end)
        .cloned()
        .collect();
    series
}

/// Sampling rates plus the regions that had to be skipped or flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingRates {
    pub rates: BTreeMap<String, f64>,
    /// Regions with devices but zero/missing population.
    pub missing_population: Vec<String>,
    /// Regions whose rate exceeded 1.0 (more devices than residents).
    pub flagged_over_one: Vec<String>,
}

/// rate(region) = mean daily device count rolled up to `level`, divided by
/// the region's population.
pub fn sampling_rate(
    records: &[SocialDistancingRecord],
    population: &PopulationTable,
    level: RegionLevel,
    range: (NaiveDate, NaiveDate),
) -> Result<SamplingRates, AnalyticsError> {
    if population.rows.is_empty() {
        return Err(AnalyticsError::EmptyPopulation);
    }
    if population.region_level != level {
        return Err(AnalyticsError::LevelMismatch {
            have: population.region_level.name().to_string(),
            want: level.name().to_string(),
        });
    }
    let (start, end) = range;
    if start > end {
        return Err(AnalyticsError::InvalidRange { start, end });
    }
    let mut region_totals: BTreeMap<String, u64> = BTreeMap::new();
    let mut days: BTreeSet<NaiveDate> = BTreeSet::new();
    for record in records {
        if record.date < start || record.date > end {
            continue;
        }
        days.insert(record.date);
        let region = region_prefix(&record.origin_cbg, level).to_string();
        *region_totals.entry(region).or_default() += record.device_count;
    }
    let n_days = days.len().max(1) as f64;
    let mut rates = BTreeMap::new();
    let mut missing = Vec::new();
    let mut flagged = Vec::new();
    for (region, devices) in region_totals {
        let mean_daily = devices as f64 / n_days;
        match population.rows.get(&region) {
            Some(pop) if *pop > 0 => {
                let rate = mean_daily / *pop as f64;
                if rate > 1.0 {
                    flagged.push(region.clone());
                }
                rates.insert(region, rate);
            }
            _ => missing.push(region),
        }
    }
    Ok(SamplingRates {
        rates,
        missing_population: missing,
        flagged_over_one: flagged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplianceMetric {
    TimeAtHome,
    DistanceFromHome,
}

impl ComplianceMetric {
    pub fn name(self) -> &'static str {
        match self {
            ComplianceMetric::TimeAtHome => "time_at_home",
            ComplianceMetric::DistanceFromHome => "distance_from_home",
        }
    }
}

/// Source files carry per-CBG daily medians; there is no single right way to
/// roll those up to a weekly value, so both readings are available.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    MedianOfMedians,
    DeviceWeightedMean,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::MedianOfMedians => "median_of_medians",
            Aggregation::DeviceWeightedMean => "device_weighted_mean",
        }
    }
}

/// Weekly compliance series over unsuppressed social-distancing records.
/// Weeks are 7-day windows anchored at `start`.
pub fn compliance_series(
    records: &[SocialDistancingRecord],
    metric: ComplianceMetric,
    aggregation: Aggregation,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<WeeklySeries, AnalyticsError> {
    if start > end {
        return Err(AnalyticsError::InvalidRange { start, end });
    }
    let mut weeks: BTreeMap<NaiveDate, Vec<(f64, u64)>> = BTreeMap::new();
    for record in records {
        if record.date < start || record.date > end {
            continue;
        }
        let offset = (record.date - start).num_days() as u64 / 7;
        let week_start = start + chrono::Days::new(offset * 7);
        let value = match metric {
            ComplianceMetric::TimeAtHome => record.median_home_dwell_time_minutes,
            ComplianceMetric::DistanceFromHome => {
                record.median_distance_traveled_from_home_meters
            }
        };
        weeks
            .entry(week_start)
            .or_default()
            .push((value, record.device_count));
    }
    let points = weeks
        .into_iter()
        .map(|(week, samples)| (week, aggregate(&samples, aggregation)))
        .collect();
    Ok(WeeklySeries {
        label: format!("{} ({})", metric.name(), aggregation.name()),
        points,
        annotations: Vec::new(),
    })
}

fn aggregate(samples: &[(f64, u64)], aggregation: Aggregation) -> f64 {
    match aggregation {
        Aggregation::MedianOfMedians => {
            let mut values: Vec<f64> = samples.iter().map(|(v, _)| *v).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = values.len();
            if n % 2 == 1 {
                values[n / 2]
            } else {
                (values[n / 2 - 1] + values[n / 2]) / 2.0
            }
        }
        Aggregation::DeviceWeightedMean => {
            let weight: u64 = samples.iter().map(|(_, d)| *d).sum();
            if weight == 0 {
                return 0.0;
            }
            samples
                .iter()
                .map(|(v, d)| v * *d as f64)
                .sum::<f64>()
                / weight as f64
        }
    }
}

/// Matching constraints for outbreak/control pair selection.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchParams {
    pub max_distance_meters: f64,
    /// Accepted band for outbreak/control baseline visit ratio.
    pub visit_ratio_band: (f64, f64),
    /// Pre-lockdown weeks used to compare visit volumes.
    pub baseline_window: (NaiveDate, NaiveDate),
}

impl MatchParams {
    pub fn new(baseline_window: (NaiveDate, NaiveDate)) -> MatchParams {
        MatchParams {
            max_distance_meters: 5_000.0,
            visit_ratio_band: (0.8, 1.25),
            baseline_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub outbreak_poi: String,
    pub control_poi: String,
    pub distance_meters: f64,
    pub baseline_visit_ratio: f64,
}

const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle distance between two WGS84 points, in meters.
pub fn haversine_meters(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().asin()
}

/// Greedy one-to-one matching: outbreak POIs are visited in id order and
/// each takes its nearest still-unused candidate that shares the business
/// category, sits within the distance cutoff, and has a baseline visit
/// ratio inside the band. Failures land in the unmatched list.
pub fn match_controls(
    warehouse: &Warehouse,
    outbreak_pois: &[String],
    candidate_pois: &[String],
    params: &MatchParams,
) -> (Vec<MatchedPair>, Vec<String>) {
    let baseline = |place: &str| -> u64 {
        warehouse
            .visit_facts
            .iter()
            .filter(|((id, start), _)| {
                id == place
                    && *start >= params.baseline_window.0
                    && warehouse.periods.get(start).copied().unwrap_or(NaiveDate::MAX)
                        <= params.baseline_window.1
            })
            .map(|(_, f)| f.raw_visits)
            .sum()
    };

    let mut outbreaks: Vec<&String> = outbreak_pois.iter().collect();
    outbreaks.sort();
    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut pairs = Vec::new();
    let mut unmatched = Vec::new();
    for outbreak in outbreaks {
        let Some(poi) = warehouse.pois.get(outbreak) else {
            unmatched.push(outbreak.clone());
            continue;
        };
        let (Some(lat), Some(lon)) = (poi.latitude, poi.longitude) else {
            unmatched.push(outbreak.clone());
            continue;
        };
        let outbreak_baseline = baseline(outbreak);
        let mut best: Option<(f64, &String, f64)> = None;
        for candidate in candidate_pois {
            if used.contains(candidate.as_str()) || candidate == outbreak {
                continue;
            }
            let Some(cand) = warehouse.pois.get(candidate) else {
                continue;
            };
            if cand.naics_code != poi.naics_code {
                continue;
            }
            let (Some(clat), Some(clon)) = (cand.latitude, cand.longitude) else {
                continue;
            };
            let distance = haversine_meters(lat, lon, clat, clon);
            if distance > params.max_distance_meters {
                continue;
            }
            let cand_baseline = baseline(candidate);
            if outbreak_baseline == 0 || cand_baseline == 0 {
                continue;
            }
            let ratio = outbreak_baseline as f64 / cand_baseline as f64;
            if ratio < params.visit_ratio_band.0 || ratio > params.visit_ratio_band.1 {
                continue;
            }
            let better = match &best {
                None => true,
                Some((d, id, _)) => {
                    distance < *d || (distance == *d && candidate.as_str() < id.as_str())
                }
            };
            if better {
                best = Some((distance, candidate, ratio));
            }
        }
        match best {
            Some((distance, candidate, ratio)) => {
                used.insert(candidate.as_str());
                pairs.push(MatchedPair {
                    outbreak_poi: outbreak.clone(),
                    control_poi: candidate.clone(),
                    distance_meters: distance,
                    baseline_visit_ratio: ratio,
                });
            }
            None => unmatched.push(outbreak.clone()),
        }
    }
    (pairs, unmatched)
}

/// Weekly long-duration visit series for the outbreak and control groups,
/// each normalized so the baseline week equals 1.0.
pub fn outbreak_trend_compare(
    warehouse: &Warehouse,
    pairs: &[MatchedPair],
    baseline_week: NaiveDate,
    start: NaiveDate,
    end: NaiveDate,
) -> Result<(WeeklySeries, WeeklySeries), AnalyticsError> {
    if start > end {
        return Err(AnalyticsError::InvalidRange { start, end });
    }
    let engine = QueryEngine::new(warehouse);
    let periods = engine.periods_in_range(start, end);
    let group_series = |places: Vec<&String>, label: &str, group: &'static str| {
        let week_total = |period: NaiveDate| -> u64 {
            places
                .iter()
                .map(|place| engine.long_duration_visits(place, &[period]))
                .sum()
        };
        let baseline_total = week_total(baseline_week);
        if baseline_total == 0 {
            return Err(AnalyticsError::ZeroBaseline { group });
        }
        let points = periods
            .iter()
            .map(|period| {
                (
                    *period,
                    week_total(*period) as f64 / baseline_total as f64,
                )
            })
            .collect();
        Ok(WeeklySeries {
            label: label.to_string(),
            points,
            annotations: Vec::new(),
        })
    };
    let outbreak = group_series(
        pairs.iter().map(|p| &p.outbreak_poi).collect(),
        "outbreak",
        "outbreak",
    )?;
    let control = group_series(
        pairs.iter().map(|p| &p.control_poi).collect(),
        "control",
        "control",
    )?;
    Ok((outbreak, control))
}

/// Loads an outbreak roster CSV (`place_id,month_linked`).
pub fn load_outbreak_roster(path: &Path) -> std::io::Result<Vec<(String, String)>> {
    let mut reader = csv::Reader::from_path(path).map_err(std::io::Error::other)?;
    let mut roster = Vec::new();
    for row in reader.records() {
        let row = row.map_err(std::io::Error::other)?;
        roster.push((
            row.get(0).unwrap_or("").to_string(),
            row.get(1).unwrap_or("").to_string(),
        ));
    }
    Ok(roster)
}
