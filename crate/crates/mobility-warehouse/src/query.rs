//! The policy query suite over a loaded warehouse.
//!
//! All operations are read-only. A weekly fact is counted iff its period
//! lies fully inside the requested `[start, end]` range
//! (`period_start >= start` and `period_end <= end`). Rankings order by
//! value descending with ties broken by key ascending, so results are
//! stable under any permutation of the underlying data.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use thiserror::Error;

use crate::model::{DwellBucket, RegionLevel, Warehouse, region_prefix};

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("start date {start} is after end date {end}")]
    InvalidRange { start: NaiveDate, end: NaiveDate },
    #[error("query id {0} outside 1..=8")]
    UnknownQueryId(u8),
    #[error("baseline range must end before the intervention range begins")]
    OverlappingRanges,
}

/// Ranked rows: value descending, ties by key ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedResult {
    pub rows: Vec<(String, f64)>,
}

impl RankedResult {
    fn from_totals<V: IntoF64>(totals: BTreeMap<String, V>, k: usize) -> RankedResult {
        let mut rows: Vec<(String, f64)> =
            totals.into_iter().map(|(key, v)| (key, v.into_f64())).collect();
        rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        rows.truncate(k);
        RankedResult { rows }
    }
}

/// Lossy-enough conversion for ranking; visit counts stay well under 2^53.
trait IntoF64 {
    fn into_f64(self) -> f64;
}
impl IntoF64 for f64 {
    fn into_f64(self) -> f64 {
        self
    }
}
impl IntoF64 for u64 {
    fn into_f64(self) -> f64 {
        self as f64
    }
}

/// Whether one of the eight end-user queries can be served from the
/// warehouse alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answerability {
    Answerable,
    RequiresExternalData(String),
}

pub fn answerability(query_id: u8) -> Result<Answerability, QueryError> {
    let missing = match query_id {
        1..=4 => return Ok(Answerability::Answerable),
        5 => "mode of transportation",
        6 => "confirmed COVID-19 cases",
        7 => "event-located device pings",
        8 => "unemployment rate",
        other => return Err(QueryError::UnknownQueryId(other)),
    };
    Ok(Answerability::RequiresExternalData(missing.to_string()))
}

/// Read-side view with the naics and cbg index maps built once.
pub struct QueryEngine<'w> {
    warehouse: &'w Warehouse,
    by_naics: BTreeMap<u32, Vec<&'w str>>,
    by_cbg: BTreeMap<&'w str, Vec<&'w str>>,
}

impl<'w> QueryEngine<'w> {
    pub fn new(warehouse: &'w Warehouse) -> QueryEngine<'w> {
        let mut by_naics: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
        let mut by_cbg: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (place_id, poi) in &warehouse.pois {
            by_naics.entry(poi.naics_code).or_default().push(place_id);
            by_cbg.entry(poi.cbg.as_str()).or_default().push(place_id);
        }
        QueryEngine {
            warehouse,
            by_naics,
            by_cbg,
        }
    }

    pub fn warehouse(&self) -> &Warehouse {
        self.warehouse
    }

    /// Period starts whose week lies fully inside `[start, end]`.
    pub fn periods_in_range(&self, start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
        self.warehouse
            .periods
            .iter()
            .filter(|(s, e)| **s >= start && **e <= end)
            .map(|(s, _)| *s)
            .collect()
    }

    fn check_range(start: NaiveDate, end: NaiveDate) -> Result<(), QueryError> {
        if start > end {
            return Err(QueryError::InvalidRange { start, end });
        }
        Ok(())
    }

    /// Total visits per dwell bucket for one business category in a date
    /// range. Buckets with no data report 0.
    pub fn dwell_aggregation(
        &self,
        naics: u32,
        start: NaiveDate,
        end: NaiveDate,
    ) -> Result<BTreeMap<DwellBucket, u64>, QueryError> {
        Self::check_range(start, end)?;
        let mut totals: BTreeMap<DwellBucket, u64> =
            DwellBucket::ALL.iter().map(|b| (*b, 0)).collect();
        let periods: BTreeSet<NaiveDate> = self.periods_in_range(start, end).into_iter().collect();
        for place_id in self.by_naics.get(&naics).into_iter().flatten() {
            for period in &periods {
                for bucket in DwellBucket::ALL {
                    if let Some(v) = self
                        .warehouse
                        .dwell_facts
                        .get(&(place_id.to_string(), *period, bucket))
                    {
                        *totals.get_mut(&bucket).unwrap() += v;
                    }
                }
            }
        }
        Ok(totals)
    }

    /// Business categories located at one CBG, with each category's share of
    /// the CBG's visits.
    pub fn q1_pois_and_distribution(
        &self,
        cbg: &str,
        start: NaiveDate,
        end: NaiveDate,
    ) -> Result<Q1Result, QueryError> {
        Self::check_range(start, end)?;
        let periods = self.periods_in_range(start, end);
        let mut pois = Vec::new();
        let mut category_totals: BTreeMap<u32, u64> = BTreeMap::new();
        for place_id in self.by_cbg.get(cbg).into_iter().flatten() {
            let poi = &self.warehouse.pois[*place_id];
            let total: u64 = periods
                .iter()
                .filter_map(|p| {
                    self.warehouse
                        .visit_facts
                        .get(&(place_id.to_string(), *p))
                        .map(|f| f.raw_visits)
                })
                .sum();
            *category_totals.entry(poi.naics_code).or_default() += total;
            pois.push((place_id.to_string(), poi.naics_code, total));
        }
        pois.sort();
        let grand_total: u64 = category_totals.values().sum();
        let distribution = category_totals
            .into_iter()
            .map(|(naics, total)| {
                let share = if grand_total == 0 {
                    0.0
                } else {
                    total as f64 / grand_total as f64
                };
                (naics, share)
            })
            .collect();
        Ok(Q1Result { pois, distribution })
    }

    /// Top-k categories by total raw visits.
    pub fn q2_top_categories(
        &self,
        start: NaiveDate,
        end: NaiveDate,
        k: usize,
    ) -> Result<RankedResult, QueryError> {
        Self::check_range(start, end)?;
        let periods = self.periods_in_range(start, end);
        let mut totals: BTreeMap<String, u64> = BTreeMap::new();
        for (naics, places) in &self.by_naics {
            let total: u64 = places
                .iter()
                .flat_map(|p| {
                    periods.iter().filter_map(|period| {
                        self.warehouse
                            .visit_facts
                            .get(&(p.to_string(), *period))
                            .map(|f| f.raw_visits)
                    })
                })
                .sum();
            if total > 0 || !places.is_empty() {
                totals.insert(naics.to_string(), total);
            }
        }
        Ok(RankedResult::from_totals(totals, k))
    }

    /// Top-k POIs of one category ranked by long-duration visits, optionally
    /// restricted to one state (FIPS prefix of the POI's CBG).
    pub fn q3_top_hangouts(
        &self,
        naics: u32,
        state: Option<&str>,
        start: NaiveDate,
        end: NaiveDate,
        k: usize,
    ) -> Result<RankedResult, QueryError> {
        Self::check_range(start, end)?;
        let periods: Vec<NaiveDate> = self.periods_in_range(start, end);
        let mut totals: BTreeMap<String, u64> = BTreeMap::new();
        for place_id in self.by_naics.get(&naics).into_iter().flatten() {
            let poi = &self.warehouse.pois[*place_id];
            if let Some(state) = state {
                if region_prefix(&poi.cbg, RegionLevel::State) != state {
                    continue;
                }
            }
            let total = self.long_duration_visits(place_id, &periods);
            totals.insert(place_id.to_string(), total);
        }
        Ok(RankedResult::from_totals(totals, k))
    }

    /// Sum of the three long-duration buckets for one POI over `periods`.
    pub fn long_duration_visits(&self, place_id: &str, periods: &[NaiveDate]) -> u64 {
        periods
            .iter()
            .flat_map(|period| {
                DwellBucket::ALL
                    .iter()
                    .filter(|b| b.is_long_duration())
                    .filter_map(move |b| {
                        self.warehouse
                            .dwell_facts
                            .get(&(place_id.to_string(), *period, *b))
                    })
            })
            .sum()
    }

    /// Ranks categories by how little the intervention window moved them:
    /// impact ratio = intervention mean weekly visits / baseline mean weekly
    /// visits, listed descending (least impacted first).
    pub fn q4_least_impacted_category(
        &self,
        baseline: (NaiveDate, NaiveDate),
        intervention: (NaiveDate, NaiveDate),
        min_baseline_visits: u64,
    ) -> Result<Q4Result, QueryError> {
        Self::check_range(baseline.0, baseline.1)?;
        Self::check_range(intervention.0, intervention.1)?;
        if baseline.1 >= intervention.0 {
            return Err(QueryError::OverlappingRanges);
        }
        let baseline_weeks = self.periods_in_range(baseline.0, baseline.1);
        let intervention_weeks = self.periods_in_range(intervention.0, intervention.1);
        let mut ratios: BTreeMap<String, f64> = BTreeMap::new();
        let mut any_baseline = false;
        for (naics, places) in &self.by_naics {
            let total = |weeks: &[NaiveDate]| -> u64 {
                places
                    .iter()
                    .flat_map(|p| {
                        weeks.iter().filter_map(|period| {
                            self.warehouse
                                .visit_facts
                                .get(&(p.to_string(), *period))
                                .map(|f| f.raw_visits)
                        })
                    })
                    .sum()
            };
            let baseline_total = total(&baseline_weeks);
            if baseline_total > 0 {
                any_baseline = true;
            }
            if baseline_total < min_baseline_visits.max(1) || baseline_weeks.is_empty() {
                continue;
            }
            let baseline_mean = baseline_total as f64 / baseline_weeks.len() as f64;
            let intervention_mean = if intervention_weeks.is_empty() {
                0.0
            } else {
                total(&intervention_weeks) as f64 / intervention_weeks.len() as f64
            };
            ratios.insert(naics.to_string(), intervention_mean / baseline_mean);
        }
        let note = if ratios.is_empty() {
            Some(if any_baseline {
                "no category met the minimum baseline visit threshold".to_string()
            } else {
                "no category had visits in the baseline window".to_string()
            })
        } else {
            None
        };
        let mut rows: Vec<(String, f64)> = ratios.into_iter().collect();
        rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        Ok(Q4Result { rows, note })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Q1Result {
    /// (place_id, naics, total visits), sorted by place_id.
    pub pois: Vec<(String, u32, u64)>,
    /// category -> share of the CBG's visits; sums to 1 when any visits exist.
    pub distribution: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Q4Result {
    /// (category, impact ratio) descending by ratio.
    pub rows: Vec<(String, f64)>,
    pub note: Option<String>,
}
