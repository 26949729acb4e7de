//! Report rendering: turns query/analytics outputs into a bundle of CSV
//! tables, plot-ready JSON series, and a markdown summary.
//!
//! Rendering does no arithmetic of its own; every number written comes
//! straight from a query-engine or analytics call. Output bytes are
//! deterministic for fixed inputs: stable iteration order everywhere and
//! numbers formatted to 6 significant digits.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{
    self, Aggregation, ComplianceMetric, DwellFilter, MatchParams, NaicsNames, WeeklySeries,
};
use crate::model::{PolicyCalendar, PopulationTable, RegionLevel, SocialDistancingRecord};
use crate::model::Warehouse;
use crate::query::QueryEngine;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid report spec: {0}")]
    InvalidSpec(String),
    #[error("reading spec: {0}")]
    SpecJson(#[from] serde_json::Error),
    #[error("section {section}: {message}")]
    Section { section: String, message: String },
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn section_err(section: &str, message: impl ToString) -> ReportError {
    ReportError::Section {
        section: section.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Section {
    TopCategories {
        k: usize,
    },
    Hangouts {
        naics: u32,
        k: usize,
        #[serde(default)]
        state: Option<String>,
    },
    CategorySeries {
        categories: Vec<u32>,
        dwell_filter: String,
    },
    Compliance {
        metric: String,
        aggregation: String,
    },
    SamplingRate {
        level: RegionLevel,
        population: PathBuf,
    },
    OutbreakCompare {
        roster: PathBuf,
        baseline_window_start: NaiveDate,
        baseline_window_end: NaiveDate,
        baseline_week: NaiveDate,
        #[serde(default)]
        max_distance_meters: Option<f64>,
    },
}

impl Section {
    fn slug(&self) -> &'static str {
        match self {
            Section::TopCategories { .. } => "top_categories",
            Section::Hangouts { .. } => "hangouts",
            Section::CategorySeries { .. } => "category_series",
            Section::Compliance { .. } => "compliance",
            Section::SamplingRate { .. } => "sampling_rate",
            Section::OutbreakCompare { .. } => "outbreak_compare",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportSpec {
    pub title: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    #[serde(default)]
    pub calendar: Option<PathBuf>,
    pub sections: Vec<Section>,
}

impl ReportSpec {
    pub fn from_json(json: &str) -> Result<ReportSpec, ReportError> {
        let spec: ReportSpec = serde_json::from_str(json)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.sections.is_empty() {
            return Err(ReportError::InvalidSpec(
                "at least one section required".into(),
            ));
        }
        if self.start > self.end {
            return Err(ReportError::InvalidSpec("start after end".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportBundle {
    pub directory: PathBuf,
    pub artifacts: Vec<PathBuf>,
}

/// Rounds to 6 significant digits, '.' decimal separator.
pub fn fmt_sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let exponent = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(exponent - 5);
    let v = (v / scale).round() * scale;
    let decimals = (5 - exponent).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn round_sig6(v: f64) -> f64 {
    fmt_sig6(v).parse().unwrap_or(v)
}

#[derive(Serialize)]
struct SeriesPoint {
    week_start: NaiveDate,
    value: f64,
}

#[derive(Serialize)]
struct SeriesAnnotation {
    date: NaiveDate,
    label: String,
}

#[derive(Serialize)]
struct SeriesJson {
    label: String,
    points: Vec<SeriesPoint>,
    annotations: Vec<SeriesAnnotation>,
}

fn series_json(series: &WeeklySeries) -> SeriesJson {
    SeriesJson {
        label: series.label.clone(),
        points: series
            .points
            .iter()
            .map(|(week_start, value)| SeriesPoint {
                week_start: *week_start,
                value: round_sig6(*value),
            })
            .collect(),
        annotations: series
            .annotations
            .iter()
            .map(|(date, label)| SeriesAnnotation {
                date: *date,
                label: label.clone(),
            })
            .collect(),
    }
}

struct Artifact {
    filename: String,
    bytes: Vec<u8>,
    summary: Vec<String>,
}

/// Renders every section of `spec` into `out_dir`, writing `summary.md`
/// plus one CSV or JSON artifact per section. Any section failure aborts
/// the whole bundle.
pub fn render_report(
    warehouse: &Warehouse,
    sd_records: &[SocialDistancingRecord],
    spec: &ReportSpec,
    out_dir: &Path,
) -> Result<ReportBundle, ReportError> {
    spec.validate()?;
    let names = NaicsNames::bundled();
    let calendar = match &spec.calendar {
        Some(path) => PolicyCalendar::load_csv(path)
            .map_err(|e| section_err("calendar", e))?,
        None => PolicyCalendar::default(),
    };
    let engine = QueryEngine::new(warehouse);

    let mut artifacts = Vec::new();
    let mut used_names: BTreeSet<String> = BTreeSet::new();
    for (index, section) in spec.sections.iter().enumerate() {
        let mut artifact = render_section(
            warehouse, &engine, sd_records, spec, section, &calendar, &names,
        )?;
        if !used_names.insert(artifact.filename.clone()) {
            let (stem, ext) = artifact.filename.rsplit_once('.').unwrap();
            artifact.filename = format!("{stem}_{index}.{ext}");
            used_names.insert(artifact.filename.clone());
        }
        artifacts.push(artifact);
    }

    fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut summary = String::new();
    summary.push_str(&format!("# {}\n\n", spec.title));
    summary.push_str(&format!("Date range: {} to {}\n\n", spec.start, spec.end));
    let events: Vec<_> = calendar
        .entries
        .iter()
        .filter(|(date, _)| *date >= spec.start && *date <= spec.end)
        .collect();
    if !events.is_empty() {
        summary.push_str("## Policy calendar events in range\n\n");
        for (date, label) in events {
            summary.push_str(&format!("- {date}: {label}\n"));
        }
        summary.push('\n');
    }
    let mut paths = vec![out_dir.join("summary.md")];
    for artifact in &artifacts {
        summary.push_str(&format!("## {}\n\n", artifact.filename));
        for line in &artifact.summary {
            summary.push_str(&format!("- {line}\n"));
        }
        summary.push('\n');
        let path = out_dir.join(&artifact.filename);
        fs::write(&path, &artifact.bytes).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        paths.push(path);
    }
    fs::write(out_dir.join("summary.md"), summary).map_err(|source| ReportError::Io {
        path: out_dir.join("summary.md").display().to_string(),
        source,
    })?;
    Ok(ReportBundle {
        directory: out_dir.to_path_buf(),
        artifacts: paths,
    })
}

fn render_section(
    warehouse: &Warehouse,
    engine: &QueryEngine<'_>,
    sd_records: &[SocialDistancingRecord],
    spec: &ReportSpec,
    section: &Section,
    calendar: &PolicyCalendar,
    names: &NaicsNames,
) -> Result<Artifact, ReportError> {
    let slug = section.slug();
    match section {
        Section::TopCategories { k } => {
            let ranked = engine
                .q2_top_categories(spec.start, spec.end, *k)
                .map_err(|e| section_err(slug, e))?;
            let mut csv = String::from("rank,naics,category,total_visits\n");
            for (i, (code, total)) in ranked.rows.iter().enumerate() {
                let display = code
                    .parse::<u32>()
                    .map(|c| names.display(c))
                    .unwrap_or_else(|_| code.clone());
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    i + 1,
                    code,
                    csv_field(&display),
                    fmt_sig6(*total)
                ));
            }
            let summary = ranked
                .rows
                .first()
                .map(|(code, total)| {
                    vec![format!("top category {code} with {} visits", fmt_sig6(*total))]
                })
                .unwrap_or_else(|| vec!["no visits in range".to_string()]);
            Ok(Artifact {
                filename: format!("{slug}.csv"),
                bytes: csv.into_bytes(),
                summary,
            })
        }
        Section::Hangouts { naics, k, state } => {
            let ranked = engine
                .q3_top_hangouts(*naics, state.as_deref(), spec.start, spec.end, *k)
                .map_err(|e| section_err(slug, e))?;
            let mut csv = String::from("rank,place_id,long_duration_visits\n");
            for (i, (place, total)) in ranked.rows.iter().enumerate() {
                csv.push_str(&format!("{},{},{}\n", i + 1, place, fmt_sig6(*total)));
            }
            Ok(Artifact {
                filename: format!("{slug}.csv"),
                bytes: csv.into_bytes(),
                summary: vec![format!(
                    "{} hangout places ranked for category {}",
                    ranked.rows.len(),
                    names.display(*naics)
                )],
            })
        }
        Section::CategorySeries {
            categories,
            dwell_filter,
        } => {
            let filter = match dwell_filter.as_str() {
                "all" => DwellFilter::All,
                "long_only" => DwellFilter::LongOnly,
                other => {
                    return Err(section_err(slug, format!("unknown dwell_filter {other:?}")))
                }
            };
            let set: BTreeSet<u32> = categories.iter().copied().collect();
            let series = analytics::weekly_category_series(
                warehouse, &set, filter, spec.start, spec.end, names,
            )
            .map_err(|e| section_err(slug, e))?;
            let annotated: Vec<SeriesJson> = series
                .into_iter()
                .map(|s| series_json(&analytics::annotate_with_calendar(s, calendar)))
                .collect();
            let bytes = serde_json::to_vec_pretty(&annotated).expect("series serialize");
            let summary = annotated
                .iter()
                .map(|s| format!("series {:?} with {} weekly points", s.label, s.points.len()))
                .collect();
            Ok(Artifact {
                filename: format!("{slug}.json"),
                bytes,
                summary,
            })
        }
        Section::Compliance {
            metric,
            aggregation,
        } => {
            let metric = match metric.as_str() {
                "time_at_home" => ComplianceMetric::TimeAtHome,
                "distance_from_home" => ComplianceMetric::DistanceFromHome,
                other => return Err(section_err(slug, format!("unknown metric {other:?}"))),
            };
            let aggregation = match aggregation.as_str() {
                "median_of_medians" => Aggregation::MedianOfMedians,
                "device_weighted_mean" => Aggregation::DeviceWeightedMean,
                other => {
                    return Err(section_err(slug, format!("unknown aggregation {other:?}")))
                }
            };
            let series =
                analytics::compliance_series(sd_records, metric, aggregation, spec.start, spec.end)
                    .map_err(|e| section_err(slug, e))?;
            let series = analytics::annotate_with_calendar(series, calendar);
            let bytes =
                serde_json::to_vec_pretty(&[series_json(&series)]).expect("series serialize");
            Ok(Artifact {
                filename: format!("{slug}.json"),
                bytes,
                summary: vec![format!(
                    "{} weekly points for {}",
                    series.points.len(),
                    metric.name()
                )],
            })
        }
        Section::SamplingRate { level, population } => {
            let table = PopulationTable::load_csv(population, *level)
                .map_err(|e| section_err(slug, e))?;
            let rates =
                analytics::sampling_rate(sd_records, &table, *level, (spec.start, spec.end))
                    .map_err(|e| section_err(slug, e))?;
            let mut csv = String::from("region_id,sampling_rate\n");
            for (region, rate) in &rates.rates {
                csv.push_str(&format!("{},{}\n", region, fmt_sig6(*rate)));
            }
            let mut summary = vec![format!("{} regions at {} level", rates.rates.len(), level.name())];
            if !rates.missing_population.is_empty() {
                summary.push(format!(
                    "{} regions skipped for missing population",
                    rates.missing_population.len()
                ));
            }
            if !rates.flagged_over_one.is_empty() {
                summary.push(format!(
                    "{} regions flagged with rate above 1",
                    rates.flagged_over_one.len()
                ));
            }
            Ok(Artifact {
                filename: format!("{slug}.csv"),
                bytes: csv.into_bytes(),
                summary,
            })
        }
        Section::OutbreakCompare {
            roster,
            baseline_window_start,
            baseline_window_end,
            baseline_week,
            max_distance_meters,
        } => {
            let roster =
                analytics::load_outbreak_roster(roster).map_err(|e| section_err(slug, e))?;
            let outbreak_ids: Vec<String> = roster.into_iter().map(|(id, _)| id).collect();
            let outbreak_set: BTreeSet<&String> = outbreak_ids.iter().collect();
            let categories: BTreeSet<u32> = outbreak_ids
                .iter()
                .filter_map(|id| warehouse.pois.get(id).map(|p| p.naics_code))
                .collect();
            let candidates: Vec<String> = warehouse
                .pois
                .iter()
                .filter(|(id, poi)| {
                    categories.contains(&poi.naics_code) && !outbreak_set.contains(id)
                })
                .map(|(id, _)| id.clone())
                .collect();
            let mut params =
                MatchParams::new((*baseline_window_start, *baseline_window_end));
            if let Some(max) = max_distance_meters {
                params.max_distance_meters = *max;
            }
            let (pairs, unmatched) =
                analytics::match_controls(warehouse, &outbreak_ids, &candidates, &params);
            let (outbreak_series, control_series) = analytics::outbreak_trend_compare(
                warehouse,
                &pairs,
                *baseline_week,
                spec.start,
                spec.end,
            )
            .map_err(|e| section_err(slug, e))?;
            let series = [
                series_json(&outbreak_series),
                series_json(&control_series),
            ];
            let bytes = serde_json::to_vec_pretty(&series).expect("series serialize");
            Ok(Artifact {
                filename: format!("{slug}.json"),
                bytes,
                summary: vec![
                    format!("{} matched pairs, {} unmatched", pairs.len(), unmatched.len()),
                    format!("baseline week {baseline_week}"),
                ],
            })
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
