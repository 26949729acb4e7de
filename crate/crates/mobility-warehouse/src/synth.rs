//! Deterministic generator for flat weekly-pattern files, social-distancing
//! files, population tables, outbreak rosters, and the MN policy calendar.
//!
//! Fixed (config, seed) must produce byte-identical files on any platform,
//! so every randomized quantity comes from integer arithmetic on a seeded
//! ChaCha stream; no float sampling feeds the output path. Counts are drawn
//! around `base(category) x multiplier(phase, category)` and split across
//! buckets/days by largest-remainder apportionment so nested sums always
//! equal the row total.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{SOCIAL_DISTANCING_HEADER, WEEKLY_HEADER};
use crate::model::{fmt_f64, DwellBucket, RegionLevel};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("dwell mix for category {0} must sum to 1 (got {1})")]
    BadDwellMix(u32, f64),
    #[error("multiplier for category {0} must be nonnegative")]
    NegativeMultiplier(u32),
    #[error("jitter_frac must be in [0, 1)")]
    BadJitter,
    #[error("category {0} lacks a base visit count or dwell mix")]
    MissingCategoryConfig(u32),
    #[error("outbreak category {0} needs at least 2x{1} POIs for pairing")]
    OutbreakTooLarge(u32, u32),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("writing {file}: {source}")]
    Io {
        file: String,
        source: std::io::Error,
    },
    #[error("invalid config JSON: {0}")]
    BadConfig(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Phase {
    pub start: NaiveDate,
    /// Exclusive end; the phase covers weeks starting in `[start, end)`.
    pub end: NaiveDate,
    pub multipliers: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProfileSegment {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub mean: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PopulationSpec {
    Statewide { total: u64 },
    PerRegion {
        level: RegionLevel,
        rows: BTreeMap<String, u64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutbreakSpec {
    pub naics: u32,
    /// Number of outbreak locations; the same number of nearby controls is
    /// laid out alongside them.
    pub count: u32,
    /// From this date outbreak POIs run at `recovery_multiplier` and the
    /// rest of the category at `control_recovery_multiplier`.
    pub recovery_start: NaiveDate,
    pub recovery_multiplier: f64,
    pub control_recovery_multiplier: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_cbgs: u32,
    #[serde(default = "default_counties")]
    pub n_counties: u32,
    pub pois_per_category: BTreeMap<u32, u32>,
    pub weeks_start: NaiveDate,
    pub n_weeks: u32,
    pub base_weekly_visits: BTreeMap<u32, u64>,
    /// Probability vector over the five buckets, lower bound order.
    pub dwell_mix: BTreeMap<u32, [f64; 5]>,
    #[serde(default)]
    pub phases: Vec<Phase>,
    #[serde(default)]
    pub home_dwell_profile: Vec<ProfileSegment>,
    #[serde(default)]
    pub home_distance_profile: Vec<ProfileSegment>,
    pub devices_per_cbg: u64,
    /// When set, distributes this exact statewide device total over CBGs.
    #[serde(default)]
    pub total_devices: Option<u64>,
    pub population: PopulationSpec,
    #[serde(default)]
    pub outbreak: Option<OutbreakSpec>,
    #[serde(default = "default_jitter")]
    pub jitter_frac: f64,
}

fn default_counties() -> u32 {
    3
}

fn default_jitter() -> f64 {
    0.2
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(0.0..1.0).contains(&self.jitter_frac) {
            return Err(SynthError::BadJitter);
        }
        for (naics, mix) in &self.dwell_mix {
            let sum: f64 = mix.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(SynthError::BadDwellMix(*naics, sum));
            }
        }
        for phase in &self.phases {
            for (naics, m) in &phase.multipliers {
                if *m < 0.0 {
                    return Err(SynthError::NegativeMultiplier(*naics));
                }
            }
        }
        for naics in self.pois_per_category.keys() {
            if !self.base_weekly_visits.contains_key(naics)
                || !self.dwell_mix.contains_key(naics)
            {
                return Err(SynthError::MissingCategoryConfig(*naics));
            }
        }
        if let Some(outbreak) = &self.outbreak {
            let pois = self
                .pois_per_category
                .get(&outbreak.naics)
                .copied()
                .unwrap_or(0);
            if pois < outbreak.count * 2 {
                return Err(SynthError::OutbreakTooLarge(outbreak.naics, outbreak.count));
            }
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<SynthConfig, SynthError> {
        let config: SynthConfig = serde_json::from_str(json)?;
        config.validate()?;
        Ok(config)
    }

    fn multiplier(&self, naics: u32, week_start: NaiveDate) -> f64 {
        self.phases
            .iter()
            .find(|p| week_start >= p.start && week_start < p.end)
            .and_then(|p| p.multipliers.get(&naics).copied())
            .unwrap_or(1.0)
    }
}

/// The nine MN policy intervention rows used as the default calendar.
pub fn mn_policy_calendar() -> Vec<(NaiveDate, &'static str)> {
    let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).unwrap();
    vec![
        (d(2020, 3, 9), "University of Minnesota Spring break"),
        (d(2020, 3, 17), "University of Minnesota school closing"),
        (d(2020, 3, 27), "MN stay-at-home"),
        (d(2020, 5, 18), "MN reopening Phase 1"),
        (d(2020, 6, 1), "MN reopening Phase 2"),
        (d(2020, 6, 10), "MN reopening Phase 3"),
        (d(2020, 11, 16), "MN shutdown order for Bars and Restaurants"),
        (d(2021, 1, 11), "MN reopening order for Bars and Restaurants"),
        (
            d(2021, 5, 27),
            "No limits on size and no social distancing requirements.",
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    /// (file name, data row count) in write order.
    pub files: Vec<(String, usize)>,
}

struct PoiSpec {
    place_id: String,
    name: String,
    brand: Option<String>,
    naics: u32,
    cbg: String,
    latitude: f64,
    longitude: f64,
    outbreak: bool,
}

/// Uniform integer draw in [-spread, +spread].
fn jitter(rng: &mut ChaCha20Rng, spread: u64) -> i64 {
    if spread == 0 {
        return 0;
    }
    (rng.next_u64() % (2 * spread + 1)) as i64 - spread as i64
}

/// Splits `total` into parts proportional to `weights` (largest remainder,
/// ties to the earlier slot). Parts always sum to `total`.
fn apportion(total: u64, weights: &[f64]) -> Vec<u64> {
    let weight_sum: f64 = weights.iter().sum();
    if weight_sum <= 0.0 || weights.is_empty() {
        let mut parts = vec![0; weights.len().max(1)];
        parts[0] = total;
        return parts;
    }
    let mut parts: Vec<u64> = Vec::with_capacity(weights.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(weights.len());
    let mut assigned = 0u64;
    for (i, w) in weights.iter().enumerate() {
        let exact = total as f64 * (w / weight_sum);
        let floor = exact.floor() as u64;
        parts.push(floor);
        assigned += floor;
        remainders.push((i, exact - floor as f64));
    }
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut remaining = total - assigned;
    for (i, _) in remainders {
        if remaining == 0 {
            break;
        }
        parts[i] += 1;
        remaining -= 1;
    }
    parts
}

const DAY_WEIGHTS: [f64; 7] = [0.12, 0.12, 0.12, 0.12, 0.14, 0.20, 0.18];

/// Generates all five interface files into `out_dir`.
pub fn generate(config: &SynthConfig, out_dir: &Path) -> Result<Manifest, SynthError> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|source| SynthError::Io {
        file: out_dir.display().to_string(),
        source,
    })?;
    let mut manifest = Manifest { files: Vec::new() };

    let cbgs = layout_cbgs(config);
    let pois = layout_pois(config, &cbgs);

    let rows = write_weekly_patterns(config, &pois, &cbgs, out_dir)?;
    manifest.files.push(("weekly_patterns.csv".into(), rows));
    let rows = write_social_distancing(config, &cbgs, out_dir)?;
    manifest.files.push(("social_distancing.csv".into(), rows));
    let rows = write_population(config, &cbgs, out_dir)?;
    manifest.files.push(("population.csv".into(), rows));
    let rows = write_calendar(out_dir)?;
    manifest.files.push(("calendar.csv".into(), rows));
    let rows = write_roster(config, &pois, out_dir)?;
    manifest.files.push(("outbreak_roster.csv".into(), rows));
    Ok(manifest)
}

struct CbgCell {
    id: String,
    lat: f64,
    lon: f64,
}

fn layout_cbgs(config: &SynthConfig) -> Vec<CbgCell> {
    let grid = (config.n_cbgs as f64).sqrt().ceil().max(1.0) as u32;
    (0..config.n_cbgs)
        .map(|i| {
            let county = (i % config.n_counties.max(1)) + 1;
            // state(2) + county(3) + tract(6) + block group(1)
            let id = format!("27{:03}{:06}{}", county, i / 10 + 1, i % 10);
            CbgCell {
                id,
                lat: 44.5 + 0.02 * (i / grid) as f64,
                lon: -93.5 + 0.02 * (i % grid) as f64,
            }
        })
        .collect()
}

fn layout_pois(config: &SynthConfig, cbgs: &[CbgCell]) -> Vec<PoiSpec> {
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed ^ 0x706f_695f_6c61_796f);
    let mut pois = Vec::new();
    for (naics, count) in &config.pois_per_category {
        let outbreak = config.outbreak.as_ref().filter(|o| o.naics == *naics);
        for i in 0..*count {
            let cbg_idx = match outbreak {
                // pair slot i with slot i+count inside the same cell so
                // controls sit within matching distance
                Some(o) if i < o.count * 2 => (i % o.count) as usize % cbgs.len(),
                _ => (pois.len() + i as usize) % cbgs.len(),
            };
            let cell = &cbgs[cbg_idx];
            let lat = cell.lat + (rng.next_u64() % 2001) as f64 * 1e-5 - 0.01;
            let lon = cell.lon + (rng.next_u64() % 2001) as f64 * 1e-5 - 0.01;
            pois.push(PoiSpec {
                place_id: format!("sg-{naics}-{i:04}"),
                name: format!("Place {naics}-{i:04}"),
                brand: (i % 2 == 0).then(|| format!("Brand {naics}")),
                naics: *naics,
                cbg: cell.id.clone(),
                latitude: lat,
                longitude: lon,
                outbreak: outbreak.is_some_and(|o| i < o.count),
            });
        }
    }
    pois
}

fn csv_writer(out_dir: &Path, name: &str) -> Result<csv::Writer<fs::File>, SynthError> {
    let file = fs::File::create(out_dir.join(name)).map_err(|source| SynthError::Io {
        file: name.to_string(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_fail(name: &str) -> impl Fn(csv::Error) -> SynthError + '_ {
    move |e| SynthError::Io {
        file: name.to_string(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn write_weekly_patterns(
    config: &SynthConfig,
    pois: &[PoiSpec],
    cbgs: &[CbgCell],
    out_dir: &Path,
) -> Result<usize, SynthError> {
    let name = "weekly_patterns.csv";
    let mut writer = csv_writer(out_dir, name)?;
    writer.write_record(WEEKLY_HEADER).map_err(csv_fail(name))?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed ^ 0x7765_656b_6c79_5f70);
    let mut rows = 0usize;
    for poi in pois {
        let base = config.base_weekly_visits[&poi.naics];
        let mix = &config.dwell_mix[&poi.naics];
        for week in 0..config.n_weeks {
            let week_start = config.weeks_start + Days::new(7 * week as u64);
            let week_end = week_start + Days::new(7);
            let mut multiplier = config.multiplier(poi.naics, week_start);
            if let Some(outbreak) = &config.outbreak {
                if outbreak.naics == poi.naics && week_start >= outbreak.recovery_start {
                    multiplier = if poi.outbreak {
                        outbreak.recovery_multiplier
                    } else {
                        outbreak.control_recovery_multiplier
                    };
                }
            }
            let expected = (base as f64 * multiplier).round() as i64;
            let spread = (expected as f64 * config.jitter_frac) as u64;
            let visits = (expected + jitter(&mut rng, spread)).max(0) as u64;
            let visitors = visits * 7 / 10;

            let buckets = apportion(visits, mix);
            let dwell_map: BTreeMap<&str, u64> = DwellBucket::ALL
                .iter()
                .zip(&buckets)
                .filter(|(_, v)| **v > 0)
                .map(|(b, v)| (b.label(), *v))
                .collect();
            let by_day = apportion(visits, &DAY_WEIGHTS);
            let median = median_bucket(mix).midpoint_minutes();

            let mut homes: BTreeMap<&str, u64> = BTreeMap::new();
            if visitors > 0 {
                let own = visitors - visitors / 2;
                homes.insert(poi.cbg.as_str(), own);
                if visitors / 2 > 0 {
                    let neighbor_idx =
                        (cbgs.iter().position(|c| c.id == poi.cbg).unwrap() + 1) % cbgs.len();
                    let neighbor = &cbgs[neighbor_idx].id;
                    if neighbor != &poi.cbg {
                        homes.insert(neighbor.as_str(), visitors / 2);
                    } else {
                        homes.insert(poi.cbg.as_str(), visitors);
                    }
                }
            }
            let distance = 1000 + rng.next_u64() % 2000;

            writer
                .write_record([
                    poi.place_id.as_str(),
                    poi.name.as_str(),
                    poi.brand.as_deref().unwrap_or(""),
                    &poi.naics.to_string(),
                    poi.cbg.as_str(),
                    &fmt_f64(poi.latitude),
                    &fmt_f64(poi.longitude),
                    &week_start.to_string(),
                    &week_end.to_string(),
                    &visits.to_string(),
                    &visitors.to_string(),
                    &fmt_f64(median),
                    &serde_json::to_string(&dwell_map).unwrap(),
                    &serde_json::to_string(&by_day).unwrap(),
                    &serde_json::to_string(&homes).unwrap(),
                    &distance.to_string(),
                ])
                .map_err(csv_fail(name))?;
            rows += 1;
        }
    }
    writer.flush().map_err(|source| SynthError::Io {
        file: name.to_string(),
        source,
    })?;
    Ok(rows)
}

/// Bucket containing the median visit under the mix.
fn median_bucket(mix: &[f64; 5]) -> DwellBucket {
    let mut cumulative = 0.0;
    for (bucket, p) in DwellBucket::ALL.iter().zip(mix) {
        cumulative += p;
        if cumulative >= 0.5 {
            return *bucket;
        }
    }
    DwellBucket::Over240
}

fn profile_value(profile: &[ProfileSegment], date: NaiveDate, default: f64) -> f64 {
    profile
        .iter()
        .find(|s| date >= s.start && date < s.end)
        .map(|s| s.mean)
        .unwrap_or(default)
}

fn device_count(config: &SynthConfig, cbg_index: usize) -> u64 {
    match config.total_devices {
        Some(total) => {
            let n = config.n_cbgs as u64;
            total / n + u64::from((cbg_index as u64) < total % n)
        }
        None => config.devices_per_cbg,
    }
}

fn write_social_distancing(
    config: &SynthConfig,
    cbgs: &[CbgCell],
    out_dir: &Path,
) -> Result<usize, SynthError> {
    let name = "social_distancing.csv";
    let mut writer = csv_writer(out_dir, name)?;
    writer
        .write_record(SOCIAL_DISTANCING_HEADER)
        .map_err(csv_fail(name))?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed ^ 0x736f_6369_616c_5f64);
    let n_days = config.n_weeks as u64 * 7;
    let mut rows = 0usize;
    for (i, cbg) in cbgs.iter().enumerate() {
        let devices = device_count(config, i);
        for day in 0..n_days {
            let date = config.weeks_start + Days::new(day);
            let dwell = profile_value(&config.home_dwell_profile, date, 600.0);
            let dwell = (dwell as i64 + jitter(&mut rng, 5)).max(0);
            let distance = profile_value(&config.home_distance_profile, date, 12_000.0);
            let distance = (distance as i64 + jitter(&mut rng, 200)).max(0);
            writer
                .write_record([
                    cbg.id.as_str(),
                    &date.to_string(),
                    &devices.to_string(),
                    &distance.to_string(),
                    &dwell.to_string(),
                    &(devices / 3).to_string(),
                ])
                .map_err(csv_fail(name))?;
            rows += 1;
        }
    }
    writer.flush().map_err(|source| SynthError::Io {
        file: name.to_string(),
        source,
    })?;
    Ok(rows)
}

fn write_population(
    config: &SynthConfig,
    cbgs: &[CbgCell],
    out_dir: &Path,
) -> Result<usize, SynthError> {
    let name = "population.csv";
    let mut out = String::from("region_level,region_id,population\n");
    let mut rows = 0usize;
    match &config.population {
        PopulationSpec::Statewide { total } => {
            out.push_str(&format!("state,27,{total}\n"));
            rows += 1;
        }
        PopulationSpec::PerRegion { level, rows: map } => {
            for (region, pop) in map {
                out.push_str(&format!("{},{},{}\n", level.name(), region, pop));
                rows += 1;
            }
        }
    }
    let _ = cbgs;
    fs::File::create(out_dir.join(name))
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|source| SynthError::Io {
            file: name.to_string(),
            source,
        })?;
    Ok(rows)
}

fn write_calendar(out_dir: &Path) -> Result<usize, SynthError> {
    let name = "calendar.csv";
    let mut out = String::from("date,label\n");
    let entries = mn_policy_calendar();
    for (date, label) in &entries {
        if label.contains(',') {
            out.push_str(&format!("{date},\"{label}\"\n"));
        } else {
            out.push_str(&format!("{date},{label}\n"));
        }
    }
    fs::File::create(out_dir.join(name))
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|source| SynthError::Io {
            file: name.to_string(),
            source,
        })?;
    Ok(entries.len())
}

fn write_roster(
    config: &SynthConfig,
    pois: &[PoiSpec],
    out_dir: &Path,
) -> Result<usize, SynthError> {
    let name = "outbreak_roster.csv";
    let mut out = String::from("place_id,month_linked\n");
    let mut rows = 0usize;
    if let Some(outbreak) = &config.outbreak {
        let month = outbreak.recovery_start.format("%Y-%m");
        for poi in pois.iter().filter(|p| p.outbreak) {
            out.push_str(&format!("{},{}\n", poi.place_id, month));
            rows += 1;
        }
    }
    fs::File::create(out_dir.join(name))
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|source| SynthError::Io {
            file: name.to_string(),
            source,
        })?;
    Ok(rows)
}

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

/// Phase multipliers keyed to the MN intervention calendar. Bars and
/// full-service restaurants collapse hard during stay-at-home and climb back
/// through the reopening phases; groceries barely move.
fn default_phases() -> Vec<Phase> {
    let m = |fs: f64, ls: f64, bars: f64, grocery: f64| {
        BTreeMap::from([(722511, fs), (722513, ls), (722410, bars), (445110, grocery)])
    };
    vec![
        Phase {
            start: d(2020, 3, 27),
            end: d(2020, 5, 18),
            multipliers: m(0.15, 0.6, 0.1, 0.9),
        },
        Phase {
            start: d(2020, 5, 18),
            end: d(2020, 6, 1),
            multipliers: m(0.35, 0.7, 0.3, 0.95),
        },
        Phase {
            start: d(2020, 6, 1),
            end: d(2020, 6, 10),
            multipliers: m(0.5, 0.75, 0.5, 1.0),
        },
        Phase {
            start: d(2020, 6, 10),
            end: d(2020, 11, 16),
            multipliers: m(0.8, 0.9, 0.8, 1.0),
        },
        Phase {
            start: d(2020, 11, 16),
            end: d(2021, 1, 11),
            multipliers: m(0.25, 0.7, 0.2, 0.95),
        },
        Phase {
            start: d(2021, 1, 11),
            end: d(2021, 12, 31),
            multipliers: m(0.85, 0.95, 0.85, 1.0),
        },
    ]
}

fn default_dwell_mixes() -> BTreeMap<u32, [f64; 5]> {
    BTreeMap::from([
        (722511, [0.05, 0.25, 0.40, 0.25, 0.05]),
        (722513, [0.30, 0.50, 0.15, 0.04, 0.01]),
        (722410, [0.05, 0.15, 0.30, 0.35, 0.15]),
        (445110, [0.20, 0.50, 0.25, 0.04, 0.01]),
    ])
}

fn default_profiles() -> (Vec<ProfileSegment>, Vec<ProfileSegment>) {
    let dwell = vec![
        ProfileSegment { start: d(2020, 3, 2), end: d(2020, 3, 27), mean: 600.0 },
        ProfileSegment { start: d(2020, 3, 27), end: d(2020, 4, 13), mean: 920.0 },
        ProfileSegment { start: d(2020, 4, 13), end: d(2020, 5, 18), mean: 820.0 },
        ProfileSegment { start: d(2020, 5, 18), end: d(2021, 12, 31), mean: 650.0 },
    ];
    let distance = vec![
        ProfileSegment { start: d(2020, 3, 2), end: d(2020, 3, 27), mean: 14_000.0 },
        ProfileSegment { start: d(2020, 3, 27), end: d(2020, 4, 13), mean: 6_000.0 },
        ProfileSegment { start: d(2020, 4, 13), end: d(2020, 5, 18), mean: 8_000.0 },
        ProfileSegment { start: d(2020, 5, 18), end: d(2021, 12, 31), mean: 12_000.0 },
    ];
    (dwell, distance)
}

/// Named configurations: `desk` fits in test budgets, `mn-scale` mirrors the
/// real Minnesota dataset magnitudes for performance runs.
pub fn preset(name: &str) -> Result<SynthConfig, SynthError> {
    match name {
        "desk" => {
            let (home_dwell_profile, home_distance_profile) = default_profiles();
            let config = SynthConfig {
                seed: 42,
                n_cbgs: 10,
                n_counties: 3,
                pois_per_category: BTreeMap::from([
                    (722511, 6),
                    (722513, 5),
                    (722410, 5),
                    (445110, 4),
                ]),
                weeks_start: d(2020, 3, 2),
                // 20 POIs x 50 weeks = 1,000 flat records
                n_weeks: 50,
                base_weekly_visits: BTreeMap::from([
                    (722511, 400),
                    (722513, 600),
                    (722410, 300),
                    (445110, 500),
                ]),
                dwell_mix: default_dwell_mixes(),
                phases: default_phases(),
                home_dwell_profile,
                home_distance_profile,
                // 10 devices x 10 CBGs = 100 statewide; 100 / 2000 = 0.05
                devices_per_cbg: 10,
                total_devices: None,
                population: PopulationSpec::Statewide { total: 2_000 },
                outbreak: None,
                jitter_frac: 0.2,
            };
            config.validate()?;
            Ok(config)
        }
        "mn-scale" => {
            let mut pois_per_category = BTreeMap::from([
                (722511u32, 282u32),
                (722513, 282),
                (722410, 282),
                (445110, 282),
            ]);
            let mut base_weekly_visits: BTreeMap<u32, u64> = BTreeMap::new();
            let mut dwell_mix = default_dwell_mixes();
            // pad out to 261 categories totalling 73,548 POIs
            let mut code = 300_000u32;
            while pois_per_category.len() < 261 {
                let i = pois_per_category.len();
                let count = if i < 207 { 282 } else { 281 };
                pois_per_category.insert(code, count);
                dwell_mix.insert(code, [0.2, 0.3, 0.3, 0.15, 0.05]);
                code += 137;
            }
            for naics in pois_per_category.keys() {
                base_weekly_visits.insert(*naics, 150);
            }
            base_weekly_visits.extend([(722511, 400), (722513, 600), (722410, 300), (445110, 500)]);
            let (home_dwell_profile, home_distance_profile) = default_profiles();
            let config = SynthConfig {
                seed: 42,
                n_cbgs: 4_107,
                n_counties: 87,
                pois_per_category,
                weeks_start: d(2020, 3, 2),
                n_weeks: 70,
                base_weekly_visits,
                dwell_mix,
                phases: default_phases(),
                home_dwell_profile,
                home_distance_profile,
                devices_per_cbg: 0,
                total_devices: Some(294_014),
                // 294,014 / 5,880,280 = 0.05
                population: PopulationSpec::Statewide { total: 5_880_280 },
                outbreak: None,
                jitter_frac: 0.2,
            };
            config.validate()?;
            Ok(config)
        }
        other => Err(SynthError::UnknownPreset(other.to_string())),
    }
}
