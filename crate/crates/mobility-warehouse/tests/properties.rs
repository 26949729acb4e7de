//! Property tests for the structural invariants: explode conservation,
//! snapshot round-trips, suppression monotonicity, load order independence,
//! and ranking tie-break order.

mod common;

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use proptest::prelude::*;

use common::date;
use mobility_warehouse::ingest::{self, DuplicatePolicy};
use mobility_warehouse::model::{
    suppress_low_device_cbgs, DwellBucket, FlatWeeklyRecord, SocialDistancingRecord, Warehouse,
};
use mobility_warehouse::query::QueryEngine;
use mobility_warehouse::report::fmt_sig6;

fn bucket_map_strategy() -> impl Strategy<Value = BTreeMap<String, u64>> {
    proptest::collection::btree_map(
        prop_oneof![
            Just("<5".to_string()),
            Just("5-20".to_string()),
            Just("21-60".to_string()),
            Just("61-240".to_string()),
            Just(">240".to_string()),
        ],
        0u64..1_000,
        0..=5,
    )
}

fn cbg_strategy() -> impl Strategy<Value = String> {
    (10u64..100, 0u64..100).prop_map(|(state, tail)| format!("{state:02}05310000{tail:02}"))
}

prop_compose! {
    fn record_strategy()(
        poi in 0u32..30,
        naics in 100_000u32..1_000_000,
        cbg in cbg_strategy(),
        week in 0u64..20,
        visits in 0u64..2_000,
        buckets in bucket_map_strategy(),
        lat in proptest::option::of(-90.0f64..90.0),
        brand in proptest::option::of(0u8..3),
        homes in proptest::collection::btree_map(cbg_strategy(), 0u64..100, 0..=3),
        median_half_minutes in 0u64..960,
        distance in proptest::option::of(0u64..50_000),
    ) -> FlatWeeklyRecord {
        let start = date(2020, 3, 2) + Days::new(7 * week);
        FlatWeeklyRecord {
            place_id: format!("sg-prop-{poi:03}"),
            location_name: format!("Prop {poi}"),
            brand: brand.map(|b| format!("Brand {b}")),
            naics_code: naics,
            poi_cbg: cbg,
            latitude: lat,
            longitude: lat.map(|v| v / 2.0),
            period_start: start,
            period_end: start + Days::new(7),
            raw_visit_counts: visits,
            raw_visitor_counts: visits / 2,
            median_dwell_minutes: median_half_minutes as f64 / 2.0,
            bucketed_dwell_times: buckets,
            visits_by_day: vec![visits / 7; 7],
            visitor_home_cbgs: homes,
            distance_from_home_meters: distance.map(|d| d as f64),
        }
    }
}

/// Distinct (place, period) keys so loading never hits duplicate conflicts.
fn records_strategy(max: usize) -> impl Strategy<Value = Vec<FlatWeeklyRecord>> {
    proptest::collection::vec(record_strategy(), 0..max).prop_map(|records| {
        let mut seen = std::collections::BTreeSet::new();
        records
            .into_iter()
            .filter(|r| seen.insert((r.place_id.clone(), r.period_start)))
            .collect()
    })
}

fn sd_records_strategy() -> impl Strategy<Value = Vec<SocialDistancingRecord>> {
    proptest::collection::vec(
        (cbg_strategy(), 0u64..60, 0u64..30).prop_map(|(cbg, day, devices)| {
            SocialDistancingRecord {
                origin_cbg: cbg,
                date: date(2020, 3, 2) + Days::new(day),
                device_count: devices,
                median_distance_traveled_from_home_meters: 5_000.0,
                median_home_dwell_time_minutes: 600.0,
                completely_home_device_count: devices / 2,
            }
        }),
        0..60,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn explode_conserves_nested_sum(record in record_strategy()) {
        let exploded: u64 = ingest::explode_to_1nf(&record).iter().map(|d| d.visits).sum();
        let nested: u64 = record.bucketed_dwell_times.values().sum();
        prop_assert_eq!(exploded, nested);
    }

    #[test]
    fn snapshot_round_trip_is_identity(records in records_strategy(20)) {
        let warehouse = ingest::load_warehouse(&records, DuplicatePolicy::Reject).unwrap();
        let dir = tempfile::tempdir().unwrap();
        warehouse.save(dir.path()).unwrap();
        let loaded = Warehouse::load(dir.path()).unwrap();
        prop_assert_eq!(warehouse, loaded);
    }

    #[test]
    fn load_is_order_independent(records in records_strategy(20)) {
        let forward = ingest::load_warehouse(&records, DuplicatePolicy::Reject).unwrap();
        let mut reversed = records.clone();
        reversed.reverse();
        let backward = ingest::load_warehouse(&reversed, DuplicatePolicy::Reject).unwrap();
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn suppression_is_monotone(
        records in sd_records_strategy(),
        t_a in 0u64..40,
        t_b in 0u64..40,
    ) {
        let (t1, t2) = (t_a.min(t_b), t_a.max(t_b));
        let (_, s1) = suppress_low_device_cbgs(records.clone(), t1);
        let (_, s2) = suppress_low_device_cbgs(records.clone(), t2);
        prop_assert!(s1.is_subset(&s2));
        let (kept, none) = suppress_low_device_cbgs(records.clone(), 0);
        prop_assert!(none.is_empty());
        prop_assert_eq!(kept.len(), records.len());
    }

    #[test]
    fn rankings_are_sorted_with_key_tiebreak(
        records in records_strategy(30),
        k in 1usize..10,
    ) {
        let warehouse = ingest::load_warehouse(&records, DuplicatePolicy::Reject).unwrap();
        let engine = QueryEngine::new(&warehouse);
        let ranked = engine
            .q2_top_categories(date(2020, 1, 1), date(2021, 1, 1), k)
            .unwrap();
        prop_assert!(ranked.rows.len() <= k);
        for pair in ranked.rows.windows(2) {
            let ordered = pair[0].1 > pair[1].1
                || (pair[0].1 == pair[1].1 && pair[0].0 < pair[1].0);
            prop_assert!(ordered, "rows out of order: {:?}", pair);
        }
    }

    #[test]
    fn dwell_aggregation_covers_all_buckets(
        records in records_strategy(20),
        naics in 100_000u32..1_000_000,
    ) {
        let warehouse = ingest::load_warehouse(&records, DuplicatePolicy::Reject).unwrap();
        let engine = QueryEngine::new(&warehouse);
        let totals = engine
            .dwell_aggregation(naics, date(2020, 1, 1), date(2021, 1, 1))
            .unwrap();
        prop_assert_eq!(totals.len(), DwellBucket::ALL.len());
    }

    #[test]
    fn sig6_output_parses_back_close(v in -1e12f64..1e12) {
        prop_assume!(v != 0.0);
        let shown: f64 = fmt_sig6(v).parse().unwrap();
        let relative = ((shown - v) / v).abs();
        prop_assert!(relative < 1e-5, "{v} displayed as {shown}");
    }
}

#[test]
fn period_inclusion_boundary() {
    // a week counts only when fully inside the range, at both edges
    let start = date(2020, 3, 2);
    let record = FlatWeeklyRecord {
        place_id: "sg-b".into(),
        location_name: "Boundary".into(),
        brand: None,
        naics_code: 722410,
        poi_cbg: "270531000001".into(),
        latitude: None,
        longitude: None,
        period_start: start,
        period_end: start + Days::new(7),
        raw_visit_counts: 10,
        raw_visitor_counts: 5,
        median_dwell_minutes: 30.0,
        bucketed_dwell_times: BTreeMap::from([("21-60".to_string(), 10)]),
        visits_by_day: vec![10, 0, 0, 0, 0, 0, 0],
        visitor_home_cbgs: BTreeMap::new(),
        distance_from_home_meters: None,
    };
    let warehouse = ingest::load_warehouse(&[record], DuplicatePolicy::Reject).unwrap();
    let engine = QueryEngine::new(&warehouse);
    let total = |s: NaiveDate, e: NaiveDate| -> u64 {
        engine
            .dwell_aggregation(722410, s, e)
            .unwrap()
            .values()
            .sum()
    };
    assert_eq!(total(start, start + Days::new(7)), 10);
    assert_eq!(total(start + Days::new(1), start + Days::new(7)), 0);
    assert_eq!(total(start, start + Days::new(6)), 0);
}
