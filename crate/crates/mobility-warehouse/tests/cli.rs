//! End-to-end checks of the `mw` binary: exit codes, stdout shape, and the
//! MW_SNAPSHOT_DIR fallback.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::DESK;

fn mw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mw"))
        .args(args)
        .output()
        .expect("run mw")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn synth_preset_desk_lists_five_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = mw(&["synth", "--preset", "desk", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    let manifest = stdout(&out);
    assert_eq!(manifest.lines().count(), 5);
    assert!(manifest.contains("weekly_patterns.csv\t1000"));
    for file in [
        "weekly_patterns.csv",
        "social_distancing.csv",
        "population.csv",
        "calendar.csv",
        "outbreak_roster.csv",
    ] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }
}

#[test]
fn synth_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    assert_eq!(code(&mw(&["synth", "--preset", "desk"])), 2, "missing --out");
    assert_eq!(
        code(&mw(&["synth", "--preset", "nope", "--out", out_dir])),
        2,
        "unknown preset"
    );
    assert_eq!(code(&mw(&["synth", "--out", out_dir])), 2, "no source given");
}

#[test]
fn synth_unwritable_dir_exits_3() {
    let out = mw(&["synth", "--preset", "desk", "--out", "/proc/nope/out"]);
    assert_eq!(code(&out), 3, "{out:?}");
}

#[test]
fn ingest_clean_data_exits_0() {
    let desk = &*DESK;
    let dir = tempfile::tempdir().unwrap();
    let out = mw(&[
        "ingest",
        "--weekly",
        desk.data_dir.join("weekly_patterns.csv").to_str().unwrap(),
        "--sd",
        desk.data_dir.join("social_distancing.csv").to_str().unwrap(),
        "--snapshot",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let summary = stdout(&out);
    assert!(summary.contains("weekly: 1000 records, 1000 ok, 0 errors"));
    assert!(dir.path().join("pois.csv").exists());
}

#[test]
fn ingest_bad_row_exits_1_but_writes_snapshot() {
    let desk = &*DESK;
    let dir = tempfile::tempdir().unwrap();
    let weekly = dir.path().join("weekly.csv");
    let original =
        std::fs::read_to_string(desk.data_dir.join("weekly_patterns.csv")).unwrap();
    let mut lines: Vec<&str> = original.lines().collect();
    // empty place id invalidates the row
    let bad = format!(",{}", lines[1].split_once(',').unwrap().1);
    lines[1] = &bad;
    std::fs::write(&weekly, lines.join("\n")).unwrap();

    let snapshot = dir.path().join("snap");
    let out = mw(&[
        "ingest",
        "--weekly",
        weekly.to_str().unwrap(),
        "--snapshot",
        snapshot.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "{out:?}");
    assert!(stdout(&out).contains("999 ok, 1 errors"));
    assert!(snapshot.join("pois.csv").exists(), "snapshot written from clean rows");
}

#[test]
fn ingest_header_only_file_exits_0_with_empty_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let weekly = dir.path().join("weekly.csv");
    std::fs::write(
        &weekly,
        "safegraph_place_id,location_name,brands,naics_code,poi_cbg,latitude,longitude,\
         date_range_start,date_range_end,raw_visit_counts,raw_visitor_counts,median_dwell,\
         bucketed_dwell_times,visits_by_day,visitor_home_cbgs,distance_from_home\n",
    )
    .unwrap();
    let snapshot = dir.path().join("snap");
    let out = mw(&[
        "ingest",
        "--weekly",
        weekly.to_str().unwrap(),
        "--snapshot",
        snapshot.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let pois = std::fs::read_to_string(snapshot.join("pois.csv")).unwrap();
    assert_eq!(pois.lines().count(), 1, "header only");
}

#[test]
fn ingest_missing_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = mw(&[
        "ingest",
        "--weekly",
        "/nonexistent/weekly.csv",
        "--snapshot",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{out:?}");
}

#[test]
fn query_dwell_csv_lists_all_buckets() {
    let desk = &*DESK;
    let out = mw(&[
        "query",
        "dwell",
        "--snapshot",
        desk.snapshot_dir.to_str().unwrap(),
        "--code",
        "722410",
        "--start",
        "2020-03-01",
        "--end",
        "2021-06-28",
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let body = stdout(&out);
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("bucket,visits"));
    let buckets: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(buckets, ["<5", "5-20", "21-60", "61-240", ">240"]);
}

#[test]
fn query_answerability_output() {
    let out = mw(&["query", "answerability", "--id", "5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "RequiresExternalData: mode of transportation");
    let out = mw(&["query", "answerability", "--id", "2"]);
    assert_eq!(stdout(&out).trim(), "Answerable");
    assert_eq!(code(&mw(&["query", "answerability", "--id", "9"])), 2);
}

#[test]
fn bad_subcommand_exits_2() {
    assert_eq!(code(&mw(&["query", "frobnicate"])), 2);
    assert_eq!(code(&mw(&["explode"])), 2);
}

#[test]
fn query_missing_snapshot_exits_3() {
    let out = Command::new(env!("CARGO_BIN_EXE_mw"))
        .args([
            "query", "dwell", "--snapshot", "/nonexistent/snap", "--code", "722410",
            "--start", "2020-03-01", "--end", "2020-04-01",
        ])
        .env_remove("MW_SNAPSHOT_DIR")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "{out:?}");
}

#[test]
fn query_without_snapshot_flag_or_env_exits_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_mw"))
        .args([
            "query", "dwell", "--code", "722410", "--start", "2020-03-01", "--end",
            "2020-04-01",
        ])
        .env_remove("MW_SNAPSHOT_DIR")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "{out:?}");
}

#[test]
fn snapshot_env_var_substitutes_for_flag() {
    let desk = &*DESK;
    let out = Command::new(env!("CARGO_BIN_EXE_mw"))
        .args([
            "query", "dwell", "--code", "722410", "--start", "2020-03-01", "--end",
            "2021-06-28",
        ])
        .env("MW_SNAPSHOT_DIR", &desk.snapshot_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).starts_with("bucket,visits"));
}

fn write_report_spec(dir: &Path) -> std::path::PathBuf {
    let spec = dir.join("report.json");
    std::fs::write(
        &spec,
        r#"{
            "title": "Weekly check",
            "start": "2020-03-01",
            "end": "2021-06-28",
            "sections": [
                {"type": "top_categories", "k": 4},
                {"type": "hangouts", "naics": 722410, "k": 5}
            ]
        }"#,
    )
    .unwrap();
    spec
}

#[test]
fn report_renders_bundle_and_reruns_identically() {
    let desk = &*DESK;
    let dir = tempfile::tempdir().unwrap();
    let spec = write_report_spec(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out_dir in [&out_a, &out_b] {
        let out = mw(&[
            "report",
            "--snapshot",
            desk.snapshot_dir.to_str().unwrap(),
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{out:?}");
    }
    for name in ["summary.md", "top_categories.csv", "hangouts.csv"] {
        assert_eq!(
            std::fs::read(out_a.join(name)).unwrap(),
            std::fs::read(out_b.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn report_bad_spec_json_exits_2() {
    let desk = &*DESK;
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    std::fs::write(&spec, "{not json").unwrap();
    let out = mw(&[
        "report",
        "--snapshot",
        desk.snapshot_dir.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{out:?}");
}

#[test]
fn serve_bad_snapshot_exits_3_before_binding() {
    let out = mw(&["serve", "--snapshot", "/nonexistent/snap", "--bind", "127.0.0.1:0"]);
    assert_eq!(code(&out), 3, "{out:?}");
}

#[test]
fn serve_bind_conflict_exits_3() {
    let desk = &*DESK;
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let out = mw(&[
        "serve",
        "--snapshot",
        desk.snapshot_dir.to_str().unwrap(),
        "--bind",
        &addr,
    ]);
    assert_eq!(code(&out), 3, "{out:?}");
}
