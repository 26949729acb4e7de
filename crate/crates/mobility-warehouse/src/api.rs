//! Read-only HTTP service over an immutable snapshot.
//!
//! Responses are built by the same functions the CLI uses, so API bodies and
//! CLI `--format json` output carry identical numbers. Reload requires a
//! restart; nothing here mutates the warehouse.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Json, Response};
use axum::routing::get;
use axum::Router;
use chrono::NaiveDate;
use serde_json::{json, Map, Value};

use crate::model::{parse_date, Warehouse};
use crate::query::QueryEngine;

pub struct ApiState {
    pub warehouse: Warehouse,
    /// RFC 3339 timestamp captured when the snapshot finished loading.
    pub snapshot_loaded_at: String,
}

impl ApiState {
    pub fn new(warehouse: Warehouse) -> ApiState {
        ApiState {
            warehouse,
            snapshot_loaded_at: chrono::Utc::now().to_rfc3339(),
        }
    }
}

/// Body of GET /Visits and of `query dwell --format json`. Bucket keys are in
/// canonical order; counts stay integers.
pub fn visits_body(
    engine: &QueryEngine<'_>,
    code: u32,
    start: NaiveDate,
    end: NaiveDate,
) -> Value {
    let totals = engine
        .dwell_aggregation(code, start, end)
        .expect("range checked by caller");
    let mut buckets = Map::new();
    for (bucket, total) in totals {
        buckets.insert(bucket.label().to_string(), json!(total));
    }
    json!({
        "code": code,
        "start": start.to_string(),
        "end": end.to_string(),
        "buckets": buckets,
    })
}

/// Body of GET /Categories/Top and of `query top-categories --format json`.
pub fn top_categories_body(
    engine: &QueryEngine<'_>,
    start: NaiveDate,
    end: NaiveDate,
    k: usize,
) -> Value {
    let ranked = engine
        .q2_top_categories(start, end, k)
        .expect("range checked by caller");
    let rows: Vec<Value> = ranked
        .rows
        .iter()
        .enumerate()
        .map(|(i, (code, total))| {
            json!({
                "rank": i + 1,
                "naics": code,
                "total_visits": *total as u64,
            })
        })
        .collect();
    json!({
        "start": start.to_string(),
        "end": end.to_string(),
        "k": k,
        "rows": rows,
    })
}

/// Body of GET /Hangouts and of `query hangouts --format json`.
pub fn hangouts_body(
    engine: &QueryEngine<'_>,
    code: u32,
    state: Option<&str>,
    start: NaiveDate,
    end: NaiveDate,
    k: usize,
) -> Value {
    let ranked = engine
        .q3_top_hangouts(code, state, start, end, k)
        .expect("range checked by caller");
    let rows: Vec<Value> = ranked
        .rows
        .iter()
        .enumerate()
        .map(|(i, (place, total))| {
            json!({
                "rank": i + 1,
                "place_id": place,
                "long_duration_visits": *total as u64,
            })
        })
        .collect();
    json!({
        "code": code,
        "state": state,
        "start": start.to_string(),
        "end": end.to_string(),
        "k": k,
        "rows": rows,
    })
}

struct BadRequest {
    field: String,
    message: String,
}

impl BadRequest {
    fn new(field: &str, message: impl ToString) -> BadRequest {
        BadRequest {
            field: field.to_string(),
            message: message.to_string(),
        }
    }
}

impl IntoResponse for BadRequest {
    fn into_response(self) -> Response {
        (
            StatusCode::BAD_REQUEST,
            Json(json!({"error": {"field": self.field, "message": self.message}})),
        )
            .into_response()
    }
}

type Params = BTreeMap<String, String>;

fn require<'a>(params: &'a Params, field: &str) -> Result<&'a str, BadRequest> {
    params
        .get(field)
        .map(String::as_str)
        .ok_or_else(|| BadRequest::new(field, "missing parameter"))
}

fn date_param(params: &Params, field: &str) -> Result<NaiveDate, BadRequest> {
    let raw = require(params, field)?;
    parse_date(raw).ok_or_else(|| {
        BadRequest::new(field, format!("expected ISO-8601 or MM-DD-YYYY date, got {raw:?}"))
    })
}

fn code_param(params: &Params) -> Result<u32, BadRequest> {
    let raw = require(params, "Code")?;
    if raw.len() != 6 || !raw.bytes().all(|b| b.is_ascii_digit()) {
        return Err(BadRequest::new("Code", format!("expected 6-digit NAICS code, got {raw:?}")));
    }
    raw.parse()
        .map_err(|_| BadRequest::new("Code", "expected 6-digit NAICS code"))
}

fn k_param(params: &Params) -> Result<usize, BadRequest> {
    let raw = require(params, "k")?;
    match raw.parse::<usize>() {
        Ok(k) if k > 0 => Ok(k),
        _ => Err(BadRequest::new("k", format!("expected positive integer, got {raw:?}"))),
    }
}

fn range_params(params: &Params) -> Result<(NaiveDate, NaiveDate), BadRequest> {
    let start = date_param(params, "Start_Date")?;
    let end = date_param(params, "End_Date")?;
    if start > end {
        return Err(BadRequest::new("Start_Date", "start is after end"));
    }
    Ok((start, end))
}

async fn visits_handler(
    State(state): State<Arc<ApiState>>,
    Query(params): Query<Params>,
) -> Result<Json<Value>, BadRequest> {
    let code = code_param(&params)?;
    let (start, end) = range_params(&params)?;
    let engine = QueryEngine::new(&state.warehouse);
    Ok(Json(visits_body(&engine, code, start, end)))
}

async fn top_categories_handler(
    State(state): State<Arc<ApiState>>,
    Query(params): Query<Params>,
) -> Result<Json<Value>, BadRequest> {
    let k = k_param(&params)?;
    let (start, end) = range_params(&params)?;
    let engine = QueryEngine::new(&state.warehouse);
    Ok(Json(top_categories_body(&engine, start, end, k)))
}

async fn hangouts_handler(
    State(state): State<Arc<ApiState>>,
    Query(params): Query<Params>,
) -> Result<Json<Value>, BadRequest> {
    let code = code_param(&params)?;
    let k = k_param(&params)?;
    let (start, end) = range_params(&params)?;
    let state_filter = params.get("State").map(String::as_str);
    let engine = QueryEngine::new(&state.warehouse);
    Ok(Json(hangouts_body(&engine, code, state_filter, start, end, k)))
}

async fn health_handler(State(state): State<Arc<ApiState>>) -> Json<Value> {
    let counts: Map<String, Value> = state
        .warehouse
        .table_counts()
        .into_iter()
        .map(|(name, n)| (name.to_string(), json!(n)))
        .collect();
    Json(json!({
        "status": "ok",
        "snapshot_loaded_at": state.snapshot_loaded_at,
        "record_counts": counts,
    }))
}

pub fn router(state: Arc<ApiState>) -> Router {
    Router::new()
        .route("/Visits", get(visits_handler))
        .route("/Categories/Top", get(top_categories_handler))
        .route("/Hangouts", get(hangouts_handler))
        .route("/health", get(health_handler))
        .with_state(state)
}

/// Binds `addr` and serves until ctrl-c. Bind failures surface as Err so the
/// caller can exit before any request is accepted.
pub async fn serve(state: Arc<ApiState>, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_warehouse, DuplicatePolicy};
    use crate::model::FlatWeeklyRecord;
    use axum::body::Body;
    use axum::http::Request;
    use chrono::Days;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn fixture_state() -> Arc<ApiState> {
        let start = date(2020, 3, 2);
        let mut rec = FlatWeeklyRecord {
            place_id: "sg-1".to_string(),
            location_name: "Bar".to_string(),
            brand: None,
            naics_code: 722410,
            poi_cbg: "270531000001".to_string(),
            latitude: None,
            longitude: None,
            period_start: start,
            period_end: start + Days::new(7),
            raw_visit_counts: 60,
            raw_visitor_counts: 50,
            median_dwell_minutes: 35.0,
            bucketed_dwell_times: std::collections::BTreeMap::from([
                ("<5".to_string(), 10),
                ("21-60".to_string(), 50),
            ]),
            visits_by_day: vec![60, 0, 0, 0, 0, 0, 0],
            visitor_home_cbgs: std::collections::BTreeMap::new(),
            distance_from_home_meters: None,
        };
        let mut other = rec.clone();
        other.place_id = "sg-2".to_string();
        other.naics_code = 722511;
        rec.raw_visit_counts = 60;
        let w = load_warehouse(&[rec, other], DuplicatePolicy::Reject).unwrap();
        Arc::new(ApiState::new(w))
    }

    async fn get_json(state: Arc<ApiState>, uri: &str) -> (StatusCode, Value) {
        let response = router(state)
            .oneshot(Request::builder().uri(uri).body(Body::empty()).unwrap())
            .await
            .unwrap();
        let status = response.status();
        let bytes = response.into_body().collect().await.unwrap().to_bytes();
        (status, serde_json::from_slice(&bytes).unwrap())
    }

    #[tokio::test]
    async fn visits_returns_canonical_bucket_order() {
        let (status, body) = get_json(
            fixture_state(),
            "/Visits?Code=722410&Start_Date=03-01-2020&End_Date=06-28-2021",
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        let keys: Vec<&String> = body["buckets"].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["<5", "5-20", "21-60", "61-240", ">240"]);
        assert_eq!(body["buckets"]["21-60"], 50);
        assert_eq!(body["buckets"][">240"], 0);
    }

    #[tokio::test]
    async fn malformed_code_names_the_field() {
        let (status, body) = get_json(
            fixture_state(),
            "/Visits?Code=ABC&Start_Date=2020-03-01&End_Date=2020-04-01",
        )
        .await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
        assert_eq!(body["error"]["field"], "Code");
    }

    #[tokio::test]
    async fn missing_parameter_is_400() {
        let (status, body) =
            get_json(fixture_state(), "/Visits?Code=722410&Start_Date=2020-03-01").await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
        assert_eq!(body["error"]["field"], "End_Date");
    }

    #[tokio::test]
    async fn no_data_is_200_all_zero() {
        let (status, body) = get_json(
            fixture_state(),
            "/Visits?Code=445110&Start_Date=2020-03-01&End_Date=2020-04-01",
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        assert!(body["buckets"]
            .as_object()
            .unwrap()
            .values()
            .all(|v| v == 0));
    }

    #[tokio::test]
    async fn top_categories_rejects_zero_k() {
        let (status, body) = get_json(
            fixture_state(),
            "/Categories/Top?k=0&Start_Date=2020-03-01&End_Date=2020-04-01",
        )
        .await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
        assert_eq!(body["error"]["field"], "k");
    }

    #[tokio::test]
    async fn hangouts_unknown_state_is_empty_200() {
        let (status, body) = get_json(
            fixture_state(),
            "/Hangouts?Code=722410&State=Wyoming&k=5&Start_Date=2020-03-01&End_Date=2020-04-01",
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["rows"].as_array().unwrap().len(), 0);
    }

    #[tokio::test]
    async fn health_reports_table_counts() {
        let state = fixture_state();
        let expected_pois = state.warehouse.pois.len();
        let (status, body) = get_json(state, "/health").await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["status"], "ok");
        assert_eq!(body["record_counts"]["pois"], expected_pois);
    }
}
