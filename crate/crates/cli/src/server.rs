//! Local JSON API serving Pareto samples and collecting ratings.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tndp_core::evaluation::{evaluate, ObjectiveVector};
use tndp_core::network::{BusNetwork, RoadGraph};
use tndp_core::report::network_geojson;
use tndp_core::routegen::RoutePool;
use tndp_core::weightfit::{aggregate_ratings, RatingRecord, RatingScale};
use tndp_core::{Error, Result};

use crate::artifacts::{ParetoFile, SampleFile, PARETO};
use crate::manifest::io_err;
use crate::pipeline::{read_ratings, sample_members, Workspace};

/// Append-only JSON-lines file of rating records.
pub struct RatingStore {
    path: PathBuf,
    file: File,
    records: Vec<RatingRecord>,
}

impl RatingStore {
    pub fn open(path: &Path) -> Result<Self> {
        let records = if path.exists() { read_ratings(path)? } else { Vec::new() };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| io_err(path, e))?;
        Ok(Self {
            path: path.to_owned(),
            file,
            records,
        })
    }

    pub fn append(&mut self, record: RatingRecord) -> Result<()> {
        let mut line = serde_json::to_string(&record).expect("record serializes");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(|e| io_err(&self.path, e))?;
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[RatingRecord] {
        &self.records
    }
}

pub struct AppState {
    pub pareto: ParetoFile,
    pub scale: RatingScale,
    pub pool: Arc<RoutePool>,
    pub road: Arc<RoadGraph>,
    pub baseline: (BusNetwork, ObjectiveVector),
    pub store: Mutex<RatingStore>,
}

impl AppState {
    /// State for a finished multi-objective stage of `ws`. Ratings go to the
    /// workspace ratings file.
    pub fn load(ws: &Workspace) -> Result<Self> {
        let pareto: ParetoFile = ws.load_stamped(PARETO)?;
        let ctx = ws.context()?;
        let baseline = BusNetwork::new(ctx.pool.original_ids());
        let objectives = evaluate(&baseline, &ctx)?;
        let store = RatingStore::open(&ws.ratings_file())?;
        Ok(Self {
            pareto,
            scale: ws.config.rating.scale,
            pool: ctx.pool.clone(),
            road: ctx.road.clone(),
            baseline: (baseline, objectives),
            store: Mutex::new(store),
        })
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/sample", get(sample))
        .route("/api/network/{id}/geojson", get(network))
        .route("/api/baseline/geojson", get(baseline))
        .route("/api/ratings", get(ratings).post(post_rating))
        .with_state(state)
}

#[derive(Deserialize)]
struct SampleQuery {
    n: Option<usize>,
}

async fn sample(State(s): State<Arc<AppState>>, Query(q): Query<SampleQuery>) -> Json<SampleFile> {
    Json(SampleFile {
        lineage: s.pareto.lineage.clone(),
        networks: sample_members(&s.pareto, q.n.unwrap_or(9)),
    })
}

fn with_objectives(mut collection: Value, extra: Value) -> Value {
    if let (Value::Object(map), Value::Object(extra)) = (&mut collection, extra) {
        map.extend(extra);
    }
    collection
}

async fn network(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let member = id
        .parse::<usize>()
        .ok()
        .and_then(|id| s.pareto.member(id))
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no network with id {id}")))?;
    let bus = BusNetwork::new(member.routes.iter().copied());
    Ok(Json(with_objectives(
        network_geojson(&bus, &s.pool, &s.road, true),
        json!({
            "network_id": member.id,
            "objectives": member.objectives,
            "route_count": member.routes.len(),
        }),
    )))
}

async fn baseline(State(s): State<Arc<AppState>>) -> Json<Value> {
    let (bus, objectives) = &s.baseline;
    Json(with_objectives(
        network_geojson(bus, &s.pool, &s.road, true),
        json!({ "objectives": objectives, "route_count": bus.len() }),
    ))
}

async fn ratings(State(s): State<Arc<AppState>>) -> ApiResult<Json<Value>> {
    let store = s.store.lock().map_err(|_| ApiError(StatusCode::INTERNAL_SERVER_ERROR, "ratings store poisoned".into()))?;
    Ok(Json(json!(aggregate_ratings(store.records()))))
}

async fn post_rating(
    State(s): State<Arc<AppState>>,
    Json(record): Json<RatingRecord>,
) -> ApiResult<(StatusCode, Json<RatingRecord>)> {
    if s.pareto.member(record.network_id).is_none() {
        return Err(ApiError(
            StatusCode::NOT_FOUND,
            format!("no network with id {}", record.network_id),
        ));
    }
    if !s.scale.contains(record.rating) {
        return Err(ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("rating {} is outside [{}, {}]", record.rating, s.scale.min, s.scale.max),
        ));
    }
    if record.rater_id.trim().is_empty() {
        return Err(ApiError(StatusCode::UNPROCESSABLE_ENTITY, "rater_id is empty".into()));
    }
    let mut store = s.store.lock().map_err(|_| ApiError(StatusCode::INTERNAL_SERVER_ERROR, "ratings store poisoned".into()))?;
    store.append(record.clone())?;
    Ok((StatusCode::CREATED, Json(record)))
}
