//! JSON-over-HTTP API for browsing snapshots, demonstrating targets,
//! executing queries and reading collected records.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;

use uiq::engine::{execute, extract, synthesize, CandidateQuery, EngineError, LocatorFamily, SynthesisConfig};
use uiq::evalkit::parse_records;
use uiq::query::GraphQuery;
use uiq::relations::{augment_with, RelationConfig, UiGraph};
use uiq::runtime::{replay, CollectionRecord, CollectorSpec, NdjsonSink, ReplayOptions, SnapshotEvent};
use uiq::snapshot::{parse_snapshot, snapshot_to_value, NodeId, UiSnapshot};

/// Snapshots loaded at startup, in load order.
pub struct CorpusHandle {
    pub corpus_id: String,
    pub source_dir: Option<PathBuf>,
    graphs: Vec<UiGraph>,
    by_id: BTreeMap<String, usize>,
}

impl CorpusHandle {
    pub fn from_snapshots(
        corpus_id: &str,
        snapshots: Vec<UiSnapshot>,
        relations: &RelationConfig,
    ) -> Result<Self, String> {
        let mut by_id = BTreeMap::new();
        let mut graphs = Vec::with_capacity(snapshots.len());
        for (i, s) in snapshots.into_iter().enumerate() {
            if by_id.insert(s.snapshot_id.clone(), i).is_some() {
                return Err(format!("duplicate snapshot id {:?}", s.snapshot_id));
            }
            graphs.push(augment_with(s, relations));
        }
        Ok(CorpusHandle { corpus_id: corpus_id.to_string(), source_dir: None, graphs, by_id })
    }

    /// Reads every `.json` and `.xml` file in `dir`, sorted by file name.
    pub fn load_dir(dir: &Path, relations: &RelationConfig) -> Result<Self, String> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| format!("{}: {e}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "xml")))
            .collect();
        paths.sort();
        let mut snapshots = Vec::new();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            snapshots.push(parse_snapshot(&text).map_err(|e| format!("{}: {e}", p.display()))?);
        }
        let id = dir.file_name().and_then(|n| n.to_str()).unwrap_or("corpus");
        let mut handle = Self::from_snapshots(id, snapshots, relations)?;
        handle.source_dir = Some(dir.to_path_buf());
        Ok(handle)
    }

    pub fn graphs(&self) -> &[UiGraph] {
        &self.graphs
    }

    pub fn graph(&self, snapshot_id: &str) -> Option<&UiGraph> {
        self.by_id.get(snapshot_id).map(|&i| &self.graphs[i])
    }

    /// Each snapshot as an event with its root package in the foreground, sorted by time.
    pub fn events(&self) -> Vec<SnapshotEvent> {
        let mut evs: Vec<SnapshotEvent> = self
            .graphs
            .iter()
            .map(|g| {
                let s = g.snapshot();
                SnapshotEvent {
                    timestamp: s.timestamp,
                    foreground_package: s.root().package_name.clone(),
                    snapshot: s.clone(),
                }
            })
            .collect();
        evs.sort_by_key(|e| e.timestamp);
        evs
    }
}

pub struct AppState {
    pub corpus: CorpusHandle,
    pub synthesis: SynthesisConfig,
    pub sink_path: PathBuf,
    collectors: Mutex<BTreeMap<String, CollectorSpec>>,
}

impl AppState {
    pub fn new(corpus: CorpusHandle, synthesis: SynthesisConfig, sink_path: PathBuf) -> Self {
        AppState { corpus, synthesis, sink_path, collectors: Mutex::new(BTreeMap::new()) }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/snapshots", get(list_snapshots))
        .route("/api/snapshots/{id}", get(get_snapshot))
        .route("/api/demonstrate", post(demonstrate))
        .route("/api/execute", post(execute_query))
        .route("/api/collectors", post(create_collector))
        .route("/api/collectors/{id}/records", get(list_records))
        .with_state(state)
}

pub async fn serve(state: Arc<AppState>, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    axum::serve(listener, router(state)).await
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError { status: status.as_u16(), code: code.into(), message: message.into(), position: None }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "notFound", format!("unknown {what} {id:?}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

fn engine_error(e: EngineError) -> ApiError {
    match e {
        EngineError::UnknownNode(n) => ApiError::not_found("node", &n.to_string()),
        EngineError::UnsupportedOperator(op) => {
            ApiError::new(StatusCode::BAD_REQUEST, "unsupportedOperator", format!("operator '{op}' cannot be executed"))
        }
        EngineError::InvalidConfig(m) => ApiError::new(StatusCode::BAD_REQUEST, "invalidConfig", m),
        EngineError::InvalidQuery(e) => ApiError::new(StatusCode::BAD_REQUEST, "invalidQuery", e.to_string()),
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotSummary {
    pub snapshot_id: String,
    pub timestamp: i64,
    pub node_count: usize,
    pub package_names: Vec<String>,
}

impl SnapshotSummary {
    pub fn of(s: &UiSnapshot) -> Self {
        SnapshotSummary {
            snapshot_id: s.snapshot_id.clone(),
            timestamp: s.timestamp,
            node_count: s.len(),
            package_names: s.package_names(),
        }
    }
}

async fn list_snapshots(State(st): State<Arc<AppState>>) -> Json<Vec<SnapshotSummary>> {
    Json(st.corpus.graphs().iter().map(|g| SnapshotSummary::of(g.snapshot())).collect())
}

/// Bounds as fractions of the screen size, keyed by node id.
fn render_hints(s: &UiSnapshot) -> Value {
    let (w, h) = (s.screen_width.max(1) as f64, s.screen_height.max(1) as f64);
    let nodes: serde_json::Map<String, Value> = s
        .nodes
        .values()
        .map(|n| {
            let b = n.bounds;
            (n.id.0.to_string(), json!([b.left as f64 / w, b.top as f64 / h, b.right as f64 / w, b.bottom as f64 / h]))
        })
        .collect();
    json!({ "normalizedBounds": nodes, "depthFirstOrder": s.preorder() })
}

async fn get_snapshot(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Value> {
    let g = st.corpus.graph(&id).ok_or_else(|| ApiError::not_found("snapshot", &id))?;
    Ok(Json(json!({ "snapshot": snapshot_to_value(g.snapshot()), "renderHints": render_hints(g.snapshot()) })))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DemonstrateRequest {
    pub snapshot_id: String,
    pub node_id: NodeId,
    #[serde(default)]
    pub config: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CandidateView {
    pub query_text: String,
    pub nl: String,
    pub score_tier: String,
    pub predicate_count: usize,
    pub family: LocatorFamily,
}

impl CandidateView {
    pub fn of(c: &CandidateQuery) -> Self {
        CandidateView {
            query_text: c.text().to_string(),
            nl: c.nl.clone(),
            score_tier: c.score.worst_tier.to_string(),
            predicate_count: c.score.predicate_count,
            family: c.family,
        }
    }
}

fn merged_config(base: &SynthesisConfig, overrides: Option<Value>) -> Result<SynthesisConfig, ApiError> {
    let Some(Value::Object(over)) = overrides else {
        return Ok(base.clone());
    };
    let mut v = serde_json::to_value(base).expect("config serializes");
    let obj = v.as_object_mut().expect("config is an object");
    for (k, val) in over {
        obj.insert(k, val);
    }
    let cfg: SynthesisConfig = serde_json::from_value(v)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalidConfig", e.to_string()))?;
    cfg.validate().map_err(engine_error)?;
    Ok(cfg)
}

async fn demonstrate(State(st): State<Arc<AppState>>, Json(req): Json<DemonstrateRequest>) -> ApiResult<Vec<CandidateView>> {
    let g = st.corpus.graph(&req.snapshot_id).ok_or_else(|| ApiError::not_found("snapshot", &req.snapshot_id))?;
    let cfg = merged_config(&st.synthesis, req.config)?;
    let cands = synthesize(g, req.node_id, &cfg).map_err(engine_error)?;
    if cands.is_empty() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "noUniqueQuery",
            format!("no query uniquely identifies {} in {}", req.node_id, req.snapshot_id),
        ));
    }
    Ok(Json(cands.iter().map(CandidateView::of).collect()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExecuteRequest {
    pub query_text: String,
    #[serde(default)]
    pub corpus_id: Option<String>,
    #[serde(default)]
    pub snapshot_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotMatches {
    pub snapshot_id: String,
    pub node_ids: Vec<NodeId>,
    pub extracted_values: Vec<String>,
}

async fn execute_query(State(st): State<Arc<AppState>>, Json(req): Json<ExecuteRequest>) -> ApiResult<Vec<SnapshotMatches>> {
    let q = GraphQuery::parse(&req.query_text).map_err(|e| ApiError {
        position: Some(e.position),
        ..ApiError::new(StatusCode::BAD_REQUEST, "parseError", e.message.clone())
    })?;
    let targets: Vec<&UiGraph> = match (&req.snapshot_id, &req.corpus_id) {
        (Some(id), _) => vec![st.corpus.graph(id).ok_or_else(|| ApiError::not_found("snapshot", id))?],
        (None, Some(c)) if *c != st.corpus.corpus_id => return Err(ApiError::not_found("corpus", c)),
        _ => st.corpus.graphs().iter().collect(),
    };
    let mut out = Vec::with_capacity(targets.len());
    for g in targets {
        let m = execute(&q.root, g).map_err(engine_error)?;
        let extracted_values = m
            .node_ids
            .iter()
            .map(|&n| extract(n, g).map(|x| x.value))
            .collect::<Result<Vec<_>, _>>()
            .map_err(engine_error)?;
        out.push(SnapshotMatches {
            snapshot_id: m.graph_ref.clone(),
            node_ids: m.node_ids.into_iter().collect(),
            extracted_values,
        });
    }
    Ok(Json(out))
}

/// Registers a collector and replays the loaded corpus through it into the sink.
async fn create_collector(State(st): State<Arc<AppState>>, body: String) -> Result<(StatusCode, Json<Value>), ApiError> {
    let spec = CollectorSpec::from_json(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalidCollector", e.to_string()))?;
    let mut collectors = st.collectors.lock().await;
    if collectors.contains_key(&spec.collector_id) {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "duplicateCollector",
            format!("collector {:?} already exists", spec.collector_id),
        ));
    }
    let io = |e: std::io::Error| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "sinkError", e.to_string());
    let mut sink = NdjsonSink::append_to(&st.sink_path).map_err(io)?;
    let summary = replay(std::slice::from_ref(&spec), &st.corpus.events(), &ReplayOptions::default(), &mut sink)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "replayError", e.to_string()))?;
    collectors.insert(spec.collector_id.clone(), spec.clone());
    Ok((StatusCode::CREATED, Json(json!({ "collectorId": spec.collector_id, "summary": summary }))))
}

async fn list_records(State(st): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Vec<CollectionRecord>> {
    // Hold the lock so reads never see a half-written replay.
    let collectors = st.collectors.lock().await;
    let text = match std::fs::read_to_string(&st.sink_path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "sinkError", e.to_string())),
    };
    let all = parse_records(&text).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "sinkError", e.to_string()))?;
    let mut mine: Vec<CollectionRecord> = all.into_iter().filter(|r| r.collector_id == id).collect();
    if mine.is_empty() && !collectors.contains_key(&id) {
        return Err(ApiError::not_found("collector", &id));
    }
    mine.sort_by_key(|r| r.timestamp);
    Ok(Json(mine))
}
