//! HTTP service over chart sessions. Every request is answered from the
//! session's current revision; edits bump the revision and drop cached
//! analysis and suggestions.

mod session;

pub use session::{Analysis, Session};

use session::{guard, with_analysis};

use crate::error::ApiError;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use psight_core::advisor::{
    apply_suggestion, effect_histograms, generate_suggestions, usage_from_table, DimensionHistogram, DimensionUsage,
    Suggestion,
};
use psight_core::chart::{apply_edit, BoundingBox, EditCommand, ResolvedStyle};
use psight_core::model::PerceptionModel;
use psight_core::patterns::{ChartScorer, DimContribution, SalienceScore, TOP_DIMENSIONS};
use psight_core::pipeline::report_json;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use tower_http::services::ServeDir;

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Shared>,
}

struct Shared {
    model: PerceptionModel,
    sessions: RwLock<HashMap<String, Arc<RwLock<Session>>>>,
    next_id: AtomicU64,
    session_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(model: PerceptionModel, session_dir: Option<PathBuf>) -> Self {
        AppState {
            inner: Arc::new(Shared {
                model,
                sessions: RwLock::new(HashMap::new()),
                next_id: AtomicU64::new(1),
                session_dir,
            }),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<RwLock<Session>>, ApiError> {
        self.inner
            .sessions
            .read()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown chart `{id}`")))
    }
}

/// Routes under `/api`, plus static files from `static_dir` at `/` when given.
pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/charts", post(create_chart))
        .route("/charts/{id}/scope", put(set_scope))
        .route("/charts/{id}/patterns", get(patterns))
        .route("/charts/{id}/selection", post(select))
        .route("/charts/{id}/effects", get(effects))
        .route("/charts/{id}/suggestions", post(suggestions))
        .route("/charts/{id}/edits", post(edit))
        .route("/charts/{id}/svg", get(svg));
    let app = Router::new().nest("/api", api).with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request("invalid request body").with_detail(e.body_text()))
}

fn json_text(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

#[derive(Deserialize)]
struct CreateChart {
    svg: String,
}

#[derive(Serialize)]
pub struct ElementInfo {
    pub id: String,
    pub kind: &'static str,
    pub bbox: BoundingBox,
    pub style: ResolvedStyle,
    pub hidden: bool,
}

#[derive(Serialize)]
struct ChartCreated {
    chart_id: String,
    revision: u64,
    elements: Vec<ElementInfo>,
    warnings: Vec<String>,
}

async fn create_chart(
    State(state): State<AppState>,
    payload: Result<Json<CreateChart>, JsonRejection>,
) -> Result<Json<ChartCreated>, ApiError> {
    let req = body(payload)?;
    let id = format!("c{}", state.inner.next_id.fetch_add(1, Ordering::Relaxed));
    let session = Session::new(id.clone(), &req.svg, state.inner.session_dir.as_ref())?;
    let out = ChartCreated {
        chart_id: id.clone(),
        revision: session.revision,
        elements: session
            .document
            .elements
            .iter()
            .map(|e| ElementInfo {
                id: e.id.clone(),
                kind: e.kind.name(),
                bbox: e.bbox,
                style: e.style,
                hidden: e.hidden,
            })
            .collect(),
        warnings: session.document.warnings.clone(),
    };
    state
        .inner
        .sessions
        .write()
        .expect("session table poisoned")
        .insert(id, Arc::new(RwLock::new(session)));
    Ok(Json(out))
}

#[derive(Deserialize)]
struct ScopeRequest {
    #[serde(default)]
    excluded: Vec<String>,
}

async fn set_scope(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<ScopeRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let req = body(payload)?;
    let session = state.session(&id)?;
    let mut s = session.write().unwrap_or_else(|p| p.into_inner());
    s.set_scope(req.excluded)?;
    let analysis = s.analysis(&state.inner.model)?;
    Ok(json_text(report_json(&analysis.report)))
}

async fn patterns(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let session = state.session(&id)?;
    with_analysis(&session, &state.inner.model, |_, a| Ok(json_text(report_json(&a.report))))
}

#[derive(Deserialize)]
struct GroupRequest {
    elements: Vec<String>,
}

#[derive(Serialize)]
struct SelectionResponse {
    revision: u64,
    elements: Vec<String>,
    salience: SalienceScore,
    contributing_dims: Vec<DimContribution>,
    effect_histograms: Vec<DimensionHistogram>,
}

async fn select(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<GroupRequest>, JsonRejection>,
) -> Result<Json<SelectionResponse>, ApiError> {
    let req = body(payload)?;
    let session = state.session(&id)?;
    let model = &state.inner.model;
    with_analysis(&session, model, |s, analysis| {
        let scorer = ChartScorer::new(model, &analysis.table)?;
        let members = scorer.indices(&req.elements)?;
        let salience = scorer.salience_of(&members)?;
        let mut contributing_dims = scorer.contributions(&members);
        contributing_dims.truncate(TOP_DIMENSIONS);
        let elements: Vec<String> = members.iter().map(|&i| analysis.table.element_ids[i].clone()).collect();
        *guard(&s.selection) = Some(elements.clone());
        Ok(Json(SelectionResponse {
            revision: analysis.revision,
            elements,
            salience,
            contributing_dims,
            effect_histograms: effect_histograms(&analysis.table, Some(&members)),
        }))
    })
}

#[derive(Serialize)]
struct EffectsResponse {
    revision: u64,
    usage: Vec<DimensionUsage>,
    effect_histograms: Vec<DimensionHistogram>,
}

async fn effects(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<EffectsResponse>, ApiError> {
    let session = state.session(&id)?;
    with_analysis(&session, &state.inner.model, |s, analysis| {
        let rows: Vec<usize> = (0..analysis.table.len()).collect();
        let selected: Option<Vec<usize>> = guard(&s.selection)
            .as_ref()
            .map(|ids| ids.iter().filter_map(|id| analysis.table.index_of(id)).collect());
        Ok(Json(EffectsResponse {
            revision: analysis.revision,
            usage: usage_from_table(&analysis.table, &rows),
            effect_histograms: effect_histograms(&analysis.table, selected.as_deref()),
        }))
    })
}

#[derive(Serialize)]
struct SuggestionsResponse {
    revision: u64,
    salience: SalienceScore,
    usage: Vec<DimensionUsage>,
    suggestions: Vec<Suggestion>,
}

async fn suggestions(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<GroupRequest>, JsonRejection>,
) -> Result<Json<SuggestionsResponse>, ApiError> {
    let req = body(payload)?;
    let session = state.session(&id)?;
    let model = &state.inner.model;
    with_analysis(&session, model, |s, analysis| {
        let scorer = ChartScorer::new(model, &analysis.table)?;
        let members = scorer.indices(&req.elements)?;
        let salience = scorer.salience_of(&members)?;
        let usage = usage_from_table(&analysis.table, &(0..analysis.table.len()).collect::<Vec<_>>());
        let list = generate_suggestions(model, &s.document, &s.excluded, &req.elements)?;
        guard(&s.suggestions).extend(list.iter().map(|x| (x.id.clone(), x.clone())));
        Ok(Json(SuggestionsResponse {
            revision: analysis.revision,
            salience,
            usage,
            suggestions: list,
        }))
    })
}

#[derive(Deserialize)]
struct EditRequest {
    base_revision: u64,
    #[serde(default)]
    edit_command: Option<EditCommand>,
    #[serde(default)]
    suggestion_id: Option<String>,
}

#[derive(Serialize)]
struct EditResponse {
    new_revision: u64,
    svg: String,
    /// Cached patterns and suggestions for earlier revisions no longer apply.
    invalidated: bool,
}

async fn edit(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<EditRequest>, JsonRejection>,
) -> Result<Json<EditResponse>, ApiError> {
    let req = body(payload)?;
    let session = state.session(&id)?;
    let mut s = session.write().unwrap_or_else(|p| p.into_inner());
    if req.base_revision != s.revision {
        return Err(ApiError::conflict(format!(
            "edit is based on revision {} but the chart is at revision {}",
            req.base_revision, s.revision
        )));
    }
    let edited = match (&req.edit_command, &req.suggestion_id) {
        (Some(cmd), None) => apply_edit(&s.document, cmd)?,
        (None, Some(sid)) => {
            let suggestion = guard(&s.suggestions)
                .get(sid)
                .cloned()
                .ok_or_else(|| ApiError::not_found(format!("unknown suggestion `{sid}`")))?;
            apply_suggestion(&s.document, &suggestion)?
        }
        _ => return Err(ApiError::bad_request("give exactly one of edit_command and suggestion_id")),
    };
    s.commit(edited)?;
    Ok(Json(EditResponse {
        new_revision: s.revision,
        svg: s.document.serialize().to_string(),
        invalidated: true,
    }))
}

#[derive(Serialize)]
struct SvgResponse {
    revision: u64,
    svg: String,
}

async fn svg(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SvgResponse>, ApiError> {
    let session = state.session(&id)?;
    let s = session.read().unwrap_or_else(|p| p.into_inner());
    Ok(Json(SvgResponse {
        revision: s.revision,
        svg: s.document.serialize().to_string(),
    }))
}
