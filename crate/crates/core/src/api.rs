// Copyright 2026 The Tracelight Authors
// SPDX-License-Identifier: Apache-2.0

//! HTTP JSON API under `/api/v1`.
//!
//! | method | path                          | body / query                    |
//! |--------|-------------------------------|---------------------------------|
//! | POST   | `/traces`                     | `{format?, text, product?}`     |
//! | GET    | `/groups`                     | `?limit=1..500&offset=0..`      |
//! | GET    | `/groups/{id}`                |                                 |
//! | PUT    | `/groups/{id}/selection`      | `{selected_indices, author?}`   |
//! | GET    | `/stats`                      |                                 |
//!
//! Every non-2xx response carries an [`ApiError`] body. Parsing happens
//! before the store lock is taken; mutations are serialized by the lock.

use std::collections::HashMap;
use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use parking_lot::{RwLock, RwLockWriteGuard};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::groups::GroupId;
use crate::normalize::SubsystemRule;
use crate::parser::{self, FormatHint, RawReport};
use crate::store::Store;
use crate::view::{self, GroupSummary, IngestResponse, SelectionView, StatsView};
use crate::Error;

pub const DEFAULT_PAGE_LIMIT: usize = 50;
pub const MAX_PAGE_LIMIT: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::EmptyReport
            | Error::UnrecognizedFormat
            | Error::Parse(_)
            | Error::InvalidK(_)
            | Error::IndexOutOfRange { .. } => StatusCode::BAD_REQUEST,
            Error::UnknownGroup(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
pub struct AppState {
    store: Arc<RwLock<Store>>,
    rules: Arc<Vec<SubsystemRule>>,
    k: usize,
}

impl AppState {
    pub fn new(store: Store, rules: Vec<SubsystemRule>, k: usize) -> Result<Self, Error> {
        if k < 1 {
            return Err(Error::InvalidK(k));
        }
        Ok(AppState {
            store: Arc::new(RwLock::new(store)),
            rules: Arc::new(rules),
            k,
        })
    }

    pub fn store(&self) -> &Arc<RwLock<Store>> {
        &self.store
    }
}

/// `None` allows any origin.
pub fn router(state: AppState, cors_origin: Option<&str>) -> Router {
    let origin = match cors_origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST, Method::PUT])
        .allow_headers([header::CONTENT_TYPE]);

    Router::new()
        .route("/api/v1/traces", post(ingest_trace))
        .route("/api/v1/groups", get(list_groups))
        .route("/api/v1/groups/{group_id}", get(get_group))
        .route("/api/v1/groups/{group_id}/selection", put(put_selection))
        .route("/api/v1/stats", get(stats))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(cors)
        .with_state(state)
}

pub async fn serve(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(
        StatusCode::METHOD_NOT_ALLOWED,
        "method_not_allowed",
        "method not allowed",
    )
}

fn json_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", e.to_string()))
}

#[derive(Debug, Deserialize)]
struct IngestRequest {
    #[serde(default)]
    format: FormatHint,
    text: String,
    #[serde(default)]
    product: Option<String>,
}

async fn ingest_trace(State(state): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<IngestResponse>)> {
    let req: IngestRequest = json_body(&body)?;
    let report = RawReport::new(req.text, req.format, req.product, crate::now())?;
    let trace = parser::parse(&report)?;

    let mut store = state.store.write();
    let outcome = store.ingest_parsed(trace.clone(), &report)?;
    let store = RwLockWriteGuard::downgrade(store);
    let corpus = store.corpus();
    let keys = crate::normalize::frame_keys(&trace);
    let suggestions = corpus.suggest(&keys, state.k)?;
    Ok((
        StatusCode::CREATED,
        Json(IngestResponse {
            frames: view::frame_views(&trace, &keys, &state.rules),
            suggestions: view::suggestion_views(&suggestions),
            selection: corpus.selection(&outcome.group_id).into(),
            group_id: outcome.group_id,
            is_new_group: outcome.is_new,
            occurrence_count: outcome.occurrence_count,
        }),
    ))
}

#[derive(Debug, Serialize)]
struct GroupPage {
    total: usize,
    groups: Vec<GroupSummary>,
}

fn pagination(query: &HashMap<String, String>) -> ApiResult<(usize, usize)> {
    let invalid = |msg: String| ApiError::new(StatusCode::BAD_REQUEST, "invalid_pagination", msg);
    let limit = match query.get("limit") {
        None => DEFAULT_PAGE_LIMIT,
        Some(v) => match v.parse::<usize>() {
            Ok(n) if (1..=MAX_PAGE_LIMIT).contains(&n) => n,
            _ => return Err(invalid(format!("limit must be 1..={MAX_PAGE_LIMIT}, got `{v}`"))),
        },
    };
    let offset = match query.get("offset") {
        None => 0,
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| invalid(format!("offset must be a non-negative integer, got `{v}`")))?,
    };
    Ok((limit, offset))
}

async fn list_groups(
    State(state): State<AppState>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<Json<GroupPage>> {
    let (limit, offset) = pagination(&query)?;
    let store = state.store.read();
    let all = view::group_summaries(store.corpus());
    Ok(Json(GroupPage {
        total: all.len(),
        groups: all.into_iter().skip(offset).take(limit).collect(),
    }))
}

async fn get_group(State(state): State<AppState>, Path(group_id): Path<String>) -> ApiResult<Json<view::GroupDetail>> {
    let store = state.store.read();
    let corpus = store.corpus();
    let id = GroupId::new(group_id);
    let group = corpus.group(&id).ok_or_else(|| Error::UnknownGroup(id.to_string()))?;
    Ok(Json(view::group_detail(corpus, group, &state.rules, state.k)?))
}

#[derive(Debug, Deserialize)]
struct SelectionRequest {
    selected_indices: Vec<i64>,
    #[serde(default)]
    author: Option<String>,
}

#[derive(Debug, Serialize)]
struct SelectionResponse {
    group_id: GroupId,
    selection: SelectionView,
}

async fn put_selection(
    State(state): State<AppState>,
    Path(group_id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<SelectionResponse>> {
    let id = GroupId::new(group_id);
    let mut store = state.store.write();
    if store.corpus().group(&id).is_none() {
        return Err(Error::UnknownGroup(id.to_string()).into());
    }
    let req: SelectionRequest = json_body(&body)?;
    let saved = store.save_selection(&id, &req.selected_indices, req.author, crate::now())?;
    Ok(Json(SelectionResponse {
        group_id: id,
        selection: Some(&saved).into(),
    }))
}

async fn stats(State(state): State<AppState>) -> Json<StatsView> {
    Json(StatsView::of(state.store.read().corpus()))
}
