//! Local HTTP session service.
//!
//! A session holds a catalog, the spreadsheet rows and the examples given so
//! far. Requests on one session are serialized; sessions are independent.

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{FromRequest, Path, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::{Mutex, RwLock};

use semfill::error::SynthesisError;
use semfill::program::ProgramFile;
use semfill::rank::Score;
use semfill::stdlib::{stdlib_catalog, StdlibOptions};
use semfill::synth::{apply, synthesize, ExampleSet, RowPrediction, SynthOptions, SynthesisResult};
use semfill::table::{load_table, InputState, TableCatalog, TableManifestEntry};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn not_found() -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "unknown session")
    }

    fn conflict(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::CONFLICT, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<SynthesisError> for ApiError {
    fn from(e: SynthesisError) -> Self {
        match e {
            SynthesisError::ArityMismatch { .. } => ApiError::unprocessable(e.to_string()),
            _ => ApiError::conflict(e.to_string()),
        }
    }
}

/// A JSON body whose rejections are reported as 422.
pub struct Payload<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Payload<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Payload(v)),
            Err(e) => Err(ApiError::unprocessable(e.body_text())),
        }
    }
}

#[derive(Debug, Default)]
struct Session {
    catalog: Arc<TableCatalog>,
    rows: Vec<InputState>,
    examples: ExampleSet,
    options: SynthOptions,
    last_result: Option<SynthesisResult>,
}

#[derive(Debug, Default, Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Mutex<Session>>>>>,
    options: SynthOptions,
}

impl AppState {
    pub fn new(options: SynthOptions) -> Self {
        AppState {
            sessions: Arc::default(),
            options,
        }
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(ApiError::not_found)
    }
}

/// One uploaded table: a manifest entry with the CSV text inline.
#[derive(Debug, Deserialize)]
pub struct TableUpload {
    #[serde(flatten)]
    pub entry: TableManifestEntry,
    pub csv: String,
}

#[derive(Debug, Deserialize)]
pub struct CatalogUpload {
    pub tables: Vec<TableUpload>,
    #[serde(default)]
    pub stdlib: Option<StdlibOptions>,
}

#[derive(Debug, Deserialize)]
pub struct RowsUpload {
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Deserialize)]
pub struct ExampleUpload {
    pub row_index: usize,
    pub output: String,
}

#[derive(Debug, Default, Deserialize)]
pub struct ApplyRequest {
    #[serde(default)]
    pub rows: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramSummary {
    pub rank: usize,
    pub surface: String,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub row_index: usize,
    pub outputs: Vec<String>,
    pub ambiguous: bool,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResponse {
    /// `complete` when a result is available, `none` otherwise.
    pub status: String,
    pub programs: Vec<ProgramSummary>,
    pub predictions: Vec<Prediction>,
}

fn predictions(p: Vec<RowPrediction>) -> Vec<Prediction> {
    p.into_iter()
        .enumerate()
        .map(|(row_index, p)| Prediction {
            row_index,
            outputs: p.outputs,
            ambiguous: p.ambiguous,
            failed: p.failed,
        })
        .collect()
}

fn response(session: &Session) -> SynthesisResponse {
    match &session.last_result {
        None => SynthesisResponse {
            status: "none".into(),
            programs: Vec::new(),
            predictions: Vec::new(),
        },
        Some(r) => SynthesisResponse {
            status: "complete".into(),
            programs: r
                .ranked
                .iter()
                .enumerate()
                .map(|(i, p)| ProgramSummary {
                    rank: i + 1,
                    surface: p.program.to_string(),
                    score: p.score,
                })
                .collect(),
            predictions: predictions(apply(r, &session.rows)),
        },
    }
}

fn states(rows: Vec<Vec<String>>) -> Result<Vec<InputState>, ApiError> {
    let rows: Vec<InputState> = rows.into_iter().map(InputState::new).collect();
    if let Some(first) = rows.first() {
        if let Some(i) = rows.iter().position(|r| r.arity() != first.arity()) {
            return Err(ApiError::unprocessable(format!(
                "row {i} has {} cells, expected {}",
                rows[i].arity(),
                first.arity()
            )));
        }
    }
    Ok(rows)
}

/// The service routes over a fresh session store.
pub fn router(options: SynthOptions) -> Router {
    Router::new()
        .route("/api/session", post(create_session))
        .route("/api/session/{id}/catalog", put(put_catalog))
        .route("/api/session/{id}/rows", put(put_rows))
        .route("/api/session/{id}/examples", post(post_example))
        .route("/api/session/{id}/synthesize", post(post_synthesize))
        .route("/api/session/{id}/result", get(get_result))
        .route("/api/session/{id}/apply", post(post_apply))
        .route("/api/session/{id}/program", get(get_program))
        .with_state(AppState::new(options))
}

async fn create_session(State(app): State<AppState>) -> impl IntoResponse {
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session {
        options: app.options,
        ..Session::default()
    };
    app.sessions
        .write()
        .await
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    (StatusCode::CREATED, Json(json!({ "id": id })))
}

async fn put_catalog(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Payload(upload): Payload<CatalogUpload>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let session = app.session(&id).await?;
    let mut catalog = TableCatalog::new();
    let bad = |e: semfill::error::StoreError| ApiError::unprocessable(e.to_string());
    for t in &upload.tables {
        catalog
            .insert(load_table(&t.csv, &t.entry).map_err(bad)?)
            .map_err(bad)?;
    }
    if let Some(opts) = &upload.stdlib {
        catalog.extend(stdlib_catalog(opts)).map_err(bad)?;
    }
    let ids: Vec<String> = catalog
        .tables()
        .iter()
        .map(|t| t.id().to_string())
        .collect();
    let mut s = session.lock().await;
    s.catalog = Arc::new(catalog);
    s.last_result = None;
    Ok(Json(json!({ "tables": ids })))
}

async fn put_rows(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Payload(upload): Payload<RowsUpload>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let session = app.session(&id).await?;
    let rows = states(upload.rows)?;
    let mut s = session.lock().await;
    if let (Some(a), Some(r)) = (s.examples.arity(), rows.first()) {
        if a != r.arity() {
            return Err(ApiError::unprocessable(format!(
                "rows have {} cells, examples have {a}",
                r.arity()
            )));
        }
    }
    s.rows = rows;
    Ok(Json(json!({ "rows": s.rows.len() })))
}

async fn post_example(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Payload(upload): Payload<ExampleUpload>,
) -> Result<impl IntoResponse, ApiError> {
    let session = app.session(&id).await?;
    let mut s = session.lock().await;
    let input = s.rows.get(upload.row_index).cloned().ok_or_else(|| {
        ApiError::unprocessable(format!(
            "row_index {} out of range for {} rows",
            upload.row_index,
            s.rows.len()
        ))
    })?;
    let mut examples = s.examples.clone();
    examples.push(input, upload.output)?;
    s.examples = examples;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "examples": s.examples.len() })),
    ))
}

async fn post_synthesize(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SynthesisResponse>, ApiError> {
    let session = app.session(&id).await?;
    let mut s = session.lock().await;
    if s.examples.is_empty() {
        return Err(ApiError::conflict(
            "no examples given; post at least one example before synthesizing",
        ));
    }
    let (examples, catalog, options) = (s.examples.clone(), s.catalog.clone(), s.options);
    let result = tokio::task::spawn_blocking(move || synthesize(&examples, &catalog, &options))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    match result {
        Ok(r) => {
            s.last_result = Some(r);
            Ok(Json(response(&s)))
        }
        Err(e) => {
            s.last_result = None;
            Err(e.into())
        }
    }
}

async fn get_result(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SynthesisResponse>, ApiError> {
    let session = app.session(&id).await?;
    let s = session.lock().await;
    Ok(Json(response(&s)))
}

async fn post_apply(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: axum::body::Bytes,
) -> Result<Json<serde_json::Value>, ApiError> {
    let session = app.session(&id).await?;
    let body: ApplyRequest = if body.iter().all(u8::is_ascii_whitespace) {
        ApplyRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::unprocessable(e.to_string()))?
    };
    let s = session.lock().await;
    let r = s
        .last_result
        .as_ref()
        .ok_or_else(|| ApiError::conflict("nothing synthesized yet"))?;
    let rows = match body.rows {
        Some(rows) => states(rows)?,
        None => s.rows.clone(),
    };
    Ok(Json(json!({ "predictions": predictions(apply(r, &rows)) })))
}

async fn get_program(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let session = app.session(&id).await?;
    let s = session.lock().await;
    let r = s
        .last_result
        .as_ref()
        .ok_or_else(|| ApiError::conflict("nothing synthesized yet"))?;
    Ok((
        [(header::CONTENT_TYPE, "application/json")],
        ProgramFile::from_result(r).to_json(),
    )
        .into_response())
}
