//! HTTP service for the manual review pass: lists items, serves images,
//! overlays and selection reports, and records accept/exclude decisions in
//! the manifest.

pub mod render;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{Any, CorsLayer};

use crate::autopoint::PointSet;
use crate::dataset::{counts, Decision, ImageRecord, Manifest, Outcome};
use crate::error::{Error, Result};
use crate::httpserver::BackgroundServer;
use crate::imageio;
use crate::kernels::thermal_jpg_to_gray;
use crate::pipeline::{read_report, PipelineConfig};
use crate::radiometric::{calibrate, load_tiff};
use render::{boundary_overlay, gray_to_rgb, render_jet, BOUNDARY_ON_RGB, BOUNDARY_ON_TIFF};

pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const MAX_PAGE_SIZE: usize = 1000;

/// Rendered PNGs keyed by (item id, view, source path).
type PngCache = HashMap<(String, String, PathBuf), Arc<Vec<u8>>>;

/// Shared service state. Readers take the current manifest snapshot; all
/// writes go through `writer` one at a time and then publish a new snapshot.
pub struct ReviewState {
    manifest_path: PathBuf,
    snapshot: RwLock<Arc<Manifest>>,
    writer: tokio::sync::Mutex<()>,
    config: PipelineConfig,
    images: Mutex<PngCache>,
}

impl ReviewState {
    pub fn open(manifest_path: &Path) -> Result<Self> {
        let manifest = Manifest::load(manifest_path)?;
        let config = serde_json::from_value(manifest.config_snapshot.clone()).unwrap_or_default();
        Ok(Self {
            manifest_path: manifest_path.to_path_buf(),
            snapshot: RwLock::new(Arc::new(manifest)),
            writer: tokio::sync::Mutex::new(()),
            config,
            images: Mutex::new(HashMap::new()),
        })
    }

    pub fn manifest(&self) -> Arc<Manifest> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    /// Applies a decision, persists the manifest, then publishes it.
    pub async fn decide(&self, id: &str, body: &DecisionBody) -> std::result::Result<ImageRecord, ApiError> {
        let _guard = self.writer.lock().await;
        let mut next = (*self.manifest()).clone();
        let record = next.get_mut(id).ok_or_else(|| ApiError::not_found(id))?;
        if let Some(k) = body.chosen_override {
            if record.proposal_paths.len() <= k {
                return Err(ApiError::new(StatusCode::CONFLICT, format!("{id} has no proposal {k}")));
            }
        }
        record.set_decision(body.decision).map_err(|e| ApiError::new(StatusCode::CONFLICT, e.to_string()))?;
        if let Some(k) = body.chosen_override {
            record.mask_path = Some(record.proposal_paths[k].clone());
            record.chosen = Some(k);
        }
        if let Some(reason) = &body.reason {
            record.reason = Some(reason.clone());
        }
        let updated = record.clone();
        let path = self.manifest_path.clone();
        let to_save = next.clone();
        tokio::task::spawn_blocking(move || to_save.save(&path))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))?
            .map_err(|e| ApiError::internal(e.to_string()))?;
        *self.snapshot.write().expect("snapshot lock") = Arc::new(next);
        Ok(updated)
    }

    fn cached_png(&self, key: (String, String, PathBuf), render: impl FnOnce() -> Result<Vec<u8>>) -> Result<Arc<Vec<u8>>> {
        if let Some(hit) = self.images.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let png = Arc::new(render()?);
        self.images.lock().expect("cache lock").insert(key, png.clone());
        Ok(png)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no item {id:?}"))
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemSummary {
    pub id: String,
    pub burn_location: String,
    pub decision: Decision,
    pub outcome: Option<Outcome>,
    pub chosen: Option<usize>,
}

impl From<&ImageRecord> for ItemSummary {
    fn from(r: &ImageRecord) -> Self {
        Self {
            id: r.id.clone(),
            burn_location: r.burn_location.clone(),
            decision: r.decision,
            outcome: r.outcome,
            chosen: r.chosen,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPage {
    pub items: Vec<ItemSummary>,
    pub page: usize,
    pub per_page: usize,
    pub total: usize,
    pub pages: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionBody {
    pub decision: Decision,
    #[serde(default)]
    pub chosen_override: Option<usize>,
    #[serde(default)]
    pub reason: Option<String>,
}

async fn list_items(State(st): State<Arc<ReviewState>>, Query(q): Query<HashMap<String, String>>) -> ApiResult<Json<ItemPage>> {
    let mut status = None;
    let mut location = None;
    let mut page = 1usize;
    let mut per_page = DEFAULT_PAGE_SIZE;
    for (k, v) in &q {
        match k.as_str() {
            "status" if !v.is_empty() => status = Some(v.parse::<Decision>().map_err(|e| ApiError::bad_request(e.to_string()))?),
            "status" => {}
            "location" if !v.is_empty() => location = Some(v.clone()),
            "location" => {}
            "page" => {
                page = v.parse().ok().filter(|p| *p >= 1).ok_or_else(|| ApiError::bad_request(format!("bad page {v:?}")))?
            }
            "per_page" => {
                per_page = v
                    .parse()
                    .ok()
                    .filter(|p| (1..=MAX_PAGE_SIZE).contains(p))
                    .ok_or_else(|| ApiError::bad_request(format!("bad per_page {v:?}")))?
            }
            other => return Err(ApiError::bad_request(format!("unknown query parameter {other:?}"))),
        }
    }
    let manifest = st.manifest();
    let matching: Vec<&ImageRecord> = manifest
        .records
        .iter()
        .filter(|r| status.is_none_or(|s| r.decision == s))
        .filter(|r| location.as_ref().is_none_or(|l| &r.burn_location == l))
        .collect();
    let total = matching.len();
    let items = matching
        .iter()
        .skip((page - 1) * per_page)
        .take(per_page)
        .map(|r| ItemSummary::from(*r))
        .collect();
    Ok(Json(ItemPage {
        items,
        page,
        per_page,
        total,
        pages: total.div_ceil(per_page),
    }))
}

fn image_urls(id: &str, proposals: usize) -> Value {
    let base = format!("/items/{id}");
    let overlay = |which: &str| json!({ "rgb": format!("{base}/overlays/{which}/rgb"), "tiff": format!("{base}/overlays/{which}/tiff") });
    json!({
        "rgb": format!("{base}/images/rgb"),
        "thermal": format!("{base}/images/thermal"),
        "tiff": format!("{base}/images/tiff"),
        "proposals": (0..proposals).map(|k| overlay(&k.to_string())).collect::<Vec<_>>(),
        "chosen": overlay("chosen"),
    })
}

fn get_record(st: &ReviewState, id: &str) -> ApiResult<ImageRecord> {
    st.manifest().get(id).cloned().ok_or_else(|| ApiError::not_found(id))
}

fn require_processed(r: &ImageRecord) -> ApiResult<()> {
    if r.outcome.is_none() {
        return Err(ApiError::new(StatusCode::CONFLICT, format!("{} not yet processed", r.id)));
    }
    Ok(())
}

async fn get_item(State(st): State<Arc<ReviewState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let r = get_record(&st, &id)?;
    require_processed(&r)?;
    let report = match &r.selection_report_path {
        Some(p) => serde_json::to_value(read_report(p)?).map_err(Error::from)?,
        None => Value::Null,
    };
    let points = match (&r.points_path, r.outcome) {
        (Some(p), Some(Outcome::Selected)) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let set = PointSet::from_json(&text)?;
            json!({ "positives": set.positives, "negatives": set.negatives })
        }
        _ => json!({ "positives": [], "negatives": [] }),
    };
    Ok(Json(json!({
        "id": r.id,
        "burn_location": r.burn_location,
        "decision": r.decision,
        "reason": r.reason,
        "outcome": r.outcome,
        "chosen": r.chosen,
        "images": image_urls(&r.id, r.proposal_paths.len()),
        "report": report,
        "points": points,
    })))
}

fn png_response(bytes: Arc<Vec<u8>>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes.as_ref().clone()).into_response()
}

fn encode_rgb(img: &image::RgbImage) -> Result<Vec<u8>> {
    imageio::encode_rgb_png(img)
}

fn load_rgb_any(path: &Path) -> Result<image::RgbImage> {
    let img = image::open(path).map_err(|e| Error::Image(format!("{}: {e}", path.display())))?;
    Ok(img.to_rgb8())
}

fn tiff_render(st: &ReviewState, r: &ImageRecord) -> Result<image::RgbImage> {
    let cal = st.config.calibration;
    let grid = calibrate(&load_tiff(&r.tiff_path, &st.config.tiff)?, &cal);
    Ok(render_jet(&grid, cal.clip_min, cal.clip_max))
}

fn base_image(st: &ReviewState, r: &ImageRecord, kind: &str) -> ApiResult<image::RgbImage> {
    Ok(match kind {
        "rgb" => load_rgb_any(&r.rgb_path)?,
        "thermal" => {
            let img = image::open(&r.thermal_path).map_err(|e| Error::Image(format!("{}: {e}", r.thermal_path.display())))?;
            match thermal_jpg_to_gray(&img) {
                Ok(g) => gray_to_rgb(&g),
                Err(_) => img.to_rgb8(),
            }
        }
        "tiff" => tiff_render(st, r)?,
        other => return Err(ApiError::not_found(&format!("{}/images/{other}", r.id))),
    })
}

async fn get_image(State(st): State<Arc<ReviewState>>, UrlPath((id, kind)): UrlPath<(String, String)>) -> ApiResult<Response> {
    let r = get_record(&st, &id)?;
    let key = (id.clone(), format!("image:{kind}"), r.tiff_path.clone());
    let st2 = st.clone();
    let bytes = tokio::task::spawn_blocking(move || -> ApiResult<Arc<Vec<u8>>> {
        let img = base_image(&st2, &r, &kind)?;
        Ok(st2.cached_png(key, || encode_rgb(&img))?)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(png_response(bytes))
}

async fn get_overlay(
    State(st): State<Arc<ReviewState>>,
    UrlPath((id, which, base)): UrlPath<(String, String, String)>,
) -> ApiResult<Response> {
    let r = get_record(&st, &id)?;
    require_processed(&r)?;
    let mask_path = match which.as_str() {
        "chosen" => r.mask_path.clone(),
        k => k.parse::<usize>().ok().and_then(|k| r.proposal_paths.get(k).cloned()),
    }
    .ok_or_else(|| ApiError::not_found(&format!("{id}/overlays/{which}")))?;
    let color = match base.as_str() {
        "rgb" => BOUNDARY_ON_RGB,
        "tiff" => BOUNDARY_ON_TIFF,
        other => return Err(ApiError::not_found(&format!("{id}/overlays/{which}/{other}"))),
    };
    let key = (id.clone(), format!("overlay:{base}"), mask_path.clone());
    let st2 = st.clone();
    let bytes = tokio::task::spawn_blocking(move || -> ApiResult<Arc<Vec<u8>>> {
        let render = || -> Result<Vec<u8>> {
            let mask = imageio::read_mask(&mask_path)?;
            let under = match base.as_str() {
                "rgb" => load_rgb_any(&r.rgb_path)?,
                _ => tiff_render(&st2, &r)?,
            };
            encode_rgb(&boundary_overlay(&under, &mask, color))
        };
        Ok(st2.cached_png(key, render)?)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(png_response(bytes))
}

async fn post_decision(State(st): State<Arc<ReviewState>>, UrlPath(id): UrlPath<String>, body: axum::body::Bytes) -> ApiResult<Json<ImageRecord>> {
    if st.manifest().get(&id).is_none() {
        return Err(ApiError::not_found(&id));
    }
    let body: DecisionBody = serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    if body.chosen_override.is_some_and(|k| k > 2) {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "chosen_override must be 0, 1 or 2"));
    }
    Ok(Json(st.decide(&id, &body).await?))
}

async fn get_counts(State(st): State<Arc<ReviewState>>) -> Json<Value> {
    Json(serde_json::to_value(counts(&st.manifest())).expect("counts serialize"))
}

pub fn router(state: Arc<ReviewState>) -> Router {
    let cors = CorsLayer::new().allow_origin(Any).allow_methods(Any).allow_headers(Any);
    Router::new()
        .route("/items", get(list_items))
        .route("/items/{id}", get(get_item))
        .route("/items/{id}/images/{kind}", get(get_image))
        .route("/items/{id}/overlays/{which}/{base}", get(get_overlay))
        .route("/items/{id}/decision", post(post_decision))
        .route("/counts", get(get_counts))
        .layer(cors)
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(manifest_path: &Path, addr: SocketAddr) -> Result<()> {
    let state = Arc::new(ReviewState::open(manifest_path)?);
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::Network(format!("bind {addr}: {e}")))?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::Network(e.to_string()))
}

/// The review service on a background thread, for tests and embedding.
pub struct ReviewServer {
    inner: BackgroundServer,
}

impl ReviewServer {
    pub fn spawn(manifest_path: &Path, addr: SocketAddr) -> Result<Self> {
        let state = Arc::new(ReviewState::open(manifest_path)?);
        Ok(Self {
            inner: BackgroundServer::spawn(router(state), addr)?,
        })
    }

    pub fn base_url(&self) -> String {
        self.inner.base_url()
    }
}
