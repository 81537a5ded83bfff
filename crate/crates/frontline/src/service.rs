//! Stateless HTTP front end. Every response is a pure function of the
//! request; the only shared state is the content-addressed tile cache and
//! the bounded render queue.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use dashmap::DashMap;
use merodyn::centers::{enumerate_centers, to_record, VirtualCenter};
use merodyn::koenigs::trace_s_star;
use merodyn::render::{
    pyramid_overlays, render_tile_with, render_with_workers, OverlayData, RenderSpec, TileKey,
};
use merodyn::{inversion, wire, C64};
use serde::Serialize;
use sha2::{Digest, Sha256};
use tokio::sync::Semaphore;

use crate::config::{self, CentersJob, ConfigError, PlaneKind, SStarJob, Settings};
use crate::report::point_report;

/// Render jobs admitted at once (running plus waiting).
pub const DEFAULT_QUEUE: usize = 256;
/// Largest single image served by `/render`.
pub const MAX_IMAGE_PX: u32 = 1024;
const RETRY_AFTER_SECS: &str = "2";

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// `ρ` values whose default parameter pyramids are served without a query.
    pub presets: Vec<C64>,
    pub queue: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            presets: vec![C64::new(2.0 / 3.0, 0.0), C64::new(-2.0 / 3.0, 0.0)],
            queue: DEFAULT_QUEUE,
            cache_dir: None,
        }
    }
}

type TileCacheKey = (String, u32, u64, u64);

struct AppState {
    presets: Vec<Preset>,
    queue: Arc<Semaphore>,
    tiles: DashMap<TileCacheKey, Arc<Vec<u8>>>,
    overlays: DashMap<String, Arc<OverlayData>>,
    cache_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
struct Preset {
    id: usize,
    #[serde(with = "merodyn::wire::complex")]
    rho: C64,
    digest: String,
    spec: RenderSpec,
}

pub fn router(cfg: ServiceConfig) -> Router {
    let presets = cfg
        .presets
        .iter()
        .enumerate()
        .filter_map(|(id, &rho)| {
            let s = Settings::from_pairs([("rho", wire::format_complex(rho).as_str())]);
            let spec = config::tile_base(&s, PlaneKind::Parameter).ok()?;
            Some(Preset {
                id,
                rho,
                digest: spec.digest(),
                spec,
            })
        })
        .collect();
    let state = Arc::new(AppState {
        presets,
        queue: Arc::new(Semaphore::new(cfg.queue)),
        tiles: DashMap::new(),
        overlays: DashMap::new(),
        cache_dir: cfg.cache_dir,
    });
    Router::new()
        .route("/tiles/{plane}/{digest}/{z}/{x}/{file}", get(tile))
        .route("/render/{file}", get(render_image))
        .route("/classify", get(classify))
        .route("/centers", get(centers))
        .route("/sstar", get(sstar))
        .route("/invert", get(invert))
        .route("/spec/{plane}", get(spec_digest))
        .route("/presets", get(list_presets))
        .with_state(state)
}

#[derive(Debug)]
enum ApiError {
    Config(ConfigError),
    NotFound(String),
    Busy,
    Internal(String),
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        ApiError::Config(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ApiError::Config(ConfigError::Malformed(m)) => (StatusCode::BAD_REQUEST, m),
            ApiError::Config(e @ ConfigError::Singular(_)) => {
                (StatusCode::UNPROCESSABLE_ENTITY, e.to_string())
            }
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m),
            ApiError::Busy => (StatusCode::SERVICE_UNAVAILABLE, "render queue full".into()),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        let mut resp = (status, axum::Json(serde_json::json!({ "error": msg }))).into_response();
        if status == StatusCode::SERVICE_UNAVAILABLE {
            resp.headers_mut().insert(
                header::RETRY_AFTER,
                HeaderValue::from_static(RETRY_AFTER_SECS),
            );
        }
        resp
    }
}

type ApiResult = std::result::Result<Response, ApiError>;
type Params = Query<Vec<(String, String)>>;

fn settings(q: &[(String, String)]) -> Settings {
    Settings::from_pairs(q.iter().map(|(k, v)| (k.as_str(), v.as_str())))
}

/// Body with a content hash ETag; answers `304` to a matching `If-None-Match`.
fn cacheable(req: &HeaderMap, body: Vec<u8>, content_type: &'static str) -> Response {
    let etag = format!("\"{}\"", &hex::encode(Sha256::digest(&body))[..32]);
    let fresh = req
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v == etag);
    let headers = [
        (header::CONTENT_TYPE, content_type.to_string()),
        (header::ETAG, etag),
        (header::CACHE_CONTROL, "public, max-age=86400".to_string()),
    ];
    if fresh {
        (StatusCode::NOT_MODIFIED, headers).into_response()
    } else {
        (headers, body).into_response()
    }
}

fn json(req: &HeaderMap, value: &impl Serialize) -> ApiResult {
    let body = serde_json::to_vec(value).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(cacheable(req, body, "application/json"))
}

/// Runs `job` on the blocking pool once a queue slot is free; a full queue
/// is reported immediately rather than waited on.
async fn compute<T, F>(state: &AppState, job: F) -> std::result::Result<T, ApiError>
where
    F: FnOnce() -> std::result::Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    let permit = state
        .queue
        .clone()
        .try_acquire_owned()
        .map_err(|_| ApiError::Busy)?;
    let out = tokio::task::spawn_blocking(move || {
        let _permit = permit;
        job()
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;
    out
}

fn plane_kind(s: &str) -> std::result::Result<PlaneKind, ApiError> {
    Ok(s.parse::<PlaneKind>()?)
}

fn parse_index<T: std::str::FromStr>(name: &str, s: &str) -> std::result::Result<T, ApiError> {
    s.parse().map_err(|_| {
        ApiError::Config(ConfigError::Malformed(format!(
            "{name}: cannot parse {s:?}"
        )))
    })
}

async fn tile(
    State(state): State<Arc<AppState>>,
    Path((plane, digest, z, x, file)): Path<(String, String, String, String, String)>,
    Query(q): Params,
    headers: HeaderMap,
) -> ApiResult {
    let kind = plane_kind(&plane)?;
    let z: u32 = parse_index("z", &z)?;
    let x: u64 = parse_index("x", &x)?;
    let y: u64 = parse_index("y", file.strip_suffix(".png").unwrap_or(&file))?;
    let base = if q.is_empty() {
        match kind {
            PlaneKind::Parameter => state
                .presets
                .iter()
                .find(|p| p.digest == digest)
                .map(|p| p.spec.clone()),
            PlaneKind::Dynamic => None,
        }
        .ok_or_else(|| ApiError::NotFound(format!("no preset with digest {digest}")))?
    } else {
        config::tile_base(&settings(&q), kind)?
    };
    if base.digest() != digest {
        return Err(ApiError::NotFound(
            "query does not match the spec digest".into(),
        ));
    }
    let key = TileKey::new(&base, z, x, y);
    let cache_key = (digest.clone(), z, x, y);
    if let Some(png) = state.tiles.get(&cache_key) {
        return Ok(cacheable(&headers, png.as_ref().clone(), "image/png"));
    }
    let disk = state.cache_dir.as_ref().map(|d| {
        d.join(&digest)
            .join(z.to_string())
            .join(x.to_string())
            .join(format!("{y}.png"))
    });
    if let Some(path) = &disk {
        if let Ok(png) = tokio::fs::read(path).await {
            state.tiles.insert(cache_key, Arc::new(png.clone()));
            return Ok(cacheable(&headers, png, "image/png"));
        }
    }
    let st = state.clone();
    let png = compute(&state, move || {
        let overlays = st
            .overlays
            .entry(digest)
            .or_insert_with(|| Arc::new(pyramid_overlays(&base)))
            .clone();
        let tile = render_tile_with(&key, &base, &overlays, None)
            .map_err(|e| ApiError::Config(ConfigError::Malformed(e.to_string())))?;
        tile.encode_png()
            .map_err(|e| ApiError::Internal(e.to_string()))
    })
    .await?;
    if let Some(path) = disk {
        // best effort; a failed write only costs a re-render
        if let Some(dir) = path.parent() {
            let _ = tokio::fs::create_dir_all(dir).await;
        }
        let _ = tokio::fs::write(&path, &png).await;
    }
    // identical content under identical keys, so last writer wins harmlessly
    state.tiles.insert(cache_key, Arc::new(png.clone()));
    Ok(cacheable(&headers, png, "image/png"))
}

async fn render_image(
    State(state): State<Arc<AppState>>,
    Path(file): Path<String>,
    Query(q): Params,
    headers: HeaderMap,
) -> ApiResult {
    let kind = plane_kind(file.strip_suffix(".png").unwrap_or(&file))?;
    let s = settings(&q);
    let mut s_px = s.clone();
    if s.get("px").is_none() {
        s_px.set("px", "256");
    }
    let spec = config::render_spec(&s_px, kind)?;
    if spec.width_px > MAX_IMAGE_PX || spec.height_px > MAX_IMAGE_PX {
        return Err(ConfigError::Malformed(format!(
            "images above {MAX_IMAGE_PX} px are served as tiles"
        ))
        .into());
    }
    let png = compute(&state, move || {
        let r = render_with_workers(&spec, None).map_err(|e| ApiError::Internal(e.to_string()))?;
        r.image
            .encode_png()
            .map_err(|e| ApiError::Internal(e.to_string()))
    })
    .await?;
    Ok(cacheable(&headers, png, "image/png"))
}

async fn classify(
    State(state): State<Arc<AppState>>,
    Query(q): Params,
    headers: HeaderMap,
) -> ApiResult {
    let s = settings(&q);
    let rho = s.rho()?;
    let lambda = s.lambda(rho)?;
    let budget = s.budget()?;
    let report = compute(&state, move || Ok(point_report(rho, lambda, &budget)?)).await?;
    json(&headers, &report)
}

#[derive(Serialize)]
struct CentersBody {
    digest: String,
    centers: Vec<VirtualCenter>,
    records: Vec<String>,
    failures: usize,
}

async fn centers(
    State(state): State<Arc<AppState>>,
    Query(q): Params,
    headers: HeaderMap,
) -> ApiResult {
    let job = CentersJob::from_settings(&settings(&q))?;
    let body = compute(&state, move || {
        let found = enumerate_centers(job.rho, &job.window, &job.options());
        Ok(CentersBody {
            digest: job.digest(),
            records: found.centers.iter().map(to_record).collect(),
            centers: found.centers,
            failures: found.failures.len(),
        })
    })
    .await?;
    json(&headers, &body)
}

#[derive(Serialize)]
struct SStarBody {
    #[serde(with = "merodyn::wire::complex")]
    rho: C64,
    #[serde(with = "merodyn::wire::vec_complex")]
    points: Vec<C64>,
}

async fn sstar(
    State(state): State<Arc<AppState>>,
    Query(q): Params,
    headers: HeaderMap,
) -> ApiResult {
    let job = SStarJob::from_settings(&settings(&q))?;
    let body = compute(&state, move || {
        let points = trace_s_star(job.rho, job.n).map_err(|e| ApiError::Internal(e.to_string()))?;
        Ok(SStarBody {
            rho: job.rho,
            points,
        })
    })
    .await?;
    json(&headers, &body)
}

#[derive(Serialize)]
struct InvertBody {
    #[serde(with = "merodyn::wire::complex")]
    rho: C64,
    #[serde(with = "merodyn::wire::complex")]
    lambda: C64,
    #[serde(with = "merodyn::wire::complex")]
    image: C64,
}

async fn invert(Query(q): Params, headers: HeaderMap) -> ApiResult {
    let s = settings(&q);
    let rho = s.rho()?;
    let lambda = s.lambda(rho)?;
    let image = inversion(rho, lambda).map_err(|e| ConfigError::Singular(e.to_string()))?;
    json(&headers, &InvertBody { rho, lambda, image })
}

#[derive(Serialize)]
struct SpecBody {
    digest: String,
    spec: RenderSpec,
}

/// Digest of the tile pyramid a query describes, for building tile URLs.
async fn spec_digest(Path(plane): Path<String>, Query(q): Params, headers: HeaderMap) -> ApiResult {
    let spec = config::tile_base(&settings(&q), plane_kind(&plane)?)?;
    json(
        &headers,
        &SpecBody {
            digest: spec.digest(),
            spec,
        },
    )
}

async fn list_presets(State(state): State<Arc<AppState>>, headers: HeaderMap) -> ApiResult {
    json(&headers, &state.presets)
}
