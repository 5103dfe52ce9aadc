//! Local HTTP service backing the viewer.
//!
//! Every handler is a thin wrapper over [`crate::ops`]; the only shared
//! state is the dictionary and the upload limits, both read-only.

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hueshift_core::colorspace::SRgb8;
use hueshift_core::cvd::CvdType;
use hueshift_core::image::FileFormat;
use hueshift_core::naming::{load_dictionary, ColorDictionary};
use hueshift_core::Error;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::ops::{self, Fig9Params, SizeLimit};

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub bind: IpAddr,
    pub port: u16,
    pub static_dir: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub max_width: u32,
    pub max_height: u32,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            static_dir: None,
            dictionary: None,
            max_width: 4096,
            max_height: 4096,
        }
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> hueshift_core::Result<()> {
        if self.max_width == 0 || self.max_height == 0 {
            return Err(Error::Usage("maximum image dimensions must be positive".into()));
        }
        if let Some(dir) = &self.static_dir {
            if !dir.is_dir() {
                return Err(Error::Usage(format!("static asset directory {} does not exist", dir.display())));
            }
        }
        Ok(())
    }

    /// Request body cap: an uncompressed RGBA image at the maximum size plus
    /// header slack.
    fn body_limit(&self) -> usize {
        let pixels = self.max_width as usize * self.max_height as usize;
        pixels.saturating_mul(4).saturating_add(1 << 20)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiErrorCode {
    BadRequest,
    UnsupportedMedia,
    TooLarge,
    Internal,
}

impl ApiErrorCode {
    fn status(self) -> StatusCode {
        match self {
            ApiErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ApiErrorCode::UnsupportedMedia => StatusCode::UNSUPPORTED_MEDIA_TYPE,
            ApiErrorCode::TooLarge => StatusCode::PAYLOAD_TOO_LARGE,
            ApiErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub code: ApiErrorCode,
    pub message: String,
}

impl ApiError {
    fn new(code: ApiErrorCode, message: impl Into<String>) -> Self {
        let message = message.into();
        let message = if message.is_empty() { format!("{code:?}") } else { message };
        Self { code, message }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::UnsupportedFormat(_) => ApiErrorCode::UnsupportedMedia,
            Error::TooLarge { .. } => ApiErrorCode::TooLarge,
            Error::Dictionary(_) | Error::Io(_) => ApiErrorCode::Internal,
            _ => ApiErrorCode::BadRequest,
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::new(ApiErrorCode::BadRequest, r.body_text())
    }
}

impl From<BytesRejection> for ApiError {
    fn from(r: BytesRejection) -> Self {
        let code = if r.status() == StatusCode::PAYLOAD_TOO_LARGE { ApiErrorCode::TooLarge } else { ApiErrorCode::BadRequest };
        ApiError::new(code, r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
struct AppState {
    dictionary: Arc<ColorDictionary>,
    limit: SizeLimit,
}

/// The API routes, plus the static viewer when `static_dir` is set.
pub fn app(cfg: &ServiceConfig) -> hueshift_core::Result<Router> {
    cfg.validate()?;
    let dictionary = match &cfg.dictionary {
        Some(p) => load_dictionary(p)?,
        None => ColorDictionary::builtin(),
    };
    let state = AppState {
        dictionary: Arc::new(dictionary),
        limit: SizeLimit { max_width: cfg.max_width, max_height: cfg.max_height },
    };
    let api = Router::new()
        .route("/api/name", get(name))
        .route("/api/dictionary", get(dictionary_list))
        .route("/api/rotate", post(rotate))
        .route("/api/simulate", post(simulate))
        .route("/api/trajectory", get(trajectory))
        .route("/api/fig9", get(fig9))
        .layer(DefaultBodyLimit::max(cfg.body_limit()))
        .with_state(state);
    Ok(match &cfg.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    })
}

/// Binds and serves until the process is stopped.
pub async fn serve(cfg: ServiceConfig) -> hueshift_core::Result<()> {
    let router = app(&cfg)?;
    let addr = SocketAddr::new(cfg.bind, cfg.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::Usage(format!("cannot bind {addr}: {e}")))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router).await?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct NameQuery {
    r: u8,
    g: u8,
    b: u8,
    k: Option<usize>,
}

async fn name(State(st): State<AppState>, q: Result<Query<NameQuery>, QueryRejection>) -> ApiResult<Json<ops::NameReport>> {
    let Query(q) = q?;
    Ok(Json(ops::name_report(&st.dictionary, SRgb8::new(q.r, q.g, q.b), q.k.unwrap_or(1))?))
}

async fn dictionary_list(State(st): State<AppState>) -> Json<Vec<ops::DictionaryRow>> {
    Json(ops::dictionary_rows(&st.dictionary))
}

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> hueshift_core::Result<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(ApiErrorCode::Internal, e.to_string()))?
        .map_err(ApiError::from)
}

#[derive(Debug, Deserialize)]
struct RotateQuery {
    theta_deg: f64,
}

async fn rotate(
    State(st): State<AppState>,
    q: Result<Query<RotateQuery>, QueryRejection>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Response> {
    let Query(q) = q?;
    let body = body?;
    let out = blocking(move || ops::rotate_encoded(&body, q.theta_deg, FileFormat::Png, st.limit)).await?;
    Ok(png(out))
}

#[derive(Debug, Deserialize)]
struct SimulateQuery {
    cvd: String,
}

async fn simulate(
    State(st): State<AppState>,
    q: Result<Query<SimulateQuery>, QueryRejection>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Response> {
    let Query(q) = q?;
    let cvd: CvdType = q.cvd.parse()?;
    let body = body?;
    let out = blocking(move || ops::simulate_encoded(&body, cvd, FileFormat::Png, st.limit)).await?;
    Ok(png(out))
}

#[derive(Debug, Deserialize)]
struct TrajectoryQuery {
    r: u8,
    g: u8,
    b: u8,
    samples: Option<usize>,
}

async fn trajectory(
    q: Result<Query<TrajectoryQuery>, QueryRejection>,
) -> ApiResult<Json<Vec<hueshift_core::rotation::TrajectoryPoint>>> {
    let Query(q) = q?;
    let c = SRgb8::new(q.r, q.g, q.b);
    Ok(Json(ops::trajectory(c, q.samples.unwrap_or(360))?))
}

#[derive(Debug, Deserialize)]
struct Fig9Query {
    r: Option<u8>,
    g: Option<u8>,
    b: Option<u8>,
    cvd: Option<String>,
    spacing: Option<f64>,
    count: Option<usize>,
    step_deg: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Fig9Response {
    params: Fig9Params,
    curves: Vec<ops::Fig9Curve>,
}

async fn fig9(q: Result<Query<Fig9Query>, QueryRejection>) -> ApiResult<Json<Fig9Response>> {
    let Query(q) = q?;
    let d = Fig9Params::default();
    let params = Fig9Params {
        base: SRgb8::new(q.r.unwrap_or(d.base.r), q.g.unwrap_or(d.base.g), q.b.unwrap_or(d.base.b)),
        cvd: q.cvd.as_deref().map(str::parse).transpose()?.unwrap_or(d.cvd),
        spacing: q.spacing.unwrap_or(d.spacing),
        count: q.count.unwrap_or(d.count),
        step_deg: q.step_deg.unwrap_or(d.step_deg),
    };
    let curves = blocking(move || ops::fig9_curves(&params).and_then(|c| ops::fig9_json_curves(&c))).await?;
    Ok(Json(Fig9Response { params, curves }))
}
