//! HTTP service behind the annotation UI.
//!
//! The recording is loaded once and shared read-only. The membership
//! function is the only mutable state: every accepted `PUT /msf` bumps a
//! revision token (sent as an `ETag`), and writes must quote the current
//! token in `If-Match`, so two analysts editing from the same revision
//! cannot silently overwrite each other.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use eegclean::eval::channel_eog_cc;
use eegclean::io::{load_msf, save_msf, MsfFile};
use eegclean::{msf_normalize, Interval, MembershipFunction, Recording};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;
use tower_http::services::ServeDir;

/// Number of EEG channels proposed for display next to the EOG.
pub const SUGGESTED_CHANNELS: usize = 4;
/// Default number of min/max buckets per channel in a window response.
pub const DEFAULT_POINTS: usize = 2000;
/// Largest accepted bucket count.
pub const MAX_POINTS: usize = 20_000;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Meta {
    pub labels: Vec<String>,
    pub sample_rate: f64,
    pub length: usize,
    pub duration_s: f64,
    pub eog_label: Option<String>,
    pub trigger_label: Option<String>,
    pub trial_bounds: Vec<Interval>,
    /// EEG channels ordered by decreasing |correlation| with the EOG.
    pub suggested_channels: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChannelWindow {
    pub label: String,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// A display window: bucket `i` covers samples
/// `[start + i*step, min(start + (i+1)*step, start + len))`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Window {
    pub start: usize,
    pub len: usize,
    pub step: usize,
    pub channels: Vec<ChannelWindow>,
}

#[derive(Debug, Deserialize)]
pub struct WindowQuery {
    pub start: usize,
    pub len: usize,
    /// Comma-separated EEG labels; the EOG channel is always included.
    #[serde(default)]
    pub channels: Option<String>,
    #[serde(default)]
    pub points: Option<usize>,
}

struct Annotation {
    msf: MsfFile,
    revision: u64,
}

pub struct AppState {
    recording: Recording<f64>,
    meta: Meta,
    msf_path: PathBuf,
    epoch: String,
    annotation: Mutex<Annotation>,
}

impl AppState {
    /// Builds the service state. An existing file at `msf_path` is loaded and
    /// normalised; otherwise annotation starts empty and the file is created
    /// on the first save.
    pub fn new(recording: Recording<f64>, msf_path: impl Into<PathBuf>, max_lag: usize) -> eegclean::Result<Self> {
        let msf_path = msf_path.into();
        let length = recording.len();
        let rate = recording.sample_rate();
        let msf = if msf_path.exists() {
            let file = load_msf(&msf_path)?;
            check_msf(&file, length, rate).map_err(eegclean::Error::Schema)?;
            MsfFile::new(&msf_normalize(&file.msf())?, Some(rate))
        } else {
            MsfFile::new(&MembershipFunction::empty(length), Some(rate))
        };
        let meta = meta_of(&recording, max_lag)?;
        let epoch = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or_default();
        Ok(Self {
            recording,
            meta,
            msf_path,
            epoch: format!("{epoch:x}"),
            annotation: Mutex::new(Annotation { msf, revision: 0 }),
        })
    }

    fn etag(&self, revision: u64) -> String {
        format!("\"{}-{revision}\"", self.epoch)
    }
}

fn meta_of(rec: &Recording<f64>, max_lag: usize) -> eegclean::Result<Meta> {
    let suggested = if rec.eog().is_some() && !rec.eeg_indices().is_empty() {
        let cc = channel_eog_cc(rec, max_lag)?;
        let mut ranked: Vec<(String, f64)> = cc.labels.into_iter().zip(cc.cc.into_iter().map(f64::abs)).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        ranked.into_iter().take(SUGGESTED_CHANNELS).map(|(l, _)| l).collect()
    } else {
        rec.eeg_indices()
            .into_iter()
            .take(SUGGESTED_CHANNELS)
            .map(|i| rec.channel(i).label.clone())
            .collect()
    };
    Ok(Meta {
        labels: rec.labels(),
        sample_rate: rec.sample_rate(),
        length: rec.len(),
        duration_s: rec.len() as f64 / rec.sample_rate(),
        eog_label: rec.eog_index().map(|i| rec.channel(i).label.clone()),
        trigger_label: rec.trigger_index().map(|i| rec.channel(i).label.clone()),
        trial_bounds: rec.trial_bounds().map(<[Interval]>::to_vec).unwrap_or_default(),
        suggested_channels: suggested,
    })
}

fn check_msf(file: &MsfFile, length: usize, rate: f64) -> Result<(), String> {
    if file.length != length {
        return Err(format!("membership function covers {} samples, recording has {length}", file.length));
    }
    if let Some(r) = file.sample_rate {
        if r != rate {
            return Err(format!("membership function is at {r} Hz, recording at {rate} Hz"));
        }
    }
    file.msf().check_range().map_err(|e| e.to_string())
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

/// Min/max decimation of one channel into buckets of `step` samples.
pub fn min_max(samples: &[f64], step: usize) -> (Vec<f64>, Vec<f64>) {
    samples
        .chunks(step.max(1))
        .map(|c| {
            c.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
        })
        .unzip()
}

async fn get_meta(State(state): State<Arc<AppState>>) -> Json<Meta> {
    Json(state.meta.clone())
}

async fn get_window(State(state): State<Arc<AppState>>, Query(q): Query<WindowQuery>) -> Response {
    let rec = &state.recording;
    let end = match q.start.checked_add(q.len) {
        Some(end) if q.len > 0 && end <= rec.len() => end,
        _ => {
            return error(
                StatusCode::BAD_REQUEST,
                format!("window [{}, +{}) is outside [0, {})", q.start, q.len, rec.len()),
            )
        }
    };
    let points = q.points.unwrap_or(DEFAULT_POINTS);
    if points == 0 || points > MAX_POINTS {
        return error(StatusCode::BAD_REQUEST, format!("points must lie in 1..={MAX_POINTS}"));
    }
    let mut indices: Vec<usize> = rec.eog_index().into_iter().collect();
    let requested = q.channels.as_deref().unwrap_or("");
    for label in requested.split(',').map(str::trim).filter(|l| !l.is_empty()) {
        match rec.index_of(label) {
            Some(i) if !indices.contains(&i) => indices.push(i),
            Some(_) => {}
            None => return error(StatusCode::BAD_REQUEST, format!("unknown channel {label:?}")),
        }
    }
    let step = q.len.div_ceil(points);
    let channels = indices
        .into_iter()
        .map(|i| {
            let ch = rec.channel(i);
            let (min, max) = min_max(&ch.samples[q.start..end], step);
            ChannelWindow {
                label: ch.label.clone(),
                min,
                max,
            }
        })
        .collect();
    Json(Window {
        start: q.start,
        len: q.len,
        step,
        channels,
    })
    .into_response()
}

fn msf_response(state: &AppState, annotation: &Annotation, status: StatusCode) -> Response {
    let mut resp = (status, Json(&annotation.msf)).into_response();
    if let Ok(v) = HeaderValue::from_str(&state.etag(annotation.revision)) {
        resp.headers_mut().insert(header::ETAG, v);
    }
    resp
}

async fn get_msf(State(state): State<Arc<AppState>>) -> Response {
    let annotation = state.annotation.lock().await;
    msf_response(&state, &annotation, StatusCode::OK)
}

async fn put_msf(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> Response {
    let Some(token) = headers.get(header::IF_MATCH).and_then(|v| v.to_str().ok()) else {
        return error(StatusCode::PRECONDITION_REQUIRED, "If-Match with the current revision is required");
    };
    let file: MsfFile = match serde_json::from_slice(&body) {
        Ok(f) => f,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("invalid membership function: {e}")),
    };
    if let Err(e) = check_msf(&file, state.recording.len(), state.recording.sample_rate()) {
        return error(StatusCode::BAD_REQUEST, e);
    }
    let normalized = match msf_normalize(&file.msf()) {
        Ok(m) => MsfFile::new(&m, Some(state.recording.sample_rate())),
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };

    let mut annotation = state.annotation.lock().await;
    if token.trim() != state.etag(annotation.revision) {
        return error(StatusCode::CONFLICT, "membership function was changed by another client");
    }
    let path = state.msf_path.clone();
    let to_save = normalized.clone();
    let saved = tokio::task::spawn_blocking(move || save_msf(&to_save, &path)).await;
    match saved {
        Ok(Ok(())) => {}
        Ok(Err(e)) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
    annotation.msf = normalized;
    annotation.revision += 1;
    msf_response(&state, &annotation, StatusCode::OK)
}

const INDEX_HTML: &str = r#"<!doctype html>
<html><head><meta charset="utf-8"><title>eegclean annotation</title></head>
<body>
<h1>eegclean annotation service</h1>
<p>Endpoints: <code>GET /meta</code>, <code>GET /window?start&amp;len&amp;channels</code>,
<code>GET /msf</code>, <code>PUT /msf</code> (with <code>If-Match</code>).</p>
<p>Start the service with <code>--assets &lt;dir&gt;</code> to serve the annotation UI.</p>
</body></html>
"#;

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

/// The service routes; `assets` (if given) is served for all other paths.
pub fn router(state: Arc<AppState>, assets: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/meta", get(get_meta))
        .route("/window", get(get_window))
        .route("/msf", get(get_msf).put(put_msf))
        .with_state(state);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(index)),
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(state: Arc<AppState>, assets: Option<PathBuf>, addr: &str) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("annotation service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, assets.as_deref())).await?;
    Ok(())
}
