//! HTTP facade over the search engine: ranked search under each mode, click
//! recording that feeds history re-ranking, and user profile storage.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use mcsa_core::{ClickLog, Engine, Error, Gender, Hit, Mode, UserProfile};

pub const DEFAULT_K: usize = 10;

/// Profiles keyed by user id, optionally mirrored to a JSON array file.
#[derive(Debug, Default)]
pub struct ProfileStore {
    profiles: BTreeMap<String, UserProfile>,
    path: Option<PathBuf>,
}

impl ProfileStore {
    pub fn in_memory(profiles: impl IntoIterator<Item = UserProfile>) -> Self {
        Self {
            profiles: profiles.into_iter().map(|p| (p.user_id.clone(), p)).collect(),
            path: None,
        }
    }

    /// Loads `path` if it exists; later writes are saved back to it.
    pub fn open(path: impl Into<PathBuf>) -> mcsa_core::Result<Self> {
        let path = path.into();
        let profiles = if path.exists() {
            mcsa_core::personalization::load_profiles(&path)?
        } else {
            Vec::new()
        };
        Ok(Self {
            path: Some(path),
            ..Self::in_memory(profiles)
        })
    }

    pub fn get(&self, user_id: &str) -> Option<&UserProfile> {
        self.profiles.get(user_id)
    }

    pub fn put(&mut self, profile: UserProfile) -> mcsa_core::Result<()> {
        let previous = self.profiles.insert(profile.user_id.clone(), profile.clone());
        if let Err(e) = self.persist() {
            match previous {
                Some(p) => self.profiles.insert(p.user_id.clone(), p),
                None => self.profiles.remove(&profile.user_id),
            };
            return Err(e);
        }
        Ok(())
    }

    fn persist(&self) -> mcsa_core::Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let all: Vec<&UserProfile> = self.profiles.values().collect();
        let text = serde_json::to_string_pretty(&all).map_err(std::io::Error::from)?;
        let tmp = path.with_extension("tmp");
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.sync_data()?;
            fs::rename(&tmp, path)
        };
        write().map_err(|e| Error::io(path, e))
    }
}

pub struct AppState {
    pub engine: Engine,
    pub clicks: RwLock<ClickLog>,
    pub profiles: RwLock<ProfileStore>,
}

impl AppState {
    pub fn new(engine: Engine, clicks: ClickLog, profiles: ProfileStore) -> Self {
        Self {
            engine,
            clicks: RwLock::new(clicks),
            profiles: RwLock::new(profiles),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SearchResponse {
    pub query: String,
    pub mode: Mode,
    pub results: Vec<Hit>,
}

#[derive(Debug, Deserialize)]
pub struct SearchParams {
    q: Option<String>,
    user: Option<String>,
    mode: Option<String>,
    k: Option<usize>,
}

#[derive(Debug, Deserialize)]
pub struct ClickRequest {
    pub user_id: String,
    pub doc_id: String,
}

#[derive(Debug, Deserialize)]
struct ProfileBody {
    #[serde(default)]
    occupation: String,
    #[serde(default)]
    hobbies: Vec<String>,
    gender: Option<String>,
}

/// A JSON `{"error": ...}` response with a status code.
#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

fn internal(e: impl std::error::Error) -> ApiError {
    let mut msg = e.to_string();
    let mut source = e.source();
    while let Some(s) = source {
        msg = format!("{msg}: {s}");
        source = s.source();
    }
    ApiError(StatusCode::INTERNAL_SERVER_ERROR, msg)
}

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/search", get(search))
        .route("/click", post(click))
        .route("/profile/{user_id}", get(get_profile).put(put_profile))
        .route("/healthz", get(|| async { "ok" }))
        .with_state(state)
}

/// [`router`] plus static files from `dir` for every other path.
pub fn router_with_static(state: Shared, dir: impl AsRef<Path>) -> Router {
    router(state).fallback_service(ServeDir::new(dir.as_ref()))
}

async fn search(
    State(state): State<Shared>,
    Query(params): Query<SearchParams>,
) -> Result<Json<SearchResponse>, ApiError> {
    let query = params.q.unwrap_or_default();
    if query.trim().is_empty() {
        return Err(bad_request("query is empty"));
    }
    let mode = match params.mode.as_deref() {
        None => Mode::Comprehensive,
        Some(m) => m.parse().map_err(|e| ApiError(StatusCode::NOT_FOUND, e))?,
    };
    let k = params.k.unwrap_or(DEFAULT_K);
    if k == 0 {
        return Err(bad_request("k must be at least 1"));
    }

    let profile = params.user.as_deref().map(|u| {
        state
            .profiles
            .read()
            .expect("profile lock")
            .get(u)
            .cloned()
            .unwrap_or_else(|| UserProfile::anonymous(u))
    });
    let clicks = state.clicks.read().expect("click lock");
    let mut hits = match state.engine.search(&query, profile.as_ref(), &clicks, mode) {
        Ok(h) => h,
        Err(Error::EmptyQuery) => return Err(bad_request(Error::EmptyQuery.to_string())),
        Err(e) => return Err(internal(e)),
    };
    hits.truncate(k);
    Ok(Json(SearchResponse {
        query,
        mode,
        results: hits,
    }))
}

async fn click(State(state): State<Shared>, Json(req): Json<ClickRequest>) -> Result<StatusCode, ApiError> {
    if state.engine.index().ordinal(&req.doc_id).is_none() {
        return Err(ApiError(
            StatusCode::NOT_FOUND,
            format!("unknown document {:?}", req.doc_id),
        ));
    }
    state
        .clicks
        .write()
        .expect("click lock")
        .record_click(&req.user_id, &req.doc_id)
        .map_err(internal)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn get_profile(
    State(state): State<Shared>,
    UrlPath(user_id): UrlPath<String>,
) -> Result<Json<UserProfile>, ApiError> {
    state
        .profiles
        .read()
        .expect("profile lock")
        .get(&user_id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no profile for {user_id:?}")))
}

async fn put_profile(
    State(state): State<Shared>,
    UrlPath(user_id): UrlPath<String>,
    body: Bytes,
) -> Result<Json<UserProfile>, ApiError> {
    let body: ProfileBody = serde_json::from_slice(&body).map_err(|e| bad_request(e.to_string()))?;
    let gender = match body.gender.as_deref() {
        None => Gender::Unspecified,
        Some(g) => g.parse::<Gender>().map_err(|e| bad_request(e.to_string()))?,
    };
    let profile = UserProfile {
        user_id,
        occupation: body.occupation,
        hobbies: body.hobbies,
        gender,
    };
    state
        .profiles
        .write()
        .expect("profile lock")
        .put(profile.clone())
        .map_err(internal)?;
    Ok(Json(profile))
}

/// Serves `app` on `addr` until Ctrl-C.
pub async fn serve(app: Router, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
