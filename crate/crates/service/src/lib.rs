//! Local HTTP/JSON facade over the engine: problem upload, counting,
//! streaming enumeration and selection queries, plus brute-force mirrors of
//! each query under `/problems/{id}/oracle/`.
//!
//! Rationals are written `"p/q"` (integers as `"p/1"`); counts are JSON
//! numbers when they fit in 64 bits and decimal strings otherwise.

pub mod error;
pub mod ndjson;

use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::response::Response;
use axum::routing::{get, post};
use axum::{Json, Router};
use bytes::Bytes;
use lru::LruCache;
use mcilp_core::select::{enumerate_by_distance, fptas_nearest_pseudonorm, nearest_odd_lp, nearest_polyhedral, PseudoResult};
use mcilp_core::{oracle, EnumerationStream, NormSpec, ParetoHandles, PolyhedralNorm, Problem, Rational, TermOrder};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::net::TcpListener;

pub use error::{Result, ServiceError};

/// Problems kept in memory at once.
pub const CACHE_CAPACITY: usize = 64;

pub struct AppState {
    cache: Mutex<LruCache<String, Arc<ParetoHandles>>>,
}

impl AppState {
    pub fn new(capacity: usize) -> Self {
        let capacity = NonZeroUsize::new(capacity).unwrap_or(NonZeroUsize::MIN);
        AppState { cache: Mutex::new(LruCache::new(capacity)) }
    }

    fn lookup(&self, id: &str) -> Result<Arc<ParetoHandles>> {
        let mut cache = self.cache.lock().expect("cache lock");
        cache.get(id).cloned().ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    fn insert(&self, id: String, handles: Arc<ParetoHandles>) {
        self.cache.lock().expect("cache lock").put(id, handles);
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

impl Default for AppState {
    fn default() -> Self {
        AppState::new(CACHE_CAPACITY)
    }
}

pub fn router() -> Router {
    router_with(Arc::default())
}

pub fn router_with(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/problems", post(upload))
        .route("/problems/:id/pareto/count", get(count))
        .route("/problems/:id/pareto/stream", get(stream))
        .route("/problems/:id/nearest", post(nearest))
        .route("/problems/:id/rank", post(rank))
        .route("/problems/:id/fptas", post(fptas))
        .route("/problems/:id/ideal", get(ideal))
        .route("/problems/:id/oracle/count", post(oracle_count))
        .route("/problems/:id/oracle/stream", post(oracle_stream))
        .route("/problems/:id/oracle/nearest", post(oracle_nearest))
        .route("/problems/:id/oracle/rank", post(oracle_rank))
        .route("/problems/:id/oracle/fptas", post(oracle_fptas))
        .route("/problems/:id/oracle/ideal", post(oracle_ideal))
        .with_state(state)
}

/// Serves on `127.0.0.1:port` until the process ends.
pub async fn serve(port: u16) -> std::io::Result<()> {
    serve_on(TcpListener::bind(("127.0.0.1", port)).await?).await
}

pub async fn serve_on(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

/// Content address of a problem: SHA-256 of its canonical text.
pub fn problem_id(problem: &Problem) -> String {
    hex::encode(Sha256::digest(problem.to_text().as_bytes()))
}

pub fn ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// A count as a JSON number when it fits in 64 bits, else as a string.
#[derive(Serialize)]
#[serde(untagged)]
pub enum Count {
    Small(u64),
    Big(String),
}

impl From<&BigInt> for Count {
    fn from(n: &BigInt) -> Self {
        n.to_u64().map_or_else(|| Count::Big(n.to_string()), Count::Small)
    }
}

async fn blocking<T, F>(f: F) -> Result<T>
where
    T: Send + 'static,
    F: FnOnce() -> mcilp_core::Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
        .map_err(ServiceError::from)
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

fn order_or_identity(rows: Option<Vec<Vec<i64>>>, k: usize) -> mcilp_core::Result<TermOrder> {
    rows.map_or_else(|| Ok(TermOrder::identity(k)), TermOrder::new)
}

fn polyhedral(norm: &str, k: usize) -> mcilp_core::Result<PolyhedralNorm> {
    match NormSpec::parse(norm, k)? {
        NormSpec::Polyhedral(q) => Ok(q),
        _ => Err(mcilp_core::Error::InvalidInput("norm is not polyhedral; use the fptas endpoint".into())),
    }
}

#[derive(Serialize)]
struct BoxJson {
    lower: Vec<i64>,
    upper: Vec<i64>,
}

#[derive(Serialize)]
struct Summary {
    id: String,
    n: usize,
    m: usize,
    k: usize,
    outcome_box: BoxJson,
    feasible_count: Count,
}

async fn upload(State(state): State<Arc<AppState>>, body: String) -> Result<Json<Summary>> {
    let problem = Problem::parse(&body)?;
    let id = problem_id(&problem);
    let handles = match state.lookup(&id) {
        Ok(h) => h,
        Err(_) => {
            let h = Arc::new(blocking(move || ParetoHandles::compute(&problem)).await?);
            state.insert(id.clone(), h.clone());
            h
        }
    };
    let feasible = {
        let h = handles.clone();
        blocking(move || h.feasible_count()).await?
    };
    let p = &handles.problem;
    Ok(Json(Summary {
        id,
        n: p.n(),
        m: p.m(),
        k: p.k(),
        outcome_box: BoxJson { lower: handles.outcome_box.lower.clone(), upper: handles.outcome_box.upper.clone() },
        feasible_count: Count::from(&feasible),
    }))
}

#[derive(Serialize)]
struct Counts {
    pareto: Count,
    strategies: Count,
}

async fn count(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Counts>> {
    let h = state.lookup(&id)?;
    let (pareto, strategies) = blocking(move || Ok((h.pareto_count()?, h.strategy_count()?))).await?;
    Ok(Json(Counts { pareto: Count::from(&pareto), strategies: Count::from(&strategies) }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StreamQuery {
    order: Option<String>,
    limit: Option<usize>,
}

/// `"1,0;0,1"`: rows separated by `;`, entries by `,`.
fn parse_order_param(text: &str) -> Result<Vec<Vec<i64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|t| t.trim().parse().map_err(|_| ServiceError::BadRequest(format!("invalid order entry `{t}`"))))
                .collect()
        })
        .collect()
}

async fn stream(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<StreamQuery>,
) -> Result<Response> {
    let h = state.lookup(&id)?;
    let rows = query.order.as_deref().map(parse_order_param).transpose()?;
    let order = order_or_identity(rows, h.problem.k())?;
    let points = blocking(move || EnumerationStream::new(Arc::new(h.g_pareto.clone()), h.outcome_bound(), order)).await?;
    let limit = query.limit.unwrap_or(usize::MAX);
    Ok(ndjson::response(points.take(limit)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NearestRequest {
    norm: String,
    point: Vec<i64>,
    order: Option<Vec<Vec<i64>>>,
    limit: Option<usize>,
}

#[derive(Serialize)]
struct Nearest {
    point: Vec<i64>,
    distance: String,
}

async fn nearest(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Json<Nearest>> {
    let h = state.lookup(&id)?;
    let req: NearestRequest = parse_body(&body)?;
    let (point, distance) = blocking(move || {
        let k = h.problem.k();
        let q = polyhedral(&req.norm, k)?;
        let order = order_or_identity(req.order, k)?;
        nearest_polyhedral(&h.g_pareto, &q, &req.point, h.outcome_bound() + 1, &order)
    })
    .await?;
    Ok(Json(Nearest { point, distance: ratio(&distance) }))
}

async fn rank(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Response> {
    let h = state.lookup(&id)?;
    let req: NearestRequest = parse_body(&body)?;
    let limit = req.limit.unwrap_or(usize::MAX);
    let ranked = blocking(move || {
        let k = h.problem.k();
        let q = polyhedral(&req.norm, k)?;
        let order = order_or_identity(req.order, k)?;
        enumerate_by_distance(&h.g_pareto, &q, &req.point, h.outcome_bound() + 1, &order)
    })
    .await?;
    let records = ranked.take(limit).map(|r| r.map(|(point, d)| Nearest { point, distance: ratio(&d) }));
    Ok(ndjson::response(records))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FptasRequest {
    pseudo: String,
    point: Vec<i64>,
    eps: String,
}

#[derive(Serialize)]
struct Certificate {
    gamma: i64,
    delta: String,
    s: Option<u32>,
    eps_prime: String,
    lower: Option<String>,
    upper: Option<String>,
}

#[derive(Serialize)]
struct Fptas {
    point: Vec<i64>,
    qvalue: String,
    certificate: Certificate,
}

impl From<PseudoResult> for Fptas {
    fn from(r: PseudoResult) -> Self {
        let moments = r.certificate.as_ref();
        Fptas {
            qvalue: ratio(&r.qvalue),
            certificate: Certificate {
                gamma: r.gamma,
                delta: ratio(&r.delta),
                s: moments.map(|c| c.s),
                eps_prime: ratio(&r.eps_prime),
                lower: moments.map(|c| ratio(&c.lower)),
                upper: moments.map(|c| ratio(&c.upper)),
            },
            point: r.point,
        }
    }
}

async fn fptas(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Json<Fptas>> {
    let h = state.lookup(&id)?;
    let req: FptasRequest = parse_body(&body)?;
    let result = blocking(move || {
        let eps = mcilp_core::polynomial::parse_rational(&req.eps)?;
        let m = h.outcome_bound() + 1;
        match NormSpec::parse(&req.pseudo, h.problem.k())? {
            NormSpec::Pseudo(pn) => fptas_nearest_pseudonorm(&h.g_pareto, &pn, &req.point, m, &eps),
            NormSpec::OddLp(p) => nearest_odd_lp(&h.g_pareto, p, &req.point, m, &eps),
            NormSpec::Polyhedral(_) => Err(mcilp_core::Error::InvalidInput(
                "polyhedral norms are solved exactly; use the nearest endpoint".into(),
            )),
        }
    })
    .await?;
    Ok(Json(result.into()))
}

#[derive(Serialize)]
struct Point {
    point: Vec<i64>,
}

async fn ideal(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Point>> {
    let h = state.lookup(&id)?;
    let point = blocking(move || h.ideal_point()).await?;
    Ok(Json(Point { point }))
}

async fn oracle_count(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Counts>> {
    let h = state.lookup(&id)?;
    let (pareto, strategies) =
        blocking(move || Ok((oracle::pareto_set(&h.problem)?.len(), oracle::pareto_strategies(&h.problem)?.len()))).await?;
    Ok(Json(Counts { pareto: Count::Small(pareto as u64), strategies: Count::Small(strategies as u64) }))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OracleStreamRequest {
    order: Option<Vec<Vec<i64>>>,
    limit: Option<usize>,
}

async fn oracle_stream(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Response> {
    let h = state.lookup(&id)?;
    let req: OracleStreamRequest = if body.is_empty() { OracleStreamRequest::default() } else { parse_body(&body)? };
    let limit = req.limit.unwrap_or(usize::MAX);
    let points = blocking(move || {
        let order = order_or_identity(req.order, h.problem.k())?;
        Ok(oracle::sort_by_order(&oracle::pareto_set(&h.problem)?, &order))
    })
    .await?;
    Ok(ndjson::response(points.into_iter().take(limit).map(Ok)))
}

async fn oracle_nearest(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Json<Nearest>> {
    let h = state.lookup(&id)?;
    let req: NearestRequest = parse_body(&body)?;
    let (point, distance) = blocking(move || {
        let k = h.problem.k();
        let q = polyhedral(&req.norm, k)?;
        let order = order_or_identity(req.order, k)?;
        oracle::oracle_nearest(&oracle::pareto_set(&h.problem)?, &NormSpec::Polyhedral(q), &req.point, &order)
    })
    .await?;
    Ok(Json(Nearest { point, distance: ratio(&distance) }))
}

async fn oracle_rank(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Response> {
    let h = state.lookup(&id)?;
    let req: NearestRequest = parse_body(&body)?;
    let limit = req.limit.unwrap_or(usize::MAX);
    let ranked = blocking(move || {
        let k = h.problem.k();
        let q = polyhedral(&req.norm, k)?;
        let order = order_or_identity(req.order, k)?;
        if req.point.len() != k {
            return Err(mcilp_core::Error::DimensionMismatch { expected: k, found: req.point.len() });
        }
        let front = oracle::pareto_set(&h.problem)?;
        Ok(oracle::rank_by_distance(&front, &NormSpec::Polyhedral(q), &req.point, &order))
    })
    .await?;
    let records = ranked.into_iter().take(limit).map(|(point, d)| Ok(Nearest { point, distance: ratio(&d) }));
    Ok(ndjson::response(records))
}

#[derive(Serialize)]
struct Exact {
    point: Vec<i64>,
    qvalue: String,
}

async fn oracle_fptas(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<Json<Exact>> {
    let h = state.lookup(&id)?;
    let req: FptasRequest = parse_body(&body)?;
    let (point, qvalue) = blocking(move || {
        let k = h.problem.k();
        mcilp_core::polynomial::parse_rational(&req.eps)?;
        let norm = NormSpec::parse(&req.pseudo, k)?;
        if req.point.len() != k {
            return Err(mcilp_core::Error::DimensionMismatch { expected: k, found: req.point.len() });
        }
        let front = oracle::pareto_set(&h.problem)?;
        oracle::oracle_nearest(&front, &norm, &req.point, &TermOrder::identity(k))
    })
    .await?;
    Ok(Json(Exact { point, qvalue: ratio(&qvalue) }))
}

async fn oracle_ideal(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Point>> {
    let h = state.lookup(&id)?;
    let point = blocking(move || oracle::ideal_point(&h.problem)).await?;
    Ok(Json(Point { point }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_parameter_rows_and_entries() {
        assert_eq!(parse_order_param("1,0;0,1").unwrap(), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(parse_order_param(" 2, 1 ; 0 ,3").unwrap(), vec![vec![2, 1], vec![0, 3]]);
        assert!(matches!(parse_order_param("1,x"), Err(ServiceError::BadRequest(_))));
    }

    #[test]
    fn counts_switch_to_strings_past_64_bits() {
        let small = serde_json::to_string(&Count::from(&BigInt::from(4))).unwrap();
        assert_eq!(small, "4");
        let big = BigInt::from(u64::MAX) + 1;
        assert_eq!(serde_json::to_string(&Count::from(&big)).unwrap(), "\"18446744073709551616\"");
    }

    #[test]
    fn rationals_always_carry_a_denominator() {
        let two = Rational::from_integer(BigInt::from(2));
        assert_eq!(ratio(&two), "2/1");
        assert_eq!(ratio(&Rational::new(BigInt::from(-6), BigInt::from(4))), "-3/2");
    }

    #[test]
    fn engine_errors_map_to_status_codes() {
        use axum::http::StatusCode;
        let status = |e: mcilp_core::Error| ServiceError::from(e).status();
        assert_eq!(status(mcilp_core::Error::Parse("x".into())), StatusCode::BAD_REQUEST);
        assert_eq!(status(mcilp_core::Error::EmptyPolyhedron), StatusCode::CONFLICT);
        assert_eq!(status(mcilp_core::Error::UnboundedPolyhedron), StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(ServiceError::NotFound("x".into()).status(), StatusCode::NOT_FOUND);
    }

    #[test]
    fn problem_ids_follow_canonical_text() {
        let a = Problem::parse("mcilp-problem v1 n 1 m 2 k 1 A 1 -1 b 2 0 F 1").unwrap();
        let b = Problem::parse("mcilp-problem v1\nn 1 m 2 k 1\nA\n1\n-1\nb 2 0\nF 1\n").unwrap();
        assert_eq!(problem_id(&a), problem_id(&b));
        assert_eq!(problem_id(&a).len(), 64);
    }
}
