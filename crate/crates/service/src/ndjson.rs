//! Newline-delimited JSON bodies fed by a blocking producer.
//!
//! The producer runs on the blocking pool and hands records over a channel
//! of capacity one, so it never runs more than two records ahead of the
//! consumer: record `i + 2` is computed only after record `i` was taken.

use std::convert::Infallible;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::body::Body;
use axum::http::header;
use axum::response::{IntoResponse, Response};
use bytes::Bytes;
use mcilp_core::Error;
use serde::Serialize;
use serde_json::json;
use tokio::sync::mpsc;
use tokio_stream::wrappers::ReceiverStream;
use tokio_stream::{Stream, StreamExt};

/// One line per record; an engine error becomes a final `{"error": ...}`
/// line. `produced` counts records pulled from `records` so far.
pub fn lines<I, T>(records: I, produced: Arc<AtomicUsize>) -> impl Stream<Item = Bytes>
where
    I: Iterator<Item = Result<T, Error>> + Send + 'static,
    T: Serialize + 'static,
{
    let (tx, rx) = mpsc::channel::<Bytes>(1);
    tokio::task::spawn_blocking(move || {
        for record in records {
            produced.fetch_add(1, Ordering::SeqCst);
            let (mut line, last) = match record {
                Ok(v) => (serde_json::to_string(&v).expect("records serialize"), false),
                Err(e) => (json!({ "error": e.to_string() }).to_string(), true),
            };
            line.push('\n');
            if tx.blocking_send(Bytes::from(line)).is_err() || last {
                break;
            }
        }
    });
    ReceiverStream::new(rx)
}

pub fn response<I, T>(records: I) -> Response
where
    I: Iterator<Item = Result<T, Error>> + Send + 'static,
    T: Serialize + 'static,
{
    let body = Body::from_stream(lines(records, Arc::default()).map(Ok::<_, Infallible>));
    ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response()
}
