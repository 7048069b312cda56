//! Serve the built-in screens over HTTP, or drive the API in-process.
//!
//! cargo run -p uiq-service --example serve            # in-process tour
//! cargo run -p uiq-service --example serve -- 127.0.0.1:8080

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use serde_json::json;
use tower::ServiceExt;

use uiq::engine::SynthesisConfig;
use uiq::fixtures;
use uiq::relations::RelationConfig;
use uiq_service::{router, serve, AppState, CorpusHandle};

async fn post(app: &axum::Router, uri: &str, body: serde_json::Value) -> String {
    let req = Request::post(uri).header("content-type", "application/json").body(Body::from(body.to_string())).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    format!("{status} {}", String::from_utf8_lossy(&bytes))
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let mut snaps = vec![fixtures::walkthrough()];
    snaps.extend(fixtures::walkthrough_variants());
    snaps.push(fixtures::organic_story());
    let corpus = CorpusHandle::from_snapshots("demo", snaps, &RelationConfig::default()).unwrap();
    let sink = std::env::temp_dir().join("uiq-serve-example.ndjson");
    let state = Arc::new(AppState::new(corpus, SynthesisConfig::default(), sink));

    if let Some(bind) = std::env::args().nth(1) {
        println!("listening on {bind}");
        return serve(state, &bind).await;
    }
    let app = router(state);
    println!("{}", post(&app, "/api/demonstrate", json!({"snapshotId": "walkthrough", "nodeId": 1})).await);
    println!("{}", post(&app, "/api/execute", json!({"queryText": fixtures::WALKTHROUGH_QUERY})).await);
    Ok(())
}
