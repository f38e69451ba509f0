//! HTTP front end: JSON-RPC on `/rpc` plus health probes.

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use catalogql::service::{handle_message, Engine};
use serde_json::json;

pub fn router(engine: Engine) -> Router {
    Router::new()
        .route("/rpc", post(rpc))
        .route("/healthz", get(healthz))
        .route("/readyz/gpu", get(readyz_gpu))
        .with_state(engine)
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn rpc(State(engine): State<Engine>, body: Bytes) -> Response {
    let text = String::from_utf8_lossy(&body).into_owned();
    // Tool handlers may block on Prometheus.
    let reply = tokio::task::spawn_blocking(move || handle_message(&engine, &text)).await;
    match reply {
        Ok(Some(s)) => json_response(StatusCode::OK, s),
        Ok(None) => StatusCode::NO_CONTENT.into_response(),
        Err(e) => json_response(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({"jsonrpc": "2.0", "id": null, "error": {"code": -32603, "message": e.to_string()}}).to_string(),
        ),
    }
}

async fn healthz(State(engine): State<Engine>) -> Response {
    let r = engine.readiness();
    let ok = r.catalog_loaded();
    let body = json!({
        "status": if ok { "ok" } else { "loading" },
        "catalog_loaded": ok,
        "metrics": engine.catalog().snapshot().len(),
    });
    let status = if ok { StatusCode::OK } else { StatusCode::SERVICE_UNAVAILABLE };
    json_response(status, body.to_string())
}

async fn readyz_gpu(State(engine): State<Engine>) -> Response {
    let r = engine.readiness();
    let ok = r.gpu_merged();
    let body = json!({"status": if ok { "ok" } else { "pending" }, "gpu_merged": ok, "validated": r.validated()});
    let status = if ok { StatusCode::OK } else { StatusCode::SERVICE_UNAVAILABLE };
    json_response(status, body.to_string())
}

/// Bind `addr` and serve until ctrl-c.
pub async fn serve(engine: Engine, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
