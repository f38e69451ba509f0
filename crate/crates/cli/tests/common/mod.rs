#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::{StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use catalogql::prom::FixtureSet;

/// A running HTTP server on 127.0.0.1 with its own runtime.
pub struct TestServer {
    pub addr: SocketAddr,
    rt: Option<tokio::runtime::Runtime>,
}

impl TestServer {
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        if let Some(rt) = self.rt.take() {
            rt.shutdown_background();
        }
    }
}

pub fn spawn(router: Router) -> TestServer {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    rt.spawn(async move {
        axum::serve(listener, router).await.unwrap();
    });
    TestServer { addr, rt: Some(rt) }
}

#[derive(Clone)]
struct Replay {
    set: Arc<FixtureSet>,
    delay: Duration,
    token: Option<String>,
}

async fn replay(
    State(r): State<Replay>,
    uri: Uri,
    headers: axum::http::HeaderMap,
    Query(params): Query<Vec<(String, String)>>,
) -> Response {
    if !r.delay.is_zero() {
        tokio::time::sleep(r.delay).await;
    }
    if let Some(t) = &r.token {
        let want = format!("Bearer {t}");
        if headers.get("authorization").and_then(|v| v.to_str().ok()) != Some(want.as_str()) {
            return (StatusCode::UNAUTHORIZED, "unauthorized").into_response();
        }
    }
    match r.set.respond(uri.path(), &params) {
        Some(reply) => (StatusCode::from_u16(reply.status).unwrap(), reply.body).into_response(),
        None => (StatusCode::NOT_FOUND, "no fixture").into_response(),
    }
}

/// Serve `set` the way Prometheus would.
pub fn replay_server(set: FixtureSet) -> TestServer {
    replay_server_with(set, Duration::ZERO, None)
}

pub fn replay_server_with(set: FixtureSet, delay: Duration, token: Option<&str>) -> TestServer {
    let state = Replay {
        set: Arc::new(set),
        delay,
        token: token.map(String::from),
    };
    spawn(Router::new().fallback(replay).with_state(state))
}
