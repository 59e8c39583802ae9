use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use tripcsp_cli::cmd::load_sandbox;
use tripcsp_cli::session::{replay, SessionRecord, TurnResponse};
use tripcsp_cli::{router, AppState};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn query(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name).join("query.json")).unwrap()).unwrap()
}

fn state(name: &str, persist: Option<PathBuf>) -> AppState {
    AppState::new(load_sandbox(&fixture(name)).unwrap(), persist)
}

async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn create(app: &Router, body: Value) -> String {
    let (status, text) = send(app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn create_turn_and_fetch_plan_in_wire_key_order() {
    let app = router(state("trip-myrtle-beach", None));
    let id = create(&app, json!({})).await;
    let (status, text) = send(
        &app,
        Method::POST,
        &format!("/sessions/{id}/turns"),
        Some(json!({ "query": query("trip-myrtle-beach") })),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{text}");
    let turn: TurnResponse = serde_json::from_str(&text).unwrap();
    assert_eq!(turn.turn, 1);
    assert_eq!(turn.verdict.to_string(), "valid");
    assert_eq!(turn.plan.len(), 3);

    let (status, plan) = send(&app, Method::GET, &format!("/sessions/{id}/plan"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(plan, tripcsp::plan::plan_to_json(&turn.plan));
    let keys = [
        "\"day\"",
        "\"current_city\"",
        "\"transportation\"",
        "\"breakfast\"",
        "\"attraction\"",
        "\"lunch\"",
        "\"dinner\"",
        "\"accommodation\"",
    ];
    let pos: Vec<usize> = keys.iter().map(|k| plan.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{plan}");

    let (status, trace) = send(&app, Method::GET, &format!("/sessions/{id}/trace"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(trace.lines().all(|l| l.starts_with("t=1 ") || l.starts_with("TOOL ")), "{trace}");
    assert!(trace.contains("t=1 l=1 k=1 checker -> valid"));
}

#[tokio::test]
async fn removing_the_cuisine_preference_drops_its_constraints() {
    let name = "trip-hilton-head";
    let app = router(state(name, None));
    let id = create(&app, json!({ "query": query(name) })).await;
    let (_, dump) = send(&app, Method::GET, &format!("/sessions/{id}/constraints"), None).await;
    assert!(dump.contains("cuisine:italian") && dump.contains("cuisine:french"), "{dump}");

    let patch = json!({ "patches": [{ "op": "remove", "field": "cuisines" }] });
    let (status, text) = send(&app, Method::POST, &format!("/sessions/{id}/turns"), Some(patch)).await;
    assert_eq!(status, StatusCode::OK, "{text}");
    let turn: TurnResponse = serde_json::from_str(&text).unwrap();
    assert!(!turn.constraints.contains("cuisine:"), "{}", turn.constraints);
    assert!(turn.constraints.contains("budget"));
    let (_, dump) = send(&app, Method::GET, &format!("/sessions/{id}/constraints"), None).await;
    assert_eq!(dump, turn.constraints);
}

#[tokio::test]
async fn concurrent_turn_is_rejected() {
    let st = state("trip-baltimore", None);
    let app = router(st.clone());
    let id = create(&app, json!({ "query": query("trip-baltimore") })).await;
    let body = json!({ "patches": [{ "op": "modify", "field": "budget", "value": 1300 }] });
    let uri = format!("/sessions/{id}/turns");

    let held = st.reserve(id.parse().unwrap()).await.unwrap();
    let (status, _) = send(&app, Method::POST, &uri, Some(body.clone())).await;
    assert_eq!(status, StatusCode::CONFLICT);
    drop(held);
    let (status, text) = send(&app, Method::POST, &uri, Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{text}");
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let app = router(state("trip-baltimore", None));
    let ghost = uuid::Uuid::new_v4();
    for (m, path) in [
        (Method::GET, "plan"),
        (Method::GET, "trace"),
        (Method::GET, "constraints"),
    ] {
        let (status, _) = send(&app, m, &format!("/sessions/{ghost}/{path}"), None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{path}");
    }
    let (status, _) = send(
        &app,
        Method::POST,
        &format!("/sessions/{ghost}/turns"),
        Some(json!({ "patches": [] })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let id = create(&app, json!({})).await;
    let (status, _) = send(&app, Method::GET, &format!("/sessions/{id}/plan"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = send(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = send(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn invalid_patches_are_unprocessable() {
    let app = router(state("trip-baltimore", None));
    let id = create(&app, json!({})).await;
    let uri = format!("/sessions/{id}/turns");
    let budget = json!({ "patches": [{ "op": "modify", "field": "budget", "value": 900 }] });
    let (status, _) = send(&app, Method::POST, &uri, Some(budget)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "no base query yet");

    let (status, _) = send(&app, Method::POST, &uri, Some(json!({ "query": query("trip-baltimore") }))).await;
    assert_eq!(status, StatusCode::OK);
    for bad in [
        json!({ "patches": [{ "op": "modify", "field": "altitude", "value": 3 }] }),
        json!({ "patches": [{ "op": "remove", "field": "budget" }] }),
        json!({ "patches": [{ "op": "modify", "field": "budget", "value": "lots" }] }),
    ] {
        let (status, text) = send(&app, Method::POST, &uri, Some(bad.clone())).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{bad}: {text}");
    }
    let (status, _) = send(&app, Method::POST, "/sessions", Some(json!({ "query": { "origin": "X" } }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn persisted_sessions_replay_to_identical_plans() {
    let dir = tempfile::tempdir().unwrap();
    let name = "trip-hilton-head";
    let app = router(state(name, Some(dir.path().to_path_buf())));
    let id = create(&app, json!({ "config": { "k": 2, "l": 5, "tool_budget": 60 } })).await;
    let uri = format!("/sessions/{id}/turns");
    let mut served = Vec::new();
    for body in [
        json!({ "query": query(name) }),
        json!({ "patches": [{ "op": "remove", "field": "cuisines", "value": "French" }] }),
        json!({ "patches": [{ "op": "modify", "field": "budget", "value": 6500 }] }),
    ] {
        let (status, text) = send(&app, Method::POST, &uri, Some(body)).await;
        assert_eq!(status, StatusCode::OK, "{text}");
        served.push(send(&app, Method::GET, &format!("/sessions/{id}/plan"), None).await.1);
    }
    let rec = SessionRecord::load(&dir.path().join(format!("{id}.json"))).unwrap();
    assert_eq!(rec.inputs.len(), 3);
    assert_eq!(rec.trajectory.len(), 3);
    assert!(!rec.notebook.is_empty());
    let replayed = replay(load_sandbox(&fixture(name)).unwrap(), &rec).unwrap();
    assert_eq!(replayed, served);
}
