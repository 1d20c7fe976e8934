use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use futures::StreamExt;
use mcilp_core::{oracle, Problem};
use mcilp_service::{ndjson, router_with, AppState};
use reqwest::StatusCode;
use serde_json::{json, Value};
use tokio::net::TcpListener;

async fn start(state: Arc<AppState>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router_with(state)).await.unwrap() });
    format!("http://{addr}")
}

async fn upload(client: &reqwest::Client, base: &str, p: &Problem) -> Value {
    let resp = client.post(format!("{base}/problems")).body(p.to_text()).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    resp.json().await.unwrap()
}

async fn text(resp: reqwest::Response) -> (StatusCode, String) {
    (resp.status(), resp.text().await.unwrap())
}

#[tokio::test(flavor = "multi_thread")]
async fn e1_examples() {
    let base = start(Arc::default()).await;
    let client = reqwest::Client::new();
    let summary = upload(&client, &base, &oracle::e1()).await;
    assert_eq!(summary["n"], 2);
    assert_eq!(summary["k"], 2);
    let id = summary["id"].as_str().unwrap().to_string();

    let (status, body) = text(client.get(format!("{base}/problems/{id}/pareto/count")).send().await.unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, r#"{"pareto":4,"strategies":4}"#);

    let url = format!("{base}/problems/{id}/pareto/stream?order=1,0;0,1");
    let (_, body) = text(client.get(url).send().await.unwrap()).await;
    assert_eq!(body, "[0,3]\n[1,2]\n[2,1]\n[3,0]\n");
    let url = format!("{base}/problems/{id}/pareto/stream?limit=2");
    let (_, body) = text(client.get(url).send().await.unwrap()).await;
    assert_eq!(body, "[0,3]\n[1,2]\n");

    let req = json!({ "norm": "linf", "point": [0, 0] });
    let (_, body) = text(client.post(format!("{base}/problems/{id}/nearest")).json(&req).send().await.unwrap()).await;
    assert_eq!(body, r#"{"point":[1,2],"distance":"2/1"}"#);

    let req = json!({ "pseudo": "pseudo 2 2 1 2 0 1 0 2 7/10 1", "point": [0, 0], "eps": "1/10" });
    let resp = client.post(format!("{base}/problems/{id}/fptas")).json(&req).send().await.unwrap();
    let v: Value = resp.json().await.unwrap();
    assert_eq!(v["qvalue"], "5/1");
    assert!([json!([1, 2]), json!([2, 1])].contains(&v["point"]));
    assert_eq!(v["certificate"]["gamma"], 2);

    let (_, body) = text(client.get(format!("{base}/problems/{id}/ideal")).send().await.unwrap()).await;
    assert_eq!(body, r#"{"point":[0,0]}"#);
}

#[tokio::test(flavor = "multi_thread")]
async fn status_codes() {
    let base = start(Arc::default()).await;
    let client = reqwest::Client::new();
    let resp = client.post(format!("{base}/problems")).body("mcilp-problem v1 n 2").send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    let resp = client.get(format!("{base}/problems/deadbeef/pareto/count")).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::NOT_FOUND);
    // x >= 1 and x <= 0
    let empty = "mcilp-problem v1\nn 1 m 2 k 1\nA -1 1\nb -1 0\nF 1\n";
    let resp = client.post(format!("{base}/problems")).body(empty).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::CONFLICT);

    let id = upload(&client, &base, &oracle::e1()).await["id"].as_str().unwrap().to_string();
    let nearest = format!("{base}/problems/{id}/nearest");
    let resp = client.post(&nearest).body("{not json").send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    // not symmetric about the origin
    let skewed = json!({ "norm": "poly-ineq 4 2 1 0 -1 0 0 1 0 -1 1 2 1 1", "point": [0, 0] });
    let resp = client.post(&nearest).json(&skewed).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::UNPROCESSABLE_ENTITY);
    let wrong_dim = json!({ "norm": "l1", "point": [0, 0, 0] });
    let resp = client.post(&nearest).json(&wrong_dim).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::UNPROCESSABLE_ENTITY);
    let singular = format!("{base}/problems/{id}/pareto/stream?order=1,1;1,1");
    assert_eq!(client.get(singular).send().await.unwrap().status(), StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test(flavor = "multi_thread")]
async fn oracle_mirrors_agree() {
    let base = start(Arc::default()).await;
    let client = reqwest::Client::new();
    for p in [oracle::e1(), oracle::e3(), oracle::random_instance(7, 2, 2)] {
        let id = upload(&client, &base, &p).await["id"].as_str().unwrap().to_string();
        let prob = format!("{base}/problems/{id}");
        let pairs = [
            (client.get(format!("{prob}/pareto/count")), client.post(format!("{prob}/oracle/count"))),
            (
                client.get(format!("{prob}/pareto/stream?order=0,1;1,0")),
                client.post(format!("{prob}/oracle/stream")).json(&json!({ "order": [[0, 1], [1, 0]] })),
            ),
            (
                client.post(format!("{prob}/nearest")).json(&json!({ "norm": "l1", "point": [1, -1] })),
                client.post(format!("{prob}/oracle/nearest")).json(&json!({ "norm": "l1", "point": [1, -1] })),
            ),
            (
                client.post(format!("{prob}/rank")).json(&json!({ "norm": "linf", "point": [0, 0] })),
                client.post(format!("{prob}/oracle/rank")).json(&json!({ "norm": "linf", "point": [0, 0] })),
            ),
            (client.get(format!("{prob}/ideal")), client.post(format!("{prob}/oracle/ideal"))),
        ];
        for (engine, brute) in pairs {
            let (s1, b1) = text(engine.send().await.unwrap()).await;
            let (s2, b2) = text(brute.send().await.unwrap()).await;
            assert_eq!((s1, &b1), (StatusCode::OK, &b2));
            assert_eq!(s2, StatusCode::OK);
        }
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn identical_queries_give_identical_bytes() {
    let base = start(Arc::default()).await;
    let client = reqwest::Client::new();
    let id = upload(&client, &base, &oracle::e3()).await["id"].as_str().unwrap().to_string();
    let mut seen = Vec::new();
    for _ in 0..3 {
        let stream = client.get(format!("{base}/problems/{id}/pareto/stream")).send().await.unwrap();
        let rank = client
            .post(format!("{base}/problems/{id}/rank"))
            .json(&json!({ "norm": "l1", "point": [2, 2] }))
            .send()
            .await
            .unwrap();
        let fptas = client
            .post(format!("{base}/problems/{id}/fptas"))
            .json(&json!({ "pseudo": "pseudo 4 2 1 4 0 1 0 4 7/10 1", "point": [5, -5], "eps": "1/2" }))
            .send()
            .await
            .unwrap();
        seen.push((stream.bytes().await.unwrap(), rank.bytes().await.unwrap(), fptas.bytes().await.unwrap()));
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test(flavor = "multi_thread")]
async fn cache_evicts_least_recently_used() {
    let state = Arc::new(AppState::new(2));
    let base = start(state.clone()).await;
    let client = reqwest::Client::new();
    let ids: Vec<String> = [oracle::e1(), oracle::e2(), oracle::e3()]
        .iter()
        .map(mcilp_service::problem_id)
        .collect();
    upload(&client, &base, &oracle::e1()).await;
    upload(&client, &base, &oracle::e2()).await;
    // touch E1 so E2 becomes the eviction candidate
    client.get(format!("{base}/problems/{}/ideal", ids[0])).send().await.unwrap();
    upload(&client, &base, &oracle::e3()).await;
    assert_eq!(state.cached(), 2);
    let status = |id: &str| {
        let url = format!("{base}/problems/{id}/pareto/count");
        let client = client.clone();
        async move { client.get(url).send().await.unwrap().status() }
    };
    assert_eq!(status(&ids[0]).await, StatusCode::OK);
    assert_eq!(status(&ids[1]).await, StatusCode::NOT_FOUND);
    assert_eq!(status(&ids[2]).await, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread")]
async fn slow_consumer_bounds_the_producer() {
    let produced = Arc::new(AtomicUsize::new(0));
    let records = (0..1000u32).map(Ok::<_, mcilp_core::Error>);
    let mut lines = Box::pin(ndjson::lines(records, produced.clone()));
    let mut received = 0;
    while let Some(line) = lines.next().await {
        received += 1;
        assert_eq!(line, format!("{}\n", received - 1));
        if received % 100 == 1 {
            // give the producer time to run ahead if it could
            tokio::time::sleep(Duration::from_millis(20)).await;
        }
        // record i + 2 is computed only after record i was emitted
        assert!(produced.load(Ordering::SeqCst) <= received + 2);
    }
    assert_eq!(received, 1000);
}

#[tokio::test(flavor = "multi_thread")]
async fn stream_reports_engine_progress_over_http() {
    let base = start(Arc::default()).await;
    let client = reqwest::Client::new();
    // outcomes (t, -t) for t in 0..=60: every one is Pareto optimal
    let line = Problem::new(vec![vec![1], vec![-1]], vec![60, 0], vec![vec![1], vec![-1]]).unwrap();
    let id = upload(&client, &base, &line).await["id"].as_str().unwrap().to_string();
    let resp = client.get(format!("{base}/problems/{id}/pareto/stream")).send().await.unwrap();
    assert_eq!(resp.headers()["content-type"], "application/x-ndjson");
    let body = resp.text().await.unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines.len(), 61);
    assert_eq!(lines[0], "[0,0]");
    assert_eq!(lines[60], "[60,-60]");
}
