//! The CLI prints exactly the body the HTTP API returns for the same
//! request.

mod common;

use causal_explain_service::http::ServeConfig;
use common::{args, cli, Api, Fixture};
use serde_json::{json, Value};

/// Runs the CLI with `cli_args` on the session files and posts `body` to
/// `endpoint` on an equivalent session.
async fn both(fx: &Fixture, api: &Api, graph: &str, model: &str, cli_args: &[&str], endpoint: &str, body: &Value) -> (String, String) {
    let mut a = fx.session_args(graph, model);
    a.extend(args(cli_args));
    let out = cli(&a);
    assert_eq!(out.status, 0, "{}", out.stderr);
    let id = api.session(&fx.inline_session(graph, model)).await;
    let r = api.post(&format!("/v1/sessions/{id}/{endpoint}"), body).await;
    assert_eq!(r.status, 200, "{}", r.body);
    (out.stdout, r.body)
}

#[tokio::test]
async fn recourse_plans_are_identical() {
    let fx = Fixture::new();
    let api = Api::new(ServeConfig::default());
    let individual = r#"{"Z": 1, "X": 0}"#;
    let (c, h) = both(
        &fx,
        &api,
        "graph.json",
        "column.json",
        &["recourse", "--individual", individual, "--actionable", "X", "--alpha", "0.9"],
        "recourse",
        &json!({"individual": {"Z": 1, "X": 0}, "config": {"actionable": ["X"], "alpha": 0.9}}),
    )
    .await;
    assert_eq!(c, h);
    assert_eq!(serde_json::from_str::<Value>(&c).unwrap()["feasible"], true);

    // The same request file drives both.
    let req = fx.path("recourse.json");
    let body = json!({"individual": {"Z": 1, "X": 0}, "config": {"actionable": ["X"], "alpha": 0.6, "costs": {"X": "if a_hat_pos < a_pos then inf else 2 * (a_hat_pos - a_pos)"}}});
    std::fs::write(&req, body.to_string()).unwrap();
    let (c, h) = both(&fx, &api, "graph.json", "column.json", &["recourse", "--request", req.to_str().unwrap()], "recourse", &body).await;
    assert_eq!(c, h);
    assert_eq!(serde_json::from_str::<Value>(&c).unwrap()["cost"], 2.0);
}

#[tokio::test]
async fn score_reports_are_identical() {
    let fx = Fixture::new();
    let api = Api::new(ServeConfig::default());
    for mode in ["point", "bounds", "naive"] {
        let (c, h) = both(
            &fx,
            &api,
            "graph.json",
            "column.json",
            &["scores", "--x", "X=1", "--x-prime", "X=0", "--context", "Z=1", "--mode", mode],
            "scores",
            &json!({"query": {"x": {"X": "1"}, "x_prime": {"X": "0"}, "context": {"Z": "1"}}, "mode": mode}),
        )
        .await;
        assert_eq!(c, h, "{mode}");
    }
}

#[tokio::test]
async fn explanation_reports_are_identical() {
    let fx = Fixture::new();
    let api = Api::new(ServeConfig::default());
    let (c, h) = both(&fx, &api, "features.json", "expr.json", &["explain", "global", "--score", "suf"], "explain/global", &json!({"score": "suf"})).await;
    assert_eq!(c, h);
    let (c, h) = both(
        &fx,
        &api,
        "features.json",
        "expr.json",
        &["explain", "contextual", "--context", "Z=1"],
        "explain/contextual",
        &json!({"context": {"Z": "1"}}),
    )
    .await;
    assert_eq!(c, h);
    let (c, h) = both(
        &fx,
        &api,
        "features.json",
        "expr.json",
        &["explain", "local", "--individual", r#"{"Z": 1, "X": 0}"#],
        "explain/local",
        &json!({"individual": {"Z": 1, "X": 0}}),
    )
    .await;
    assert_eq!(c, h);
}

#[tokio::test]
async fn whatif_reports_are_identical() {
    let fx = Fixture::new();
    let api = Api::new(ServeConfig::default());
    let (c, h) = both(
        &fx,
        &api,
        "features.json",
        "expr.json",
        &["whatif", "--individual", r#"{"Z": 0, "X": 0}"#, "--set", "X=1"],
        "whatif",
        &json!({"individual": {"Z": 0, "X": 0}, "overrides": {"X": 1}}),
    )
    .await;
    assert_eq!(c, h);
}

#[tokio::test]
async fn process_backend_matches_the_expression_model() {
    let fx = Fixture::new();
    let api = Api::new(ServeConfig {
        allow_process: true,
        ..ServeConfig::default()
    });
    let (via_process, _) = both(&fx, &api, "features.json", "process.json", &["explain", "global"], "explain/global", &json!({})).await;
    let (via_expr, _) = both(&fx, &api, "features.json", "expr.json", &["explain", "global"], "explain/global", &json!({})).await;
    assert_eq!(via_process, via_expr);
}
