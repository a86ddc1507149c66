use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use stl_dialogue::dialogue::{Answerer, OracleUser, Question};
use stl_dialogue::experiment::{ParaphraseCorpus, Suite, CSV_COLUMNS};
use stl_dialogue::nl::{Frontend, Lexicon};
use stl_dialogue::stl::{parse_formula, parse_formula_with};
use stl_dialogue::world::{GridSpec, WorldVocabulary};
use stl_dialogue_server::{app, Service, Store};
use tower::ServiceExt;

const PHI3: &str = "F[0,15](lampOn & F[0,10](itemOnRobot(purpleCube)))";

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stl-dialogue")).args(args).stdin(Stdio::null()).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn check_fig2_traces() {
    let green = data("traces/green.trace");
    let red = data("traces/red.trace");
    let o = run(&["check", "F[0,15](robotAt(0,0))", p(&green)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "sat=true robustness=1\n");
    let o = run(&["check", "F[0,15](robotAt(0,0))", p(&red)]);
    assert_eq!(stdout(&o), "sat=true robustness=1\n");
    let o = run(&["check", "G[0,6](!(robotAtWall))", p(&green)]);
    assert_eq!(stdout(&o), "sat=true robustness=1\n");
    let o = run(&["check", "G[0,9](!(robotAtWall))", p(&red)]);
    assert_eq!(stdout(&o), "sat=false robustness=-1\n");
}

#[test]
fn exit_codes() {
    let green = data("traces/green.trace");
    let o = run(&["check", "G[0,", p(&green)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntax error"));
    assert_eq!(run(&["check", "F[0,1](a)", "/nonexistent.trace"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    let demos = data("demos/lamp_cube.toml");
    let o = run(&["synthesize", "turn on the lamp and pick up the cube", "--demos", p(&demos), "--oracle", "F[0,"]);
    assert_eq!(o.status.code(), Some(2));
    // No oracle and nothing on stdin: the questions go unanswered.
    let o = run(&["synthesize", "turn on the lamp and pick up the cube", "--demos", p(&demos)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "not a policy\n").unwrap();
    assert_eq!(run(&["rollout", p(&bad)]).status.code(), Some(2));
}

#[test]
fn synthesize_running_example() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("session.json");
    let demos = data("demos/lamp_cube.toml");
    let args = ["synthesize", "turn on the lamp and pick up the cube", "--demos", p(&demos), "--oracle", PHI3];
    let o = run(&[&args[..], &["--out", p(&session)]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(parse_formula(lines.next().unwrap()).unwrap(), parse_formula(PHI3).unwrap());
    assert_eq!(lines.next().unwrap(), "UIs=3 EFs=14 success=true");
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&session).unwrap()).unwrap();
    assert_eq!(saved["stage"], "selected");
    // The JSONL recording of the same demo gives the same result.
    let jsonl = data("demos/lamp_cube.demo");
    let o2 = run(&[&args[..2], &["--demos", p(&jsonl), "--oracle", PHI3]].concat());
    assert_eq!(stdout(&o2), text);
}

#[test]
fn experiment_csv() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let out = dir.path().join("empty.csv");
    let o = run(&["experiment", p(&empty), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));

    // Everything but the runtime column is stable across runs.
    let strip = |text: &str| -> Vec<Vec<String>> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
        r.records()
            .map(|rec| rec.unwrap().iter().enumerate().filter(|(i, _)| *i != 6).map(|(_, f)| f.to_string()).collect())
            .collect()
    };
    let a = run(&["experiment"]);
    let b = run(&["experiment"]);
    assert!(a.status.success(), "{}", stderr(&a));
    let (a, b) = (stdout(&a), stdout(&b));
    assert_eq!(a.lines().count(), 11);
    assert_eq!(strip(&a), strip(&b));
    assert!(a.contains("G[0,1000](!(robotAtWall))"), "{a}");
}

#[test]
fn train_and_rollout() {
    let dir = tempfile::tempdir().unwrap();
    let policy = dir.path().join("policy.tsv");
    let again = dir.path().join("again.tsv");
    let curve = dir.path().join("curve.csv");
    let trace = dir.path().join("rollout.trace");
    let args = ["train", "F[0,10](robotAt(3,1))", "--episodes", "800", "--max-steps", "20", "--seed", "3"];
    let o = run(&[&args[..], &["--out", p(&policy), "--curve", p(&curve)]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("episodes=800 "), "{text}");
    assert!(text.contains("sat=true"), "{text}");
    let o2 = run(&[&args[..], &["--out", p(&again)]].concat());
    assert_eq!(stdout(&o2), text);
    assert_eq!(std::fs::read(&policy).unwrap(), std::fs::read(&again).unwrap());
    assert_eq!(std::fs::read_to_string(&curve).unwrap().lines().count(), 801);

    let o = run(&["rollout", p(&policy), "--out", p(&trace)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let roll = stdout(&o);
    assert!(roll.starts_with("sat=true"), "{roll}");
    // Training output ends with the same rollout.
    assert!(text.ends_with(&roll), "{text}\n{roll}");
    let o = run(&["check", "F[0,10](robotAt(3,1))", p(&trace)]);
    assert_eq!(stdout(&o), "sat=true robustness=1\n");
}

fn strip_nulls(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            Value::Object(m.into_iter().filter(|(_, v)| !v.is_null()).map(|(k, v)| (k, strip_nulls(v))).collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(strip_nulls).collect()),
        v => v,
    }
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

/// Every suite row's first paraphrase goes through the CLI and through the
/// endpoint sequence with the same oracle; both must select the same formula.
#[tokio::test]
async fn api_cli_parity() {
    let app = app(Service::new(Store::in_memory(), GridSpec::default(), Frontend::default()).unwrap());
    let corpus = ParaphraseCorpus::shipped();
    let dir = tempfile::tempdir().unwrap();
    for (n, row) in Suite::default().rows.iter().enumerate() {
        let nl = &corpus.get(&row.nl).unwrap()[0];
        let demos = dir.path().join(format!("row{n}.toml"));
        let doc = strip_nulls(json!({ "demo": row.demos }));
        std::fs::write(&demos, toml::to_string(&doc).unwrap()).unwrap();
        let o = run(&["synthesize", nl, "--demos", p(&demos), "--oracle", &row.ground_truth]);
        let cli = match o.status.code() {
            Some(0) => Some(stdout(&o).lines().next().unwrap().to_string()),
            Some(3) => None,
            c => panic!("row {n}: exit {c:?}: {}", stderr(&o)),
        };

        let (st, v) = call(&app, Method::POST, "/sessions", Some(json!({ "groundTruth": row.ground_truth }))).await;
        assert_eq!(st, StatusCode::CREATED);
        let id = v["id"].as_str().unwrap().to_string();
        for d in &row.demos {
            let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/demos"), Some(json!(d))).await;
            assert_eq!(st, StatusCode::OK, "{v}");
        }
        let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/nl"), Some(json!({ "text": nl }))).await;
        assert_eq!(st, StatusCode::OK, "{v}");
        let gt = parse_formula_with(&row.ground_truth, &WorldVocabulary).unwrap();
        let mut oracle = OracleUser::new(gt, Lexicon::default()).unwrap();
        loop {
            let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}/questions"), None).await;
            let Some(q) = v["questions"].get(0).cloned() else { break };
            let q: Question = serde_json::from_value(q).unwrap();
            let payload = oracle.answer(&q).unwrap().unwrap();
            let body = json!({ "questionId": q.id, "payload": payload });
            let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/answers"), Some(body)).await;
            assert_eq!(st, StatusCode::OK, "{v}");
        }
        let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}/formula"), None).await;
        let api = v["formula"].as_str().map(str::to_string);
        assert_eq!(cli, api, "row {n}: {nl}");
    }
}
