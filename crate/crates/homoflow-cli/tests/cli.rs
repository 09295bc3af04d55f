use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn homoflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homoflow"))
        .args(args)
        .env_remove("HOMOFLOW_MAX_VERTICES")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("homoflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn local_order_fragment_is_refuted() {
    let out = homoflow(&["amenable", "--class", "s2", "--fragment", "builtin:s2-local-order"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["kind"], "Infeasible");
    assert_eq!(v["verified"], true);
}

#[test]
fn emitted_certificate_replays() {
    let cert = scratch("qhat.json");
    let out = homoflow(&["amenable", "--class", "hat-q", "--fragment", "builtin:qhat", "--emit-cert", cert.to_str().unwrap()]);
    assert!(out.status.success());
    let out = homoflow(&["verify-cert", "--in", cert.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(json(&out)["verified"], true);

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    doc["steps"][0]["multiplier"] = Value::String("12345".into());
    let bad = scratch("qhat-bad.json");
    std::fs::write(&bad, doc.to_string()).unwrap();
    let out = homoflow(&["verify-cert", "--in", bad.to_str().unwrap()]);
    assert_eq!(json(&out)["verified"], false);
}

#[test]
fn density_passes_for_domega() {
    let out = homoflow(&["density", "--class", "d-omega", "--bound", "4"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn errors_are_json_with_nonzero_exit() {
    for args in [
        &["density", "--class", "no-such-class"][..],
        &["trees", "--op", "count-convex"][..],
        &["expand", "--class", "tournaments", "--in", "/definitely/missing.json"][..],
        &["frobnicate"][..],
    ] {
        let out = homoflow(args);
        assert!(!out.status.success(), "{args:?}");
        let v = json(&out);
        assert!(v["error"]["kind"].is_string(), "{args:?}");
        assert!(v["error"]["message"].is_string(), "{args:?}");
    }
}

#[test]
fn tree_convex_count() {
    let t = scratch("tree.json");
    std::fs::write(&t, r#"{"parents": [null, 0, 0, 1, 1, 2, 2], "root": 0}"#).unwrap();
    let out = homoflow(&["trees", "--op", "count-convex", "--in", t.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["count"], 8);
    assert_eq!(v["non_terminal"], 3);
}

#[test]
fn expansions_as_csv() {
    let s = scratch("edge.json");
    std::fs::write(&s, r#"{"n": 2, "arcs": [[0, 1]]}"#).unwrap();
    let out = homoflow(&["expand", "--class", "tournaments", "--in", s.to_str().unwrap()]);
    assert_eq!(json(&out)["count"], 2);
    let out = homoflow(&["expand", "--class", "tournaments", "--in", s.to_str().unwrap(), "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,expansion");
    assert_eq!(lines.len(), 3);
}

#[test]
fn qop_writes_its_output_file() {
    let path = scratch("qop.json");
    let args = ["qop", "--sampler", "hatT", "--n", "8", "--k", "1", "--trials", "3", "--seed", "5"];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let out = homoflow(&with_out);
    assert!(out.status.success());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, out.stdout);
    // Same seed, same bytes.
    assert_eq!(homoflow(&args).stdout, written);

    let csv = homoflow(&[&args[..], &["--csv"]].concat());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("trial,n_emb,n_exp,deviation\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn hrushovski_system_not_found() {
    let sys = scratch("system.json");
    std::fs::write(&sys, r#"{"ambient": {"n": 3, "arcs": [[0, 1], [0, 2], [1, 2]]}, "maps": [[[0, 0], [1, 2]]]}"#).unwrap();
    let out = homoflow(&["hrushovski", "--class", "s2", "--system", sys.to_str().unwrap(), "--bound", "7"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["status"], "not_found");
}

#[test]
fn hypergraph_run_is_valid() {
    let out = homoflow(&["hypergraph", "--n", "30", "--seed", "3", "--orders", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["valid"], true, "{v}");
    assert_eq!(v["girth_ok"], true, "{v}");
}
