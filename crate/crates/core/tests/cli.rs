use nvcert::cli::run_with;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["nvcert"];
    argv.extend_from_slice(args);
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = run(args);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}\n{err}"));
    (code, v)
}

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn threshold_scan_report() {
    let (code, v) = report(&["thresholds", "--family", "x0plus", "--condition", "ratio", "--mode", "first", "--max", "50000"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "certified");
    let r = &v["results"];
    assert_eq!(r["min_certified_prime"], 45317);
    assert_eq!(r["verdicts"]["45341"], "certified");
    assert_eq!(r["comparison"]["reference"], 45341);
    assert_eq!(r["comparison"]["within_tolerance"], true);
    assert_eq!(v["command"][0], "thresholds");
}

#[test]
fn point_bound_report() {
    let (code, v) = report(&["pointbound", "--p", "5", "--genus", "2", "--fp", "8", "--nv", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["max_rational_points"], 2428);
    assert_eq!(v["results"]["genus_polynomial"], 166);
}

#[test]
fn missing_data_is_an_error() {
    let (code, _, err) = run(&["certify", "--level", "37", "--newforms", "absent.jsonl"]);
    assert_eq!(code, 1);
    assert!(err.contains("absent.jsonl"), "{err}");
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["pointbound", "--p", "5", "--bogus"]).0, 1);
    assert_eq!(run(&[]).0, 1);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("thresholds"));
}

#[test]
fn inconclusive_exits_two() {
    // The improved A2 scan for the ns family does not certify at 71.
    let (code, v) = report(&["thresholds", "--family", "xnsplus", "--condition", "a2", "--mode", "improved", "--max", "500"]);
    assert_eq!(v["results"]["min_certified_prime"], 79);
    assert_eq!(v["verdict"], "inconclusive");
    assert_eq!(code, 2);
}

#[test]
fn reports_are_deterministic() {
    let args = ["thresholds", "--family", "xnsplus", "--condition", "ratio", "--mode", "first", "--max", "2000", "--audit"];
    let (_, mut a) = report(&args);
    let (_, mut b) = report(&args);
    a.as_object_mut().unwrap().remove("timing");
    b.as_object_mut().unwrap().remove("timing");
    assert_eq!(a, b);
    let nf = data("newforms.jsonl");
    let args = ["certify", "--level", "67", "--newforms", nf.as_str()];
    let (code, mut a) = report(&args);
    let (_, mut b) = report(&args);
    assert_eq!(code, 0);
    a.as_object_mut().unwrap().remove("timing");
    b.as_object_mut().unwrap().remove("timing");
    assert_eq!(a, b);
    assert_eq!(a["inputs"]["files"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn certify_and_lprime() {
    let nf = data("newforms.jsonl");
    let (code, v) = report(&["certify", "--level", "67", "--newforms", &nf, "--audit"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["level_verdict"]["verdict"], "theorem2_holds");
    let (code, v) = report(&["lprime", "--newforms", &nf, "--label", "37.2.a.a", "--audit"]);
    assert_eq!(code, 0);
    let lo = v["results"]["certificate"]["value"]["lo"].as_f64().unwrap();
    let hi = v["results"]["certificate"]["value"]["hi"].as_f64().unwrap();
    assert!(lo <= 0.305_999_773_834_052 && 0.305_999_773_834_052 <= hi && hi - lo < 1e-6);
    let (code, _, _) = run(&["lprime", "--newforms", &nf, "--label", "nope"]);
    assert_eq!(code, 1);
}

#[test]
fn genus_and_screen() {
    let (code, v) = report(&["genus", "--family", "x0plus", "--level", "67"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["genus"], 2);
    let dims = data("ns_dimensions.jsonl");
    let (code, v) = report(&["genus", "--family", "xnsplus", "--level", "13", "--dimensions", &dims]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["genus"], 3);
    let (code, _, _) = run(&["genus", "--family", "xnsplus", "--level", "53", "--dimensions", &dims]);
    assert_ne!(code, 0);
    let curves = data("curves.jsonl");
    let (code, v) = report(&["screen", "--curves", &curves, "--levels", "61,67,73,101,109,113"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["verdict"], "certified");
}

#[test]
fn moments_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let p = path.to_str().unwrap();
    let (code, out, _) = run(&["--out", p, "moments", "--m", "2", "--level", "10007", "--mode", "improved"]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let e = &v["results"]["estimate"]["normalized"];
    assert!(e["lo"].as_f64().unwrap() > 0.0 && e["hi"].as_f64().unwrap() < 2.0);
    let (code, _, _) = run(&["moments", "--m", "3", "--level", "389"]);
    assert_eq!(code, 1);
}

#[test]
fn plot_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let (code, _, _) = run(&["thresholds", "--family", "xnsplus", "--condition", "a1", "--max", "200", "--plot", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("prime,lo,hi"));
    assert_eq!(lines.count(), 46);
}

#[test]
fn improved_reports_the_t1_constant() {
    let (_, v) = report(&["moments", "--m", "1", "--level", "10007", "--mode", "improved"]);
    assert_eq!(v["results"]["t1_constant"]["exceeds_stated"], false);
    let (_, v) = report(&["moments", "--m", "2", "--level", "10007", "--mode", "improved"]);
    assert_eq!(v["results"]["t1_constant"]["exceeds_stated"], true);
    let (_, v) = report(&["moments", "--m", "1", "--level", "10007"]);
    assert!(v["results"].get("t1_constant").is_none());
}
