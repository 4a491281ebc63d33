use scmn::channel::ChannelFamily;
use scmn::cli::{run, EXIT_INTERNAL, EXIT_NO_CONVERGENCE, EXIT_USAGE};
use scmn::ensemble::TannerGraph;
use scmn::sim::decode_graph;
use serde_json::Value;
use std::path::PathBuf;

fn scmn(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("scmn").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scmn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn threshold_for_cd_m2() {
    let (code, out, err) = scmn(&["threshold", "--channel", "cd", "-m", "2", "--bisect-tol", "1e-5"]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    let eps: f64 = r[0].iter().find_map(|c| c.parse::<f64>().ok().filter(|v| *v > 0.4 && *v < 0.5)).unwrap();
    assert!((eps - 0.499509).abs() < 2e-5, "{eps}");
}

#[test]
fn json_output_round_trips_through_serde() {
    let (code, out, _) = scmn(&["capacity", "--channel", "bd", "-m", "3", "--eps", "0.25", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["header"]["command"], "capacity");
    assert_eq!(v["header"]["tool"], "scmn");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
}

#[test]
fn output_file_matches_stdout() {
    let path = scratch("rate.csv");
    let (_, stdout, _) = scmn(&["rate", "-L", "20"]);
    let (code, empty, _) = scmn(&["rate", "-L", "20", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(empty.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    let body = |t: &str| t.lines().filter(|l| !l.starts_with("# config:")).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(body(&written), body(&stdout));
    assert!(written.contains(path.to_str().unwrap()));
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "--eps", "0.3,0.5", "-M", "60", "-L", "3", "--trials", "6", "--seed", "9"];
    let (code, a, err) = scmn(&args);
    assert_eq!(code, 0, "{err}");
    assert_eq!(a, scmn(&args).1);
    assert_eq!(rows(&a).len(), 2);
    let other = scmn(&["simulate", "--eps", "0.3,0.5", "-M", "60", "-L", "3", "--trials", "6", "--seed", "10"]).1;
    assert_ne!(rows(&a), rows(&other));
}

#[test]
fn graph_then_decode() {
    let path = scratch("g.txt");
    let (code, _, err) = scmn(&["graph", "-M", "40", "-L", "3", "--seed", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# scmn "));
    let graph = TannerGraph::from_text(&text).unwrap();
    assert_eq!(graph.m_bits(), 40);

    let (code, out, err) = scmn(&["decode", "--graph", path.to_str().unwrap(), "--eps", "0.35", "--seed", "4"]);
    assert_eq!(code, 0, "{err}");
    let direct = decode_graph(&graph, &ChannelFamily::cd(2, 0.35).unwrap().dimension_distribution().unwrap(), 4).unwrap();
    let r = rows(&out);
    assert_eq!(r[0][1].parse::<f64>().unwrap(), direct.bit_erasure_rate);
    assert_eq!(r[0][3].parse::<usize>().unwrap(), direct.iterations_to_stall);
}

#[test]
fn graph_output_is_deterministic() {
    let a = scmn(&["graph", "-M", "8", "-L", "2", "--seed", "1"]).1;
    let b = scmn(&["graph", "-M", "8", "-L", "2", "--seed", "1"]).1;
    assert_eq!(a, b);
    assert_ne!(a, scmn(&["graph", "-M", "8", "-L", "2", "--seed", "2"]).1);
}

#[test]
fn decode_reports_bad_input() {
    let path = scratch("broken.txt");
    std::fs::write(&path, "scmn-graph 1\nparams 4 2 2 2 2 8 2\nchecks 3\n").unwrap();
    let (code, _, err) = scmn(&["decode", "--graph", path.to_str().unwrap(), "--eps", "0.3"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.starts_with("error["), "{err}");
    let (code, _, _) = scmn(&["decode", "--graph", "/nonexistent/graph.txt", "--eps", "0.3"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn exit_codes_are_distinct() {
    assert_ne!(EXIT_USAGE, EXIT_NO_CONVERGENCE);
    assert_ne!(EXIT_NO_CONVERGENCE, EXIT_INTERNAL);
    assert_eq!(scmn(&["simulate"]).0, EXIT_USAGE);
    assert_eq!(scmn(&["simulate", "--eps", "0.3", "-M", "7"]).0, EXIT_USAGE);
    assert_eq!(scmn(&["transfer", "--eps", "0.3", "--z", "1.5"]).0, EXIT_USAGE);
    assert_eq!(scmn(&["--version"]).0, 0);
}

#[test]
fn exit_curve_points_lie_on_the_curve() {
    let (code, out, err) = scmn(&["exit-curve", "-m", "2", "-L", "4", "--chi-hi", "0.8", "--chi-lo", "0.3", "--points", "6", "--format", "json"]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let pts = v["rows"].as_array().unwrap();
    assert!(pts.len() >= 5, "{out}");
}
