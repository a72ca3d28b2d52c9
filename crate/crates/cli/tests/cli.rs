use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nbrays::indexset::PointSet;
use nbrays::params::{all_ones_parameters, ParameterSet};
use num_complex::Complex64;
use serde_json::Value;
use tempfile::TempDir;

fn nbrays(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbrays")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not a report ({e}): {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn outcome<'a>(r: &'a Value, check: &str) -> &'a Value {
    r["outcomes"].as_array().unwrap().iter().find(|o| o["check"] == check).unwrap_or_else(|| panic!("no {check}"))
}

fn generate(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut args = vec!["generate", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = nbrays(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_all_ones_and_seeded() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.json", &["--n", "4"]);
    let params = ParameterSet::load(&a).unwrap();
    assert_eq!(params, all_ones_parameters(&PointSet::new(4, false).unwrap()));

    let r1 = generate(&dir, "r1.json", &["--n", "8", "--seed", "7"]);
    let r2 = generate(&dir, "r2.json", &["--n", "8", "--seed", "7"]);
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
}

#[test]
fn generate_rejects_n6() {
    let dir = TempDir::new().unwrap();
    let out = nbrays(&["generate", "--n", "6", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("divisible by 4"));
}

#[test]
fn verify_all_checks_pass() {
    let dir = TempDir::new().unwrap();
    for (name, extra) in [("a.json", vec!["--n", "4"]), ("r.json", vec!["--n", "8", "--seed", "11"])] {
        let p = generate(&dir, name, &extra);
        let out = nbrays(&["verify", "--params", s(&p)]);
        assert_eq!(out.status.code(), Some(0));
        let r = report(&out);
        for check in ["params", "unitarity", "reduced-system", "relation", "bases"] {
            assert_eq!(outcome(&r, check)["passed"], true, "{check}");
        }
        assert!(r["configuration_digest"].is_string());
    }
}

#[test]
fn verify_stops_at_bad_params() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "a.json", &["--n", "4"]);
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    doc["kappa"][0][1] = Value::from(-1);
    std::fs::write(&p, doc.to_string()).unwrap();
    let out = nbrays(&["verify", "--params", s(&p)]);
    assert_eq!(out.status.code(), Some(4));
    let r = report(&out);
    assert_eq!(outcome(&r, "params")["passed"], false);
    assert!(outcome(&r, "unitarity")["passed"].is_null());
}

#[test]
fn verify_n6_fails_reduced_system() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "six.json", &["--n", "6", "--allow-non-4n"]);
    let out = nbrays(&["verify", "--params", s(&p), "--checks", "params,reduced-system", "--allow-non-4n"]);
    assert_eq!(out.status.code(), Some(4));
    let r = report(&out);
    assert_eq!(outcome(&r, "params")["passed"], true);
    assert_eq!(outcome(&r, "reduced-system")["passed"], false);
}

#[test]
fn malformed_file_is_invalid_input() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{ not json").unwrap();
    assert_eq!(nbrays(&["verify", "--params", s(&p)]).status.code(), Some(2));
    assert_eq!(nbrays(&["verify", "--params", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn color_exhaustive_n4() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "a.json", &["--n", "4"]);
    let cert = dir.path().join("cert.json");
    let out = nbrays(&["color", "--params", s(&p), "--mode", "exhaustive", "--out", s(&cert)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let search = outcome(&r, "search");
    assert_eq!(search["details"]["result"], "ExhaustedNoColoring");
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(written["kind"], "ExhaustedNoColoring");
    assert_eq!(written["stats"]["nodes_visited"], 32768);
}

#[test]
fn color_budget_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "a.json", &["--n", "4"]);
    let out = nbrays(&["color", "--params", s(&p), "--limit", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(outcome(&report(&out), "search")["passed"].is_null());
}

#[test]
fn certify_both_outcomes() {
    let out = nbrays(&["certify", "--n", "12", "--p", "1,0,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(outcome(&r, "gf2")["details"]["result"], "Gf2Infeasible");
    assert_eq!(outcome(&r, "gf2")["passed"], true);
    assert!(r["timings_ms"]["certify"].as_f64().unwrap() < 1000.0);

    let r = report(&nbrays(&["certify", "--n", "4", "--p", "0,0,0,0"]));
    let gf2 = outcome(&r, "gf2");
    assert_eq!(gf2["details"]["result"], "Gf2Feasible");
    assert_eq!(gf2["details"]["certificate"]["witness"].as_array().unwrap().len(), 20);
    assert_eq!(nbrays(&["certify", "--n", "4", "--p", "1,0,2,0"]).status.code(), Some(2));
}

#[test]
fn deform_lambda_only() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.json", &["--n", "4"]);
    let ps = PointSet::new(4, false).unwrap();
    let lambda = [0.3, 2.0, 4.4].iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    let b = dir.path().join("b.json");
    all_ones_parameters(&ps).with_lambda(lambda).unwrap().save(&b).unwrap();

    let out = nbrays(&["deform", "--params", s(&a), "--params", s(&b)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(outcome(&report(&out), "deformation")["passed"], true);
    let out = nbrays(&["deform", "--params", s(&a), "--params", s(&a)]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn deform_rejects_mismatches() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "a.json", &["--n", "4"]);
    let b = generate(&dir, "b.json", &["--n", "4", "--seed", "3"]);
    let c = generate(&dir, "c.json", &["--n", "8"]);
    assert_eq!(nbrays(&["deform", "--params", s(&a), "--params", s(&c)]).status.code(), Some(2));
    assert_eq!(nbrays(&["deform", "--params", s(&a), "--params", s(&b)]).status.code(), Some(2));
    let out = nbrays(&["deform", "--any", "--params", s(&a), "--params", s(&b)]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn export_formats_and_digest_are_stable() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "a.json", &["--n", "4", "--seed", "2"]);
    let mut digests = Vec::new();
    for (format, threads) in [("json", "1"), ("json", "4"), ("dimacs-clique", "2"), ("edge-list", "3")] {
        let out_path = dir.path().join(format!("g-{format}-{threads}"));
        let out = nbrays(&["--threads", threads, "export", "--params", s(&p), "--format", format, "--out", s(&out_path)]);
        assert_eq!(out.status.code(), Some(0));
        digests.push(report(&out)["configuration_digest"].as_str().unwrap().to_string());
    }
    assert!(digests.windows(2).all(|w| w[0] == w[1]));
    let a = std::fs::read(dir.path().join("g-json-1")).unwrap();
    let b = std::fs::read(dir.path().join("g-json-4")).unwrap();
    assert_eq!(a, b);
    let dimacs = std::fs::read_to_string(dir.path().join("g-dimacs-clique-2")).unwrap();
    assert!(dimacs.starts_with("p edge 40 460\n"));
    let edges = std::fs::read_to_string(dir.path().join("g-edge-list-3")).unwrap();
    assert_eq!(edges.lines().count(), 460);
    let bad = nbrays(&["export", "--params", s(&p), "--format", "graphml", "--out", s(&dir.path().join("x"))]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn dump_rays_only_on_request() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "a.json", &["--n", "4"]);
    let dump = dir.path().join("rays.json");
    let out = nbrays(&["export", "--params", s(&p), "--out", s(&dir.path().join("g.json")), "--dump-rays", s(&dump)]);
    assert_eq!(out.status.code(), Some(0));
    let rays: Value = serde_json::from_str(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(rays.as_array().unwrap().len(), 40);
    assert_eq!(rays[0]["amplitudes"].as_array().unwrap().len(), 8);
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 3);
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "a.json", &["--n", "4", "--seed", "9"]);
    let run = || {
        let mut r = report(&nbrays(&["verify", "--params", s(&p)]));
        r.as_object_mut().unwrap().remove("timings_ms");
        r
    };
    assert_eq!(run(), run());
}

#[test]
fn custom_bases_file() {
    let dir = TempDir::new().unwrap();
    let p = generate(&dir, "a.json", &["--n", "4"]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let basis = [[[h, 0.0], [h, 0.0]], [[h, 0.0], [-h, 0.0]]];
    let b = dir.path().join("bases.json");
    std::fs::write(&b, serde_json::to_string(&vec![basis; 3]).unwrap()).unwrap();
    let out = nbrays(&["verify", "--params", s(&p), "--bases", s(&b)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let skew = [[[1.0, 0.0], [0.0, 0.0]], [[0.6, 0.0], [0.8, 0.0]]];
    std::fs::write(&b, serde_json::to_string(&vec![skew; 3]).unwrap()).unwrap();
    assert_eq!(nbrays(&["verify", "--params", s(&p), "--bases", s(&b)]).status.code(), Some(2));
}
