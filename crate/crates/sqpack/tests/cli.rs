//! End-to-end checks of the command-line binary: known costs, file
//! round-trips, validation failures, and benchmark determinism.

use sqpack::instance::{parse_instance, serialize_packing};
use sqpack::model::{rat, Packing, Placement, Rational};
use std::path::Path;
use std::process::Command;

fn sqpack(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sqpack"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn gen_adversarial(dir: &Path, name: &str) {
    let (code, _, err) = sqpack(
        &["gen", "--family", "adversarial", "--t", "3", "-o", name],
        dir,
    );
    assert_eq!(code, 0, "gen failed: {err}");
}

#[test]
fn shelf_solve_prints_the_known_cost() {
    let tmp = tempfile::tempdir().unwrap();
    gen_adversarial(tmp.path(), "a.smsbpp");
    let (code, out, err) = sqpack(&["solve", "--algo", "nfdh", "a.smsbpp"], tmp.path());
    assert_eq!(code, 0, "solve failed: {err}");
    assert!(out.contains("cost 38"), "stdout: {out}");
}

#[test]
fn ratio_solver_reports_cost_and_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    gen_adversarial(tmp.path(), "a.smsbpp");
    let (code, out, err) = sqpack(
        &["solve", "--algo", "approx5322", "a.smsbpp", "-o", "p.pack", "--report", "r.csv"],
        tmp.path(),
    );
    assert_eq!(code, 0, "solve failed: {err}");
    assert!(out.contains("cost 18"), "stdout: {out}");
    let report = std::fs::read_to_string(tmp.path().join("r.csv")).unwrap();
    let mut lines = report.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("lb1") && header.contains("lb2"), "header: {header}");
    let row = lines.next().unwrap();
    assert!(row.contains(",18,"), "row: {row}");

    let (code, out, _) = sqpack(
        &["validate", "p.pack", "--instance", "a.smsbpp"],
        tmp.path(),
    );
    assert_eq!(code, 0);
    assert!(out.starts_with("ok:"), "stdout: {out}");
}

#[test]
fn validate_rejects_an_overlapping_packing() {
    let tmp = tempfile::tempdir().unwrap();
    gen_adversarial(tmp.path(), "a.smsbpp");
    let text = std::fs::read_to_string(tmp.path().join("a.smsbpp")).unwrap();
    let inst = parse_instance(&text).unwrap();
    // two small items stacked on the same spot
    let zero = Rational::from_integer(0.into());
    let tampered = Packing::new(vec![
        Placement { item: 0, bin: 1, x: zero.clone(), y: zero.clone() },
        Placement { item: 1, bin: 1, x: zero.clone(), y: zero },
    ])
    .unwrap();
    std::fs::write(tmp.path().join("p.pack"), serialize_packing(&tampered)).unwrap();
    let (code, out, _) = sqpack(
        &["validate", "p.pack", "--instance", "a.smsbpp"],
        tmp.path(),
    );
    assert_eq!(code, 1);
    assert!(out.contains("overlap"), "stdout: {out}");
}

#[test]
fn every_solver_output_passes_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, err) = sqpack(
        &["gen", "--family", "corner_mix", "--n", "8", "--seed", "5", "-o", "c.smsbpp"],
        tmp.path(),
    );
    assert_eq!(code, 0, "gen failed: {err}");
    for algo in ["nfdh", "ffdh", "ffds", "approx5322", "ptas", "exact"] {
        let pack = format!("{algo}.pack");
        let (code, _, err) = sqpack(
            &["solve", "--algo", algo, "c.smsbpp", "-o", &pack],
            tmp.path(),
        );
        assert_eq!(code, 0, "{algo} failed: {err}");
        let (code, out, _) = sqpack(&["validate", &pack, "--instance", "c.smsbpp"], tmp.path());
        assert_eq!(code, 0, "{algo} output failed validation: {out}");
    }
    // the shelf packer with overflow levels needs the repair pass first
    let (code, _, err) = sqpack(
        &["solve", "--algo", "nfih", "--feasibilize", "c.smsbpp", "-o", "nfih.pack"],
        tmp.path(),
    );
    assert_eq!(code, 0, "nfih failed: {err}");
    let (code, _, _) = sqpack(&["validate", "nfih.pack", "--instance", "c.smsbpp"], tmp.path());
    assert_eq!(code, 0);
}

#[test]
fn relaxed_shelf_output_needs_the_repair_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, _) = sqpack(
        &["gen", "--family", "uniform", "--n", "40", "--lo", "1/50", "--hi", "1/10", "-o", "u.smsbpp"],
        tmp.path(),
    );
    assert_eq!(code, 0);
    let (code, out, _) = sqpack(&["solve", "--algo", "nfih", "u.smsbpp"], tmp.path());
    assert_eq!(code, 0, "printing the relaxed cost is fine");
    assert!(out.contains("cost "));
    let (code, _, err) = sqpack(
        &["solve", "--algo", "nfih", "u.smsbpp", "-o", "u.pack"],
        tmp.path(),
    );
    assert_eq!(code, 1);
    assert!(err.contains("feasibilize"), "stderr: {err}");
}

#[test]
fn bounds_and_render_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    gen_adversarial(tmp.path(), "a.smsbpp");
    let (code, out, _) = sqpack(&["bounds", "a.smsbpp"], tmp.path());
    assert_eq!(code, 0);
    for key in ["n 12", "lb1 ", "lb2 ", "r ", "k ", "b "] {
        assert!(out.contains(key), "missing {key:?} in: {out}");
    }

    let (code, _, _) = sqpack(
        &["solve", "--algo", "ffdh", "a.smsbpp", "-o", "f.pack"],
        tmp.path(),
    );
    assert_eq!(code, 0);
    let (code, _, err) = sqpack(
        &["render", "f.pack", "--instance", "a.smsbpp", "-o", "f.svg"],
        tmp.path(),
    );
    assert_eq!(code, 0, "render failed: {err}");
    let svg = std::fs::read_to_string(tmp.path().join("f.svg")).unwrap();
    assert!(svg.contains("<svg"), "not an svg: {}", &svg[..svg.len().min(120)]);
}

#[test]
fn bench_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    let corpus_str = corpus.display().to_string();
    gen_adversarial(&corpus, "a.smsbpp");
    let (code, _, err) = sqpack(
        &["gen", "--family", "corner_mix", "--n", "20", "--seed", "9", "-o", "c.smsbpp"],
        &corpus,
    );
    assert_eq!(code, 0, "gen failed: {err}");

    for out in ["b1.csv", "b2.csv"] {
        let (code, _, err) = sqpack(
            &["bench", "--corpus", &corpus_str, "--algos", "nfdh,approx5322,ptas", "-o", out],
            tmp.path(),
        );
        assert_eq!(code, 0, "bench failed: {err}");
    }
    let b1 = std::fs::read(tmp.path().join("b1.csv")).unwrap();
    let b2 = std::fs::read(tmp.path().join("b2.csv")).unwrap();
    assert_eq!(b1, b2);

    let text = String::from_utf8(b1).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "instance,algo,cost,bins,lb1,lb2,r,k,b,ratio_vs_max_lb,stage,cost_before,cost_after,inflation,bound_claimed"
    );
    // 2 instances x (2 plain rows + 1 ptas summary + 5 stage rows)
    assert_eq!(text.lines().count(), 1 + 2 * 8);
    for line in text.lines().skip(1) {
        assert_eq!(line.matches(',').count(), 14, "ragged row: {line}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, err) = sqpack(&["solve", "missing-algo.smsbpp"], tmp.path());
    assert_eq!(code, 2, "stderr: {err}");
    let (code, _, _) = sqpack(&["frobnicate"], tmp.path());
    assert_eq!(code, 2);
    let (code, _, _) = sqpack(&["--help"], tmp.path());
    assert_eq!(code, 0);
}
