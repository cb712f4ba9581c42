use std::path::Path;
use std::process::Command;

use instanton_core::monad::{generate_newton, generate_slice, NewtonStart};
use instanton_core::pencil::random_s_biased;
use instanton_core::pencil::SCaseBias;
use instanton_core::Fp;
use instanton_lab::commands::{parse_k_range, run_cli};
use instanton_lab::format::{zeros, Entries, Kind, Metadata, TensorFile};
use instanton_lab::report::RunReport;
use instanton_lab::LabError;
use num_complex::Complex64;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<String> = std::iter::once("instanton-lab").chain(args.iter().copied()).map(String::from).collect();
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let (code, out, err) = run(&full);
    let v: Value = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} {err}"));
    (code, v)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn a_tensor_round_trip_is_identity() {
    let sample = generate_slice(5, 3).unwrap();
    let file = TensorFile::from_a(&sample.a, Metadata::new(Some(3), "slice"));
    let text = file.to_json();
    let back = TensorFile::from_json(&text).unwrap();
    assert_eq!(back.a_rational().unwrap(), sample.a);
    assert_eq!(back.to_json(), text);
    assert_eq!(back.entries.as_array().unwrap().len(), 4);
    assert_eq!(back.entries[0].as_array().unwrap().len(), 5);
    assert_eq!(back.entries[0][0].as_array().unwrap().len(), 12);
}

#[test]
fn s_and_prime_round_trips() {
    let s = random_s_biased(4, 4, SCaseBias::Any, 1).unwrap();
    let file = TensorFile::from_s(&s, Metadata::new(Some(1), "test"));
    let back = TensorFile::from_json(&file.to_json()).unwrap();
    assert_eq!(back.s_rational().unwrap(), s);
    assert_eq!(back.entries.as_array().unwrap().len(), 6);

    let p = instanton_core::scalar::prime();
    let vals: Vec<Fp> = (0..40).map(|i| Fp::new(i * 7919 % p)).collect();
    let file = TensorFile::new(Kind::STensor, 3, &Entries::Prime(p, vals[..30].to_vec()), Metadata::new(None, "p")).unwrap();
    let back = TensorFile::from_json(&file.to_json()).unwrap();
    assert_eq!(back.decode().unwrap(), Entries::Prime(p, vals[..30].to_vec()));
}

#[test]
fn float_round_trip_is_bit_faithful() {
    let sample = generate_newton(2, 4, 50, &NewtonStart::Random).unwrap();
    let entries = Entries::Complex(sample.a.as_slice().iter().map(|x| Complex64::new(*x, 0.0)).collect());
    let file = TensorFile::new(Kind::ATensor, 2, &entries, Metadata::new(Some(4), "newton")).unwrap();
    let back = TensorFile::from_json(&file.to_json()).unwrap();
    let a = back.a_real().unwrap();
    for (x, y) in a.as_slice().iter().zip(sample.a.as_slice()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn wrong_shapes_are_rejected() {
    let mut file = TensorFile::from_a(&generate_slice(4, 1).unwrap().a, Metadata::new(Some(1), "slice"));
    file.k = 5;
    assert!(matches!(TensorFile::from_json(&file.to_json()), Err(LabError::Input(_))));
    let mut s = zeros(Kind::STensor, 3);
    s.entries[0] = Value::Array(vec![Value::String("1".into()); 9]);
    assert!(matches!(TensorFile::from_json(&s.to_json()), Err(LabError::Input(_))));
    let mut bad = zeros(Kind::STensor, 3);
    bad.entries[0][0] = Value::String("1/0".into());
    assert!(TensorFile::from_json(&bad.to_json()).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, file.to_json()).unwrap();
    assert_eq!(run(&["certify", "--in", path_str(&path)]).0, 2);
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(run(&["certify", "--in", path_str(&path)]).0, 2);
}

#[test]
fn zero_tensor_fails_certification_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.json");
    zeros(Kind::ATensor, 2).save(&path).unwrap();
    let (code, report) = json_report(&["certify", "--in", path_str(&path)]);
    assert_eq!(code, 1);
    let e1 = &report["certificate"]["e1"];
    assert_eq!(e1["status"], "fail");
    assert_eq!(e1["f"].as_array().unwrap().len(), 4);
    assert_eq!(e1["b"].as_array().unwrap().len(), 2);
    assert_eq!(report["passed"], false);
}

#[test]
fn audit_of_charge_five() {
    let (code, report) = json_report(&["audit", "--k", "5", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(report["audit"]["moduli_tangent_dim"], 37);
    assert_eq!(report["audit"]["xi_corank"], 0);
    assert_eq!(report["config"]["seed"], 7);
}

#[test]
fn backends_agree_on_integers() {
    let key = |v: &Value| {
        ["tangent_i_dim", "moduli_tangent_dim", "xi_corank", "rank_dgamma", "rank_xi"]
            .map(|f| v["audit"][f].as_i64().unwrap())
    };
    let (c1, exact) = json_report(&["audit", "--k", "3", "--seed", "2"]);
    let (c2, prime) = json_report(&["audit", "--k", "3", "--seed", "2", "--backend", "prime"]);
    let (c3, float) = json_report(&["audit", "--k", "3", "--seed", "2", "--backend", "float"]);
    assert_eq!((c1, c2, c3), (0, 0, 0));
    assert_eq!(key(&exact), key(&prime));
    assert_eq!(key(&exact), key(&float));
    assert_eq!(prime["audit"]["backend"]["type"], "prime");
}

#[test]
fn exact_reports_are_deterministic() {
    let a = run(&["--json", "audit", "--k", "3", "--seed", "2", "--probe-trials", "20"]);
    let b = run(&["--json", "audit", "--k", "3", "--seed", "2", "--probe-trials", "20"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
}

#[test]
fn planted_pair_traces_to_a_case() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("planted_a.json");
    let s = dir.path().join("planted_s.json");
    let (code, _, err) =
        run(&["gen", "planted", "--k", "4", "--rank", "4", "--seed", "3", "--out", path_str(&a), "--s-out", path_str(&s)]);
    assert_eq!(code, 0, "{err}");
    let (code, report) = json_report(&["trace", "--a", path_str(&a), "--s", path_str(&s), "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["contradicts_instanton"], true);
    assert!(["I", "II", "III", "E3", "RankBound"].iter().any(|l| report["result"]["outcome"] == *l));
    // a certified instanton paired with a nonzero S is an invalid input
    let inst = dir.path().join("inst.json");
    assert_eq!(run(&["gen", "slice", "--k", "4", "--seed", "1", "--out", path_str(&inst)]).0, 0);
    assert_eq!(run(&["trace", "--a", path_str(&inst), "--s", path_str(&s)]).0, 2);
}

#[test]
fn classify_reports_case_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    TensorFile::from_s(&random_s_biased(5, 8, SCaseBias::D, 2).unwrap(), Metadata::new(Some(2), "test"))
        .save(&path)
        .unwrap();
    let (code, report) = json_report(&["classify", "--in", path_str(&path), "--seed", "2"]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["case"], "D");
    assert_eq!(report["result"]["witness"]["family"]["jacobian_rank"], 2);
    zeros(Kind::STensor, 3).save(&path).unwrap();
    assert_eq!(run(&["classify", "--in", path_str(&path)]).0, 2);
}

#[test]
fn planes_on_a_sample() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    assert_eq!(run(&["gen", "slice", "--k", "3", "--seed", "5", "--out", path_str(&path)]).0, 0);
    let (code, report) = json_report(&["planes", "--in", path_str(&path), "--trials", "200", "--probe-trials", "5"]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["h0_histogram"]["2+"], 0);
    assert_eq!(report["result"]["disagreements"], 0);
    let zero = dir.path().join("zero.json");
    zeros(Kind::ATensor, 3).save(&zero).unwrap();
    assert_eq!(run(&["planes", "--in", path_str(&zero)]).0, 2);
}

#[test]
fn newton_files_audit_with_the_float_backend() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n.json");
    assert_eq!(run(&["gen", "newton", "--k", "2", "--seed", "1", "--out", path_str(&path)]).0, 0);
    let (code, report) = json_report(&["audit", "--in", path_str(&path), "--backend", "float"]);
    assert_eq!(code, 0);
    assert_eq!(report["audit"]["moduli_tangent_dim"], 13);
    assert_eq!(run(&["audit", "--in", path_str(&path)]).0, 2);
}

#[test]
fn exit_codes_for_bad_input_and_non_convergence() {
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["audit", "--k", "0"]).0, 2);
    assert_eq!(run(&["suite", "--k-range", "1..9"]).0, 2);
    assert_eq!(run(&["suite", "--only", "11"]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("n.json");
    assert_eq!(run(&["gen", "newton", "--k", "3", "--max-iter", "0", "--out", path_str(&path)]).0, 3);
    assert_eq!(run(&["--tolerance", "2", "audit", "--k", "2"]).0, 2);
}

#[test]
fn environment_overrides() {
    let bin = env!("CARGO_BIN_EXE_instanton-lab");
    let out = Command::new(bin).args(["--json", "audit", "--k", "2"]).env("INSTANTON_TOL", "1e-9").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["tolerance"], 1e-9);
    let p = "2305843009213693951";
    let out = Command::new(bin)
        .args(["--json", "audit", "--k", "2", "--backend", "prime"])
        .env("INSTANTON_PRIME", "4294967311")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["audit"]["backend"]["p"], 4294967311u64);
    assert_ne!(v["config"]["prime"].to_string(), p);
    let bad = Command::new(bin).args(["audit", "--k", "2"]).env("INSTANTON_PRIME", "4294967312").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let bad = Command::new(bin).args(["audit", "--k", "2"]).env("INSTANTON_TOL", "tiny").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn suite_reports_rerun_from_embedded_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.json");
    let (code, out, _) =
        run(&["--report", path_str(&path), "suite", "--k-range", "2..3", "--seed", "4", "--only", "2,5,6", "--workers", "2"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("criterion")).count(), 3);
    let first = RunReport::load(&path).unwrap();
    assert_eq!(first.config.seed, 4);
    let rerun = dir.path().join("rerun.json");
    let mut argv: Vec<String> = first.command.clone();
    let at = argv.iter().position(|a| a == "--report").unwrap();
    argv[at + 1] = rerun.to_str().unwrap().to_string();
    let (code, _, _) = run(&argv.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), std::fs::read_to_string(&rerun).unwrap().replace(path_str(&rerun), path_str(&path)));
}

#[test]
fn k_ranges() {
    assert_eq!(parse_k_range("2..5").unwrap(), vec![2, 3, 4, 5]);
    assert_eq!(parse_k_range("3..=4").unwrap(), vec![3, 4]);
    assert_eq!(parse_k_range("4").unwrap(), vec![4]);
    assert!(parse_k_range("5..2").is_err());
    assert!(parse_k_range("x").is_err());
}
