use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn pml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pml")).args(args).env_remove("PML_BUDGET_MS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

#[test]
fn check_prints_the_truth_set() {
    let o = pml(&["check", &fixture("two_worlds.km"), "<R>(p)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "engine: labeling\ntruth: {0}\n");
}

#[test]
fn check_engines_agree() {
    let phi = "(<!R>(p) | [R](~p))";
    let a = pml(&["check", &fixture("two_worlds.km"), phi, "--format", "kv"]);
    let b = pml(&["check", &fixture("two_worlds.km"), phi, "--format", "kv", "--naive"]);
    let truth = |o: &Output| stdout(o).lines().find(|l| l.starts_with("truth=")).unwrap().to_string();
    assert_eq!(truth(&a), truth(&b));
}

#[test]
fn check_expect_sets_the_exit_status() {
    let model = fixture("two_worlds.km");
    assert_eq!(pml(&["check", &model, "<R>(p)", "--expect", "0"]).status.code(), Some(0));
    let o = pml(&["check", &model, "<R>(p)", "--expect", "1", "--format", "kv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("holds=false\n"));
    assert_eq!(pml(&["check", &model, "<R>(p)", "--expect", "7"]).status.code(), Some(2));
}

#[test]
fn malformed_model_is_a_format_error() {
    let o = pml(&["check", &fixture("bad_tuple.km"), "p"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        stderr(&o),
        "error[format]: ".to_string()
            + &fixture("bad_tuple.km")
            + ": line 2, column 14: world 2 out of range for 2 worlds\n"
    );
}

#[test]
fn malformed_formula_and_arguments_are_rejected() {
    assert_eq!(pml(&["check", &fixture("two_worlds.km"), "<R>(p"]).status.code(), Some(2));
    assert_eq!(pml(&["check", &fixture("two_worlds.km"), "<S>(p)"]).status.code(), Some(2));
    let o = pml(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[usage]: "));
    assert_eq!(stderr(&o).lines().count(), 1);
    assert_eq!(pml(&["sat", "p", "--max-worlds", "0"]).status.code(), Some(2));
}

#[test]
fn reduce_neg_golden() {
    let o = pml(&["reduce-neg", &format!("@{}", fixture("mixed.pml")), "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("reduce_neg_mixed.kv"));
}

#[test]
fn reduce_neg_rejects_richer_terms() {
    let o = pml(&["reduce-neg", "<(R & rot(R))>(p)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reduce_tables_reports_sizes() {
    let o = pml(&["reduce-tables", "(<(R & !rot(R))>(r) & q)", "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("translated=(<TAB2_2>(r) & q)\n"), "{out}");
    assert!(out.contains("table_symbols=4\n"));
    assert!(out.contains("xi1_conjuncts=4096\n"));
    assert!(!out.contains("\ntheta="));
}

#[test]
fn reduce_tables_budget_and_vocabulary_errors() {
    let o = pml(&["reduce-tables", "<R>((q & r))", "--max-xi1", "100"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[budget]: "));
    assert_eq!(pml(&["reduce-tables", "<T>(q, q)"]).status.code(), Some(2));
    assert_eq!(pml(&["reduce-tables", "<R>(q)", "--vocab", "R/2,S/2,U/2"]).status.code(), Some(2));
}

#[test]
fn normalize_term_golden() {
    let o = pml(&["normalize-term", "!(R & !S)", "--vocab", "R/2,S/2", "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("normalize.kv"));
}

#[test]
fn tables_golden() {
    let o = pml(&["tables", "--vocab", "R/2", "--arity", "2", "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("tables_r2.kv"));
    let o = pml(&["tables", "--vocab", "T/3", "--arity", "3", "--format", "kv"]);
    assert!(stdout(&o).starts_with("count=64\n"));
    assert_eq!(pml(&["tables", "--vocab", "R/2", "--arity", "3"]).status.code(), Some(2));
}

#[test]
fn sat_exhausted_is_a_negative_answer() {
    let o = pml(&["sat", &format!("@{}", fixture("contradiction.pml")), "--max-worlds", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "verdict: exhausted 3\n");
}

#[test]
fn sat_writes_a_witness_that_check_confirms() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("witness.km");
    let phi = "(<R>(p) & <!R>(~p))";
    let o = pml(&["sat", phi, "--witness", path.to_str().unwrap(), "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("verdict=satisfiable\nworld=0\n"), "{out}");
    let c = pml(&["check", path.to_str().unwrap(), phi, "--expect", "0"]);
    assert_eq!(c.status.code(), Some(0));
}

#[test]
fn sat_budget_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_pml"))
        .args(["sat", "(<R>(p) & (<S>(q) & ([R]([S](false)) & <T>(q, p))))", "--max-worlds", "6"])
        .env("PML_BUDGET_MS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn verify_neg_forward_and_given_reduced_model() {
    let model = fixture("two_worlds.km");
    let phi = "(<R>(p) & <!R>(~p))";
    let o = pml(&["verify-reduction", "neg", &model, phi, "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("result=pass\n"));
    let o =
        pml(&["verify-reduction", "neg", &model, phi, "--reduced-model", &fixture("neg_theta.km"), "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("completion_added=1 1\n"));
    let o = pml(&["verify-reduction", "neg", &model, "<R>(~p)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("forward: fail\n"));
}

#[test]
fn verify_tables_in_both_layerings() {
    let model = fixture("tables_src.km");
    let phi = "(<(R & !rot(R))>(r) & q)";
    for layering in ["truncated", "cyclic"] {
        let o = pml(&["verify-reduction", "tables", &model, phi, "--layering", layering, "--format", "kv"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let out = stdout(&o);
        assert!(out.contains("transfer_mismatches=0\n"));
        assert!(out.ends_with("source_holds=true\nresult=pass\n"));
    }
    let o = pml(&["verify-reduction", "tables", &model, phi, "--depth", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pml(&["verify-reduction", "tables", &model, phi, "--world", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn encode_golden() {
    let o = pml(&["encode", &fixture("four_worlds.km"), "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "bytes=1111>0001#1011\nsize=12\n");
}

#[test]
fn structured_output_is_stable() {
    let args = ["verify-reduction", "tables", &fixture("tables_src.km"), "(<(R & !rot(R))>(r) & q)", "--format", "kv"];
    assert_eq!(pml(&args).stdout, pml(&args).stdout);
    let args = ["sat", "(<R>(p) & <!R>(~p))", "--format", "kv"];
    assert_eq!(pml(&args).stdout, pml(&args).stdout);
}

#[test]
fn help_exits_zero() {
    let o = pml(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verify-reduction"));
}
