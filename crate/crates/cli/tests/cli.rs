use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use qmarg_cli::config::{CheckSection, ProverKind, RunConfig, ORACLE_CHECKS};
use qmarg_cli::RunReport;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qmarg"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qmarg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Runs a command, returning the exit code and the report text.
fn run(args: &[&str], tag: &str) -> (i32, String) {
    let out = scratch(&format!("{tag}.json"));
    let status = bin().args(args).arg("--no-wall-clock").arg("--report").arg(&out).status().unwrap();
    (status.code().unwrap(), std::fs::read_to_string(&out).unwrap_or_default())
}

fn validate(text: &str) -> RunReport {
    let schema: Value = serde_json::from_str(include_str!("../report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let value: Value = serde_json::from_str(text).unwrap();
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    let report: RunReport = serde_json::from_value(value).unwrap();
    assert_eq!(report.trials, report.counts.values().map(|c| c.played).sum::<u64>());
    report
}

fn verdict(r: &RunReport, name: &str) -> bool {
    r.verdicts.iter().find(|v| v.name == name).unwrap_or_else(|| panic!("no verdict {name}")).passed
}

fn write_config(name: &str, text: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        (any::<u64>(), 1usize..=24, 0.01f64..0.99, 1usize..=1000, 1usize..=4096),
        (1u64..=10_000_000, prop::sample::select(vec!["sha256", "blake3", "sha256-trunc4"]), 1usize..=1024),
        (any::<bool>(), any::<bool>(), any::<bool>(), prop::option::of("[a-z]{1,8}\\.json")),
        (0usize..100, prop::sample::subsequence(vec!["norm", "dls", "gh", "parseval", "smallbias", "ksv"], 0..=6), any::<bool>()),
    )
        .prop_map(|((seed, n, bias, t, secparam), (trials, hash, k), (sb, lk, zeros, ham), (instances, checks, inject))| RunConfig {
            seed,
            n,
            bias,
            t,
            secparam,
            trials,
            hash: hash.into(),
            k,
            strict_braiding: sb,
            literal_ksv_threshold: lk,
            prover: if zeros { ProverKind::Zeros } else { ProverKind::Honest },
            hamiltonian: ham.map(PathBuf::from),
            checks: CheckSection { instances, checks: checks.into_iter().map(String::from).collect(), inject_failure: inject },
        })
}

proptest! {
    #[test]
    fn config_round_trips_through_text(cfg in arb_config()) {
        let text = cfg.to_toml();
        prop_assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }
}

#[test]
fn config_file_and_flags_combine() {
    let p = write_config("combine.toml", "seed = 9\nn = 2\ntrials = 20\n\n[checks]\ninstances = 1\nchecks = [\"ksv\"]\n");
    let (code, text) = run(&["checks", "--config", p.to_str().unwrap(), "--t", "60"], "combine");
    assert_eq!(code, 0);
    let r = validate(&text);
    assert_eq!((r.config.seed, r.config.n, r.config.t), (9, 2, 60));
    assert_eq!(r.verdicts.len(), 1);
}

#[test]
fn invalid_config_exits_with_error() {
    let p = write_config("bad.toml", "bias = 2.0\n");
    let (code, _) = run(&["game", "--config", p.to_str().unwrap()], "bad");
    assert_eq!(code, 2);
    let (code, _) = run(&["game", "--n", "9"], "too-big");
    assert_eq!(code, 2);
}

#[test]
fn honest_game_has_no_braiding_rejections() {
    let (code, text) = run(&["game", "--n", "3", "--trials", "10000", "--seed", "3"], "game-honest");
    assert_eq!(code, 0);
    let r = validate(&text);
    assert_eq!(r.trials, 10_000);
    for test in ["commutation", "anticommutation", "braiding_auto_accept", "mixed_vs_pure"] {
        let c = r.counts[test];
        assert!(c.played > 0 && c.accepted == c.played, "{test}: {c:?}");
    }
    assert!(verdict(&r, "honest_exact_acceptance_one") && verdict(&r, "honest_hamiltonian_energy"));
}

#[test]
fn table_prover_reports_magic_square_bound() {
    let (code, text) = run(&["game", "--n", "2", "--trials", "200", "--prover", "zeros"], "game-zeros");
    assert_eq!(code, 0);
    let r = validate(&text);
    assert_eq!(r.exact["magic_square_classical_best"], 8.0 / 9.0);
    assert_eq!(r.exact["magic_square_quantum"], 1.0);
    assert!(r.exact["anticommutation"] < 1.0);
    assert!(verdict(&r, "classical_anticommutation_bound"));
}

fn replay(args: &[&str], tag: &str) {
    let (c1, a) = run(args, &format!("{tag}-1"));
    let (c2, b) = run(args, &format!("{tag}-2"));
    assert_eq!(c1, c2);
    assert!(!a.is_empty());
    assert_eq!(a, b, "{tag} replay differs");
    let (_, other) = run(&[args, &["--seed", "77"]].concat(), &format!("{tag}-3"));
    assert_ne!(a, other);
}

#[test]
fn game_replays_bit_identically() {
    replay(&["game", "--n", "2", "--trials", "300"], "replay-game");
}

#[test]
fn compiled_runs_mirror_the_game() {
    let (code, text) = run(&["compiled", "--n", "2", "--trials", "2000"], "compiled-honest");
    assert_eq!(code, 0);
    let r = validate(&text);
    assert!(verdict(&r, "compiled_matches_uncompiled") && verdict(&r, "honest_braiding_no_rejections"));
    assert!(r.bytes.verifier_to_prover > 0 && r.bytes.prover_to_verifier > 0);
    let (code, text) = run(&["compiled", "--n", "2", "--trials", "50", "--prover", "zeros"], "compiled-zeros");
    assert_eq!(code, 0);
    assert!(verdict(&validate(&text), "classical_anticommutation_bound"));
    replay(&["compiled", "--n", "2", "--trials", "50"], "replay-compiled");
}

#[test]
fn succinct_accounting_and_separation() {
    let (code, text) = run(&["succinct", "--n", "2", "--trials", "100", "--t", "60"], "succinct");
    assert_eq!(code, 0);
    let r = validate(&text);
    for name in ["v2p_log2_squared_fit", "total_below_one_percent_of_naive", "ksv_separation", "honest_braiding_no_rejections"] {
        assert!(verdict(&r, name), "{name}");
    }
    assert!(r.exact["ksv_yes_accept"] - r.exact["ksv_no_accept"] >= 0.3);
    assert_eq!(r.data["accounting"].as_array().unwrap().len(), 7);
    replay(&["succinct", "--n", "2", "--trials", "30"], "replay-succinct");
}

#[test]
fn short_amplification_fails_the_ksv_oracle() {
    let p = write_config("ksv.toml", "t = 4\n\n[checks]\nchecks = [\"ksv\"]\n");
    let (code, text) = run(&["checks", "--config", p.to_str().unwrap()], "ksv-t4");
    assert_eq!(code, 1);
    assert!(!verdict(&validate(&text), "ksv"));
}

#[test]
fn builders_write_artifacts() {
    let ham = scratch("artifact-ham.json");
    let (code, text) = run(&["ham-build", "--n", "2", "--t", "8", "--artifact", ham.to_str().unwrap()], "ham");
    assert_eq!(code, 0);
    let r = validate(&text);
    assert!(verdict(&r, "prg_subsample_fidelity"));
    let mh = qmarg::hamiltonian::MeasurementHamiltonian::from_json(&std::fs::read_to_string(&ham).unwrap()).unwrap();
    assert_eq!(mh.n, 16);
    assert_eq!(mh.pipeline().len(), 3);

    let set = scratch("artifact-set.txt");
    let (code, text) = run(&["bias-build", "--n", "10", "--bias", "0.25", "--artifact", set.to_str().unwrap()], "bias");
    assert_eq!(code, 0);
    let r = validate(&text);
    assert!(r.exact["measured_bias"] <= 0.25);
    let lines: Vec<String> = std::fs::read_to_string(&set).unwrap().lines().map(String::from).collect();
    assert_eq!(lines.len() as u64, r.data["size"].as_u64().unwrap());
    assert!(lines.iter().all(|l| l.len() == 10));
}

#[test]
fn custom_hamiltonian_file_is_used() {
    let h = qmarg::hamiltonian::XZHamiltonian::new(2, vec![qmarg::hamiltonian::XZTerm::new(1.0, vec![0, 1], "ZZ")]).unwrap();
    let p = write_config("h.json", &h.to_json());
    let (code, text) = run(&["game", "--n", "2", "--trials", "50", "--hamiltonian", p.to_str().unwrap()], "custom-ham");
    assert_eq!(code, 0);
    assert!((validate(&text).exact["hamiltonian"] - 1.0).abs() < 1e-9);
    let (code, _) = run(&["game", "--n", "3", "--trials", "5", "--hamiltonian", p.to_str().unwrap()], "custom-ham-mismatch");
    assert_eq!(code, 2);
}

#[test]
fn default_checks_are_green() {
    let (code, text) = run(&["checks"], "checks");
    assert_eq!(code, 0);
    let r = validate(&text);
    assert!(r.all_passed && r.verdicts.len() > 40);
    for oracle in ORACLE_CHECKS {
        assert!(verdict(&r, oracle), "{oracle}");
    }
    replay(&["checks"], "replay-checks");
}

#[test]
fn empty_check_list_gives_empty_report() {
    let p = write_config("empty.toml", "[checks]\nchecks = []\n");
    let (code, text) = run(&["checks", "--config", p.to_str().unwrap()], "checks-empty");
    assert_eq!(code, 0);
    let r = validate(&text);
    assert!(r.verdicts.is_empty() && r.exact.is_empty() && r.counts.is_empty());
}

#[test]
fn injected_failure_flips_a_verdict() {
    let (code, text) = run(&["checks", "--inject-failure"], "checks-inject");
    assert_eq!(code, 1);
    let r = validate(&text);
    assert!(!r.all_passed);
    assert!(r.verdicts.iter().any(|v| !v.passed && v.name == "norm_unitary_invariance"));
}

#[test]
fn report_goes_to_stdout_without_a_path() {
    let out = bin().args(["bias-build", "--n", "6", "--no-wall-clock"]).output().unwrap();
    assert!(out.status.success());
    validate(std::str::from_utf8(&out.stdout).unwrap());
    assert!(Path::new(env!("CARGO_BIN_EXE_qmarg")).exists());
}
