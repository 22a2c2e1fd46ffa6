use anyhow::{bail, Context, Result};
use qmarg::compiler::{compile_and_run, compiled_exact_accept, honest_compiled_prover, transparent_qhe};
use qmarg::games::magic::{classical_best_count, row_column_classical_best, row_column_quantum_value};
use qmarg::games::{exact_accept, run_main, ClassicalStrategy, GameSpec, HonestStrategy, Protocol, TestId, TwoProverStrategy};
use qmarg::hamiltonian::{
    energy_operator, exact_energy, ground_energy, ground_state_of, ksv_accept_probability, ksv_amplify, mf_convert, prg_subsample, MeasurementHamiltonian, Prg, Recipe,
    XZHamiltonian, XZTerm, DEFAULT_PRG_KEY, MAX_SEED_BITS,
};
use qmarg::normlab::run_suite;
use qmarg::rng::TrialRng;
use qmarg::simulator::QuantumState;
use qmarg::smallbias::{bias_of, construct_biased, BiasedSet};
use qmarg::succinct::{accounting_sweep, fit_log2_squared, run_succinct_protocol, AccountingParams, HonestSuccinctProver, SuccinctConfig};
use serde_json::json;

use crate::config::{ProverKind, RunConfig};
use crate::report::RunReport;

/// Stream ids under the global seed, so that commands never share draws.
const STREAM_TRIALS: u64 = 0;
const STREAM_EXACT: u64 = 1 << 40;
const STREAM_SETUP: u64 = 2 << 40;

const PROTOCOLS: [Protocol; 6] = [Protocol::Main, Protocol::Braiding, Protocol::Commutation, Protocol::Anticommutation, Protocol::MixedVsPure, Protocol::Hamiltonian];

pub fn protocol_name(p: Protocol) -> String {
    serde_json::to_value(p).expect("enum serializes").as_str().expect("unit variant").to_string()
}

fn test_name(t: TestId) -> String {
    serde_json::to_value(t).expect("enum serializes").as_str().expect("unit variant").to_string()
}

/// `0.9·Z_0 − 0.4·X_{n−1} + 0.3·X_0 Z_{n−1}`, with the last term only for `n ≥ 2`.
pub fn toy_hamiltonian(n: usize) -> Result<XZHamiltonian> {
    let mut terms = vec![XZTerm::new(0.9, vec![0], "Z"), XZTerm::new(-0.4, vec![n - 1], "X")];
    if n >= 2 {
        terms.push(XZTerm::new(0.3, vec![0, n - 1], "XZ"));
    }
    Ok(XZHamiltonian::new(n, terms)?)
}

pub fn load_hamiltonian(cfg: &RunConfig) -> Result<XZHamiltonian> {
    let h = match &cfg.hamiltonian {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            XZHamiltonian::from_json(&text)?
        }
        None => toy_hamiltonian(cfg.n)?,
    };
    if h.n != cfg.n {
        bail!("hamiltonian acts on {} qubits but n = {}", h.n, cfg.n);
    }
    Ok(h)
}

struct Setup {
    spec: GameSpec,
    witness: QuantumState,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    cfg.require_game_size()?;
    let mh = mf_convert(&load_hamiltonian(cfg)?)?;
    let (_, witness) = ground_state_of(&energy_operator(&mh)?, cfg.n)?;
    let spec = GameSpec::new(mh, construct_biased(cfg.n, cfg.bias)?, cfg.braiding_mode())?;
    Ok(Setup { spec, witness })
}

fn strategy(cfg: &RunConfig, s: &Setup) -> Result<Box<dyn TwoProverStrategy>> {
    Ok(match cfg.prover {
        ProverKind::Honest => Box::new(HonestStrategy::new(s.witness.clone(), &s.spec.mh, &s.spec.set)?),
        ProverKind::Zeros => Box::new(ClassicalStrategy::zeros(cfg.n)),
    })
}

fn braiding_clean(report: &RunReport) -> bool {
    [TestId::Commutation, TestId::Anticommutation, TestId::BraidingAutoAccept]
        .iter()
        .filter_map(|t| report.counts.get(&test_name(*t)))
        .all(|c| c.accepted == c.played)
}

/// Invariants shared by the plain and compiled game runs.
fn game_verdicts(report: &mut RunReport, cfg: &RunConfig, s: &Setup, mismatches: u64) -> Result<()> {
    report.verdict("transcripts_replay", mismatches == 0, json!({ "mismatches": mismatches }));
    let anti = report.exact[&protocol_name(Protocol::Anticommutation)];
    match cfg.prover {
        ProverKind::Honest => {
            report.verdict("honest_braiding_no_rejections", braiding_clean(report), json!({}));
            let mut worst: f64 = 0.0;
            for p in [Protocol::Braiding, Protocol::Commutation, Protocol::Anticommutation, Protocol::MixedVsPure] {
                worst = worst.max((1.0 - report.exact[&protocol_name(p)]).abs());
            }
            report.verdict("honest_exact_acceptance_one", worst <= 1e-9, json!({ "max_deviation": worst }));
            let energy = exact_energy(&s.spec.mh, &s.witness)?;
            let ham = report.exact[&protocol_name(Protocol::Hamiltonian)];
            report.verdict("honest_hamiltonian_energy", (ham - (1.0 - energy)).abs() <= 1e-9, json!({ "accept": ham, "energy": energy }));
        }
        ProverKind::Zeros => {
            report.verdict("classical_anticommutation_bound", anti <= 17.0 / 18.0 + 1e-9, json!({ "accept": anti }));
        }
    }
    Ok(())
}

fn magic_square(report: &mut RunReport) -> Result<()> {
    let classical = row_column_classical_best() as f64 / 9.0;
    let quantum = row_column_quantum_value()?;
    report.exact.insert("magic_square_classical_best".into(), classical);
    report.exact.insert("magic_square_quantum".into(), quantum);
    report.exact.insert("line_cell_classical_best".into(), classical_best_count() as f64 / 18.0);
    report.verdict("magic_square_separation", row_column_classical_best() == 8 && (quantum - 1.0).abs() <= 1e-9, json!({ "classical": classical, "quantum": quantum }));
    Ok(())
}

/// The protocols played uncompiled.
pub fn cmd_game(cfg: &RunConfig) -> Result<RunReport> {
    let s = setup(cfg)?;
    let strat = strategy(cfg, &s)?;
    let mut report = RunReport::new("game", cfg);
    let mut mismatches = 0;
    for i in 0..cfg.trials {
        let t = run_main(&*strat, &s.spec, &mut TrialRng::new(cfg.seed, STREAM_TRIALS + i))?;
        mismatches += (t.recompute_verdict(&s.spec)? != t.verdict) as u64;
        report.count(&test_name(t.test), t.verdict);
    }
    for p in PROTOCOLS {
        report.exact.insert(protocol_name(p), exact_accept(&*strat, &s.spec, p)?);
    }
    game_verdicts(&mut report, cfg, &s, mismatches)?;
    magic_square(&mut report)?;
    Ok(report)
}

/// The same protocols through the compiler under the transparent scheme.
pub fn cmd_compiled(cfg: &RunConfig) -> Result<RunReport> {
    let s = setup(cfg)?;
    let qhe = transparent_qhe();
    let plain = strategy(cfg, &s)?;
    let prover = honest_compiled_prover(strategy(cfg, &s)?, &s.spec);
    let mut report = RunReport::new("compiled", cfg);
    let mut mismatches = 0;
    for i in 0..cfg.trials {
        let t = compile_and_run(&s.spec, Protocol::Main, &qhe, &prover, cfg.secparam, &mut TrialRng::new(cfg.seed, STREAM_TRIALS + i))?;
        mismatches += (t.recompute_verdict(&s.spec)? != t.verdict) as u64;
        report.bytes.verifier_to_prover += t.verifier_bytes as u64;
        report.bytes.prover_to_verifier += t.prover_bytes as u64;
        report.count(&test_name(t.test), t.verdict);
    }
    let mut worst: f64 = 0.0;
    for (j, p) in PROTOCOLS.into_iter().enumerate() {
        let compiled = compiled_exact_accept(&s.spec, p, &qhe, &prover, cfg.secparam, &mut TrialRng::new(cfg.seed, STREAM_EXACT + j as u64))?;
        worst = worst.max((compiled - exact_accept(&*plain, &s.spec, p)?).abs());
        report.exact.insert(protocol_name(p), compiled);
    }
    report.verdict("compiled_matches_uncompiled", worst <= 1e-9, json!({ "max_deviation": worst }));
    game_verdicts(&mut report, cfg, &s, mismatches)?;
    Ok(report)
}

/// The succinct protocol end to end, the byte accounting sweep and the
/// amplified YES/NO separation.
pub fn cmd_succinct(cfg: &RunConfig) -> Result<RunReport> {
    let s = setup(cfg)?;
    let qhe = transparent_qhe();
    let scfg = SuccinctConfig { hash: cfg.hash_kind()?, k: cfg.k, secparam: cfg.secparam, harness: true };
    let mut prover = HonestSuccinctProver::new(honest_compiled_prover(strategy(cfg, &s)?, &s.spec));
    let mut report = RunReport::new("succinct", cfg);
    for i in 0..cfg.trials {
        let t = run_succinct_protocol(&s.spec, Protocol::Main, &qhe, &mut prover, &scfg, &mut TrialRng::new(cfg.seed, STREAM_TRIALS + i))?;
        report.bytes.verifier_to_prover += t.v2p_bytes as u64;
        report.bytes.prover_to_verifier += t.p2v_bytes as u64;
        report.count(&test_name(t.test), t.verdict);
    }
    if cfg.prover == ProverKind::Honest {
        report.verdict("honest_braiding_no_rejections", braiding_clean(&report), json!({}));
    }
    let params = AccountingParams { k: cfg.k, hash: cfg.hash_kind()?, secparam: cfg.secparam, bias: cfg.bias };
    let rows = accounting_sweep(&params, &mut TrialRng::new(cfg.seed, STREAM_SETUP))?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.v2p_bytes as f64)).collect();
    let fit = fit_log2_squared(&points);
    let last = rows.last().expect("sweep is nonempty");
    report.verdict("v2p_log2_squared_fit", fit.r2 >= 0.95, json!({ "a": fit.a, "b": fit.b, "r2": fit.r2 }));
    report.verdict("total_below_one_percent_of_naive", last.ratio() < 0.01, json!({ "n": last.n, "ratio": last.ratio() }));
    let (yes, no) = ksv_yes_no(cfg);
    report.exact.insert("ksv_yes_accept".into(), yes);
    report.exact.insert("ksv_no_accept".into(), no);
    report.verdict("ksv_separation", yes - no >= 0.3, json!({ "t": cfg.t, "yes": yes, "no": no }));
    report.data = json!({ "accounting": rows, "fit": fit });
    Ok(report)
}

/// Amplified acceptance of blocks accepting 0.9 (YES) and 0.1 (NO).
fn ksv_yes_no(cfg: &RunConfig) -> (f64, f64) {
    let rule = cfg.ksv_rule();
    (ksv_accept_probability(0.9, cfg.t, 0.5, rule), ksv_accept_probability(0.1, cfg.t, 0.5, rule))
}

fn mf_form(mh: &MeasurementHamiltonian) -> Option<&qmarg::hamiltonian::MfForm> {
    match &mh.recipe {
        Recipe::Mf(f) => Some(f),
        _ => None,
    }
}

/// The pipeline XZ → energy test → amplification → PRG subsampling.
/// Returns the report and the final Hamiltonian.
pub fn cmd_ham_build(cfg: &RunConfig) -> Result<(RunReport, MeasurementHamiltonian)> {
    let h = load_hamiltonian(cfg)?;
    let mh = mf_convert(&h)?;
    let mut report = RunReport::new("ham-build", cfg);
    if cfg.n <= 8 {
        let form = mf_form(&mh).expect("mf_convert output");
        let (e_realized, _) = form.realized_hamiltonian().ground_state()?;
        let g = ground_energy(&mh)?;
        report.exact.insert("mf_ground_energy".into(), g);
        report.verdict("mf_ground_energy_rescaled", (g - form.rescale(e_realized)).abs() <= 1e-9, json!({ "realized_ground": e_realized, "quantization_error": form.quantization_error() }));
        let prg = Prg::ggm(&DEFAULT_PRG_KEY, 22, mh.seed_bits)?;
        let sub = ground_energy(&prg_subsample(&mh, prg)?)?;
        report.exact.insert("prg_subsampled_ground_energy".into(), sub);
        report.verdict("prg_subsample_fidelity", (sub - g).abs() <= 0.05, json!({ "seed_bits": 22, "difference": (sub - g).abs() }));
    }
    let amplified = ksv_amplify(&mh, cfg.t, cfg.ksv_rule())?;
    let seed_len = ((amplified.n as f64).log2().ceil() as usize).pow(2).clamp(1, MAX_SEED_BITS);
    let out_len = amplified.seed_bits;
    let fin = prg_subsample(&amplified, Prg::ggm(&DEFAULT_PRG_KEY, seed_len, out_len)?)?;
    let mut rng = TrialRng::new(cfg.seed, STREAM_SETUP);
    let mut ok = true;
    for _ in 0..8 {
        ok &= fin.sample(&rng.bits(fin.seed_bits))?.len() == fin.n;
    }
    report.verdict("subsampled_terms_well_formed", ok, json!({ "samples": 8 }));
    report.data = json!({
        "pipeline": fin.pipeline(),
        "stages": [
            { "step": "mf", "qubits": mh.n, "seed_bits": mh.seed_bits, "alpha": mh.alpha, "beta": mh.beta },
            { "step": "ksv", "qubits": amplified.n, "seed_bits": amplified.seed_bits, "alpha": amplified.alpha, "beta": amplified.beta },
            { "step": "prg", "qubits": fin.n, "seed_bits": fin.seed_bits },
        ],
    });
    Ok((report, fin))
}

/// Builds a biased set and measures its bias exhaustively.
pub fn cmd_bias_build(cfg: &RunConfig) -> Result<(RunReport, BiasedSet)> {
    let set = construct_biased(cfg.n, cfg.bias)?;
    let measured = bias_of(&set)?;
    let mut report = RunReport::new("bias-build", cfg);
    report.exact.insert("measured_bias".into(), measured);
    report.verdict("bias_within_target", measured <= cfg.bias + 1e-12, json!({ "measured": measured, "target": cfg.bias }));
    report.data = serde_json::to_value(set.summary())?;
    Ok((report, set))
}

/// The normlab suite and the oracle checks selected in `[checks]`.
pub fn cmd_checks(cfg: &RunConfig) -> Result<RunReport> {
    let mut report = RunReport::new("checks", cfg);
    let mut rng = TrialRng::new(cfg.seed, STREAM_SETUP);
    for r in run_suite(&cfg.checks.suite(), &mut rng)? {
        report.verdict(&r.check, r.verdict, json!({ "params": r.params, "lhs": r.lhs, "rhs": r.rhs }));
    }
    for oracle in cfg.checks.oracles() {
        match oracle {
            "smallbias" => {
                let measured = bias_of(&construct_biased(cfg.n, cfg.bias)?)?;
                report.verdict("smallbias", measured <= cfg.bias + 1e-12, json!({ "n": cfg.n, "measured": measured, "target": cfg.bias }));
            }
            "ksv" => {
                let (yes, no) = ksv_yes_no(cfg);
                report.verdict("ksv", yes >= 0.99 && no <= 0.01, json!({ "t": cfg.t, "yes": yes, "no": no }));
            }
            "energy" => {
                let n = cfg.n.min(4);
                let mh = mf_convert(&toy_hamiltonian(n)?)?;
                let (e, psi) = ground_state_of(&energy_operator(&mh)?, n)?;
                let exact = exact_energy(&mh, &psi)?;
                report.verdict("energy", (exact - e).abs() <= 1e-9, json!({ "n": n, "ground": e, "seed_enumeration": exact }));
            }
            other => bail!("unknown oracle {other}"),
        }
    }
    Ok(report)
}
