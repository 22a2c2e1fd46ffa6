use std::collections::HashMap;

use qmarg::games::{
    exact_accept, magic, round_distribution, run_pauli_braiding, sample_round, verify_hamiltonian, verify_mixed_vs_pure, Basis,
    BraidingMode, ClassicalStrategy, GameSpec, HonestStrategy, Protocol, Question, Responder, Round,
};
use qmarg::hamiltonian::{energy_operator, exact_energy, ground_state_of, mf_convert, AcceptRule, MeasurementHamiltonian, TableEntry, XZHamiltonian, XZTerm};
use qmarg::pauli::PauliString;
use qmarg::rng::TrialRng;
use qmarg::simulator::QuantumState;
use qmarg::smallbias::construct_biased;
use qmarg::Bits;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn instance(n: usize) -> (GameSpec, QuantumState) {
    let mut terms = vec![XZTerm::new(0.8, vec![0], "Z"), XZTerm::new(-0.6, vec![n - 1], "X")];
    for i in 0..n - 1 {
        terms.push(XZTerm::new(0.5, vec![i, i + 1], "ZZ"));
    }
    let mh = mf_convert(&XZHamiltonian::new(n, terms).unwrap()).unwrap();
    let (_, psi) = ground_state_of(&energy_operator(&mh).unwrap(), n).unwrap();
    let spec = GameSpec::new(mh, construct_biased(n, 0.5).unwrap(), BraidingMode::CoinFirst).unwrap();
    (spec, psi)
}

#[test]
fn honest_completeness_up_to_four_qubits() {
    for n in 2..=4 {
        let (spec, psi) = instance(n);
        let honest = HonestStrategy::new(psi.clone(), &spec.mh, &spec.set).unwrap();
        for p in [Protocol::Braiding, Protocol::Commutation, Protocol::Anticommutation, Protocol::MixedVsPure] {
            let acc = exact_accept(&honest, &spec, p).unwrap();
            assert!((acc - 1.0).abs() <= 1e-9, "n={n} {p:?}: {acc}");
        }
        let energy = exact_energy(&spec.mh, &psi).unwrap();
        let ham = exact_accept(&honest, &spec, Protocol::Hamiltonian).unwrap();
        assert!((ham - (1.0 - energy)).abs() <= 1e-9);
        let main = exact_accept(&honest, &spec, Protocol::Main).unwrap();
        assert!(main >= 1.0 - energy / 3.0 - 1e-9);
    }
}

#[test]
fn strict_braiding_is_complete() {
    let (mut spec, psi) = instance(3);
    spec.mode = BraidingMode::Strict;
    let honest = HonestStrategy::new(psi, &spec.mh, &spec.set).unwrap();
    assert!((exact_accept(&honest, &spec, Protocol::Braiding).unwrap() - 1.0).abs() <= 1e-9);
}

fn chi_square_p(observed: &HashMap<Round, u64>, expected: &[(Round, f64)], samples: u64) -> f64 {
    let mut stat = 0.0;
    for (r, p) in expected {
        let e = p * samples as f64;
        let o = *observed.get(r).unwrap_or(&0) as f64;
        stat += (o - e).powi(2) / e;
    }
    assert!(observed.keys().all(|r| expected.iter().any(|(q, _)| q == r)), "sampled a round outside the support");
    let dof = (expected.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

#[test]
fn question_distributions_pass_chi_square() {
    let (spec, _) = instance(2);
    let samples = 100_000u64;
    for protocol in [Protocol::Braiding, Protocol::Commutation, Protocol::Anticommutation] {
        let expected = round_distribution(&spec, protocol).unwrap();
        let mut observed = HashMap::new();
        for t in 0..samples {
            let r = sample_round(&spec, protocol, &mut TrialRng::new(77, t)).unwrap();
            *observed.entry(r).or_insert(0u64) += 1;
        }
        let p = chi_square_p(&observed, &expected, samples);
        assert!(p > 0.001, "{protocol:?}: p = {p}");
    }
}

#[test]
fn main_protocol_mixes_tests_evenly() {
    let (spec, _) = instance(2);
    let samples = 100_000u64;
    let mut counts: HashMap<String, u64> = HashMap::new();
    for t in 0..samples {
        let r = sample_round(&spec, Protocol::Main, &mut TrialRng::new(6, t)).unwrap();
        let key = match r.test {
            qmarg::games::TestId::MixedVsPure => "mvp",
            qmarg::games::TestId::Hamiltonian => "ham",
            _ => "braid",
        };
        *counts.entry(key.into()).or_default() += 1;
    }
    let e = samples as f64 / 3.0;
    let stat: f64 = counts.values().map(|&o| (o as f64 - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new(2.0).unwrap().cdf(stat);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn bob_braiding_marginal_matches_subtest_mix() {
    let (spec, _) = instance(3);
    let mut expected: HashMap<String, f64> = HashMap::new();
    let key = |q: &Option<Question>| match q {
        None => "none".to_string(),
        Some(Question::PureBasis { basis }) => format!("{basis:?}"),
        Some(Question::MsBob { cell, .. }) => format!("cell{cell}"),
        Some(q) => q.tag().to_string(),
    };
    for (r, p) in round_distribution(&spec, Protocol::Braiding).unwrap() {
        *expected.entry(key(&r.bob)).or_default() += p;
    }
    let samples = 100_000u64;
    let mut counts: HashMap<String, u64> = HashMap::new();
    for t in 0..samples {
        let r = sample_round(&spec, Protocol::Braiding, &mut TrialRng::new(13, t)).unwrap();
        *counts.entry(key(&r.bob)).or_default() += 1;
    }
    for (k, p) in &expected {
        let mean = p * samples as f64;
        let sd = (samples as f64 * p * (1.0 - p)).sqrt();
        let o = *counts.get(k).unwrap_or(&0) as f64;
        assert!((o - mean).abs() <= 5.0 * sd, "{k}: {o} vs {mean}");
    }
    assert!(counts.keys().all(|k| expected.contains_key(k)));
}

#[test]
fn magic_square_separation() {
    assert_eq!(magic::row_column_classical_best(), 8);
    assert!((magic::row_column_quantum_value().unwrap() - 1.0).abs() <= 1e-12);
    let (spec, psi) = instance(2);
    let honest = HonestStrategy::new(psi, &spec.mh, &spec.set).unwrap();
    assert!((exact_accept(&honest, &spec, Protocol::Anticommutation).unwrap() - 1.0).abs() <= 1e-9);
    for seed in 0..20u64 {
        let hash = move |q: &Question, salt: u64| {
            let s = serde_json::to_string(q).unwrap();
            let h = blake3::hash(format!("{seed}:{salt}:{s}").as_bytes());
            h.as_bytes()[0]
        };
        let alice: Responder = Box::new(move |q| {
            let k = q.answer_arity(2);
            let byte = hash(q, 0);
            Ok(vec![(Bits::from_bools(&(0..k).map(|i| byte >> i & 1 == 1).collect::<Vec<_>>()), 1.0)])
        });
        let bob: Responder = Box::new(move |q| {
            let k = q.answer_arity(2);
            let byte = hash(q, 1);
            Ok(vec![(Bits::from_bools(&(0..k).map(|i| byte >> i & 1 == 1).collect::<Vec<_>>()), 1.0)])
        });
        let s = ClassicalStrategy::new(2, alice, bob);
        assert!(exact_accept(&s, &spec, Protocol::Anticommutation).unwrap() <= 17.0 / 18.0 + 1e-12);
    }
}

#[test]
fn honest_braiding_runs_always_accept() {
    let (spec, psi) = instance(2);
    let honest = HonestStrategy::new(psi, &spec.mh, &spec.set).unwrap();
    for t in 0..300 {
        let tr = run_pauli_braiding(&honest, &spec, &mut TrialRng::new(3, t)).unwrap();
        assert!(tr.verdict);
    }
}

#[test]
fn hamiltonian_corrections_and_identity_terms() {
    let n = 3;
    let all_z = MeasurementHamiltonian::from_table(
        n,
        vec![TableEntry { w: "ZZZ".parse::<PauliString>().unwrap(), accept: AcceptRule::Parity { mask: Bits::parse("111").unwrap(), odd: false } }],
    )
    .unwrap();
    let seed = Bits::zeros(all_z.seed_bits);
    let v = Bits::parse("101").unwrap();
    assert_eq!(verify_hamiltonian(&all_z, &seed, &Bits::zeros(2 * n), &v).unwrap(), all_z.accept(&seed, &v).unwrap());
    let ident = MeasurementHamiltonian::from_table(
        n,
        vec![TableEntry { w: "III".parse::<PauliString>().unwrap(), accept: AcceptRule::Parity { mask: Bits::parse("100").unwrap(), odd: false } }],
    )
    .unwrap();
    let seed = Bits::zeros(ident.seed_bits);
    assert!(verify_hamiltonian(&ident, &seed, &Bits::parse("111111").unwrap(), &Bits::parse("111").unwrap()).unwrap());
    let bob_q = Question::Mixed { seed };
    assert!(verify_mixed_vs_pure(&ident, Basis::X, &Bits::parse("010").unwrap(), &bob_q, &Bits::parse("101").unwrap()).unwrap());
}
