use std::collections::HashMap;

use qmarg::compiler::{compiled_round_joint, honest_compiled_prover, transparent_qhe, QheScheme};
use qmarg::games::{round_distribution, round_joint, BraidingMode, GameSpec, HonestStrategy, Protocol};
use qmarg::hamiltonian::{energy_operator, ground_state_of, mf_convert, XZHamiltonian, XZTerm};
use qmarg::rng::TrialRng;
use qmarg::smallbias::construct_biased;
use qmarg::Bits;

fn joint_map(j: Vec<(Bits, Bits, f64)>) -> HashMap<(Bits, Bits), f64> {
    let mut m = HashMap::new();
    for (a, b, w) in j {
        *m.entry((a, b)).or_insert(0.0) += w;
    }
    m
}

#[test]
fn every_round_has_identical_branches() {
    for n in [2, 3] {
        let terms = vec![XZTerm::new(1.0, vec![0], "X"), XZTerm::new(-1.0, vec![0, n - 1], "ZZ")];
        let mh = mf_convert(&XZHamiltonian::new(n, terms).unwrap()).unwrap();
        let (_, psi) = ground_state_of(&energy_operator(&mh).unwrap(), n).unwrap();
        let spec = GameSpec::new(mh, construct_biased(n, 0.5).unwrap(), BraidingMode::CoinFirst).unwrap();
        let honest = HonestStrategy::new(psi, &spec.mh, &spec.set).unwrap();
        let prover = honest_compiled_prover(honest.clone(), &spec);
        let qhe = transparent_qhe();
        let mut rng = TrialRng::new(8, n as u64);
        for protocol in [Protocol::Braiding, Protocol::Commutation, Protocol::Anticommutation, Protocol::MixedVsPure, Protocol::Hamiltonian] {
            for (round, _) in round_distribution(&spec, protocol).unwrap() {
                let key = qhe.gen(64, &mut rng).unwrap();
                let plain = joint_map(round_joint(&honest, &round).unwrap());
                let comp = joint_map(compiled_round_joint(&spec, &qhe, &prover, &round, &key).unwrap());
                assert_eq!(plain.len(), comp.len(), "{round:?}");
                for (k, p) in &plain {
                    assert!((comp[k] - p).abs() <= 1e-9, "{round:?}");
                }
            }
        }
    }
}
