use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::magic::lines_through;
use super::{verify, Answer, Basis, GameTranscript, HexBits, Question, TwoProverStrategy};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::hamiltonian::{MeasurementHamiltonian, ENUMERATION_LIMIT};
use crate::rng::TrialRng;
use crate::simulator::QuantumState;
use crate::smallbias::BiasedSet;

/// How the braiding test chooses between its two subtests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BraidingMode {
    /// A fair coin picks the subtest; a parity mismatch accepts outright.
    #[default]
    CoinFirst,
    /// The parity `a·b` picks the subtest.
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestId {
    Commutation,
    Anticommutation,
    BraidingAutoAccept,
    MixedVsPure,
    Hamiltonian,
}

/// Which game to play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Main,
    Braiding,
    /// Commutation test on pairs with `a·b = 0`.
    Commutation,
    /// Magic-square test on pairs with `a·b = 1`.
    Anticommutation,
    MixedVsPure,
    Hamiltonian,
}

/// The questions of one round.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Round {
    pub test: TestId,
    pub alice: Option<Question>,
    pub bob: Option<Question>,
}

impl Round {
    fn auto_accept() -> Self {
        Round { test: TestId::BraidingAutoAccept, alice: None, bob: None }
    }
}

/// Public parameters shared by the verifier and the provers.
#[derive(Clone, Debug)]
pub struct GameSpec {
    pub mh: MeasurementHamiltonian,
    pub set: BiasedSet,
    pub mode: BraidingMode,
    members: Vec<Bits>,
}

impl GameSpec {
    pub fn new(mh: MeasurementHamiltonian, set: BiasedSet, mode: BraidingMode) -> Result<Self> {
        if set.n() != mh.n {
            return Err(Error::DimensionMismatch(format!("biased set over {} bits, hamiltonian on {} qubits", set.n(), mh.n)));
        }
        let members = set.members().collect();
        Ok(GameSpec { mh, set, mode, members })
    }

    pub fn n(&self) -> usize {
        self.mh.n
    }

    pub fn pair(&self, ra: u64, rb: u64) -> Result<(Bits, Bits)> {
        let get = |r: u64| {
            self.members
                .get(r as usize)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(format!("index {r} outside set of size {}", self.members.len())))
        };
        Ok((get(ra)?, get(rb)?))
    }

    fn set_size(&self) -> u64 {
        self.members.len() as u64
    }
}

fn com_rounds(ra: u64, rb: u64) -> Vec<(Round, f64)> {
    [Basis::Z, Basis::X]
        .into_iter()
        .map(|basis| {
            (Round { test: TestId::Commutation, alice: Some(Question::Com { ra, rb }), bob: Some(Question::PureBasis { basis }) }, 0.5)
        })
        .collect()
}

fn ms_bob(ra: u64, rb: u64, cell: u8) -> Question {
    match cell {
        2 => Question::PureBasis { basis: Basis::Z },
        4 => Question::PureBasis { basis: Basis::X },
        _ => Question::MsBob { ra, rb, cell },
    }
}

fn ms_round(ra: u64, rb: u64, cell: u8, cells: [u8; 3]) -> Round {
    Round { test: TestId::Anticommutation, alice: Some(Question::MsAlice { ra, rb, cells }), bob: Some(ms_bob(ra, rb, cell)) }
}

fn anti_rounds(ra: u64, rb: u64) -> Vec<(Round, f64)> {
    let mut out = Vec::with_capacity(18);
    for cell in 1..=9u8 {
        for line in lines_through(cell).expect("cell in range") {
            out.push((ms_round(ra, rb, cell, line), 1.0 / 18.0));
        }
    }
    out
}

fn seeds(mh: &MeasurementHamiltonian) -> Result<impl Iterator<Item = Bits> + '_> {
    if mh.seed_bits > ENUMERATION_LIMIT {
        return Err(Error::SeedSpaceTooLarge { bits: mh.seed_bits, limit: ENUMERATION_LIMIT });
    }
    Ok((0..1u64 << mh.seed_bits).map(|s| Bits::from_index(s, mh.seed_bits)))
}

/// Every round of `protocol` with its probability.
pub fn round_distribution(spec: &GameSpec, protocol: Protocol) -> Result<Vec<(Round, f64)>> {
    let size = spec.set_size();
    let pairs = || (0..size).flat_map(move |ra| (0..size).map(move |rb| (ra, rb)));
    let dot = |ra, rb| -> Result<bool> {
        let (a, b) = spec.pair(ra, rb)?;
        a.dot(&b)
    };
    let conditional = |want: bool, make: fn(u64, u64) -> Vec<(Round, f64)>| -> Result<Vec<(Round, f64)>> {
        let mut chosen = Vec::new();
        for (ra, rb) in pairs() {
            if dot(ra, rb)? == want {
                chosen.push((ra, rb));
            }
        }
        if chosen.is_empty() {
            return Err(Error::InvalidArgument(format!("no pair in the set has a·b = {}", want as u8)));
        }
        let p = 1.0 / chosen.len() as f64;
        Ok(chosen.into_iter().flat_map(|(ra, rb)| make(ra, rb).into_iter().map(move |(r, q)| (r, p * q))).collect())
    };
    let out = match protocol {
        Protocol::Main => {
            let mut out = Vec::new();
            for p in [Protocol::Braiding, Protocol::MixedVsPure, Protocol::Hamiltonian] {
                out.extend(round_distribution(spec, p)?.into_iter().map(|(r, q)| (r, q / 3.0)));
            }
            out
        }
        Protocol::Braiding => {
            let p = 1.0 / (size * size) as f64;
            let mut out = Vec::new();
            let mut auto = 0.0;
            for (ra, rb) in pairs() {
                let ab = dot(ra, rb)?;
                let (sub, w) = match spec.mode {
                    BraidingMode::CoinFirst => {
                        auto += 0.5 * p;
                        (if ab { anti_rounds(ra, rb) } else { com_rounds(ra, rb) }, 0.5 * p)
                    }
                    BraidingMode::Strict => (if ab { anti_rounds(ra, rb) } else { com_rounds(ra, rb) }, p),
                };
                out.extend(sub.into_iter().map(|(r, q)| (r, q * w)));
            }
            if auto > 0.0 {
                out.push((Round::auto_accept(), auto));
            }
            out
        }
        Protocol::Commutation => conditional(false, com_rounds)?,
        Protocol::Anticommutation => conditional(true, anti_rounds)?,
        Protocol::MixedVsPure => {
            let weight = 1.0 / (1u64 << spec.mh.seed_bits) as f64;
            let mut out = Vec::new();
            for basis in [Basis::X, Basis::Z] {
                let alice = Some(Question::PureBasis { basis });
                out.push((Round { test: TestId::MixedVsPure, alice: alice.clone(), bob: alice.clone() }, 0.25));
                for seed in seeds(&spec.mh)? {
                    out.push((Round { test: TestId::MixedVsPure, alice: alice.clone(), bob: Some(Question::Mixed { seed }) }, 0.25 * weight));
                }
            }
            out
        }
        Protocol::Hamiltonian => {
            let weight = 1.0 / (1u64 << spec.mh.seed_bits) as f64;
            seeds(&spec.mh)?
                .map(|seed| (Round { test: TestId::Hamiltonian, alice: Some(Question::Tele), bob: Some(Question::Mixed { seed }) }, weight))
                .collect()
        }
    };
    Ok(out)
}

/// Draws one round of `protocol`.
pub fn sample_round(spec: &GameSpec, protocol: Protocol, rng: &mut TrialRng) -> Result<Round> {
    let size = spec.set_size();
    let pick_pair = |rng: &mut TrialRng, want: Option<bool>| -> Result<(u64, u64)> {
        for _ in 0..100_000 {
            let (ra, rb) = (rng.below(size), rng.below(size));
            let (a, b) = spec.pair(ra, rb)?;
            if want.is_none_or(|w| a.dot(&b).unwrap() == w) {
                return Ok((ra, rb));
            }
        }
        Err(Error::InvalidArgument("no pair with the requested parity".into()))
    };
    let com = |rng: &mut TrialRng, ra, rb| {
        let basis = if rng.coin() { Basis::X } else { Basis::Z };
        Round { test: TestId::Commutation, alice: Some(Question::Com { ra, rb }), bob: Some(Question::PureBasis { basis }) }
    };
    let anti = |rng: &mut TrialRng, ra, rb| {
        let cell = rng.below(9) as u8 + 1;
        let line = lines_through(cell).expect("cell in range")[rng.below(2) as usize];
        ms_round(ra, rb, cell, line)
    };
    Ok(match protocol {
        Protocol::Main => {
            let p = [Protocol::Braiding, Protocol::MixedVsPure, Protocol::Hamiltonian][rng.below(3) as usize];
            sample_round(spec, p, rng)?
        }
        Protocol::Braiding => {
            let (ra, rb) = pick_pair(rng, None)?;
            let (a, b) = spec.pair(ra, rb)?;
            let ab = a.dot(&b)?;
            let want = match spec.mode {
                BraidingMode::CoinFirst => rng.coin(),
                BraidingMode::Strict => ab,
            };
            match (want == ab, ab) {
                (false, _) => Round::auto_accept(),
                (true, false) => com(rng, ra, rb),
                (true, true) => anti(rng, ra, rb),
            }
        }
        Protocol::Commutation => {
            let (ra, rb) = pick_pair(rng, Some(false))?;
            com(rng, ra, rb)
        }
        Protocol::Anticommutation => {
            let (ra, rb) = pick_pair(rng, Some(true))?;
            anti(rng, ra, rb)
        }
        Protocol::MixedVsPure => {
            let basis = if rng.coin() { Basis::X } else { Basis::Z };
            let alice = Some(Question::PureBasis { basis });
            let bob = if rng.coin() { Some(Question::Mixed { seed: rng.bits(spec.mh.seed_bits) }) } else { alice.clone() };
            Round { test: TestId::MixedVsPure, alice, bob }
        }
        Protocol::Hamiltonian => Round {
            test: TestId::Hamiltonian,
            alice: Some(Question::Tele),
            bob: Some(Question::Mixed { seed: rng.bits(spec.mh.seed_bits) }),
        },
    })
}

fn checked_alice<S: TwoProverStrategy + ?Sized>(s: &S, q: &Question, st: &QuantumState) -> Result<Vec<(Answer, QuantumState)>> {
    let out = s.alice(q, st)?;
    for (a, _) in &out {
        q.check_answer(s.n(), a)?;
    }
    Ok(out)
}

fn checked_bob<S: TwoProverStrategy + ?Sized>(s: &S, q: &Question, st: &QuantumState) -> Result<Vec<(Answer, f64)>> {
    let out = s.bob(q, st)?;
    for (a, _) in &out {
        q.check_answer(s.n(), a)?;
    }
    Ok(out)
}

/// Joint distribution of `(alice answer, bob answer)` on one round.
pub fn round_joint<S: TwoProverStrategy + ?Sized>(strategy: &S, round: &Round) -> Result<Vec<(Answer, Answer, f64)>> {
    let (Some(aq), Some(bq)) = (&round.alice, &round.bob) else {
        return Ok(Vec::new());
    };
    let init = strategy.initial_state();
    let norm = init.norm_sqr();
    let mut out = Vec::new();
    for (a, st) in checked_alice(strategy, aq, &init)? {
        for (b, w) in checked_bob(strategy, bq, &st)? {
            out.push((a.clone(), b, w / norm));
        }
    }
    Ok(out)
}

/// Exact acceptance probability of one round.
pub fn round_accept<S: TwoProverStrategy + ?Sized>(strategy: &S, spec: &GameSpec, round: &Round) -> Result<f64> {
    if round.test == TestId::BraidingAutoAccept {
        return Ok(1.0);
    }
    let mut p = 0.0;
    for (a, b, w) in round_joint(strategy, round)? {
        if verify(spec, round, Some(&a), Some(&b))? {
            p += w;
        }
    }
    Ok(p)
}

type AliceBranches = Vec<(Answer, QuantumState)>;

/// Exact acceptance probability of `protocol`, caching prover responses by
/// canonical question.
pub fn exact_accept<S: TwoProverStrategy + ?Sized>(strategy: &S, spec: &GameSpec, protocol: Protocol) -> Result<f64> {
    if strategy.n() != spec.n() {
        return Err(Error::DimensionMismatch(format!("strategy on n = {}, game on n = {}", strategy.n(), spec.n())));
    }
    let init = strategy.initial_state();
    let norm = init.norm_sqr();
    let mut alice_cache: HashMap<Question, AliceBranches> = HashMap::new();
    let mut bob_cache: HashMap<(Question, usize, Question), Vec<(Answer, f64)>> = HashMap::new();
    let mut total = 0.0;
    for (round, prob) in round_distribution(spec, protocol)? {
        let (Some(aq), Some(bq)) = (&round.alice, &round.bob) else {
            total += prob;
            continue;
        };
        let ka = strategy.canonical(aq);
        if !alice_cache.contains_key(&ka) {
            alice_cache.insert(ka.clone(), checked_alice(strategy, &ka, &init)?);
        }
        let kb = strategy.canonical(bq);
        let mut p = 0.0;
        for (i, (a, st)) in alice_cache[&ka].iter().enumerate() {
            let key = (ka.clone(), i, kb.clone());
            if !bob_cache.contains_key(&key) {
                bob_cache.insert(key.clone(), checked_bob(strategy, &kb, st)?);
            }
            for (b, w) in &bob_cache[&key] {
                if verify(spec, &round, Some(a), Some(b))? {
                    p += w;
                }
            }
        }
        total += prob * p / norm;
    }
    Ok(total)
}

/// Plays `round` once, sampling the provers' outcomes.
pub fn play_round<S: TwoProverStrategy + ?Sized>(strategy: &S, spec: &GameSpec, round: Round, rng: &mut TrialRng) -> Result<GameTranscript> {
    let (Some(aq), Some(bq)) = (&round.alice, &round.bob) else {
        return Ok(GameTranscript {
            test: round.test,
            alice_question: None,
            alice_answer: None,
            bob_question: None,
            bob_answer: None,
            verdict: verify(spec, &round, None, None)?,
            rng_trail: rng.take_trail(),
        });
    };
    let init = strategy.initial_state();
    let branches = checked_alice(strategy, aq, &init)?;
    let weights: Vec<f64> = branches.iter().map(|(_, s)| s.norm_sqr()).collect();
    let (a, st) = branches.into_iter().nth(rng.pick_weighted(&weights)).expect("nonempty branches");
    let dist = checked_bob(strategy, bq, &st)?;
    let weights: Vec<f64> = dist.iter().map(|d| d.1).collect();
    let (b, _) = dist.into_iter().nth(rng.pick_weighted(&weights)).expect("nonempty distribution");
    let verdict = verify(spec, &round, Some(&a), Some(&b))?;
    Ok(GameTranscript {
        test: round.test,
        alice_question: round.alice.clone(),
        alice_answer: Some(HexBits::from(&a)),
        bob_question: round.bob.clone(),
        bob_answer: Some(HexBits::from(&b)),
        verdict,
        rng_trail: rng.take_trail(),
    })
}

fn run<S: TwoProverStrategy + ?Sized>(strategy: &S, spec: &GameSpec, protocol: Protocol, rng: &mut TrialRng) -> Result<GameTranscript> {
    if strategy.n() != spec.n() {
        return Err(Error::DimensionMismatch(format!("strategy on n = {}, game on n = {}", strategy.n(), spec.n())));
    }
    let round = sample_round(spec, protocol, rng)?;
    play_round(strategy, spec, round, rng)
}

pub fn run_main<S: TwoProverStrategy + ?Sized>(strategy: &S, spec: &GameSpec, rng: &mut TrialRng) -> Result<GameTranscript> {
    run(strategy, spec, Protocol::Main, rng)
}

pub fn run_pauli_braiding<S: TwoProverStrategy + ?Sized>(strategy: &S, spec: &GameSpec, rng: &mut TrialRng) -> Result<GameTranscript> {
    run(strategy, spec, Protocol::Braiding, rng)
}

pub fn run_mixed_vs_pure<S: TwoProverStrategy + ?Sized>(strategy: &S, spec: &GameSpec, rng: &mut TrialRng) -> Result<GameTranscript> {
    run(strategy, spec, Protocol::MixedVsPure, rng)
}

pub fn run_hamiltonian_test<S: TwoProverStrategy + ?Sized>(strategy: &S, spec: &GameSpec, rng: &mut TrialRng) -> Result<GameTranscript> {
    run(strategy, spec, Protocol::Hamiltonian, rng)
}

#[cfg(test)]
mod tests {
    use super::super::{ClassicalStrategy, HonestStrategy};
    use super::*;
    use crate::hamiltonian::{exact_energy, ground_state_of, energy_operator, mf_convert, XZHamiltonian, XZTerm};
    use crate::smallbias::construct_biased;

    fn toy(n: usize) -> (GameSpec, QuantumState) {
        let mut terms = vec![XZTerm::new(-1.0, vec![0], "Z"), XZTerm::new(0.5, vec![n - 1], "X")];
        if n > 1 {
            terms.push(XZTerm::new(0.7, vec![0, 1], "XX"));
        }
        let mh = mf_convert(&XZHamiltonian::new(n, terms).unwrap()).unwrap();
        let (_, psi) = ground_state_of(&energy_operator(&mh).unwrap(), n).unwrap();
        let spec = GameSpec::new(mh, construct_biased(n, 0.5).unwrap(), BraidingMode::CoinFirst).unwrap();
        (spec, psi)
    }

    #[test]
    fn distributions_sum_to_one() {
        let (spec, _) = toy(3);
        for p in [Protocol::Main, Protocol::Braiding, Protocol::Commutation, Protocol::Anticommutation, Protocol::MixedVsPure, Protocol::Hamiltonian] {
            let total: f64 = round_distribution(&spec, p).unwrap().iter().map(|r| r.1).sum();
            assert!((total - 1.0).abs() < 1e-9, "{p:?}: {total}");
        }
    }

    #[test]
    fn honest_completeness_small() {
        for n in [2, 3] {
            let (spec, psi) = toy(n);
            let honest = HonestStrategy::new(psi.clone(), &spec.mh, &spec.set).unwrap();
            for p in [Protocol::Braiding, Protocol::Commutation, Protocol::Anticommutation, Protocol::MixedVsPure] {
                let acc = exact_accept(&honest, &spec, p).unwrap();
                assert!((acc - 1.0).abs() < 1e-9, "n={n} {p:?}: {acc}");
            }
            let ham = exact_accept(&honest, &spec, Protocol::Hamiltonian).unwrap();
            let energy = exact_energy(&spec.mh, &psi).unwrap();
            assert!((ham - (1.0 - energy)).abs() < 1e-9);
            let main = exact_accept(&honest, &spec, Protocol::Main).unwrap();
            assert!((main - (1.0 - energy / 3.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_strategy_fails_somewhere() {
        let (spec, _) = toy(2);
        let zeros = ClassicalStrategy::zeros(2);
        assert!(exact_accept(&zeros, &spec, Protocol::Main).unwrap() < 1.0 - 1e-6);
        assert!((exact_accept(&zeros, &spec, Protocol::Commutation).unwrap() - 1.0).abs() < 1e-12);
        assert!((exact_accept(&zeros, &spec, Protocol::MixedVsPure).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn replayed_verdicts_match() {
        let (spec, psi) = toy(2);
        let honest = HonestStrategy::new(psi, &spec.mh, &spec.set).unwrap();
        let zeros = ClassicalStrategy::zeros(2);
        for t in 0..1000u64 {
            let mut rng = TrialRng::new(21, t);
            let tr = if t % 2 == 0 { run_main(&honest, &spec, &mut rng) } else { run_main(&zeros, &spec, &mut rng) }.unwrap();
            assert_eq!(tr.recompute_verdict(&spec).unwrap(), tr.verdict);
            let back: GameTranscript = serde_json::from_str(&tr.to_json()).unwrap();
            assert_eq!(back, tr);
        }
    }

    #[test]
    fn mismatch_branch_accepts_any_strategy() {
        let (spec, _) = toy(2);
        let r = Round::auto_accept();
        let zeros = ClassicalStrategy::zeros(2);
        assert_eq!(round_accept(&zeros, &spec, &r).unwrap(), 1.0);
    }

    #[test]
    fn strict_mode_never_auto_accepts() {
        let (mut spec, psi) = toy(2);
        spec.mode = BraidingMode::Strict;
        assert!(round_distribution(&spec, Protocol::Braiding).unwrap().iter().all(|(r, _)| r.test != TestId::BraidingAutoAccept));
        let honest = HonestStrategy::new(psi, &spec.mh, &spec.set).unwrap();
        assert!((exact_accept(&honest, &spec, Protocol::Braiding).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_bob_collides_with_probability_two_to_minus_n() {
        let (spec, _) = toy(3);
        let n = 3;
        let alice: super::super::Responder = Box::new(move |q| Ok(vec![(Bits::zeros(q.answer_arity(n)), 1.0)]));
        let bob: super::super::Responder = Box::new(move |q| {
            let k = q.answer_arity(n);
            Ok((0..1u64 << k).map(|i| (Bits::from_index(i, k), 1.0 / (1u64 << k) as f64)).collect())
        });
        let s = ClassicalStrategy::new(n, alice, bob);
        for basis in [Basis::X, Basis::Z] {
            let q = Some(Question::PureBasis { basis });
            let r = Round { test: TestId::MixedVsPure, alice: q.clone(), bob: q };
            assert!((round_accept(&s, &spec, &r).unwrap() - 0.125).abs() < 1e-12);
        }
    }
}
