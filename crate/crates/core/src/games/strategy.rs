use std::collections::HashMap;

use super::magic::cell_word;
use super::{Answer, Question};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::hamiltonian::MeasurementHamiltonian;
use crate::pauli::{PauliString, PauliWord};
use crate::simulator::{MeasurementOutcome, QuantumState};
use crate::smallbias::BiasedSet;

/// A pair of provers acting on one shared state.
///
/// Alice returns her possible answers with the unnormalized post-measurement
/// states. Bob returns his answers with their unnormalized weights.
pub trait TwoProverStrategy {
    fn n(&self) -> usize;
    fn initial_state(&self) -> QuantumState;
    fn alice(&self, q: &Question, state: &QuantumState) -> Result<Vec<(Answer, QuantumState)>>;
    fn bob(&self, q: &Question, state: &QuantumState) -> Result<Vec<(Answer, f64)>>;
    /// A representative question that receives the same answers, used as a
    /// cache key.
    fn canonical(&self, q: &Question) -> Question {
        q.clone()
    }
}

impl<S: TwoProverStrategy + ?Sized> TwoProverStrategy for Box<S> {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn initial_state(&self) -> QuantumState {
        (**self).initial_state()
    }

    fn alice(&self, q: &Question, state: &QuantumState) -> Result<Vec<(Answer, QuantumState)>> {
        (**self).alice(q, state)
    }

    fn bob(&self, q: &Question, state: &QuantumState) -> Result<Vec<(Answer, f64)>> {
        (**self).bob(q, state)
    }

    fn canonical(&self, q: &Question) -> Question {
        (**self).canonical(q)
    }
}

/// The provers described by the protocols.
///
/// They share `n+1` EPR pairs (Alice's halves first). The witness is
/// prepended when Alice is asked to teleport, so Bob's `n+1` qubits are
/// always the last ones in the register.
#[derive(Clone, Debug)]
pub struct HonestStrategy {
    n: usize,
    witness: QuantumState,
    mh: MeasurementHamiltonian,
    set: BiasedSet,
    members: Vec<Bits>,
    canon_index: Vec<u64>,
    canon_seed: Option<HashMap<Bits, Bits>>,
}

const CANON_SEED_LIMIT: usize = 16;

impl HonestStrategy {
    pub fn new(witness: QuantumState, mh: &MeasurementHamiltonian, set: &BiasedSet) -> Result<Self> {
        let n = mh.n;
        if witness.qubits() != n || set.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "witness has {} qubits, hamiltonian {n}, biased set {}",
                witness.qubits(),
                set.n()
            )));
        }
        QuantumState::prepare_epr(n + 1)?;
        let members: Vec<Bits> = set.members().collect();
        let mut first: HashMap<&Bits, u64> = HashMap::new();
        let canon_index = members.iter().enumerate().map(|(i, m)| *first.entry(m).or_insert(i as u64)).collect();
        let canon_seed = (mh.seed_bits <= CANON_SEED_LIMIT)
            .then(|| -> Result<HashMap<Bits, Bits>> {
                let mut by_w: HashMap<PauliString, Bits> = HashMap::new();
                let mut out = HashMap::new();
                for s in 0..1u64 << mh.seed_bits {
                    let seed = Bits::from_index(s, mh.seed_bits);
                    let rep = by_w.entry(mh.sample(&seed)?).or_insert_with(|| seed.clone()).clone();
                    out.insert(seed, rep);
                }
                Ok(out)
            })
            .transpose()?;
        Ok(HonestStrategy {
            n,
            witness: witness.normalized(),
            mh: mh.clone(),
            set: set.clone(),
            members,
            canon_index,
            canon_seed,
        })
    }

    fn member(&self, r: u64) -> Result<&Bits> {
        self.members
            .get(r as usize)
            .ok_or_else(|| Error::InvalidArgument(format!("index {r} outside set of size {}", self.set.len())))
    }

    fn mixed_bases(&self, seed: &Bits) -> Result<PauliString> {
        self.mh.sample(seed)
    }

    /// Alice's `n+1` qubits, first EPR half leading.
    fn alice_qubits(&self, state: &QuantumState) -> Vec<usize> {
        let base = state.qubits() - 2 * (self.n + 1);
        (base..base + self.n + 1).collect()
    }

    fn bob_qubits(&self, state: &QuantumState) -> Vec<usize> {
        let q = state.qubits();
        (q - self.n - 1..q).collect()
    }
}

fn sequential(state: &QuantumState, qubits: &[usize], words: &[PauliWord]) -> Result<Vec<(Bits, QuantumState)>> {
    let mut acc = vec![(Vec::<bool>::new(), state.clone())];
    for w in words {
        let mut next = Vec::new();
        for (bits, st) in acc {
            for MeasurementOutcome { bits: b, branch, .. } in st.measure_observable_branches(qubits, w)? {
                let mut v = bits.clone();
                v.push(b.get(0));
                next.push((v, branch));
            }
        }
        acc = next;
    }
    Ok(acc.into_iter().map(|(v, s)| (Bits::from_bools(&v), s)).collect())
}

fn bases(state: &QuantumState, qubits: &[usize], w: &PauliString) -> Result<Vec<(Bits, QuantumState)>> {
    Ok(state.measure_bases_branches(qubits, w)?.into_iter().map(|o| (o.bits, o.branch)).collect())
}

impl TwoProverStrategy for HonestStrategy {
    fn n(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> QuantumState {
        QuantumState::prepare_epr(self.n + 1).expect("size checked at construction")
    }

    fn alice(&self, q: &Question, state: &QuantumState) -> Result<Vec<(Answer, QuantumState)>> {
        let mine = self.alice_qubits(state);
        let last = &mine[1..];
        match q {
            Question::Com { ra, rb } => {
                let (a, b) = (self.member(*ra)?, self.member(*rb)?);
                sequential(state, last, &[PauliWord::z_type(a.clone()), PauliWord::x_type(b.clone())])
            }
            Question::MsAlice { ra, rb, cells } => {
                let (a, b) = (self.member(*ra)?, self.member(*rb)?);
                let words = cells.iter().map(|&c| cell_word(c, a, b)).collect::<Result<Vec<_>>>()?;
                sequential(state, &mine, &words)
            }
            Question::PureBasis { basis } => bases(state, last, &basis.all(self.n)),
            Question::Mixed { seed } => bases(state, last, &self.mixed_bases(seed)?),
            Question::Tele => {
                let full = self.witness.tensor(state)?;
                let pairs: Vec<(usize, usize)> = (0..self.n).map(|i| (i, self.n + 1 + i)).collect();
                Ok(full
                    .teleport_branches(&pairs)?
                    .into_iter()
                    .map(|t| (t.ux.concat(&t.uz), t.branch))
                    .collect())
            }
            Question::MsBob { .. } => Err(Error::Protocol("Alice never receives a single-cell question".into())),
        }
    }

    fn bob(&self, q: &Question, state: &QuantumState) -> Result<Vec<(Answer, f64)>> {
        let mine = self.bob_qubits(state);
        let last = &mine[1..];
        let outcomes = match q {
            Question::PureBasis { basis } => state.measure_bases_branches(last, &basis.all(self.n))?,
            Question::Mixed { seed } => state.measure_bases_branches(last, &self.mixed_bases(seed)?)?,
            Question::MsBob { ra, rb, cell } => {
                let w = cell_word(*cell, self.member(*ra)?, self.member(*rb)?)?;
                state.measure_observable_branches(&mine, &w)?
            }
            q => return Err(Error::Protocol(format!("Bob never receives {} questions", q.tag()))),
        };
        Ok(outcomes.into_iter().map(|o| (o.bits, o.probability)).collect())
    }

    fn canonical(&self, q: &Question) -> Question {
        let ci = |r: &u64| self.canon_index.get(*r as usize).copied().unwrap_or(*r);
        match q {
            Question::Com { ra, rb } => Question::Com { ra: ci(ra), rb: ci(rb) },
            Question::MsAlice { ra, rb, cells } => Question::MsAlice { ra: ci(ra), rb: ci(rb), cells: *cells },
            Question::MsBob { ra, rb, cell } => Question::MsBob { ra: ci(ra), rb: ci(rb), cell: *cell },
            Question::Mixed { seed } => match self.canon_seed.as_ref().and_then(|m| m.get(seed)) {
                Some(rep) => Question::Mixed { seed: rep.clone() },
                None => q.clone(),
            },
            q => q.clone(),
        }
    }
}

/// A classical responder: a distribution over answers for each question.
pub type Responder = Box<dyn Fn(&Question) -> Result<Vec<(Answer, f64)>> + Send + Sync>;

/// Provers that ignore the quantum state.
pub struct ClassicalStrategy {
    n: usize,
    alice: Responder,
    bob: Responder,
}

impl ClassicalStrategy {
    pub fn new(n: usize, alice: Responder, bob: Responder) -> Self {
        ClassicalStrategy { n, alice, bob }
    }

    /// Deterministic answers read from tables; missing questions are errors.
    pub fn from_tables(n: usize, alice: HashMap<Question, Answer>, bob: HashMap<Question, Answer>) -> Self {
        let lookup = |t: HashMap<Question, Answer>, who: &'static str| -> Responder {
            Box::new(move |q| {
                t.get(q)
                    .map(|a| vec![(a.clone(), 1.0)])
                    .ok_or_else(|| Error::IncompleteTable(format!("{who} has no answer for {q:?}")))
            })
        };
        ClassicalStrategy::new(n, lookup(alice, "alice"), lookup(bob, "bob"))
    }

    /// Both provers answer all zeros.
    pub fn zeros(n: usize) -> Self {
        let z = move |q: &Question| Ok(vec![(Bits::zeros(q.answer_arity(n)), 1.0)]);
        ClassicalStrategy::new(n, Box::new(z), Box::new(z))
    }
}

impl TwoProverStrategy for ClassicalStrategy {
    fn n(&self) -> usize {
        self.n
    }

    fn initial_state(&self) -> QuantumState {
        QuantumState::basis(0, 0).expect("empty register")
    }

    fn alice(&self, q: &Question, state: &QuantumState) -> Result<Vec<(Answer, QuantumState)>> {
        Ok((self.alice)(q)?.into_iter().map(|(a, p)| (a, state.scaled(p.sqrt()))).collect())
    }

    fn bob(&self, q: &Question, state: &QuantumState) -> Result<Vec<(Answer, f64)>> {
        let norm = state.norm_sqr();
        Ok((self.bob)(q)?.into_iter().map(|(a, p)| (a, p * norm)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{mf_convert, XZHamiltonian, XZTerm};
    use crate::rng::TrialRng;
    use crate::smallbias::construct_biased;

    fn fixture(n: usize) -> HonestStrategy {
        let h = XZHamiltonian::new(n, vec![XZTerm::new(1.0, vec![0], "Z")]).unwrap();
        let mh = mf_convert(&h).unwrap();
        let set = construct_biased(n, 0.5).unwrap();
        HonestStrategy::new(QuantumState::basis(n, 0).unwrap(), &mh, &set).unwrap()
    }

    #[test]
    fn commutation_observables_commute_when_ab_even() {
        let s = fixture(4);
        for ra in 0..s.set.len() {
            for rb in 0..s.set.len() {
                let (a, b) = (s.member(ra).unwrap(), s.member(rb).unwrap());
                let za = PauliWord::z_type(a.clone());
                let xb = PauliWord::x_type(b.clone());
                assert_eq!(za.commutes_with(&xb).unwrap(), !a.dot(b).unwrap());
            }
        }
    }

    #[test]
    fn bob_pure_basis_marginal_is_uniform() {
        let s = fixture(3);
        let st = s.initial_state();
        let dist = s.bob(&Question::PureBasis { basis: super::super::Basis::X }, &st).unwrap();
        assert_eq!(dist.len(), 8);
        let mut rng = TrialRng::new(12, 0);
        let draws = 16_000;
        let mut counts = [0usize; 8];
        let w: Vec<f64> = dist.iter().map(|d| d.1).collect();
        for _ in 0..draws {
            counts[dist[rng.pick_weighted(&w)].0.to_index() as usize] += 1;
        }
        let (p, n) = (1.0 / 8.0, draws as f64);
        for c in counts {
            assert!((c as f64 - n * p).abs() < 5.0 * (n * p * (1.0 - p)).sqrt());
        }
    }

    #[test]
    fn dimension_checks() {
        let h = XZHamiltonian::new(2, vec![XZTerm::new(1.0, vec![0], "Z")]).unwrap();
        let mh = mf_convert(&h).unwrap();
        let set = construct_biased(3, 0.5).unwrap();
        assert!(HonestStrategy::new(QuantumState::basis(2, 0).unwrap(), &mh, &set).is_err());
        let set = construct_biased(2, 0.5).unwrap();
        assert!(HonestStrategy::new(QuantumState::basis(3, 0).unwrap(), &mh, &set).is_err());
    }

    #[test]
    fn tables_report_missing_questions() {
        let s = ClassicalStrategy::from_tables(2, HashMap::new(), HashMap::new());
        let st = s.initial_state();
        assert!(matches!(s.alice(&Question::Tele, &st), Err(Error::IncompleteTable(_))));
    }
}
