//! Two-prover games: questions, verifier predicates, strategies and runs.

mod engine;
pub mod magic;
mod strategy;
mod verify;

use serde::{Deserialize, Serialize};

use crate::bits::{BitReader, BitWriter, Bits};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString};

pub use engine::{
    exact_accept, play_round, round_accept, round_distribution, round_joint, run_hamiltonian_test, run_main,
    run_mixed_vs_pure, run_pauli_braiding, sample_round, BraidingMode, GameSpec, Protocol, Round, TestId,
};
pub use strategy::{ClassicalStrategy, HonestStrategy, Responder, TwoProverStrategy};
pub use verify::{
    verify, verify_anticommutation, verify_commutation, verify_hamiltonian, verify_mixed_vs_pure,
};

/// Answers are bit strings whose length depends on the question.
pub type Answer = Bits;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn letter(self) -> Letter {
        match self {
            Basis::X => Letter::X,
            Basis::Z => Letter::Z,
        }
    }

    pub fn all(self, n: usize) -> PauliString {
        PauliString::uniform(self.letter(), n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Question {
    Com { ra: u64, rb: u64 },
    MsAlice { ra: u64, rb: u64, cells: [u8; 3] },
    MsBob { ra: u64, rb: u64, cell: u8 },
    PureBasis { basis: Basis },
    Mixed { seed: Bits },
    Tele,
}

impl Question {
    pub fn answer_arity(&self, n: usize) -> usize {
        match self {
            Question::Com { .. } => 2,
            Question::MsAlice { .. } => 3,
            Question::MsBob { .. } => 1,
            Question::PureBasis { .. } | Question::Mixed { .. } => n,
            Question::Tele => 2 * n,
        }
    }

    pub fn check_answer(&self, n: usize, answer: &Bits) -> Result<()> {
        let expected = self.answer_arity(n);
        if answer.len() != expected {
            return Err(Error::ArityMismatch { expected, got: answer.len() });
        }
        Ok(())
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Question::Com { .. } => "com",
            Question::MsAlice { .. } => "ms_alice",
            Question::MsBob { .. } => "ms_bob",
            Question::PureBasis { .. } => "pure_basis",
            Question::Mixed { .. } => "mixed",
            Question::Tele => "tele",
        }
    }
}

const TAG_BITS: usize = 3;
const CELL_BITS: usize = 4;

/// Bit-packed question encoding: a 3-bit tag, then the payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuestionCodec {
    pub index_bits: usize,
    pub seed_bits: usize,
}

impl QuestionCodec {
    pub fn new(index_bits: usize, seed_bits: usize) -> Self {
        QuestionCodec { index_bits, seed_bits }
    }

    /// Encoded length in bits.
    pub fn bit_len(&self, q: &Question) -> usize {
        TAG_BITS
            + match q {
                Question::Com { .. } => 2 * self.index_bits,
                Question::MsAlice { .. } => 2 * self.index_bits + 3 * CELL_BITS,
                Question::MsBob { .. } => 2 * self.index_bits + CELL_BITS,
                Question::PureBasis { .. } => 1,
                Question::Mixed { .. } => self.seed_bits,
                Question::Tele => 0,
            }
    }

    pub fn encode(&self, q: &Question) -> Result<Vec<u8>> {
        let mut w = BitWriter::new();
        let idx = |w: &mut BitWriter, ra: u64, rb: u64| -> Result<()> {
            for r in [ra, rb] {
                if self.index_bits < 64 && r >> self.index_bits != 0 {
                    return Err(Error::InvalidArgument(format!("index {r} exceeds {} bits", self.index_bits)));
                }
                w.push_uint(r, self.index_bits);
            }
            Ok(())
        };
        let tag = match q {
            Question::Com { .. } => 0,
            Question::MsAlice { .. } => 1,
            Question::MsBob { .. } => 2,
            Question::PureBasis { .. } => 3,
            Question::Mixed { .. } => 4,
            Question::Tele => 5,
        };
        w.push_uint(tag, TAG_BITS);
        match q {
            Question::Com { ra, rb } => idx(&mut w, *ra, *rb)?,
            Question::MsAlice { ra, rb, cells } => {
                idx(&mut w, *ra, *rb)?;
                for &c in cells {
                    w.push_uint(c as u64, CELL_BITS);
                }
            }
            Question::MsBob { ra, rb, cell } => {
                idx(&mut w, *ra, *rb)?;
                w.push_uint(*cell as u64, CELL_BITS);
            }
            Question::PureBasis { basis } => w.push_uint((*basis == Basis::X) as u64, 1),
            Question::Mixed { seed } => {
                if seed.len() != self.seed_bits {
                    return Err(Error::LengthMismatch { expected: self.seed_bits, got: seed.len() });
                }
                w.push_bits(seed);
            }
            Question::Tele => {}
        }
        Ok(w.finish())
    }

    pub fn decode(&self, bytes: &[u8]) -> Result<Question> {
        let mut r = BitReader::new(bytes);
        let tag = r.read_uint(TAG_BITS)?;
        let q = match tag {
            0 => Question::Com { ra: r.read_uint(self.index_bits)?, rb: r.read_uint(self.index_bits)? },
            1 => {
                let (ra, rb) = (r.read_uint(self.index_bits)?, r.read_uint(self.index_bits)?);
                let mut cells = [0u8; 3];
                for c in cells.iter_mut() {
                    *c = r.read_uint(CELL_BITS)? as u8;
                }
                Question::MsAlice { ra, rb, cells }
            }
            2 => {
                let (ra, rb) = (r.read_uint(self.index_bits)?, r.read_uint(self.index_bits)?);
                Question::MsBob { ra, rb, cell: r.read_uint(CELL_BITS)? as u8 }
            }
            3 => Question::PureBasis { basis: if r.read_uint(1)? == 1 { Basis::X } else { Basis::Z } },
            4 => Question::Mixed { seed: r.read_bits(self.seed_bits)? },
            5 => Question::Tele,
            t => return Err(Error::MalformedCiphertext(format!("unknown question tag {t}"))),
        };
        Ok(q)
    }
}

/// Bit string carried as hex together with its length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HexBits {
    pub len: usize,
    pub hex: String,
}

impl From<&Bits> for HexBits {
    fn from(b: &Bits) -> Self {
        HexBits { len: b.len(), hex: b.to_hex() }
    }
}

impl HexBits {
    pub fn to_bits(&self) -> Result<Bits> {
        Bits::from_hex(&self.hex, self.len)
    }
}

/// One played round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub test: TestId,
    pub alice_question: Option<Question>,
    pub alice_answer: Option<HexBits>,
    pub bob_question: Option<Question>,
    pub bob_answer: Option<HexBits>,
    pub verdict: bool,
    /// Draw indices of the sampled measurement outcomes.
    pub rng_trail: Vec<u64>,
}

impl GameTranscript {
    /// Re-evaluates the verifier on the recorded questions and answers.
    pub fn recompute_verdict(&self, spec: &GameSpec) -> Result<bool> {
        let round = Round { test: self.test, alice: self.alice_question.clone(), bob: self.bob_question.clone() };
        let a = self.alice_answer.as_ref().map(HexBits::to_bits).transpose()?;
        let b = self.bob_answer.as_ref().map(HexBits::to_bits).transpose()?;
        verify(spec, &round, a.as_ref(), b.as_ref())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_question(ib: usize, sb: usize) -> impl Strategy<Value = Question> {
        let idx = 0..(1u64 << ib);
        prop_oneof![
            (idx.clone(), idx.clone()).prop_map(|(ra, rb)| Question::Com { ra, rb }),
            (idx.clone(), idx.clone(), 0usize..6).prop_map(|(ra, rb, l)| Question::MsAlice { ra, rb, cells: magic::LINES[l] }),
            (idx.clone(), idx, 1u8..10).prop_map(|(ra, rb, cell)| Question::MsBob { ra, rb, cell }),
            any::<bool>().prop_map(|x| Question::PureBasis { basis: if x { Basis::X } else { Basis::Z } }),
            proptest::collection::vec(any::<bool>(), sb).prop_map(|v| Question::Mixed { seed: Bits::from_bools(&v) }),
            Just(Question::Tele),
        ]
    }

    proptest! {
        #[test]
        fn codec_roundtrip(q in arb_question(5, 11)) {
            let c = QuestionCodec::new(5, 11);
            let bytes = c.encode(&q).unwrap();
            prop_assert_eq!(bytes.len(), c.bit_len(&q).div_ceil(8));
            prop_assert_eq!(c.decode(&bytes).unwrap(), q);
        }
    }

    #[test]
    fn arity_by_tag() {
        let n = 4;
        assert_eq!(Question::Com { ra: 0, rb: 0 }.answer_arity(n), 2);
        assert_eq!(Question::Tele.answer_arity(n), 8);
        assert!(matches!(
            Question::MsBob { ra: 0, rb: 0, cell: 3 }.check_answer(n, &Bits::zeros(2)),
            Err(Error::ArityMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn pure_basis_questions_are_bit_identical() {
        let c = QuestionCodec::new(6, 9);
        let q = Question::PureBasis { basis: Basis::Z };
        assert_eq!(c.encode(&q).unwrap(), c.encode(&q.clone()).unwrap());
        assert_eq!(c.bit_len(&q), 4);
    }
}
