use super::magic::{is_line, line_negative};
use super::{Basis, GameSpec, Question, Round, TestId};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::hamiltonian::MeasurementHamiltonian;
use crate::pauli::Letter;

fn arity(b: &Bits, expected: usize) -> Result<()> {
    if b.len() != expected {
        return Err(Error::ArityMismatch { expected, got: b.len() });
    }
    Ok(())
}

/// Bob's `v` in basis `W` against Alice's `(u_a, u_b)`.
pub fn verify_commutation(a: &Bits, b: &Bits, alice: &Bits, basis: Basis, v: &Bits) -> Result<bool> {
    arity(alice, 2)?;
    arity(v, a.len())?;
    Ok(match basis {
        Basis::Z => v.masked_parity(a)? == alice.get(0),
        Basis::X => v.masked_parity(b)? == alice.get(1),
    })
}

/// Magic-square check: Alice's line parity, then agreement at Bob's cell.
pub fn verify_anticommutation(a: &Bits, b: &Bits, cells: &[u8; 3], alice: &Bits, bob_q: &Question, v: &Bits) -> Result<bool> {
    if !is_line(cells) {
        return Err(Error::NotALine(*cells));
    }
    arity(alice, 3)?;
    let (cell, bob_bit) = match bob_q {
        Question::PureBasis { basis: Basis::Z } => {
            arity(v, a.len())?;
            (2, v.masked_parity(a)?)
        }
        Question::PureBasis { basis: Basis::X } => {
            arity(v, b.len())?;
            (4, v.masked_parity(b)?)
        }
        Question::MsBob { cell, .. } => {
            arity(v, 1)?;
            (*cell, v.get(0))
        }
        q => return Err(Error::Protocol(format!("{} is not a magic-square question for Bob", q.tag()))),
    };
    let k = cells
        .iter()
        .position(|&c| c == cell)
        .ok_or_else(|| Error::Protocol(format!("Bob's cell {cell} is not on line {cells:?}")))?;
    let parity = alice.get(0) ^ alice.get(1) ^ alice.get(2);
    Ok(parity == line_negative(cells, a, b)? && alice.get(k) == bob_bit)
}

/// Alice answered `u` in basis `W`; Bob either got the same `W` or a seed.
pub fn verify_mixed_vs_pure(mh: &MeasurementHamiltonian, basis: Basis, u: &Bits, bob_q: &Question, v: &Bits) -> Result<bool> {
    arity(u, mh.n)?;
    arity(v, mh.n)?;
    match bob_q {
        Question::PureBasis { basis: w } if *w == basis => Ok(u == v),
        Question::Mixed { seed } => {
            let w = mh.sample(seed)?;
            Ok((0..mh.n).all(|i| w.get(i) != basis.letter() || u.get(i) == v.get(i)))
        }
        q => Err(Error::Protocol(format!("{} is not a mixed-vs-pure question for Bob", q.tag()))),
    }
}

/// Applies Alice's teleportation corrections `(u_x ‖ u_z)` to Bob's `v` and
/// tests membership in `Q(w)`.
pub fn verify_hamiltonian(mh: &MeasurementHamiltonian, seed: &Bits, alice: &Bits, v: &Bits) -> Result<bool> {
    let n = mh.n;
    arity(alice, 2 * n)?;
    arity(v, n)?;
    let w = mh.sample(seed)?;
    let mut s = Bits::zeros(n);
    for i in 0..n {
        let bit = match w.get(i) {
            Letter::I => false,
            Letter::Z => v.get(i) ^ alice.get(i),
            Letter::X => v.get(i) ^ alice.get(n + i),
        };
        s.set(i, bit);
    }
    mh.accept(seed, &s)
}

/// The verifier's decision on a played round.
pub fn verify(spec: &GameSpec, round: &Round, alice: Option<&Bits>, bob: Option<&Bits>) -> Result<bool> {
    if round.test == TestId::BraidingAutoAccept {
        return Ok(true);
    }
    let missing = || Error::Protocol("round is missing a question or an answer".into());
    let (aq, bq) = (round.alice.as_ref().ok_or_else(missing)?, round.bob.as_ref().ok_or_else(missing)?);
    let (u, v) = (alice.ok_or_else(missing)?, bob.ok_or_else(missing)?);
    match (round.test, aq, bq) {
        (TestId::Commutation, Question::Com { ra, rb }, Question::PureBasis { basis }) => {
            let (a, b) = spec.pair(*ra, *rb)?;
            verify_commutation(&a, &b, u, *basis, v)
        }
        (TestId::Anticommutation, Question::MsAlice { ra, rb, cells }, bq) => {
            if let Question::MsBob { ra: sa, rb: sb, .. } = bq {
                if (sa, sb) != (ra, rb) {
                    return Err(Error::Protocol("Alice and Bob received different indices".into()));
                }
            }
            let (a, b) = spec.pair(*ra, *rb)?;
            verify_anticommutation(&a, &b, cells, u, bq, v)
        }
        (TestId::MixedVsPure, Question::PureBasis { basis }, bq) => verify_mixed_vs_pure(&spec.mh, *basis, u, bq, v),
        (TestId::Hamiltonian, Question::Tele, Question::Mixed { seed }) => verify_hamiltonian(&spec.mh, seed, u, v),
        (t, aq, bq) => Err(Error::Protocol(format!("questions {} / {} do not belong to {t:?}", aq.tag(), bq.tag()))),
    }
}
