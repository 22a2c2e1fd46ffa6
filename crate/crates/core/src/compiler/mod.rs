//! Compilation of a two-prover game into a two-round single-prover protocol.
//!
//! The verifier encrypts Alice's question, the prover answers it under the
//! encryption, then receives Bob's question in the clear and answers it on
//! the same state. The verifier decrypts the first answer and applies the
//! game's predicate.

mod prover;
mod transparent;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::rng::TrialRng;
use crate::simulator::QuantumState;

pub use prover::{
    codec_for, compile_and_run, compiled_exact_accept, compiled_round_joint, honest_compiled_prover, AliceCircuit, CompiledProver,
    CompiledTranscript, HonestCompiledProver, encode_question,
};
pub use transparent::{transparent_qhe, TransparentQhe};

/// A classical-input circuit evaluated on a quantum register: it reads the
/// plaintext input and returns every possible output with its unnormalized
/// post-measurement state.
pub trait Circuit {
    fn name(&self) -> String;
    /// Whether the circuit consists of Clifford gates and Pauli measurements.
    fn clifford_measurement(&self) -> bool {
        true
    }
    fn run(&self, input: &Bits, state: &QuantumState) -> Result<Vec<(Bits, QuantumState)>>;
}

/// Outputs its input and leaves the register untouched.
pub struct IdentityCircuit;

impl Circuit for IdentityCircuit {
    fn name(&self) -> String {
        "identity".into()
    }

    fn run(&self, input: &Bits, state: &QuantumState) -> Result<Vec<(Bits, QuantumState)>> {
        Ok(vec![(input.clone(), state.clone())])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Security {
    /// Correct but offers no hiding at all.
    InsecureTestOnly,
    Computational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretKey {
    pub scheme: String,
    pub secparam: usize,
    pub material: Vec<u8>,
}

/// A ciphertext: scheme identifier, key tag and payload.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ciphertext {
    pub scheme: String,
    pub tag: Vec<u8>,
    pub payload: Vec<u8>,
}

impl Ciphertext {
    /// `u8` scheme-id length, scheme id, then the tag and the payload each
    /// prefixed by a big-endian `u32` length.
    pub fn to_wire(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 + self.scheme.len() + self.tag.len() + self.payload.len());
        out.push(self.scheme.len() as u8);
        out.extend_from_slice(self.scheme.as_bytes());
        for part in [&self.tag, &self.payload] {
            out.extend_from_slice(&(part.len() as u32).to_be_bytes());
            out.extend_from_slice(part);
        }
        out
    }

    pub fn from_wire(bytes: &[u8]) -> Result<Self> {
        let bad = |what: &str| Error::MalformedCiphertext(what.to_string());
        let (&id_len, rest) = bytes.split_first().ok_or_else(|| bad("empty input"))?;
        let id_len = id_len as usize;
        if rest.len() < id_len {
            return Err(bad("truncated scheme id"));
        }
        let scheme = std::str::from_utf8(&rest[..id_len]).map_err(|_| bad("scheme id is not UTF-8"))?.to_string();
        let mut rest = &rest[id_len..];
        let mut take = || -> Result<Vec<u8>> {
            if rest.len() < 4 {
                return Err(bad("truncated length prefix"));
            }
            let len = u32::from_be_bytes(rest[..4].try_into().unwrap()) as usize;
            if rest.len() < 4 + len {
                return Err(bad("truncated field"));
            }
            let field = rest[4..4 + len].to_vec();
            rest = &rest[4 + len..];
            Ok(field)
        };
        let tag = take()?;
        let payload = take()?;
        if !rest.is_empty() {
            return Err(bad("trailing bytes"));
        }
        Ok(Ciphertext { scheme, tag, payload })
    }

    pub fn wire_len(&self) -> usize {
        9 + self.scheme.len() + self.tag.len() + self.payload.len()
    }
}

/// Homomorphic encryption with classical ciphertexts and quantum evaluation.
pub trait QheScheme {
    fn id(&self) -> &'static str;
    fn security(&self) -> Security;
    /// Capability check for `eval`.
    fn supports(&self, circuit: &dyn Circuit) -> bool;
    fn gen(&self, secparam: usize, rng: &mut TrialRng) -> Result<SecretKey>;
    fn enc(&self, key: &SecretKey, plaintext: &Bits) -> Result<Ciphertext>;
    /// Every outcome of running `circuit` under the encryption, with the
    /// unnormalized post-measurement state.
    fn eval(&self, circuit: &dyn Circuit, state: &QuantumState, ct: &Ciphertext) -> Result<Vec<(Ciphertext, QuantumState)>>;
    fn dec(&self, key: &SecretKey, ct: &Ciphertext) -> Result<Bits>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn wire_roundtrip(scheme in "[a-z]{0,12}", tag in proptest::collection::vec(any::<u8>(), 0..40), payload in proptest::collection::vec(any::<u8>(), 0..200)) {
            let c = Ciphertext { scheme, tag, payload };
            let w = c.to_wire();
            prop_assert_eq!(w.len(), c.wire_len());
            prop_assert_eq!(Ciphertext::from_wire(&w).unwrap(), c);
        }

        #[test]
        fn truncations_are_rejected(payload in proptest::collection::vec(any::<u8>(), 1..50), cut in 1usize..20) {
            let c = Ciphertext { scheme: "t".into(), tag: vec![1, 2, 3], payload };
            let w = c.to_wire();
            let cut = cut.min(w.len());
            prop_assert!(matches!(Ciphertext::from_wire(&w[..w.len() - cut]), Err(Error::MalformedCiphertext(_))));
        }
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let mut w = Ciphertext { scheme: "t".into(), tag: vec![], payload: vec![9] }.to_wire();
        w.push(0);
        assert!(Ciphertext::from_wire(&w).is_err());
        assert!(Ciphertext::from_wire(&[]).is_err());
    }
}
