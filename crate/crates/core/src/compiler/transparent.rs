use rand::RngCore;

use super::{Ciphertext, Circuit, QheScheme, SecretKey, Security};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::rng::TrialRng;
use crate::simulator::QuantumState;

/// Test-only scheme: the ciphertext is the plaintext tagged with the key.
#[derive(Clone, Copy, Debug, Default)]
pub struct TransparentQhe;

pub fn transparent_qhe() -> TransparentQhe {
    TransparentQhe
}

const ID: &str = "transparent";

impl TransparentQhe {
    fn wrap(&self, tag: &[u8], plaintext: &Bits) -> Ciphertext {
        let mut payload = (plaintext.len() as u32).to_be_bytes().to_vec();
        payload.extend(plaintext.to_bytes());
        Ciphertext { scheme: ID.into(), tag: tag.to_vec(), payload }
    }

    fn unwrap(&self, ct: &Ciphertext) -> Result<Bits> {
        if ct.scheme != ID {
            return Err(Error::MalformedCiphertext(format!("scheme {:?} is not {ID}", ct.scheme)));
        }
        if ct.payload.len() < 4 {
            return Err(Error::MalformedCiphertext("payload shorter than its length prefix".into()));
        }
        let len = u32::from_be_bytes(ct.payload[..4].try_into().unwrap()) as usize;
        let body = &ct.payload[4..];
        if body.len() != len.div_ceil(8) {
            return Err(Error::MalformedCiphertext(format!("{} payload bytes for {len} bits", body.len())));
        }
        Bits::from_bytes(body, len)
    }
}

impl QheScheme for TransparentQhe {
    fn id(&self) -> &'static str {
        ID
    }

    fn security(&self) -> Security {
        Security::InsecureTestOnly
    }

    fn supports(&self, _circuit: &dyn Circuit) -> bool {
        true
    }

    /// The key is a random nonce of `secparam` bits (at least one byte).
    fn gen(&self, secparam: usize, rng: &mut TrialRng) -> Result<SecretKey> {
        let mut material = vec![0u8; secparam.div_ceil(8).max(1)];
        rng.inner().fill_bytes(&mut material);
        Ok(SecretKey { scheme: ID.into(), secparam, material })
    }

    fn enc(&self, key: &SecretKey, plaintext: &Bits) -> Result<Ciphertext> {
        if key.scheme != ID {
            return Err(Error::KeyMismatch);
        }
        Ok(self.wrap(&key.material, plaintext))
    }

    fn eval(&self, circuit: &dyn Circuit, state: &QuantumState, ct: &Ciphertext) -> Result<Vec<(Ciphertext, QuantumState)>> {
        if !self.supports(circuit) {
            return Err(Error::UnsupportedCircuit(circuit.name()));
        }
        let input = self.unwrap(ct)?;
        Ok(circuit.run(&input, state)?.into_iter().map(|(out, st)| (self.wrap(&ct.tag, &out), st)).collect())
    }

    fn dec(&self, key: &SecretKey, ct: &Ciphertext) -> Result<Bits> {
        if key.scheme != ID || ct.tag != key.material {
            return Err(Error::KeyMismatch);
        }
        self.unwrap(ct)
    }
}
