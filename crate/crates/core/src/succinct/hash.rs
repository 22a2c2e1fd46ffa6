use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};
use crate::rng::TrialRng;

/// A hash output.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Digest(#[serde(with = "hex::serde")] pub Vec<u8>);

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", hex::encode(&self.0))
    }
}

impl Digest {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HashKind {
    Sha256,
    Blake3,
    /// SHA-256 cut to `bytes` bytes, small enough to exhibit collisions.
    TruncatedSha256 { bytes: u8 },
}

impl HashKind {
    pub fn digest_len(self) -> usize {
        match self {
            HashKind::Sha256 | HashKind::Blake3 => 32,
            HashKind::TruncatedSha256 { bytes } => bytes as usize,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sha256" => Ok(HashKind::Sha256),
            "blake3" => Ok(HashKind::Blake3),
            other => match other.strip_prefix("sha256-trunc") {
                Some(n) => {
                    let bytes: u8 = n.parse().map_err(|_| Error::InvalidArgument(format!("bad truncation in {other:?}")))?;
                    HashKind::TruncatedSha256 { bytes }.validate()
                }
                None => Err(Error::InvalidArgument(format!("unknown hash {other:?}"))),
            },
        }
    }

    fn validate(self) -> Result<Self> {
        if let HashKind::TruncatedSha256 { bytes } = self {
            if !(1..=32).contains(&bytes) {
                return Err(Error::InvalidArgument(format!("truncation to {bytes} bytes is outside 1..=32")));
            }
        }
        Ok(self)
    }
}

/// A hash function with its key `hk`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashSpec {
    pub kind: HashKind,
    #[serde(with = "hex::serde")]
    pub key: [u8; 32],
}

impl HashSpec {
    pub fn new(kind: HashKind, key: [u8; 32]) -> Result<Self> {
        Ok(HashSpec { kind: kind.validate()?, key })
    }

    pub fn sample(kind: HashKind, rng: &mut TrialRng) -> Result<Self> {
        let mut key = [0u8; 32];
        rng.inner().fill_bytes(&mut key);
        HashSpec::new(kind, key)
    }

    pub fn digest_len(&self) -> usize {
        self.kind.digest_len()
    }

    /// Keyed digest of `domain ‖ parts`.
    pub fn digest(&self, domain: u8, parts: &[&[u8]]) -> Digest {
        match self.kind {
            HashKind::Blake3 => {
                let mut h = blake3::Hasher::new_keyed(&self.key);
                h.update(&[domain]);
                for p in parts {
                    h.update(p);
                }
                Digest(h.finalize().as_bytes().to_vec())
            }
            HashKind::Sha256 | HashKind::TruncatedSha256 { .. } => {
                let mut h = Sha256::new();
                h.update(self.key);
                h.update([domain]);
                for p in parts {
                    h.update(p);
                }
                let mut out = h.finalize().to_vec();
                out.truncate(self.digest_len());
                Digest(out)
            }
        }
    }
}
