//! GGM-style expansion over keyed BLAKE3.
//!
//! A node's children are `H_key(node ‖ 0)` and `H_key(node ‖ 1)`. Leaves
//! at depth `D` concatenate left to right into a keystream.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Longest output [`prg_expand`] produces.
pub const MAX_EXPAND_BITS: usize = 1 << 20;
/// Longest short seed a [`Prg`] accepts.
pub const MAX_SEED_BITS: usize = 64;
/// Largest output width for which [`Prg::output_histogram`] tabulates values.
pub const MAX_HISTOGRAM_OUT: usize = 20;

/// Hash key used when a config does not supply one.
pub const DEFAULT_PRG_KEY: [u8; 32] = *b"qmarg ggm keystream default key!";

const LEAF_BITS: u128 = 256;

fn child(key: &[u8; 32], node: &[u8; 32], bit: bool) -> [u8; 32] {
    let mut buf = [0u8; 33];
    buf[..32].copy_from_slice(node);
    buf[32] = bit as u8;
    *blake3::keyed_hash(key, &buf).as_bytes()
}

fn depth_for(total_bits: u128) -> u32 {
    let leaves = total_bits.div_ceil(LEAF_BITS).max(1);
    128 - (leaves - 1).leading_zeros()
}

fn leaf(key: &[u8; 32], root: &[u8; 32], depth: u32, index: u128) -> [u8; 32] {
    let mut node = *root;
    for level in (0..depth).rev() {
        node = child(key, &node, (index >> level) & 1 == 1);
    }
    node
}

fn leaf_bit(leaf: &[u8; 32], offset: usize) -> bool {
    (leaf[offset / 8] >> (7 - offset % 8)) & 1 == 1
}

/// Bits `[start, start + len)` of the keystream rooted at `root`.
fn keystream_slice(key: &[u8; 32], root: &[u8; 32], total_bits: u128, start: u128, len: usize) -> Bits {
    let depth = depth_for(total_bits);
    let mut out = Bits::zeros(len);
    let mut cached: Option<(u128, [u8; 32])> = None;
    for i in 0..len {
        let p = start + i as u128;
        let li = p / LEAF_BITS;
        let lf = match cached {
            Some((idx, l)) if idx == li => l,
            _ => {
                let l = leaf(key, root, depth, li);
                cached = Some((li, l));
                l
            }
        };
        out.set(i, leaf_bit(&lf, (p % LEAF_BITS) as usize));
    }
    out
}

/// Expands `seed` to `out_len` pseudorandom bits.
pub fn prg_expand(key: &[u8; 32], seed: &Bits, out_len: usize) -> Result<Bits> {
    if out_len > MAX_EXPAND_BITS {
        return Err(Error::InvalidArgument(format!("out_len {out_len} exceeds {MAX_EXPAND_BITS}")));
    }
    let mut h = blake3::Hasher::new_keyed(key);
    h.update(b"expand");
    h.update(&(seed.len() as u64).to_le_bytes());
    h.update(&seed.to_bytes());
    let root = *h.finalize().as_bytes();
    Ok(keystream_slice(key, &root, out_len as u128, 0, out_len))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrgKind {
    Identity,
    Constant { output: Bits },
    /// Seed `s` selects bits `[s·out_len, (s+1)·out_len)` of one keystream.
    Ggm { key: String },
}

/// A map from `seed_len` bits to `out_len` bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prg {
    pub seed_len: usize,
    pub out_len: usize,
    pub kind: PrgKind,
}

impl Prg {
    pub fn identity(len: usize) -> Self {
        Prg { seed_len: len, out_len: len, kind: PrgKind::Identity }
    }

    pub fn constant(seed_len: usize, output: Bits) -> Self {
        Prg { seed_len, out_len: output.len(), kind: PrgKind::Constant { output } }
    }

    pub fn ggm(key: &[u8; 32], seed_len: usize, out_len: usize) -> Result<Self> {
        if seed_len == 0 || seed_len > MAX_SEED_BITS {
            return Err(Error::InvalidArgument(format!("seed length {seed_len} outside 1..={MAX_SEED_BITS}")));
        }
        if out_len > MAX_EXPAND_BITS {
            return Err(Error::InvalidArgument(format!("out_len {out_len} exceeds {MAX_EXPAND_BITS}")));
        }
        Ok(Prg { seed_len, out_len, kind: PrgKind::Ggm { key: hex::encode(key) } })
    }

    fn ggm_key(key: &str) -> Result<[u8; 32]> {
        let v = hex::decode(key).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        v.try_into().map_err(|_| Error::InvalidArgument("prg key must be 32 bytes".into()))
    }

    fn ggm_root(key: &[u8; 32]) -> [u8; 32] {
        *blake3::keyed_hash(key, b"function").as_bytes()
    }

    fn total_bits(&self) -> u128 {
        (1u128 << self.seed_len) * self.out_len as u128
    }

    pub fn expand(&self, seed: &Bits) -> Result<Bits> {
        if seed.len() != self.seed_len {
            return Err(Error::LengthMismatch { expected: self.seed_len, got: seed.len() });
        }
        match &self.kind {
            PrgKind::Identity => Ok(seed.clone()),
            PrgKind::Constant { output } => Ok(output.clone()),
            PrgKind::Ggm { key } => {
                let key = Prg::ggm_key(key)?;
                let s = seed.to_index() as u128;
                Ok(keystream_slice(&key, &Prg::ggm_root(&key), self.total_bits(), s * self.out_len as u128, self.out_len))
            }
        }
    }

    /// Number of short seeds mapping to each output value (indexed MSB-first).
    ///
    /// Keystream generators walk the tree once, so `seed_len = 32` costs a
    /// few seconds.
    pub fn output_histogram(&self) -> Result<Vec<u64>> {
        if self.out_len > MAX_HISTOGRAM_OUT {
            return Err(Error::InvalidArgument(format!("histogram needs out_len <= {MAX_HISTOGRAM_OUT}")));
        }
        let mut hist = vec![0u64; 1 << self.out_len];
        match &self.kind {
            PrgKind::Identity | PrgKind::Constant { .. } => {
                if self.seed_len > MAX_HISTOGRAM_OUT {
                    return Err(Error::SeedSpaceTooLarge { bits: self.seed_len, limit: MAX_HISTOGRAM_OUT });
                }
                for s in 0..1u64 << self.seed_len {
                    hist[self.expand(&Bits::from_index(s, self.seed_len))?.to_index() as usize] += 1;
                }
            }
            PrgKind::Ggm { key } => {
                if self.seed_len > 40 {
                    return Err(Error::SeedSpaceTooLarge { bits: self.seed_len, limit: 40 });
                }
                let key = Prg::ggm_key(key)?;
                let total = self.total_bits();
                let depth = depth_for(total);
                let leaves = total.div_ceil(LEAF_BITS);
                let mut chunker = Chunker { width: self.out_len, value: 0, have: 0, remaining: 1u64 << self.seed_len, hist: &mut hist };
                walk(&key, Prg::ggm_root(&key), depth, 0, leaves, &mut chunker);
            }
        }
        Ok(hist)
    }
}

struct Chunker<'a> {
    width: usize,
    value: usize,
    have: usize,
    remaining: u64,
    hist: &'a mut [u64],
}

impl Chunker<'_> {
    fn feed(&mut self, leaf: &[u8; 32]) {
        if self.width == 0 {
            if self.remaining > 0 {
                self.hist[0] += self.remaining;
                self.remaining = 0;
            }
            return;
        }
        for byte in leaf {
            for s in (0..8).rev() {
                if self.remaining == 0 {
                    return;
                }
                self.value = (self.value << 1) | ((byte >> s) & 1) as usize;
                self.have += 1;
                if self.have == self.width {
                    self.hist[self.value] += 1;
                    self.value = 0;
                    self.have = 0;
                    self.remaining -= 1;
                }
            }
        }
    }
}

fn walk(key: &[u8; 32], node: [u8; 32], depth: u32, first: u128, leaves: u128, out: &mut Chunker) {
    if first >= leaves {
        return;
    }
    if depth == 0 {
        out.feed(&node);
        return;
    }
    let half = 1u128 << (depth - 1);
    walk(key, child(key, &node, false), depth - 1, first, leaves, out);
    walk(key, child(key, &node, true), depth - 1, first + half, leaves, out);
}
