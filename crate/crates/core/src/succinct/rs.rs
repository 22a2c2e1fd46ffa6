//! Reed-Solomon coding over GF(2^8) at rate 1/2.
//!
//! The witness is cut into blocks of at most `BLOCK_DATA` bytes. A block of
//! `k` bytes is read as a polynomial of degree `< k` and evaluated at
//! `α^0, …, α^{2k-1}`. Decoding uses Gao's algorithm.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const BLOCK_DATA: usize = 127;
pub const BLOCK_CODE: usize = 2 * BLOCK_DATA;
const POLY: u16 = 0x11D;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut exp = [0u8; 512];
        let mut log = [0u8; 256];
        let mut x: u16 = 1;
        for i in 0..255 {
            exp[i] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= POLY;
            }
        }
        for i in 255..512 {
            exp[i] = exp[i - 255];
        }
        Tables { exp, log }
    })
}

pub fn gf_mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    let t = tables();
    t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
}

pub fn gf_inv(a: u8) -> u8 {
    assert!(a != 0, "zero has no inverse");
    let t = tables();
    t.exp[255 - t.log[a as usize] as usize]
}

/// `α^i` with `α = 2`.
pub fn gf_pow_alpha(i: usize) -> u8 {
    tables().exp[i % 255]
}

/// Polynomials with coefficients from low to high degree.
type Poly = Vec<u8>;

fn trim(mut p: Poly) -> Poly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn deg(p: &Poly) -> isize {
    p.len() as isize - 1
}

pub fn poly_eval(p: &[u8], x: u8) -> u8 {
    p.iter().rev().fold(0, |acc, &c| gf_mul(acc, x) ^ c)
}

fn add(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![0u8; a.len().max(b.len())];
    for (i, &c) in a.iter().enumerate() {
        out[i] ^= c;
    }
    for (i, &c) in b.iter().enumerate() {
        out[i] ^= c;
    }
    trim(out)
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] ^= gf_mul(x, y);
        }
    }
    trim(out)
}

fn divmod(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let b = trim(b.clone());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut rem = trim(a.clone());
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let lead_inv = gf_inv(*b.last().unwrap());
    let mut q = vec![0u8; rem.len() - b.len() + 1];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let c = gf_mul(*rem.last().unwrap(), lead_inv);
        q[shift] = c;
        for (i, &bc) in b.iter().enumerate() {
            rem[shift + i] ^= gf_mul(c, bc);
        }
        rem = trim(rem);
    }
    (trim(q), rem)
}

/// `Π (x − a_i)`.
fn vanishing(points: &[u8]) -> Poly {
    points.iter().fold(vec![1u8], |acc, &a| mul(&acc, &vec![a, 1]))
}

/// The polynomial of degree `< points.len()` through `(points[i], values[i])`.
fn interpolate(points: &[u8], values: &[u8]) -> Poly {
    let g0 = vanishing(points);
    let mut out = vec![0u8; points.len()];
    for (i, (&a, &v)) in points.iter().zip(values).enumerate() {
        if v == 0 {
            continue;
        }
        let (basis, _) = divmod(&g0, &vec![a, 1]);
        let denom = points.iter().enumerate().filter(|&(j, _)| j != i).fold(1u8, |acc, (_, &b)| gf_mul(acc, a ^ b));
        let scale = gf_mul(v, gf_inv(denom));
        for (k, &c) in basis.iter().enumerate() {
            out[k] ^= gf_mul(scale, c);
        }
    }
    trim(out)
}

/// Gao decoding of `received` at `points` to a message of `k` coefficients.
/// Corrects up to `(points.len() − k) / 2` errors.
pub fn gao_decode(points: &[u8], received: &[u8], k: usize) -> Result<Vec<u8>> {
    let n = points.len();
    if received.len() != n || k == 0 || k > n {
        return Err(Error::DecodeFailure);
    }
    let g0 = vanishing(points);
    let g1 = interpolate(points, received);
    let stop = (n + k) as isize;
    let (mut r0, mut r1) = (g0, g1);
    let (mut v0, mut v1): (Poly, Poly) = (Vec::new(), vec![1]);
    while 2 * deg(&r1) >= stop {
        let (q, r) = divmod(&r0, &r1);
        let v2 = add(&v0, &mul(&q, &v1));
        r0 = std::mem::replace(&mut r1, r);
        v0 = std::mem::replace(&mut v1, v2);
    }
    if v1.is_empty() {
        return Err(Error::DecodeFailure);
    }
    let (f, rem) = divmod(&r1, &v1);
    if !rem.is_empty() || f.len() > k {
        return Err(Error::DecodeFailure);
    }
    let mut f = f;
    f.resize(k, 0);
    Ok(f)
}

/// Placement of the blocks of a `data_len`-byte message.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub data_len: usize,
}

impl Layout {
    pub fn new(data_len: usize) -> Result<Self> {
        if data_len == 0 {
            return Err(Error::InvalidArgument("cannot encode an empty message".into()));
        }
        Ok(Layout { data_len })
    }

    pub fn blocks(&self) -> usize {
        self.data_len.div_ceil(BLOCK_DATA)
    }

    /// Data bytes in block `b`.
    pub fn block_data(&self, b: usize) -> usize {
        (self.data_len - b * BLOCK_DATA).min(BLOCK_DATA)
    }

    pub fn code_len(&self) -> usize {
        2 * self.data_len
    }

    /// Block and in-block position of codeword symbol `j`.
    pub fn locate(&self, j: usize) -> (usize, usize) {
        (j / BLOCK_CODE, j % BLOCK_CODE)
    }

    pub fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        b * BLOCK_DATA..b * BLOCK_DATA + self.block_data(b)
    }
}

pub fn encode_block(data: &[u8]) -> Vec<u8> {
    (0..2 * data.len()).map(|i| poly_eval(data, gf_pow_alpha(i))).collect()
}

/// Symbol `pos` of the codeword of `data`.
pub fn encode_symbol(data: &[u8], pos: usize) -> u8 {
    poly_eval(data, gf_pow_alpha(pos))
}

pub fn encode(data: &[u8]) -> Result<Vec<u8>> {
    Layout::new(data.len())?;
    Ok(data.chunks(BLOCK_DATA).flat_map(encode_block).collect())
}

/// Decodes a full received word, correcting errors blockwise.
pub fn decode(received: &[u8]) -> Result<Vec<u8>> {
    if received.is_empty() || !received.len().is_multiple_of(2) {
        return Err(Error::DecodeFailure);
    }
    let layout = Layout::new(received.len() / 2)?;
    let mut out = Vec::with_capacity(layout.data_len);
    for (b, chunk) in received.chunks(BLOCK_CODE).enumerate() {
        let points: Vec<u8> = (0..chunk.len()).map(gf_pow_alpha).collect();
        out.extend(gao_decode(&points, chunk, layout.block_data(b))?);
    }
    Ok(out)
}

/// Decodes block `b` from a partial view `(position, symbol)` of its codeword.
pub fn decode_partial(layout: &Layout, b: usize, known: &[(usize, u8)]) -> Result<Vec<u8>> {
    let k = layout.block_data(b);
    if known.len() < k {
        return Err(Error::DecodeFailure);
    }
    let points: Vec<u8> = known.iter().map(|&(p, _)| gf_pow_alpha(p)).collect();
    let values: Vec<u8> = known.iter().map(|&(_, s)| s).collect();
    gao_decode(&points, &values, k)
}

/// Errors correctable per full block.
pub fn correctable(k: usize) -> usize {
    k / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::TrialRng;
    use proptest::prelude::*;

    #[test]
    fn field_axioms() {
        for a in 1..=255u8 {
            assert_eq!(gf_mul(a, gf_inv(a)), 1);
        }
        for a in 0..=255u8 {
            for b in [0u8, 1, 2, 3, 0x53, 0xca, 0xff] {
                assert_eq!(gf_mul(a, b), gf_mul(b, a));
                // schoolbook product with reduction
                let mut x = a as u16;
                let mut y = b;
                let mut p: u16 = 0;
                while y != 0 {
                    if y & 1 == 1 {
                        p ^= x;
                    }
                    x <<= 1;
                    if x & 0x100 != 0 {
                        x ^= POLY;
                    }
                    y >>= 1;
                }
                assert_eq!(gf_mul(a, b) as u16, p);
            }
        }
        let distinct: std::collections::HashSet<u8> = (0..255).map(gf_pow_alpha).collect();
        assert_eq!(distinct.len(), 255);
    }

    #[test]
    fn interpolation_reproduces_values() {
        let points: Vec<u8> = (0..20).map(gf_pow_alpha).collect();
        let values: Vec<u8> = (0..20u8).map(|i| i.wrapping_mul(37)).collect();
        let p = interpolate(&points, &values);
        for (a, v) in points.iter().zip(&values) {
            assert_eq!(poly_eval(&p, *a), *v);
        }
    }

    #[test]
    fn corrects_up_to_the_bound_and_no_further_claims() {
        let mut rng = TrialRng::new(2, 0);
        let data: Vec<u8> = (0..BLOCK_DATA).map(|_| rng.below(256) as u8).collect();
        let code = encode(&data).unwrap();
        let t = correctable(BLOCK_DATA);
        assert_eq!(t, 63);
        let mut bad = code.clone();
        let mut positions: Vec<usize> = (0..BLOCK_CODE).collect();
        for i in 0..t {
            let j = i + rng.below((BLOCK_CODE - i) as u64) as usize;
            positions.swap(i, j);
            bad[positions[i]] ^= 1 + rng.below(255) as u8;
        }
        assert_eq!(decode(&bad).unwrap(), data);
    }

    #[test]
    fn too_many_errors_never_decode_silently_to_the_input() {
        let mut rng = TrialRng::new(3, 0);
        let data: Vec<u8> = (0..40).map(|_| rng.below(256) as u8).collect();
        let mut bad = encode(&data).unwrap();
        for s in bad.iter_mut().take(45) {
            *s ^= 0x5a;
        }
        match decode(&bad) {
            Err(Error::DecodeFailure) => {}
            Ok(other) => assert_ne!(other, data),
            Err(e) => panic!("{e}"),
        }
    }

    proptest! {
        #[test]
        fn roundtrip(data in proptest::collection::vec(any::<u8>(), 1..400)) {
            let code = encode(&data).unwrap();
            prop_assert_eq!(code.len(), 2 * data.len());
            prop_assert_eq!(decode(&code).unwrap(), data.clone());
            let layout = Layout::new(data.len()).unwrap();
            for j in (0..code.len()).step_by(17) {
                let (b, pos) = layout.locate(j);
                prop_assert_eq!(encode_symbol(&data[layout.block_range(b)], pos), code[j]);
            }
        }

        #[test]
        fn partial_views_decode(data in proptest::collection::vec(any::<u8>(), 1..127), seed in any::<u64>()) {
            let code = encode(&data).unwrap();
            let layout = Layout::new(data.len()).unwrap();
            let mut rng = TrialRng::new(seed, 0);
            let mut known: Vec<(usize, u8)> = code.iter().copied().enumerate().filter(|_| rng.coin()).collect();
            if known.len() < data.len() {
                known = code.iter().copied().enumerate().skip(data.len()).collect();
            }
            prop_assert_eq!(decode_partial(&layout, 0, &known).unwrap(), data);
        }
    }
}
