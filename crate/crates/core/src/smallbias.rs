//! Small-bias subsets of `{0,1}^n` from the powering construction.
//!
//! Member `(x, y)` of `GF(2^m)²` has bit `i` equal to `⟨x^i, y⟩`. For
//! nonzero `b` the character sum counts roots of `Σ b_i X^i`, so the bias is
//! at most `(n−1)/2^m`. Members are kept as a multiset.

use serde::Serialize;

use crate::bits::{index_width, Bits};
use crate::error::{Error, Result};

/// Largest `n` for which [`bias_of`] enumerates all characters.
pub const BIAS_CHECK_LIMIT: usize = 24;

/// Irreducible polynomials over GF(2), indexed by degree, with the leading bit.
const IRREDUCIBLE: [u64; 21] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B, 0x20009, 0x40081, 0x80027, 0x100009,
];

/// Largest field degree with a tabulated modulus.
pub const MAX_FIELD_DEGREE: u32 = 20;

/// Arithmetic in `GF(2^m)` with a fixed irreducible modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gf2m {
    m: u32,
    poly: u64,
}

impl Gf2m {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > MAX_FIELD_DEGREE {
            return Err(Error::InvalidArgument(format!("field degree {m} not supported")));
        }
        Ok(Gf2m { m, poly: IRREDUCIBLE[m as usize] })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.poly
    }

    pub fn mul(&self, mut a: u64, mut b: u64) -> u64 {
        let top = 1u64 << self.m;
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.poly;
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Members {
    Power { field: Gf2m },
    Explicit(Vec<Bits>),
}

/// A multiset `S ⊆ {0,1}^n` addressed by index.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasedSet {
    n: usize,
    target_bias: f64,
    members: Members,
}

#[derive(Clone, Debug, Serialize)]
pub struct BiasedSetSummary {
    pub n: usize,
    pub target_bias: f64,
    pub size: u64,
    pub field_degree: Option<u32>,
    pub size_constant: f64,
}

impl BiasedSet {
    pub fn from_members(n: usize, members: Vec<Bits>, target_bias: f64) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("biased set must be nonempty".into()));
        }
        if let Some(bad) = members.iter().find(|m| m.len() != n) {
            return Err(Error::LengthMismatch { expected: n, got: bad.len() });
        }
        Ok(BiasedSet { n, target_bias, members: Members::Explicit(members) })
    }

    /// All of `{0,1}^n` in index order.
    pub fn full_cube(n: usize) -> Result<Self> {
        if n > BIAS_CHECK_LIMIT {
            return Err(Error::BiasCheckTooLarge(n));
        }
        let members = (0..1u64 << n).map(|i| Bits::from_index(i, n)).collect();
        BiasedSet::from_members(n, members, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn target_bias(&self) -> f64 {
        self.target_bias
    }

    pub fn len(&self) -> u64 {
        match &self.members {
            Members::Power { field } => 1u64 << (2 * field.m),
            Members::Explicit(v) => v.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bits needed to send one index.
    pub fn index_bits(&self) -> usize {
        index_width(self.len())
    }

    pub fn field_degree(&self) -> Option<u32> {
        match &self.members {
            Members::Power { field } => Some(field.m),
            Members::Explicit(_) => None,
        }
    }

    /// Member at `index`; power-construction indices are `x·2^m + y`.
    pub fn member(&self, index: u64) -> Result<Bits> {
        if index >= self.len() {
            return Err(Error::InvalidArgument(format!("index {index} outside set of size {}", self.len())));
        }
        Ok(match &self.members {
            Members::Explicit(v) => v[index as usize].clone(),
            Members::Power { field } => {
                let x = index >> field.m;
                let y = index & ((1u64 << field.m) - 1);
                let mut out = Bits::zeros(self.n);
                let mut p = 1u64;
                for i in 0..self.n {
                    out.set(i, (p & y).count_ones() % 2 == 1);
                    p = field.mul(p, x);
                }
                out
            }
        })
    }

    pub fn members(&self) -> impl Iterator<Item = Bits> + '_ {
        (0..self.len()).map(move |i| self.member(i).expect("index in range"))
    }

    /// Newline-delimited binary strings.
    pub fn export(&self) -> String {
        let mut s = String::new();
        for m in self.members() {
            s.push_str(&m.to_string());
            s.push('\n');
        }
        s
    }

    pub fn summary(&self) -> BiasedSetSummary {
        let size = self.len();
        let base = if self.target_bias > 0.0 { (self.n as f64 / self.target_bias).powi(2) } else { f64::NAN };
        BiasedSetSummary {
            n: self.n,
            target_bias: self.target_bias,
            size,
            field_degree: self.field_degree(),
            size_constant: size as f64 / base,
        }
    }
}

/// Field degree `ceil(log2(n/λ))`, at least 1.
pub fn field_degree_for(n: usize, bias: f64) -> u32 {
    let ratio = n as f64 / bias;
    (ratio.log2().ceil().max(1.0)) as u32
}

/// Builds a set with bias at most `bias`.
///
/// `bias = 1` is the degenerate case and returns `{0^n}`.
pub fn construct_biased(n: usize, bias: f64) -> Result<BiasedSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if !(bias > 0.0 && bias <= 1.0) {
        return Err(Error::BiasOutOfRange(bias));
    }
    if bias == 1.0 {
        return BiasedSet::from_members(n, vec![Bits::zeros(n)], 1.0);
    }
    let m = field_degree_for(n, bias);
    let field = Gf2m::new(m)?;
    Ok(BiasedSet { n, target_bias: bias, members: Members::Power { field } })
}

/// `max_{b ≠ 0} |E_{a∈S} (−1)^{a·b}|`, by a Walsh-Hadamard transform.
pub fn bias_of(s: &BiasedSet) -> Result<f64> {
    let n = s.n();
    if n > BIAS_CHECK_LIMIT {
        return Err(Error::BiasCheckTooLarge(n));
    }
    let mut f = vec![0i64; 1 << n];
    for m in s.members() {
        f[m.to_index() as usize] += 1;
    }
    let mut h = 1;
    while h < f.len() {
        for i in (0..f.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (f[j], f[j + h]);
                f[j] = a + b;
                f[j + h] = a - b;
            }
        }
        h *= 2;
    }
    let max = f.iter().skip(1).map(|v| v.unsigned_abs()).max().unwrap_or(0);
    Ok(max as f64 / s.len() as f64)
}
