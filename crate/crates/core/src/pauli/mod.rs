//! Heisenberg-Weyl group algebra over X/Z Pauli words.
//!
//! A [`PauliWord`] is `±σ_X(x)·σ_Z(z)` in normal form, with the X factor to
//! the left. Only real signs occur.

mod dense;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::Bits;
use crate::error::{Error, Result};

pub use dense::{
    pauli_projector, pauli_projector_with_cap, projector_family, reduce_measurement, word_to_dense,
    sigma_dense, word_to_dense_with_cap, DenseOperator, Family, DEFAULT_DENSE_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Z,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Z => 'Z',
        }
    }
}

/// A string over `{I, X, Z}` naming a measurement basis per qubit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Letter>);

impl PauliString {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidArgument("pauli string must have n >= 1".into()));
        }
        Ok(PauliString(letters))
    }

    pub fn uniform(letter: Letter, n: usize) -> Self {
        PauliString(vec![letter; n])
    }

    pub fn identity(n: usize) -> Self {
        Self::uniform(Letter::I, n)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Letter {
        self.0[i]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&l| l == Letter::I)
    }

    /// Indicator of the positions carrying `letter`.
    pub fn mask_of(&self, letter: Letter) -> Bits {
        Bits::from_bools(&self.0.iter().map(|&l| l == letter).collect::<Vec<_>>())
    }

    pub fn concat(&self, other: &PauliString) -> PauliString {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        PauliString(v)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' | '1' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Z' => Ok(Letter::Z),
                _ => Err(Error::InvalidArgument(format!("bad pauli letter {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Signed element `±σ_X(x)σ_Z(z)` of W_n.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PauliWord {
    pub negative: bool,
    pub x: Bits,
    pub z: Bits,
}

impl PauliWord {
    pub fn new(negative: bool, x: Bits, z: Bits) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::LengthMismatch { expected: x.len(), got: z.len() });
        }
        Ok(PauliWord { negative, x, z })
    }

    pub fn identity(n: usize) -> Self {
        PauliWord { negative: false, x: Bits::zeros(n), z: Bits::zeros(n) }
    }

    pub fn x_type(mask: Bits) -> Self {
        let n = mask.len();
        PauliWord { negative: false, x: mask, z: Bits::zeros(n) }
    }

    pub fn z_type(mask: Bits) -> Self {
        let n = mask.len();
        PauliWord { negative: false, x: Bits::zeros(n), z: mask }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn phase(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn negated(&self) -> Self {
        PauliWord { negative: !self.negative, ..self.clone() }
    }

    pub fn is_identity(&self) -> bool {
        !self.negative && self.x.is_zero() && self.z.is_zero()
    }

    /// Hermitian (hence a binary observable) iff `x·z` is even.
    pub fn is_hermitian(&self) -> bool {
        !self.x.dot(&self.z).expect("masks share a length")
    }

    /// `(−1)^{x·z}`: the sign of the word's square.
    pub fn square_sign(&self) -> i8 {
        if self.x.dot(&self.z).expect("masks share a length") {
            -1
        } else {
            1
        }
    }

    /// Inverse in W_n: `(X^x Z^z)^{-1} = (−1)^{x·z} X^x Z^z`.
    pub fn inverse(&self) -> Self {
        let flip = self.x.dot(&self.z).expect("masks share a length");
        PauliWord { negative: self.negative ^ flip, ..self.clone() }
    }

    /// Whether the two words commute.
    pub fn commutes_with(&self, other: &PauliWord) -> Result<bool> {
        let a = self.x.dot(&other.z)?;
        let b = self.z.dot(&other.x)?;
        Ok(a == b)
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliWord) -> PauliWord {
        PauliWord {
            negative: self.negative ^ other.negative,
            x: self.x.concat(&other.x),
            z: self.z.concat(&other.z),
        }
    }

    pub fn hex_form(&self) -> PauliWordHex {
        PauliWordHex {
            n: self.n(),
            sign: self.phase(),
            xmask: self.x.to_hex(),
            zmask: self.z.to_hex(),
        }
    }
}

/// JSON form of a word: sign plus hex masks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliWordHex {
    pub n: usize,
    pub sign: i8,
    pub xmask: String,
    pub zmask: String,
}

impl TryFrom<PauliWordHex> for PauliWord {
    type Error = Error;

    fn try_from(h: PauliWordHex) -> Result<Self> {
        if h.sign != 1 && h.sign != -1 {
            return Err(Error::InvalidArgument(format!("sign {} not in {{+1, -1}}", h.sign)));
        }
        PauliWord::new(h.sign == -1, Bits::from_hex(&h.xmask, h.n)?, Bits::from_hex(&h.zmask, h.n)?)
    }
}

impl Serialize for PauliWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.hex_form().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        PauliWord::try_from(PauliWordHex::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `σ_w(a) = ⊗_i σ_{w_i}^{a_i}`.
pub fn sigma_w(w: &PauliString, a: &Bits) -> Result<PauliWord> {
    if w.len() != a.len() {
        return Err(Error::LengthMismatch { expected: w.len(), got: a.len() });
    }
    let mut x = Bits::zeros(a.len());
    let mut z = Bits::zeros(a.len());
    for i in 0..a.len() {
        if a.get(i) {
            match w.get(i) {
                Letter::X => x.set(i, true),
                Letter::Z => z.set(i, true),
                Letter::I => {}
            }
        }
    }
    Ok(PauliWord { negative: false, x, z })
}

/// Normal-form product: `X^{x1}Z^{z1}X^{x2}Z^{z2} = (−1)^{z1·x2} X^{x1⊕x2}Z^{z1⊕z2}`.
pub fn word_mul(p: &PauliWord, q: &PauliWord) -> Result<PauliWord> {
    if p.n() != q.n() {
        return Err(Error::LengthMismatch { expected: p.n(), got: q.n() });
    }
    Ok(PauliWord {
        negative: p.negative ^ q.negative ^ p.z.dot(&q.x)?,
        x: p.x.xor(&q.x)?,
        z: p.z.xor(&q.z)?,
    })
}

/// Every element of W_n (`2·4^n` words), ordered by (sign, x, z).
pub fn enumerate_group(n: usize) -> Vec<PauliWord> {
    assert!(n <= 6, "group enumeration is only meant for tiny n");
    let side = 1u64 << n;
    let mut out = Vec::with_capacity(2 * (side * side) as usize);
    for negative in [false, true] {
        for x in 0..side {
            for z in 0..side {
                out.push(PauliWord { negative, x: Bits::from_index(x, n), z: Bits::from_index(z, n) });
            }
        }
    }
    out
}
