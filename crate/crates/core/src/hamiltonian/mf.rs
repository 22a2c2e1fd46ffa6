//! Energy-test form of an X/Z Hamiltonian.
//!
//! Seed layout: term index, then coin bits, then one neutral-branch bit.
//! Term `j` is measured when `coin < threshold_j`; otherwise the seed lands
//! on the neutral branch, which measures nothing and accepts with
//! probability 1/2. The realized operator is
//! `H″ = offset·𝟙 + scale·H̃` with `H̃ = Σ_j realized_j P_j`.

use serde::{Deserialize, Serialize};

use super::{MeasurementHamiltonian, Recipe, XZHamiltonian};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Coin resolution used by [`mf_convert`].
pub const DEFAULT_COIN_BITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MfForm {
    pub source: XZHamiltonian,
    pub index_bits: usize,
    pub coin_bits: usize,
    pub neutral_bit: bool,
    /// Per-term coin thresholds out of `2^coin_bits`.
    pub thresholds: Vec<u64>,
    pub c_max: f64,
    pub scale: f64,
    pub offset: f64,
    /// Coefficients of `H̃` after quantization.
    pub realized: Vec<f64>,
}

impl MfForm {
    fn padded(&self) -> usize {
        1 << self.index_bits
    }

    fn real_term(&self, seed: &Bits) -> Option<usize> {
        let j = seed.slice(0, self.index_bits).expect("seed checked").to_index() as usize;
        if j >= self.source.terms.len() {
            return None;
        }
        let coin = seed.slice(self.index_bits, self.coin_bits).expect("seed checked").to_index();
        (coin < self.thresholds[j]).then_some(j)
    }

    pub(super) fn sample(&self, seed: &Bits) -> PauliString {
        match self.real_term(seed) {
            Some(j) => self.source.term_string(j),
            None => PauliString::identity(self.source.n),
        }
    }

    pub(super) fn accept(&self, seed: &Bits, u: &Bits) -> bool {
        match self.real_term(seed) {
            Some(j) => {
                let parity = u.masked_parity(&self.source.term_mask(j)).expect("lengths checked");
                parity ^ (self.source.terms[j].coeff < 0.0)
            }
            None => !seed.get(self.index_bits + self.coin_bits),
        }
    }

    /// `H̃` as an X/Z Hamiltonian.
    pub fn realized_hamiltonian(&self) -> XZHamiltonian {
        let mut h = self.source.clone();
        for (t, &c) in h.terms.iter_mut().zip(&self.realized) {
            t.coeff = c;
        }
        h
    }

    /// Value of `H″` for a state with `⟨H̃⟩ = energy`.
    pub fn rescale(&self, energy: f64) -> f64 {
        self.offset + self.scale * energy
    }

    /// Largest coefficient error introduced by quantization.
    pub fn quantization_error(&self) -> f64 {
        self.source.terms.iter().zip(&self.realized).map(|(t, r)| (t.coeff - r).abs()).fold(0.0, f64::max)
    }
}

pub fn mf_convert(h: &XZHamiltonian) -> Result<MeasurementHamiltonian> {
    mf_convert_with(h, DEFAULT_COIN_BITS)
}

/// Converts with coin resolution `2^coin_bits`.
pub fn mf_convert_with(h: &XZHamiltonian, coin_bits: usize) -> Result<MeasurementHamiltonian> {
    let h = XZHamiltonian::new(h.n, h.terms.clone())?;
    if h.terms.is_empty() {
        return Err(Error::ZeroHamiltonian);
    }
    if coin_bits > 32 {
        return Err(Error::InvalidArgument(format!("coin_bits {coin_bits} exceeds 32")));
    }
    let c_max = h.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max);
    if c_max == 0.0 {
        return Err(Error::ZeroHamiltonian);
    }
    let m = h.terms.len();
    let padded = m.next_power_of_two();
    let index_bits = padded.trailing_zeros() as usize;
    let full = 1u64 << coin_bits;
    let quantized: Vec<u64> =
        h.terms.iter().map(|t| ((t.coeff.abs() / c_max) * full as f64).round().clamp(0.0, full as f64) as u64).collect();
    let use_coins = quantized.iter().any(|&q| q < full);
    let (coin_bits, thresholds) = if use_coins { (coin_bits, quantized) } else { (0, vec![1; m]) };
    let scale_den = if use_coins { full as f64 } else { 1.0 };
    let realized: Vec<f64> = h
        .terms
        .iter()
        .zip(&thresholds)
        .map(|(t, &q)| t.coeff.signum() * c_max * q as f64 / scale_den)
        .collect();
    let neutral_bit = padded > m || use_coins;
    let form = MfForm {
        source: h.clone(),
        index_bits,
        coin_bits,
        neutral_bit,
        thresholds,
        c_max,
        scale: 1.0 / (2.0 * padded as f64 * c_max),
        offset: 0.5,
        realized,
    };
    debug_assert_eq!(form.padded(), padded);
    Ok(MeasurementHamiltonian {
        n: h.n,
        seed_bits: index_bits + coin_bits + neutral_bit as usize,
        alpha: 0.0,
        beta: 1.0,
        recipe: Recipe::Mf(form),
    })
}
