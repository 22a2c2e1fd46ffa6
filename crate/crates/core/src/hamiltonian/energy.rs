use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{MeasurementHamiltonian, Recipe, MAX_HISTOGRAM_OUT};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pauli::{pauli_projector, Letter, PauliString, DEFAULT_DENSE_CAP};
use crate::rng::TrialRng;
use crate::simulator::QuantumState;

/// Largest seed length enumerated seed by seed.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyEstimate {
    pub energy: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// The seed distribution of `mh`, possibly pushed through a PRG onto the
/// seeds of its base.
///
/// Returns the Hamiltonian whose seeds are listed, and their weights.
pub fn weighted_seeds(mh: &MeasurementHamiltonian) -> Result<(&MeasurementHamiltonian, Vec<(Bits, f64)>)> {
    if mh.seed_bits <= ENUMERATION_LIMIT {
        let w = 1.0 / (1u64 << mh.seed_bits) as f64;
        return Ok((mh, (0..1u64 << mh.seed_bits).map(|s| (Bits::from_index(s, mh.seed_bits), w)).collect()));
    }
    if let Recipe::Prg { base, prg } = &mh.recipe {
        if prg.out_len <= MAX_HISTOGRAM_OUT && base.seed_bits <= ENUMERATION_LIMIT {
            let hist = prg.output_histogram()?;
            let total = (1u64 << prg.seed_len) as f64;
            let mut acc: HashMap<u64, f64> = HashMap::new();
            for (v, &c) in hist.iter().enumerate() {
                if c > 0 {
                    let s = Bits::from_index(v as u64, prg.out_len).slice(0, base.seed_bits)?;
                    *acc.entry(s.to_index()).or_default() += c as f64 / total;
                }
            }
            let mut out: Vec<(Bits, f64)> =
                acc.into_iter().map(|(s, w)| (Bits::from_index(s, base.seed_bits), w)).collect();
            out.sort_by(|a, b| a.0.cmp(&b.0));
            return Ok((base, out));
        }
    }
    Err(Error::SeedSpaceTooLarge { bits: mh.seed_bits, limit: ENUMERATION_LIMIT })
}

fn check_state(mh: &MeasurementHamiltonian, state: &QuantumState) -> Result<()> {
    if state.qubits() != mh.n {
        return Err(Error::DimensionMismatch(format!("state has {} qubits, hamiltonian {}", state.qubits(), mh.n)));
    }
    Ok(())
}

/// `Tr[Hρ]` for `ρ = |ψ⟩⟨ψ|/⟨ψ|ψ⟩`, by enumerating seeds.
pub fn exact_energy(mh: &MeasurementHamiltonian, state: &QuantumState) -> Result<f64> {
    check_state(mh, state)?;
    let (term, seeds) = weighted_seeds(mh)?;
    let all: Vec<usize> = (0..mh.n).collect();
    let norm = state.norm_sqr();
    let mut cache: HashMap<PauliString, Vec<(Bits, f64)>> = HashMap::new();
    let mut accept = 0.0;
    for (seed, weight) in seeds {
        let w = term.sample(&seed)?;
        if !cache.contains_key(&w) {
            let dist = state.measure_bases_branches(&all, &w)?.into_iter().map(|b| (b.bits, b.probability / norm)).collect();
            cache.insert(w.clone(), dist);
        }
        let mut p = 0.0;
        for (u, prob) in &cache[&w] {
            if term.accept(&seed, u)? {
                p += prob;
            }
        }
        accept += weight * p;
    }
    Ok(1.0 - accept)
}

/// Energy of the mixture `Σ_k p_k |ψ_k⟩⟨ψ_k|`.
pub fn exact_energy_mixture(mh: &MeasurementHamiltonian, ensemble: &[(f64, QuantumState)]) -> Result<f64> {
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if ensemble.is_empty() || (total - 1.0).abs() > 1e-9 || ensemble.iter().any(|(p, _)| *p < 0.0) {
        return Err(Error::InvalidArgument("mixture weights must be a probability vector".into()));
    }
    let mut e = 0.0;
    for (p, s) in ensemble {
        e += p * exact_energy(mh, s)?;
    }
    Ok(e)
}

/// Monte Carlo estimate of the energy with its standard error.
pub fn sampled_energy(mh: &MeasurementHamiltonian, state: &QuantumState, trials: u64, rng: &mut TrialRng) -> Result<EnergyEstimate> {
    check_state(mh, state)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("sampling needs at least one trial".into()));
    }
    let all: Vec<usize> = (0..mh.n).collect();
    let mut rejects = 0u64;
    for _ in 0..trials {
        let seed = rng.bits(mh.seed_bits);
        let w = mh.sample(&seed)?;
        let out = state.measure_bases(&all, &w, rng)?;
        if !mh.accept(&seed, &out.bits)? {
            rejects += 1;
        }
    }
    let e = rejects as f64 / trials as f64;
    Ok(EnergyEstimate { energy: e, stderr: (e * (1.0 - e) / trials as f64).sqrt(), trials })
}

/// Dense `H = 𝟙 − E_seed Σ_{u∈Q} π^w_u`.
pub fn energy_operator(mh: &MeasurementHamiltonian) -> Result<DMatrix<Complex64>> {
    if mh.n > DEFAULT_DENSE_CAP {
        return Err(Error::CapExceeded { qubits: mh.n, cap: DEFAULT_DENSE_CAP });
    }
    let (term, seeds) = weighted_seeds(mh)?;
    let d = 1usize << mh.n;
    let mut grouped: HashMap<(PauliString, Vec<bool>), f64> = HashMap::new();
    for (seed, weight) in seeds {
        let w = term.sample(&seed)?;
        let active: Vec<usize> = (0..mh.n).filter(|&i| w.get(i) != Letter::I).collect();
        let mut pattern = Vec::with_capacity(1 << active.len());
        for k in 0..1u64 << active.len() {
            pattern.push(term.accept(&seed, &spread(k, &active, mh.n))?);
        }
        *grouped.entry((w, pattern)).or_default() += weight;
    }
    let mut h = DMatrix::<Complex64>::identity(d, d);
    for ((w, pattern), weight) in grouped {
        let active: Vec<usize> = (0..mh.n).filter(|&i| w.get(i) != Letter::I).collect();
        for (k, _) in pattern.iter().enumerate().filter(|(_, &a)| a) {
            let proj = pauli_projector(&w, &spread(k as u64, &active, mh.n))?.into_matrix();
            h -= proj * Complex64::new(weight, 0.0);
        }
    }
    Ok(h)
}

fn spread(k: u64, active: &[usize], n: usize) -> Bits {
    let mut u = Bits::zeros(n);
    for (j, &i) in active.iter().enumerate() {
        u.set(i, (k >> (active.len() - 1 - j)) & 1 == 1);
    }
    u
}

/// Smallest eigenvalue of [`energy_operator`].
pub fn ground_energy(mh: &MeasurementHamiltonian) -> Result<f64> {
    let h = energy_operator(mh)?;
    Ok(h.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}
