//! Measurement-form Hamiltonians `H = 𝟙 − E_{w∼D} Σ_{u∈Q(w)} π^w_u`.
//!
//! A [`MeasurementHamiltonian`] is stored as the recipe that built it. The
//! sampler and acceptance predicate are evaluated from the recipe on demand.

mod energy;
mod ksv;
mod mf;
mod prg;
mod xz;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString};

pub use energy::{
    energy_operator, exact_energy, exact_energy_mixture, ground_energy, sampled_energy, weighted_seeds,
    EnergyEstimate, ENUMERATION_LIMIT,
};
pub use ksv::{ksv_accept_probability, ksv_amplify, ksv_amplify_with_cap, KsvRule, KSV_QUBIT_CAP};
pub use mf::{mf_convert, mf_convert_with, MfForm, DEFAULT_COIN_BITS};
pub use prg::{prg_expand, Prg, PrgKind, DEFAULT_PRG_KEY, MAX_EXPAND_BITS, MAX_HISTOGRAM_OUT, MAX_SEED_BITS};
pub use xz::{ground_state_of, XZHamiltonian, XZTerm};

/// Acceptance set of a table entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcceptRule {
    All,
    Nothing,
    /// Accept iff the parity of `u` over `mask` equals `odd`.
    Parity { mask: Bits, odd: bool },
}

impl AcceptRule {
    fn eval(&self, u: &Bits) -> Result<bool> {
        Ok(match self {
            AcceptRule::All => true,
            AcceptRule::Nothing => false,
            AcceptRule::Parity { mask, odd } => u.masked_parity(mask)? == *odd,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub w: PauliString,
    pub accept: AcceptRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Recipe {
    /// Seed indexes a uniformly drawn entry.
    Table { entries: Vec<TableEntry> },
    Mf(MfForm),
    Ksv { base: Box<MeasurementHamiltonian>, t: usize, rule: KsvRule },
    Prg { base: Box<MeasurementHamiltonian>, prg: Prg },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementHamiltonian {
    pub n: usize,
    pub seed_bits: usize,
    pub alpha: f64,
    pub beta: f64,
    pub recipe: Recipe,
}

impl MeasurementHamiltonian {
    /// Uniform mixture over `entries`; the count must be a power of two.
    pub fn from_table(n: usize, entries: Vec<TableEntry>) -> Result<Self> {
        if entries.is_empty() || !entries.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!("table size {} is not a power of two", entries.len())));
        }
        for e in &entries {
            if e.w.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: e.w.len() });
            }
            if let AcceptRule::Parity { mask, .. } = &e.accept {
                if mask.len() != n {
                    return Err(Error::LengthMismatch { expected: n, got: mask.len() });
                }
            }
        }
        let seed_bits = entries.len().trailing_zeros() as usize;
        Ok(MeasurementHamiltonian { n, seed_bits, alpha: 0.0, beta: 1.0, recipe: Recipe::Table { entries } })
    }

    /// Sets the promise thresholds `0 ≤ α < β ≤ 1`.
    pub fn with_promise(mut self, alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) || alpha >= beta {
            return Err(Error::InvalidArgument(format!("promise ({alpha}, {beta}) is not 0 <= a < b <= 1")));
        }
        self.alpha = alpha;
        self.beta = beta;
        Ok(self)
    }

    pub fn midpoint(&self) -> f64 {
        (self.alpha + self.beta) / 2.0
    }

    fn check_seed(&self, seed: &Bits) -> Result<()> {
        if seed.len() != self.seed_bits {
            return Err(Error::LengthMismatch { expected: self.seed_bits, got: seed.len() });
        }
        Ok(())
    }

    /// The measured basis string `w` for `seed`.
    pub fn sample(&self, seed: &Bits) -> Result<PauliString> {
        self.check_seed(seed)?;
        match &self.recipe {
            Recipe::Table { entries } => Ok(entries[seed.to_index() as usize].w.clone()),
            Recipe::Mf(form) => Ok(form.sample(seed)),
            Recipe::Ksv { base, t, .. } => {
                let r = base.seed_bits;
                let mut w = base.sample(&seed.slice(0, r)?)?;
                for i in 1..*t {
                    w = w.concat(&base.sample(&seed.slice(i * r, r)?)?);
                }
                Ok(w)
            }
            Recipe::Prg { base, prg } => base.sample(&self.base_seed(base, prg, seed)?),
        }
    }

    /// Whether outcome `u` of measuring `sample(seed)` lies in `Q(w)`.
    pub fn accept(&self, seed: &Bits, u: &Bits) -> Result<bool> {
        self.check_seed(seed)?;
        if u.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: u.len() });
        }
        match &self.recipe {
            Recipe::Table { entries } => entries[seed.to_index() as usize].accept.eval(u),
            Recipe::Mf(form) => Ok(form.accept(seed, u)),
            Recipe::Ksv { base, t, rule } => {
                let (r, n) = (base.seed_bits, base.n);
                let mut rejects = 0;
                for i in 0..*t {
                    if !base.accept(&seed.slice(i * r, r)?, &u.slice(i * n, n)?)? {
                        rejects += 1;
                    }
                }
                Ok(rule.accepts(rejects, *t, base.midpoint()))
            }
            Recipe::Prg { base, prg } => base.accept(&self.base_seed(base, prg, seed)?, u),
        }
    }

    fn base_seed(&self, base: &MeasurementHamiltonian, prg: &Prg, seed: &Bits) -> Result<Bits> {
        prg.expand(seed)?.slice(0, base.seed_bits)
    }

    /// Names the pipeline steps, outermost last.
    pub fn pipeline(&self) -> Vec<String> {
        match &self.recipe {
            Recipe::Table { entries } => vec![format!("table({})", entries.len())],
            Recipe::Mf(form) => vec![format!("mf(m={}, coin_bits={})", form.source.terms.len(), form.coin_bits)],
            Recipe::Ksv { base, t, rule } => {
                let mut v = base.pipeline();
                v.push(format!("ksv(t={t}, rule={rule:?})"));
                v
            }
            Recipe::Prg { base, prg } => {
                let mut v = base.pipeline();
                v.push(format!("prg(seed_len={}, out_len={})", prg.seed_len, prg.out_len));
                v
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// Replaces `mh`'s seed with a PRG expansion of a short seed.
pub fn prg_subsample(mh: &MeasurementHamiltonian, prg: Prg) -> Result<MeasurementHamiltonian> {
    if prg.out_len < mh.seed_bits {
        return Err(Error::OutputShortfall { need: mh.seed_bits, got: prg.out_len });
    }
    Ok(MeasurementHamiltonian {
        n: mh.n,
        seed_bits: prg.seed_len,
        alpha: mh.alpha,
        beta: mh.beta,
        recipe: Recipe::Prg { base: Box::new(mh.clone()), prg },
    })
}

/// Draws `w ∼ D` from the first `seed_bits` bits and `a` from the next `n`,
/// keeping `w_i` where `a_i = 1`.
pub fn dprime_sample(mh: &MeasurementHamiltonian, seed: &Bits) -> Result<PauliString> {
    let need = mh.seed_bits + mh.n;
    if seed.len() < need {
        return Err(Error::SeedUnderflow { need, got: seed.len() });
    }
    let w = mh.sample(&seed.slice(0, mh.seed_bits)?)?;
    let a = seed.slice(mh.seed_bits, mh.n)?;
    let letters = w.letters().iter().zip(a.iter()).map(|(&l, keep)| if keep { l } else { Letter::I }).collect();
    PauliString::new(letters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::TrialRng;

    fn toy() -> MeasurementHamiltonian {
        let entries = vec![
            TableEntry { w: "XZI".parse().unwrap(), accept: AcceptRule::All },
            TableEntry { w: "ZZX".parse().unwrap(), accept: AcceptRule::Nothing },
        ];
        MeasurementHamiltonian::from_table(3, entries).unwrap()
    }

    #[test]
    fn pipeline_json_round_trips() {
        let h = XZHamiltonian::new(2, vec![XZTerm::new(0.9, vec![0], "Z"), XZTerm::new(-0.4, vec![1], "X")]).unwrap();
        let mh = mf_convert(&h).unwrap();
        assert_eq!(MeasurementHamiltonian::from_json(&mh.to_json()).unwrap(), mh);
        let amp = ksv_amplify(&mh, 4, KsvRule::Midpoint).unwrap();
        assert_eq!(MeasurementHamiltonian::from_json(&amp.to_json()).unwrap(), amp);
        let sub = prg_subsample(&amp, Prg::ggm(&DEFAULT_PRG_KEY, 9, amp.seed_bits).unwrap()).unwrap();
        assert_eq!(MeasurementHamiltonian::from_json(&sub.to_json()).unwrap(), sub);
    }

    #[test]
    fn dprime_extremes() {
        let mh = toy();
        let w = mh.sample(&Bits::parse("1").unwrap()).unwrap();
        assert_eq!(dprime_sample(&mh, &Bits::parse("1111").unwrap()).unwrap(), w);
        assert_eq!(dprime_sample(&mh, &Bits::parse("1000").unwrap()).unwrap(), PauliString::identity(3));
        assert!(matches!(dprime_sample(&mh, &Bits::parse("10").unwrap()), Err(Error::SeedUnderflow { need: 4, got: 2 })));
    }

    #[test]
    fn dprime_marginals() {
        let mh = toy();
        let draws = 10_000;
        let mut rng = TrialRng::new(5, 0);
        let mut kept = [[0usize; 3]; 2];
        let mut seen = [0usize; 2];
        for _ in 0..draws {
            let seed = rng.bits(4);
            let j = seed.get(0) as usize;
            seen[j] += 1;
            let w = mh.sample(&seed.slice(0, 1).unwrap()).unwrap();
            let wp = dprime_sample(&mh, &seed).unwrap();
            for i in 0..3 {
                assert!(wp.get(i) == Letter::I || wp.get(i) == w.get(i));
                if wp.get(i) == w.get(i) && w.get(i) != Letter::I {
                    kept[j][i] += 1;
                }
            }
        }
        for (j, row) in kept.iter().enumerate() {
            let w = mh.sample(&Bits::from_index(j as u64, 1)).unwrap();
            for (i, &k) in row.iter().enumerate() {
                if w.get(i) == Letter::I {
                    continue;
                }
                let n = seen[j] as f64;
                let sigma = (n * 0.25).sqrt();
                assert!((k as f64 - n / 2.0).abs() < 5.0 * sigma, "entry {j} qubit {i}: {k} of {n}");
            }
        }
    }

    #[test]
    fn table_validation_and_promise() {
        assert!(MeasurementHamiltonian::from_table(3, vec![]).is_err());
        let e = TableEntry { w: "XZI".parse().unwrap(), accept: AcceptRule::All };
        assert!(MeasurementHamiltonian::from_table(3, vec![e.clone(), e.clone(), e.clone()]).is_err());
        assert!(MeasurementHamiltonian::from_table(2, vec![e]).is_err());
        assert!(toy().with_promise(0.5, 0.4).is_err());
        assert!(toy().with_promise(0.1, 0.6).is_ok());
    }

    #[test]
    fn recipe_json_roundtrip() {
        let mh = prg_subsample(&toy(), Prg::ggm(&DEFAULT_PRG_KEY, 8, 4).unwrap()).unwrap();
        let back = MeasurementHamiltonian::from_json(&mh.to_json()).unwrap();
        assert_eq!(back, mh);
        assert_eq!(back.pipeline().len(), 2);
    }

    #[test]
    fn subsample_shortfall() {
        let mh = toy();
        let err = prg_subsample(&mh, Prg::constant(4, Bits::zeros(0))).unwrap_err();
        assert_eq!(err, Error::OutputShortfall { need: 1, got: 0 });
    }

    #[test]
    fn identity_prg_is_bitwise_identity() {
        let h = XZHamiltonian::new(
            3,
            vec![XZTerm::new(0.7, vec![0, 1], "XZ"), XZTerm::new(-0.2, vec![2], "X"), XZTerm::new(0.4, vec![1, 2], "ZZ")],
        )
        .unwrap();
        let mh = mf_convert(&h).unwrap();
        let sub = prg_subsample(&mh, Prg::identity(mh.seed_bits)).unwrap();
        for s in 0..1u64 << mh.seed_bits {
            let seed = Bits::from_index(s, mh.seed_bits);
            assert_eq!(sub.sample(&seed).unwrap(), mh.sample(&seed).unwrap());
            for u in 0..8 {
                let u = Bits::from_index(u, 3);
                assert_eq!(sub.accept(&seed, &u).unwrap(), mh.accept(&seed, &u).unwrap());
            }
        }
    }
}
