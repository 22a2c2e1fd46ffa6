use serde::{Deserialize, Serialize};

use super::{MeasurementHamiltonian, Recipe};
use crate::error::{Error, Result};

/// Default cap on `t·n` for [`ksv_amplify`].
pub const KSV_QUBIT_CAP: usize = 4096;

/// Threshold applied to the number of rejecting blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KsvRule {
    /// Accept iff `rejects / t < (α+β)/2`.
    #[default]
    Midpoint,
    /// Accept iff `Σ b_i < t·(α+β)/2` with `b_i = +1` for a rejecting block
    /// and `−1` otherwise.
    SignedSum,
}

impl KsvRule {
    pub fn accepts(self, rejects: usize, t: usize, mid: f64) -> bool {
        let (r, t) = (rejects as f64, t as f64);
        match self {
            KsvRule::Midpoint => r < t * mid,
            KsvRule::SignedSum => 2.0 * r - t < t * mid,
        }
    }
}

pub fn ksv_amplify(mh: &MeasurementHamiltonian, t: usize, rule: KsvRule) -> Result<MeasurementHamiltonian> {
    ksv_amplify_with_cap(mh, t, rule, KSV_QUBIT_CAP)
}

/// `t` independent copies with a threshold verdict.
///
/// The output promise is the amplified pair evaluated on product states
/// whose blocks sit exactly at the input thresholds.
pub fn ksv_amplify_with_cap(mh: &MeasurementHamiltonian, t: usize, rule: KsvRule, cap: usize) -> Result<MeasurementHamiltonian> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    let qubits = t.saturating_mul(mh.n);
    if qubits > cap {
        return Err(Error::CapExceeded { qubits, cap });
    }
    let mid = mh.midpoint();
    let alpha = 1.0 - ksv_accept_probability(1.0 - mh.alpha, t, mid, rule);
    let beta = 1.0 - ksv_accept_probability(1.0 - mh.beta, t, mid, rule);
    Ok(MeasurementHamiltonian {
        n: qubits,
        seed_bits: t * mh.seed_bits,
        alpha,
        beta,
        recipe: Recipe::Ksv { base: Box::new(mh.clone()), t, rule },
    })
}

fn ln_choose(t: usize, k: usize) -> f64 {
    fn ln_fact(n: usize) -> f64 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    }
    ln_fact(t) - ln_fact(k) - ln_fact(t - k)
}

/// Exact accept probability when each of `t` independent blocks accepts
/// with probability `block_accept`.
pub fn ksv_accept_probability(block_accept: f64, t: usize, mid: f64, rule: KsvRule) -> f64 {
    let q = 1.0 - block_accept;
    (0..=t)
        .filter(|&r| rule.accepts(r, t, mid))
        .map(|r| {
            let mut lp = ln_choose(t, r);
            lp += match r {
                0 => 0.0,
                _ if q == 0.0 => return 0.0,
                _ => r as f64 * q.ln(),
            };
            lp += match t - r {
                0 => 0.0,
                _ if block_accept == 0.0 => return 0.0,
                k => k as f64 * block_accept.ln(),
            };
            lp.exp()
        })
        .sum::<f64>()
        .min(1.0)
}

#[cfg(test)]
mod tests {
    use super::super::{exact_energy, AcceptRule, MeasurementHamiltonian, TableEntry};
    use super::*;
    use crate::bits::Bits;
    use crate::rng::TrialRng;
    use crate::simulator::QuantumState;

    fn binom_pmf(t: usize, r: usize, q: f64) -> f64 {
        let mut c = 1.0f64;
        for i in 0..r {
            c = c * (t - i) as f64 / (i + 1) as f64;
        }
        c * q.powi(r as i32) * (1.0 - q).powi((t - r) as i32)
    }

    #[test]
    fn tails_match_direct_sum() {
        for (p, t, mid) in [(0.9, 60, 0.5), (0.1, 60, 0.5), (0.7, 13, 0.35), (0.5, 1, 0.5)] {
            let direct: f64 = (0..=t).filter(|&r| (r as f64) < t as f64 * mid).map(|r| binom_pmf(t, r, 1.0 - p)).sum();
            assert!((ksv_accept_probability(p, t, mid, KsvRule::Midpoint) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn separation_at_t_60() {
        let yes = ksv_accept_probability(0.9, 60, 0.5, KsvRule::Midpoint);
        let no = ksv_accept_probability(0.1, 60, 0.5, KsvRule::Midpoint);
        assert!(yes >= 0.99 && no <= 0.01, "yes {yes} no {no}");
    }

    #[test]
    fn t_one_is_identity() {
        for p in [0.0, 0.2, 0.5, 0.93, 1.0] {
            for mid in [0.1, 0.5, 0.9] {
                assert!((ksv_accept_probability(p, 1, mid, KsvRule::Midpoint) - p).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gap_non_decreasing_in_t() {
        for (p1, p2) in [(0.9, 0.1), (0.8, 0.2), (0.95, 0.05), (0.75, 0.25)] {
            let mid = ((1.0 - p1) + (1.0 - p2)) / 2.0;
            let gap = |t| ksv_accept_probability(p1, t, mid, KsvRule::Midpoint) - ksv_accept_probability(p2, t, mid, KsvRule::Midpoint);
            for t in 1..120 {
                assert!(gap(t + 1) >= gap(t) - 1e-12, "p=({p1},{p2}) t={t}: {} < {}", gap(t + 1), gap(t));
            }
        }
    }

    fn coin_block(accept: bool) -> MeasurementHamiltonian {
        let rule = if accept { AcceptRule::All } else { AcceptRule::Nothing };
        MeasurementHamiltonian::from_table(1, vec![TableEntry { w: "Z".parse().unwrap(), accept: rule }]).unwrap()
    }

    #[test]
    fn predicate_counts_rejecting_blocks() {
        let entries = vec![
            TableEntry { w: "Z".parse().unwrap(), accept: AcceptRule::Parity { mask: Bits::parse("1").unwrap(), odd: false } },
            TableEntry { w: "X".parse().unwrap(), accept: AcceptRule::All },
        ];
        let base = MeasurementHamiltonian::from_table(1, entries).unwrap().with_promise(0.2, 0.6).unwrap();
        let amp = ksv_amplify(&base, 4, KsvRule::Midpoint).unwrap();
        assert_eq!((amp.n, amp.seed_bits), (4, 4));
        assert_eq!(amp.sample(&Bits::parse("0101").unwrap()).unwrap().to_string(), "ZXZX");
        let seed = Bits::parse("0000").unwrap();
        assert!(amp.accept(&seed, &Bits::parse("0000").unwrap()).unwrap());
        assert!(amp.accept(&seed, &Bits::parse("0001").unwrap()).unwrap());
        assert!(!amp.accept(&seed, &Bits::parse("0011").unwrap()).unwrap());
        assert!(amp.accept(&Bits::parse("0011").unwrap(), &Bits::parse("0011").unwrap()).unwrap());
    }

    #[test]
    fn all_accepting_blocks_accept() {
        let amp = ksv_amplify(&coin_block(true), 7, KsvRule::Midpoint).unwrap();
        let psi = QuantumState::random(7, &mut TrialRng::new(1, 0)).unwrap();
        assert_eq!(exact_energy(&amp, &psi).unwrap(), 0.0);
        let rej = ksv_amplify(&coin_block(false), 7, KsvRule::Midpoint).unwrap();
        assert_eq!(exact_energy(&rej, &psi).unwrap(), 1.0);
    }

    #[test]
    fn exact_energy_matches_binomial_on_product_states() {
        let entries = vec![
            TableEntry { w: "Z".parse().unwrap(), accept: AcceptRule::Parity { mask: Bits::parse("1").unwrap(), odd: false } },
            TableEntry { w: "X".parse().unwrap(), accept: AcceptRule::Parity { mask: Bits::parse("1").unwrap(), odd: false } },
        ];
        let base = MeasurementHamiltonian::from_table(1, entries).unwrap().with_promise(0.3, 0.6).unwrap();
        let mut rng = TrialRng::new(8, 0);
        let block = QuantumState::random(1, &mut rng).unwrap();
        let p = 1.0 - exact_energy(&base, &block).unwrap();
        for t in [1, 2, 3, 5] {
            let mut psi = block.clone();
            for _ in 1..t {
                psi = psi.tensor(&block).unwrap();
            }
            for rule in [KsvRule::Midpoint, KsvRule::SignedSum] {
                let amp = ksv_amplify(&base, t, rule).unwrap();
                let got = 1.0 - exact_energy(&amp, &psi).unwrap();
                assert!((got - ksv_accept_probability(p, t, base.midpoint(), rule)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cap_and_zero_t() {
        assert!(matches!(ksv_amplify(&coin_block(true), 5000, KsvRule::Midpoint), Err(Error::CapExceeded { .. })));
        assert!(ksv_amplify(&coin_block(true), 0, KsvRule::Midpoint).is_err());
    }
}
