use serde::{Deserialize, Serialize};
use serde_json::json;

use super::dls::{dls_anticommutation_check, dls_check};
use super::family::{uniform_pairs, ObservableFamily};
use super::gh::{gh_round, rounding_all_dist_check, GroupFunction, FLAG_CONSTANT};
use super::linalg::{c, ginibre, maximally_mixed, op_norm, random_binary_observable, random_isometry, random_state, random_unitary, Mat};
use super::mixed::{factorisation_check, parseval_check, random_projective_family};
use super::norm::{basic_properties, cauchy_schwarz, state_replacement};
use super::CheckRecord;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString};
use crate::rng::TrialRng;
use crate::smallbias::construct_biased;

pub const ALL_CHECKS: [&str; 9] = ["norm", "state_replacement", "cauchy_schwarz", "dls", "dls_anticommutation", "gh", "rounding", "parseval", "factorisation"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub instances: usize,
    pub checks: Vec<String>,
    /// Feed a non-unitary `U` to the unitary invariance check.
    #[serde(default)]
    pub inject_failure: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { instances: 5, checks: ALL_CHECKS.iter().map(|s| s.to_string()).collect(), inject_failure: false }
    }
}

fn unit_op(d: usize, rng: &mut TrialRng) -> Mat {
    let g = ginibre(d, d, rng);
    let n = op_norm(&g);
    g * c(1.0 / n)
}

fn random_word(n: usize, rng: &mut TrialRng) -> PauliString {
    let letters = (0..n).map(|_| [Letter::I, Letter::X, Letter::Z][rng.below(3) as usize]).collect();
    PauliString::new(letters).expect("nonempty word")
}

fn one(check: &str, instance: usize, rng: &mut TrialRng, inject: bool) -> Result<Vec<CheckRecord>> {
    let d = 2 + rng.below(3) as usize;
    match check {
        "norm" => {
            let (a, b) = (unit_op(d, rng), unit_op(d, rng));
            let mut u = random_unitary(d, rng);
            if inject {
                u *= c(2.0);
            }
            basic_properties(&a, &b, &u, &random_state(d, 0.5, rng), &random_state(d, 0.5, rng))
        }
        "state_replacement" => Ok(vec![state_replacement(&unit_op(d, rng), &random_state(d, 1.0, rng), &random_state(d, 1.0, rng))?]),
        "cauchy_schwarz" => {
            let ops: Vec<Mat> = (0..4).map(|_| unit_op(d, rng)).collect();
            let states: Vec<Mat> = (0..4).map(|_| random_state(d, 0.25, rng)).collect();
            Ok(vec![cauchy_schwarz(&ops, &states)?])
        }
        "dls" | "dls_anticommutation" => {
            let n = 4;
            let s = construct_biased(n, 0.5)?;
            let chars: Vec<Bits> = (0..8).map(|_| rng.bits(n)).collect();
            let w = ObservableFamily::diagonal(n, &chars)?;
            let delta = 0.0;
            let out = if check == "dls" {
                dls_check(&random_binary_observable(8, rng), &w, &maximally_mixed(8), &s, delta)?
            } else {
                let x = w.conjugated(&random_unitary(8, rng))?;
                dls_anticommutation_check(&w, &x, &maximally_mixed(8), &s, delta)?
            };
            Ok(vec![out.record(check, n, 8, delta)])
        }
        "gh" => {
            let theta = 0.05 * (1 + instance % 4) as f64;
            let f = GroupFunction::fundamental(1)?.perturbed(theta, rng);
            let psi = random_state(2, 1.0, rng);
            let r = gh_round(&f, &psi, &f.group().uniform())?;
            Ok(vec![CheckRecord {
                check: "gh".into(),
                params: json!({ "n": 1, "theta": theta, "choi_min_eigenvalue": r.choi_min_eigenvalue }),
                lhs: r.residual,
                rhs: r.hypothesis,
                verdict: r.holds,
            }])
        }
        "rounding" => {
            let u = random_unitary(4, rng);
            let z = ObservableFamily::pauli(Letter::Z, 1)?.padded(1)?.conjugated(&u)?;
            let x = ObservableFamily::pauli(Letter::X, 1)?.padded(1)?.conjugated(&u)?;
            let out = rounding_all_dist_check(&z, &x, &maximally_mixed(4), &uniform_pairs(1), FLAG_CONSTANT)?;
            Ok(vec![CheckRecord {
                check: "rounding".into(),
                params: json!({ "n": 1, "epsilon": out.epsilon, "constant": out.constant, "flagged": out.flagged }),
                lhs: out.residual,
                rhs: out.bound,
                verdict: out.holds,
            }])
        }
        "parseval" | "factorisation" => {
            let n = 2 + rng.below(2) as usize;
            let w = random_word(n, rng);
            let dim = 1 << n;
            let fam = random_projective_family(&w, dim, rng)?;
            let params = json!({ "n": n, "w": w.to_string(), "dim": dim });
            if check == "parseval" {
                let v = random_isometry(2 * dim, dim, rng)?;
                let out = parseval_check(&fam, &w, &v, &random_state(dim, 1.0, rng))?;
                Ok(vec![CheckRecord::eq("parseval", params, out.lhs, out.rhs, 1e-9)])
            } else {
                let out = factorisation_check(&fam, &w)?;
                Ok(vec![CheckRecord::le("factorisation", params, out.max_deviation, 0.0, 1e-10)])
            }
        }
        other => Err(Error::InvalidArgument(format!("unknown check {other}"))),
    }
}

/// Runs every selected check on `instances` random instances each.
pub fn run_suite(cfg: &SuiteConfig, rng: &mut TrialRng) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for check in &cfg.checks {
        for i in 0..cfg.instances {
            out.extend(one(check, i, rng, cfg.inject_failure)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let recs = run_suite(&SuiteConfig { instances: 2, ..SuiteConfig::default() }, &mut TrialRng::new(9, 0)).unwrap();
        assert!(recs.len() >= 2 * ALL_CHECKS.len());
        for r in &recs {
            assert!(r.verdict, "{r:?}");
        }
    }

    #[test]
    fn empty_selection_gives_empty_report() {
        let cfg = SuiteConfig { instances: 3, checks: vec![], inject_failure: false };
        assert!(run_suite(&cfg, &mut TrialRng::new(9, 1)).unwrap().is_empty());
    }

    #[test]
    fn injected_failure_is_reported() {
        let cfg = SuiteConfig { instances: 3, checks: vec!["norm".into()], inject_failure: true };
        let recs = run_suite(&cfg, &mut TrialRng::new(9, 2)).unwrap();
        assert!(recs.iter().any(|r| r.check == "norm_unitary_invariance" && !r.verdict));
    }

    #[test]
    fn unknown_check_is_an_error() {
        let cfg = SuiteConfig { instances: 1, checks: vec!["nope".into()], inject_failure: false };
        assert!(run_suite(&cfg, &mut TrialRng::new(9, 3)).is_err());
    }
}
