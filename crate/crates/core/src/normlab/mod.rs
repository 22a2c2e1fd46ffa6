//! Numerical checks of the operator inequalities behind the soundness
//! argument: state-dependent norms, lifting from biased sets, rounding of
//! approximate representations and the mixed-versus-pure bookkeeping.

pub mod dls;
pub mod family;
pub mod gh;
pub mod linalg;
pub mod mixed;
pub mod norm;
pub mod suite;

use serde::{Deserialize, Serialize};

pub use dls::{dls_anticommutation_check, dls_check, DlsOutcome};
pub use family::{commutator_residual, product_pairs, uniform_pairs, ObservableFamily, PairDist};
pub use gh::{gh_round, rounding_all_dist_check, GroupFunction, HwGroup, PauliRounding, RoundingResult};
pub use linalg::Mat;
pub use mixed::{compiled_branches, consistency_sign_check, factorisation_check, parseval_check, twirl_invariance_check, Branch};
pub use norm::{basic_properties, cauchy_schwarz, state_norm, state_replacement};
pub use suite::{run_suite, SuiteConfig, ALL_CHECKS};

/// One evaluated inequality or identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: serde_json::Value,
    pub lhs: f64,
    pub rhs: f64,
    pub verdict: bool,
}

impl CheckRecord {
    /// `lhs = rhs` up to `tol · (1 + |rhs|)`.
    pub fn eq(check: &str, params: serde_json::Value, lhs: f64, rhs: f64, tol: f64) -> Self {
        let verdict = (lhs - rhs).abs() <= tol * (1.0 + rhs.abs());
        CheckRecord { check: check.into(), params, lhs, rhs, verdict }
    }

    /// `lhs ≤ rhs` up to `tol · (1 + |rhs|)`.
    pub fn le(check: &str, params: serde_json::Value, lhs: f64, rhs: f64, tol: f64) -> Self {
        let verdict = lhs <= rhs + tol * (1.0 + rhs.abs());
        CheckRecord { check: check.into(), params, lhs, rhs, verdict }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("check records serialize")
    }
}
