use num_complex::Complex64;
use serde_json::json;

use super::linalg::{check_square, op_norm, trace_norm, validate_state, Mat};
use super::CheckRecord;
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-9;

/// `Tr[A†Bψ]`, without validating `ψ`.
pub fn state_inner(a: &Mat, b: &Mat, psi: &Mat) -> Complex64 {
    let bpsi = b * psi;
    a.iter().zip(bpsi.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `Tr[A†Aψ]`, without validating `ψ`. Tiny negative rounding is clamped.
pub fn norm_sq(a: &Mat, psi: &Mat) -> f64 {
    state_inner(a, a, psi).re.max(0.0)
}

/// `‖A‖_ψ = sqrt(Tr[A†Aψ])`.
pub fn state_norm(a: &Mat, psi: &Mat) -> Result<f64> {
    validate_state(psi)?;
    check_square(a, psi.nrows(), "operator")?;
    Ok(norm_sq(a, psi).sqrt())
}

fn same_dims(mats: &[&Mat]) -> Result<usize> {
    let d = mats[0].nrows();
    for m in mats {
        check_square(m, d, "operand")?;
    }
    Ok(d)
}

/// The five basic properties on one instance: conjugation, submultiplicativity,
/// left unitary invariance, linearity in the state, squared triangle inequality.
pub fn basic_properties(a: &Mat, b: &Mat, u: &Mat, psi: &Mat, psi2: &Mat) -> Result<Vec<CheckRecord>> {
    let d = same_dims(&[a, b, u, psi, psi2])?;
    validate_state(psi)?;
    validate_state(psi2)?;
    let sum = psi + psi2;
    let params = json!({ "dim": d, "trace": psi.trace().re, "trace2": psi2.trace().re });
    let bpb = b * psi * b.adjoint();
    let ab = a * b;
    let na = norm_sq(a, psi);
    let nb = norm_sq(b, psi);
    Ok(vec![
        CheckRecord::eq("norm_conjugation", params.clone(), norm_sq(a, &bpb).sqrt(), norm_sq(&ab, psi).sqrt(), NORM_TOL),
        CheckRecord::le("norm_submultiplicative", params.clone(), norm_sq(&ab, psi).sqrt(), op_norm(a) * nb.sqrt(), NORM_TOL),
        CheckRecord::eq("norm_unitary_invariance", params.clone(), norm_sq(&(u * a), psi).sqrt(), na.sqrt(), NORM_TOL),
        CheckRecord::eq("norm_linearity", params.clone(), norm_sq(a, &sum), na + norm_sq(a, psi2), NORM_TOL),
        CheckRecord::le("norm_squared_triangle", params, norm_sq(&(a + b), psi), 2.0 * na + 2.0 * nb, NORM_TOL),
    ])
}

/// `|‖A‖²_ψ − ‖A‖²_ψ′| ≤ ‖A‖²_∞ ‖ψ − ψ′‖₁`.
pub fn state_replacement(a: &Mat, psi: &Mat, psi2: &Mat) -> Result<CheckRecord> {
    let d = same_dims(&[a, psi, psi2])?;
    validate_state(psi)?;
    validate_state(psi2)?;
    let dist = trace_norm(&(psi - psi2));
    let lhs = (norm_sq(a, psi) - norm_sq(a, psi2)).abs();
    Ok(CheckRecord::le("state_replacement", json!({ "dim": d, "trace_distance": dist }), lhs, op_norm(a).powi(2) * dist, NORM_TOL))
}

/// `Σ_i ‖A_i ψ_i‖₁ ≤ sqrt(Σ_i ‖A_i‖²_{ψ_i})` for `Σ_i Tr ψ_i ≤ 1`.
pub fn cauchy_schwarz(ops: &[Mat], states: &[Mat]) -> Result<CheckRecord> {
    if ops.len() != states.len() || ops.is_empty() {
        return Err(Error::InvalidArgument(format!("{} operators for {} states", ops.len(), states.len())));
    }
    let d = states[0].nrows();
    let mut total = 0.0;
    for (a, s) in ops.iter().zip(states) {
        check_square(a, d, "operator")?;
        validate_state(s)?;
        total += s.trace().re;
    }
    if total > 1.0 + 1e-9 {
        return Err(Error::InvalidArgument(format!("ensemble trace {total} exceeds 1")));
    }
    let lhs: f64 = ops.iter().zip(states).map(|(a, s)| trace_norm(&(a * s))).sum();
    let rhs = ops.iter().zip(states).map(|(a, s)| norm_sq(a, s)).sum::<f64>().sqrt();
    Ok(CheckRecord::le("cauchy_schwarz", json!({ "dim": d, "terms": ops.len(), "total_trace": total }), lhs, rhs, NORM_TOL))
}
