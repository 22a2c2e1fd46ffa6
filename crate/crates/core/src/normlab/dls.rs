use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::family::{twisted_commutator, ObservableFamily};
use super::linalg::{check_square, is_binary_observable, validate_state, Mat};
use super::norm::norm_sq;
use super::CheckRecord;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::smallbias::{bias_of, BiasedSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DlsOutcome {
    pub lhs: f64,
    pub rhs: f64,
    /// Measured bias of the set.
    pub bias: f64,
    pub holds: bool,
}

impl DlsOutcome {
    pub fn record(&self, check: &str, n: usize, dim: usize, delta: f64) -> CheckRecord {
        CheckRecord {
            check: check.into(),
            params: json!({ "n": n, "dim": dim, "bias": self.bias, "delta": delta }),
            lhs: self.lhs,
            rhs: self.rhs,
            verdict: self.holds,
        }
    }
}

fn measured_bias(s: &BiasedSet, n: usize) -> Result<f64> {
    if s.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: s.n() });
    }
    let bias = bias_of(s)?;
    if bias >= 1.0 {
        return Err(Error::BiasOutOfRange(bias));
    }
    Ok(bias)
}

fn require_linear(f: &ObservableFamily) -> Result<()> {
    if !f.is_exactly_linear() {
        return Err(Error::InvalidArgument(format!("family {} is not exactly linear", f.label)));
    }
    Ok(())
}

fn multiplicities(s: &BiasedSet) -> BTreeMap<Bits, f64> {
    let mut out = BTreeMap::new();
    let w = 1.0 / s.len() as f64;
    for m in s.members() {
        *out.entry(m).or_insert(0.0) += w;
    }
    out
}

/// Lifting of commutation from a biased set to the whole cube:
/// `E_a ‖W(a)M − MW(a)‖²_ρ ≤ (E_{a∈S} ‖W(a)M − MW(a)‖²_ρ + 2δ) / (1 − λ)`.
pub fn dls_check(m: &Mat, wfam: &ObservableFamily, rho: &Mat, s: &BiasedSet, delta: f64) -> Result<DlsOutcome> {
    require_linear(wfam)?;
    let d = wfam.dim();
    check_square(m, d, "observable")?;
    if !is_binary_observable(m, 1e-9) {
        return Err(Error::InvalidArgument("M is not a binary observable".into()));
    }
    check_square(rho, d, "state")?;
    validate_state(rho)?;
    let bias = measured_bias(s, wfam.n())?;
    let term: BTreeMap<&Bits, f64> = wfam.iter().map(|(a, w)| (a, norm_sq(&(w * m - m * w), rho))).collect();
    let lhs = term.values().sum::<f64>() / term.len() as f64;
    let on_s: f64 = multiplicities(s).iter().map(|(a, p)| p * term[a]).sum();
    let rhs = (on_s + 2.0 * delta) / (1.0 - bias);
    Ok(DlsOutcome { lhs, rhs, bias, holds: lhs <= rhs + 1e-9 })
}

/// The anticommutation form:
/// `E_{a,b} ‖Z(a)X(b) − (−1)^{a·b}X(b)Z(a)‖²_ρ ≤ E_{a,b∈S}[…]/(1−λ)² + 2δ(2−λ)/(1−λ)²`.
pub fn dls_anticommutation_check(zfam: &ObservableFamily, xfam: &ObservableFamily, rho: &Mat, s: &BiasedSet, delta: f64) -> Result<DlsOutcome> {
    require_linear(zfam)?;
    require_linear(xfam)?;
    let d = zfam.dim();
    if xfam.dim() != d || xfam.n() != zfam.n() {
        return Err(Error::DimensionMismatch(format!("families {} and {} differ in shape", zfam.label, xfam.label)));
    }
    check_square(rho, d, "state")?;
    validate_state(rho)?;
    let bias = measured_bias(s, zfam.n())?;
    let mut term: BTreeMap<(&Bits, &Bits), f64> = BTreeMap::new();
    for (a, z) in zfam.iter() {
        for (b, x) in xfam.iter() {
            term.insert((a, b), norm_sq(&twisted_commutator(z, x, a.dot(b)?), rho));
        }
    }
    let lhs = term.values().sum::<f64>() / term.len() as f64;
    let mult = multiplicities(s);
    let mut on_s = 0.0;
    for (a, pa) in &mult {
        for (b, pb) in &mult {
            on_s += pa * pb * term[&(a, b)];
        }
    }
    let gap = 1.0 - bias;
    let rhs = on_s / (gap * gap) + 2.0 * delta * (2.0 - bias) / (gap * gap);
    Ok(DlsOutcome { lhs, rhs, bias, holds: lhs <= rhs + 1e-9 })
}
