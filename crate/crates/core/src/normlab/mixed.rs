use serde::{Deserialize, Serialize};

use super::family::{fourier_at, ObservableFamily};
use super::gh::sandwich;
use super::linalg::{c, check_square, eye, max_abs, random_unitary, trace_norm, validate_state, Mat};
use super::norm::norm_sq;
use crate::bits::Bits;
use crate::compiler::{codec_for, encode_question, CompiledProver, QheScheme};
use crate::error::{Error, Result};
use crate::games::{GameSpec, Question};
use crate::pauli::{pauli_projector, sigma_dense, DenseOperator, Family, Letter, PauliString};
use crate::rng::TrialRng;

const PROJECTIVE_TOL: f64 = 1e-9;

fn check_projective(mfam: &Family, n: usize) -> Result<usize> {
    let d = mfam.values().next().map(DenseOperator::dim).ok_or(Error::NotComplete(f64::INFINITY))?;
    let mut sum = Mat::zeros(d, d);
    for (u, m) in mfam {
        if u.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: u.len() });
        }
        check_square(m.matrix(), d, "projector")?;
        if !m.is_projector(PROJECTIVE_TOL) {
            return Err(Error::InvalidArgument(format!("M_{u} is not a projector")));
        }
        sum += m.matrix();
    }
    let dev = max_abs(&(sum - eye(d)));
    if dev > PROJECTIVE_TOL {
        return Err(Error::NotComplete(dev));
    }
    Ok(d)
}

fn entry(mfam: &Family, u: &Bits, d: usize) -> Mat {
    mfam.get(u).map(|m| m.matrix().clone()).unwrap_or_else(|| Mat::zeros(d, d))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsevalOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub equal: bool,
}

/// `Σ_u ‖M_u − V†(π^w_u ⊗ 𝟙)V‖²_ψ = E_a ‖O^w(a) − V†(σ_w(a) ⊗ 𝟙)V‖²_ψ`,
/// both sides computed from their own definitions. `V` maps `H` into
/// `C^{2^n} ⊗ aux` with the Pauli factor as the slow index.
pub fn parseval_check(mfam: &Family, w: &PauliString, v: &Mat, psi: &Mat) -> Result<ParsevalOutcome> {
    let n = w.len();
    let d = check_projective(mfam, n)?;
    check_square(psi, d, "state")?;
    validate_state(psi)?;
    let side = 1usize << n;
    if v.ncols() != d || !v.nrows().is_multiple_of(side) {
        return Err(Error::DimensionMismatch(format!("isometry is {}x{}, expected ({side}·aux)x{d}", v.nrows(), v.ncols())));
    }
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..side as u64 {
        let u = Bits::from_index(i, n);
        let target = sandwich(v, pauli_projector(w, &u)?.matrix());
        lhs += norm_sq(&(entry(mfam, &u, d) - target), psi);
        let target = sandwich(v, sigma_dense(w, &u)?.matrix());
        rhs += norm_sq(&(fourier_at(mfam, &u)? - target), psi);
    }
    rhs /= side as f64;
    Ok(ParsevalOutcome { lhs, rhs, equal: (lhs - rhs).abs() <= 1e-9 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorisationOutcome {
    pub max_deviation: f64,
    pub holds: bool,
}

fn signed_sum(mfam: &Family, mask: &Bits, d: usize) -> Result<Mat> {
    let mut o = Mat::zeros(d, d);
    for (u, m) in mfam {
        let s = if u.dot(mask)? { -1.0 } else { 1.0 };
        o += m.matrix() * c(s);
    }
    Ok(o)
}

/// `O^w = O^w_X O^w_Z`. Outcomes with a 1 on an identity position must carry
/// the zero operator; a nonzero one is reported as a convention violation.
pub fn factorisation_check(mfam: &Family, w: &PauliString) -> Result<FactorisationOutcome> {
    let n = w.len();
    let d = check_projective(mfam, n)?;
    let idle = w.mask_of(Letter::I);
    for (u, m) in mfam {
        if !u.and(&idle)?.is_zero() && max_abs(m.matrix()) > 1e-10 {
            return Err(Error::ConventionViolation(u.to_string()));
        }
    }
    let o = signed_sum(mfam, &Bits::ones(n), d)?;
    let ox = signed_sum(mfam, &w.mask_of(Letter::X), d)?;
    let oz = signed_sum(mfam, &w.mask_of(Letter::Z), d)?;
    let dev = max_abs(&(o - ox * oz));
    Ok(FactorisationOutcome { max_deviation: dev, holds: dev <= 1e-10 })
}

/// A random complete projective family for `w` on `dim` dimensions, zero on
/// outcomes that put a 1 on an identity position.
pub fn random_projective_family(w: &PauliString, dim: usize, rng: &mut TrialRng) -> Result<Family> {
    let n = w.len();
    let idle = w.mask_of(Letter::I);
    let allowed: Vec<Bits> = (0..1u64 << n).map(|i| Bits::from_index(i, n)).filter(|u| u.and(&idle).map(|x| x.is_zero()).unwrap_or(false)).collect();
    let u = random_unitary(dim, rng);
    let mut diag: Vec<Vec<f64>> = vec![vec![0.0; dim]; allowed.len()];
    for j in 0..dim {
        diag[rng.below(allowed.len() as u64) as usize][j] = 1.0;
    }
    let mut fam = Family::new();
    for i in 0..1u64 << n {
        let key = Bits::from_index(i, n);
        let m = match allowed.iter().position(|a| *a == key) {
            Some(p) => &u * Mat::from_diagonal(&nalgebra::DVector::from_iterator(dim, diag[p].iter().map(|&x| c(x)))) * u.adjoint(),
            None => Mat::zeros(dim, dim),
        };
        fam.insert(key, DenseOperator::from_matrix(m)?);
    }
    Ok(fam)
}

/// One post-measurement branch: the decoded first answer and the
/// unnormalized state left on the second register.
#[derive(Clone, Debug)]
pub struct Branch {
    pub answer: Bits,
    pub state: Mat,
}

/// All branches of the first round on question `q`, with the state reduced
/// to the last `spec.mh.n` qubits (the second prover's measured register in
/// the honest layout).
pub fn compiled_branches(spec: &GameSpec, qhe: &dyn QheScheme, prover: &dyn CompiledProver, q: &Question, secparam: usize, rng: &mut TrialRng) -> Result<Vec<Branch>> {
    let key = qhe.gen(secparam, rng)?;
    let ct = qhe.enc(&key, &encode_question(&codec_for(spec), q)?)?;
    let n = spec.mh.n;
    let init = prover.initial_state();
    let norm = init.norm_sqr();
    let mut out = Vec::new();
    for (alpha, st) in prover.round1(qhe, &ct, &init)? {
        let answer = qhe.dec(&key, &alpha)?;
        let total = st.qubits();
        let bob: Vec<usize> = (total - n..total).collect();
        out.push(Branch { answer, state: st.reduced_density(&bob)? * c(1.0 / norm) });
    }
    Ok(out)
}

pub fn branch_sum(branches: &[Branch]) -> Result<Mat> {
    let d = branches.first().map(|b| b.state.nrows()).ok_or(Error::EmptySubset)?;
    let mut s = Mat::zeros(d, d);
    for b in branches {
        check_square(&b.state, d, "branch state")?;
        s += &b.state;
    }
    Ok(s)
}

/// `Σ_α ‖W(b) − (−1)^{Dec(α)·b} 𝟙‖²_{ψ_α}`.
pub fn consistency_sign_check(wfam: &ObservableFamily, branches: &[Branch], b: &Bits) -> Result<f64> {
    let d = wfam.dim();
    let wb = wfam.get(b)?;
    let mut total_trace = 0.0;
    let mut residual = 0.0;
    for br in branches {
        if br.answer.len() != wfam.n() {
            return Err(Error::LengthMismatch { expected: wfam.n(), got: br.answer.len() });
        }
        check_square(&br.state, d, "branch state")?;
        total_trace += br.state.trace().re;
        let s = if br.answer.dot(b)? { -1.0 } else { 1.0 };
        residual += norm_sq(&(wb - eye(d) * c(s)), &br.state);
    }
    if total_trace > 1.0 + 1e-9 {
        return Err(Error::InvalidArgument(format!("branch weights sum to {total_trace}")));
    }
    Ok(residual)
}

/// `max_b ‖W(b) ψ W(b) − ψ‖₁` over the tested `b`.
pub fn twirl_invariance_check(wfam: &ObservableFamily, psi: &Mat, bs: &[Bits]) -> Result<f64> {
    check_square(psi, wfam.dim(), "state")?;
    let mut worst: f64 = 0.0;
    for b in bs {
        let w = wfam.get(b)?;
        worst = worst.max(trace_norm(&(w * psi * w - psi)));
    }
    Ok(worst)
}
