use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::TrialRng;

pub type Mat = DMatrix<Complex64>;

pub const PSD_TOL: f64 = 1e-10;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn eye(d: usize) -> Mat {
    Mat::identity(d, d)
}

pub fn maximally_mixed(d: usize) -> Mat {
    eye(d) * c(1.0 / d as f64)
}

/// Eigenvalues and eigenvectors of the Hermitian part of `m`, ascending.
pub fn hermitian_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let h = (m + m.adjoint()) * c(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = Mat::from_fn(m.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Rejects `psi` unless it is square, Hermitian and PSD within `PSD_TOL`,
/// with trace at most one.
pub fn validate_state(psi: &Mat) -> Result<()> {
    if psi.nrows() != psi.ncols() {
        return Err(Error::DimensionMismatch(format!("state is {}x{}", psi.nrows(), psi.ncols())));
    }
    let herm = psi.iter().zip(psi.adjoint().iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if herm > 1e-9 {
        return Err(Error::InvalidArgument(format!("state is not Hermitian (deviation {herm:.3e})")));
    }
    let min = min_eigenvalue(psi);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    let tr = psi.trace().re;
    if tr > 1.0 + 1e-9 {
        return Err(Error::InvalidArgument(format!("state trace {tr} exceeds 1")));
    }
    Ok(())
}

pub fn check_square(a: &Mat, d: usize, what: &str) -> Result<()> {
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::DimensionMismatch(format!("{what} is {}x{}, expected {d}x{d}", a.nrows(), a.ncols())));
    }
    Ok(())
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn op_norm(a: &Mat) -> f64 {
    a.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn trace_norm(a: &Mat) -> f64 {
    a.clone().singular_values().iter().sum()
}

pub fn is_binary_observable(a: &Mat, tol: f64) -> bool {
    let d = a.nrows();
    d == a.ncols() && max_abs(&(a - a.adjoint())) <= tol && max_abs(&(a * a - eye(d))) <= tol
}

pub fn is_unitary(a: &Mat, tol: f64) -> bool {
    a.nrows() == a.ncols() && max_abs(&(a.adjoint() * a - eye(a.ncols()))) <= tol
}

/// `exp(iθH)` for Hermitian `H`.
pub fn exp_i(h: &Mat, theta: f64) -> Mat {
    let (vals, vecs) = hermitian_eigen(h);
    let phases = Mat::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&l| Complex64::from_polar(1.0, theta * l))));
    &vecs * phases * vecs.adjoint()
}

pub fn gaussian(rng: &mut TrialRng) -> f64 {
    StandardNormal.sample(rng.inner())
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut TrialRng) -> Mat {
    Mat::from_fn(rows, cols, |_, _| Complex64::new(gaussian(rng), gaussian(rng)))
}

/// Haar-random unitary from a QR factorization with the phases of `R` divided out.
pub fn random_unitary(d: usize, rng: &mut TrialRng) -> Mat {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let p = r[(j, j)];
        let ph = if p.norm() > 0.0 { p / p.norm() } else { c(1.0) };
        let mut col = q.column_mut(j);
        col *= ph;
    }
    q
}

/// Random Hermitian matrix with operator norm one.
pub fn random_hermitian(d: usize, rng: &mut TrialRng) -> Mat {
    let g = ginibre(d, d, rng);
    let h = (&g + g.adjoint()) * c(0.5);
    let n = op_norm(&h);
    h * c(1.0 / n)
}

/// Full-rank random density matrix scaled to trace `tr`.
pub fn random_state(d: usize, tr: f64, rng: &mut TrialRng) -> Mat {
    let g = ginibre(d, d, rng);
    let p = &g * g.adjoint();
    let t = p.trace().re;
    p * c(tr / t)
}

/// `U diag(±1) U†` with at least one eigenvalue of each sign when `d ≥ 2`.
pub fn random_binary_observable(d: usize, rng: &mut TrialRng) -> Mat {
    let u = random_unitary(d, rng);
    let mut signs: Vec<f64> = (0..d).map(|_| if rng.coin() { 1.0 } else { -1.0 }).collect();
    if d >= 2 && signs.iter().all(|&s| s == signs[0]) {
        signs[0] = -signs[0];
    }
    let dg = Mat::from_diagonal(&nalgebra::DVector::from_iterator(d, signs.into_iter().map(c)));
    &u * dg * u.adjoint()
}

/// Random isometry `C^d_in → C^d_out`.
pub fn random_isometry(d_out: usize, d_in: usize, rng: &mut TrialRng) -> Result<Mat> {
    if d_out < d_in {
        return Err(Error::DimensionMismatch(format!("no isometry from {d_in} into {d_out} dimensions")));
    }
    Ok(random_unitary(d_out, rng).columns(0, d_in).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_objects_have_their_properties() {
        let mut rng = TrialRng::new(1, 0);
        for d in [1, 2, 5, 8] {
            assert!(is_unitary(&random_unitary(d, &mut rng), 1e-10));
            assert!(is_binary_observable(&random_binary_observable(d, &mut rng), 1e-10));
            let h = random_hermitian(d, &mut rng);
            assert!((op_norm(&h) - 1.0).abs() < 1e-10);
            assert!(is_unitary(&exp_i(&h, 0.3), 1e-10));
            let s = random_state(d, 0.6, &mut rng);
            assert!(validate_state(&s).is_ok());
            assert!((s.trace().re - 0.6).abs() < 1e-12);
            let v = random_isometry(2 * d, d, &mut rng).unwrap();
            assert!(max_abs(&(v.adjoint() * &v - eye(d))) < 1e-10);
        }
    }

    #[test]
    fn state_validation_errors() {
        let mut bad = maximally_mixed(2);
        bad[(0, 0)] = c(-0.25);
        bad[(1, 1)] = c(1.25);
        assert!(matches!(validate_state(&bad), Err(Error::NotPsd(_))));
        assert!(validate_state(&(eye(2) * c(0.6))).is_err());
        assert!(validate_state(&Mat::zeros(2, 3)).is_err());
    }

    #[test]
    fn norms_of_known_matrices() {
        let a = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0), c(-1.0)]));
        assert!((op_norm(&a) - 3.0).abs() < 1e-12);
        assert!((trace_norm(&a) - 4.0).abs() < 1e-12);
        assert!((min_eigenvalue(&a) + 1.0).abs() < 1e-12);
    }
}
