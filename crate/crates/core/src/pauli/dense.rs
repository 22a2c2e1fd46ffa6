use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{sigma_w, Letter, PauliString, PauliWord};
use crate::bits::Bits;
use crate::error::{Error, Result};

pub const DEFAULT_DENSE_CAP: usize = 12;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix acting on `qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    qubits: usize,
    mat: DMatrix<Complex64>,
}

/// A measurement family indexed by outcome strings.
pub type Family = BTreeMap<Bits, DenseOperator>;

impl DenseOperator {
    pub fn from_matrix(mat: DMatrix<Complex64>) -> Result<Self> {
        let d = mat.nrows();
        if d != mat.ncols() || !d.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not a square power-of-two matrix",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(DenseOperator { qubits: d.trailing_zeros() as usize, mat })
    }

    pub fn identity(qubits: usize) -> Self {
        let d = 1 << qubits;
        DenseOperator { qubits, mat: DMatrix::identity(d, d) }
    }

    pub fn zeros(qubits: usize) -> Self {
        let d = 1 << qubits;
        DenseOperator { qubits, mat: DMatrix::zeros(d, d) }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator { qubits: self.qubits, mat: self.mat.adjoint() }
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<Self> {
        self.same_dim(other)?;
        Ok(DenseOperator { qubits: self.qubits, mat: &self.mat * &other.mat })
    }

    pub fn add(&self, other: &DenseOperator) -> Result<Self> {
        self.same_dim(other)?;
        Ok(DenseOperator { qubits: self.qubits, mat: &self.mat + &other.mat })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        DenseOperator { qubits: self.qubits, mat: &self.mat * c }
    }

    pub fn kron(&self, other: &DenseOperator) -> Self {
        DenseOperator { qubits: self.qubits + other.qubits, mat: self.mat.kronecker(&other.mat) }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Largest absolute entrywise difference.
    pub fn max_diff(&self, other: &DenseOperator) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &DenseOperator, tol: f64) -> bool {
        self.max_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = DenseOperator { qubits: self.qubits, mat: self.mat.adjoint() * &self.mat };
        prod.approx_eq(&DenseOperator::identity(self.qubits), tol)
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        let sq = DenseOperator { qubits: self.qubits, mat: &self.mat * &self.mat };
        self.is_hermitian(tol) && sq.approx_eq(self, tol)
    }

    fn same_dim(&self, other: &DenseOperator) -> Result<()> {
        if self.qubits != other.qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.qubits, other.qubits
            )));
        }
        Ok(())
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded { qubits: n, cap });
    }
    Ok(())
}

/// Dense matrix of `±σ_X(x)σ_Z(z)`.
pub fn word_to_dense(p: &PauliWord) -> Result<DenseOperator> {
    word_to_dense_with_cap(p, DEFAULT_DENSE_CAP)
}

pub fn word_to_dense_with_cap(p: &PauliWord, cap: usize) -> Result<DenseOperator> {
    let n = p.n();
    check_cap(n, cap)?;
    let d = 1usize << n;
    let xi = p.x.to_index() as usize;
    let zi = p.z.to_index() as usize;
    let sign = if p.negative { -1.0 } else { 1.0 };
    let mut mat = DMatrix::from_element(d, d, C0);
    // σ_X(x)σ_Z(z)|c⟩ = (−1)^{z·c}|c ⊕ x⟩
    for c in 0..d {
        let s = if (zi & c).count_ones() % 2 == 1 { -sign } else { sign };
        mat[(c ^ xi, c)] = Complex64::new(s, 0.0);
    }
    Ok(DenseOperator { qubits: n, mat })
}

fn single_qubit_projector(letter: Letter, bit: bool) -> DMatrix<Complex64> {
    let h = 0.5;
    let s = if bit { -1.0 } else { 1.0 };
    match letter {
        Letter::I => {
            if bit {
                DMatrix::from_element(2, 2, C0)
            } else {
                DMatrix::identity(2, 2)
            }
        }
        Letter::Z => {
            let mut m = DMatrix::from_element(2, 2, C0);
            m[(if bit { 1 } else { 0 }, if bit { 1 } else { 0 })] = C1;
            m
        }
        Letter::X => DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(h, 0.0),
                Complex64::new(h * s, 0.0),
                Complex64::new(h * s, 0.0),
                Complex64::new(h, 0.0),
            ],
        ),
    }
}

/// `π^w_u = ⊗_i (𝟙 + (−1)^{u_i}σ_{w_i})/2`.
///
/// An identity letter contributes `𝟙` for `u_i = 0` and `0` for `u_i = 1`.
pub fn pauli_projector(w: &PauliString, u: &Bits) -> Result<DenseOperator> {
    pauli_projector_with_cap(w, u, DEFAULT_DENSE_CAP)
}

pub fn pauli_projector_with_cap(w: &PauliString, u: &Bits, cap: usize) -> Result<DenseOperator> {
    if w.len() != u.len() {
        return Err(Error::LengthMismatch { expected: w.len(), got: u.len() });
    }
    check_cap(w.len(), cap)?;
    let mut mat = DMatrix::from_element(1, 1, C1);
    for i in 0..w.len() {
        mat = mat.kronecker(&single_qubit_projector(w.get(i), u.get(i)));
    }
    Ok(DenseOperator { qubits: w.len(), mat })
}

/// All `2^n` projectors `π^w_u`.
pub fn projector_family(w: &PauliString) -> Result<Family> {
    let n = w.len();
    check_cap(n, DEFAULT_DENSE_CAP)?;
    (0..1u64 << n)
        .map(|u| {
            let u = Bits::from_index(u, n);
            Ok((u.clone(), pauli_projector(w, &u)?))
        })
        .collect()
}

/// Marginal family on the positions `subset`: entries summed over outcomes
/// agreeing on those positions.
pub fn reduce_measurement(family: &Family, subset: &[usize]) -> Result<Family> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let first = family.values().next().ok_or(Error::NotComplete(f64::INFINITY))?;
    let mut sum = DenseOperator::zeros(first.qubits());
    let mut out: Family = BTreeMap::new();
    for (u, op) in family {
        if let Some(&bad) = subset.iter().find(|&&i| i >= u.len()) {
            return Err(Error::QubitOutOfRange { index: bad, qubits: u.len() });
        }
        sum = sum.add(op)?;
        let v = u.select(subset);
        let entry = out.entry(v).or_insert_with(|| DenseOperator::zeros(op.qubits()));
        *entry = entry.add(op)?;
    }
    let dev = sum.max_diff(&DenseOperator::identity(first.qubits()));
    if dev > 1e-9 {
        return Err(Error::NotComplete(dev));
    }
    // outcomes that never occur still belong to the family
    for v in 0..1u64 << subset.len() {
        out.entry(Bits::from_index(v, subset.len())).or_insert_with(|| DenseOperator::zeros(first.qubits()));
    }
    Ok(out)
}

/// `σ_w(a)` as a dense matrix.
pub fn sigma_dense(w: &PauliString, a: &Bits) -> Result<DenseOperator> {
    word_to_dense(&sigma_w(w, a)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::word_mul;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn b(s: &str) -> Bits {
        Bits::parse(s).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn word_to_dense_examples() {
        assert_eq!(word_to_dense(&PauliWord::identity(2)).unwrap(), DenseOperator::identity(2));
        let x = word_to_dense(&PauliWord::x_type(b("1"))).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        assert_eq!(x.matrix(), &expect);
        let big = PauliWord::identity(13);
        assert!(matches!(word_to_dense(&big), Err(Error::CapExceeded { qubits: 13, cap: 12 })));
    }

    #[test]
    fn qubit_zero_is_the_leftmost_factor() {
        let zi = word_to_dense(&PauliWord::z_type(b("10"))).unwrap();
        let z = word_to_dense(&PauliWord::z_type(b("1"))).unwrap();
        assert!(zi.approx_eq(&z.kron(&DenseOperator::identity(1)), 0.0));
    }

    #[test]
    fn homomorphism_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 3;
        for _ in 0..100 {
            let mut rand_word = || {
                PauliWord::new(rng.random(), Bits::random(n, &mut rng), Bits::random(n, &mut rng)).unwrap()
            };
            let (p, q) = (rand_word(), rand_word());
            let lhs = word_to_dense(&word_mul(&p, &q).unwrap()).unwrap();
            let rhs = word_to_dense(&p).unwrap().mul(&word_to_dense(&q).unwrap()).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-12));
        }
    }

    #[test]
    fn projector_examples() {
        let p0 = pauli_projector(&w("Z"), &b("0")).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(p0.matrix(), &expect);
        let xm = pauli_projector(&w("X"), &b("1")).unwrap();
        let minus = nalgebra::DVector::from_vec(vec![c(0.5f64.sqrt()), c(-(0.5f64.sqrt()))]);
        let v = xm.matrix() * &minus;
        assert!((v - minus).norm() < 1e-12);
        let fam = projector_family(&w("XZ")).unwrap();
        let sum = fam.values().fold(DenseOperator::zeros(2), |acc, p| acc.add(p).unwrap());
        assert!(sum.approx_eq(&DenseOperator::identity(2), 1e-12));
    }

    #[test]
    fn projector_family_is_orthogonal_and_idempotent() {
        for s in ["XZI", "ZZ", "IXZX"] {
            let fam = projector_family(&w(s)).unwrap();
            let n = w(s).len();
            let mut sum = DenseOperator::zeros(n);
            for (u, p) in &fam {
                assert!(p.is_projector(1e-10));
                sum = sum.add(p).unwrap();
                for (v, q) in &fam {
                    if u != v {
                        assert!(p.mul(q).unwrap().approx_eq(&DenseOperator::zeros(n), 1e-10));
                    }
                }
            }
            assert!(sum.approx_eq(&DenseOperator::identity(n), 1e-10));
        }
    }

    #[test]
    fn projector_is_fourier_average_of_sigma() {
        for s in ["XZ", "ZIX", "XZXZ", "IIZ"] {
            let ws = w(s);
            let n = ws.len();
            for u in 0..1u64 << n {
                let u = Bits::from_index(u, n);
                let mut avg = DenseOperator::zeros(n);
                for a in 0..1u64 << n {
                    let a = Bits::from_index(a, n);
                    let sign = if u.dot(&a).unwrap() { -1.0 } else { 1.0 };
                    avg = avg.add(&sigma_dense(&ws, &a).unwrap().scale(c(sign))).unwrap();
                }
                let avg = avg.scale(c(1.0 / (1u64 << n) as f64));
                assert!(avg.approx_eq(&pauli_projector(&ws, &u).unwrap(), 1e-12));
            }
        }
    }

    #[test]
    fn reduce_examples() {
        let fam = projector_family(&w("ZZ")).unwrap();
        let red = reduce_measurement(&fam, &[0]).unwrap();
        assert_eq!(red.len(), 2);
        let id = DenseOperator::identity(1);
        assert!(red[&b("0")].approx_eq(&pauli_projector(&w("Z"), &b("0")).unwrap().kron(&id), 1e-12));
        assert!(red[&b("1")].approx_eq(&pauli_projector(&w("Z"), &b("1")).unwrap().kron(&id), 1e-12));

        let same = reduce_measurement(&fam, &[0, 1]).unwrap();
        assert_eq!(same, fam);

        let mixed = projector_family(&w("XZ")).unwrap();
        let red = reduce_measurement(&mixed, &[1]).unwrap();
        for (v, op) in &red {
            let u = Bits::parse(&format!("0{v}")).unwrap();
            let marg = pauli_projector(&w("IZ"), &u).unwrap();
            assert!(op.approx_eq(&marg, 1e-12));
        }

        assert_eq!(reduce_measurement(&fam, &[]), Err(Error::EmptySubset));
        let mut broken = fam.clone();
        broken.remove(&b("11"));
        assert!(matches!(reduce_measurement(&broken, &[0]), Err(Error::NotComplete(_))));
    }
}
