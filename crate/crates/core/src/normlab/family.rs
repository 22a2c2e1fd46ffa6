use std::collections::BTreeMap;

use super::linalg::{c, check_square, eye, is_binary_observable, max_abs, Mat};
use super::norm::norm_sq;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pauli::{sigma_dense, DenseOperator, Family, Letter, PauliString};

pub const OBSERVABLE_TOL: f64 = 1e-9;

/// Binary observables `W(a)` indexed by `a ∈ {0,1}^n`.
#[derive(Clone, Debug)]
pub struct ObservableFamily {
    pub label: String,
    n: usize,
    ops: BTreeMap<Bits, DenseOperator>,
    exactly_linear: bool,
}

impl ObservableFamily {
    /// Validates every entry and records whether `W(a)W(b) = W(a+b)`.
    pub fn new(label: impl Into<String>, n: usize, ops: BTreeMap<Bits, DenseOperator>) -> Result<Self> {
        if ops.len() as u64 != 1u64 << n {
            return Err(Error::InvalidArgument(format!("family has {} entries, expected {}", ops.len(), 1u64 << n)));
        }
        let dim = ops.values().next().map(DenseOperator::dim).unwrap_or(0);
        for (a, op) in &ops {
            if a.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: a.len() });
            }
            check_square(op.matrix(), dim, "observable")?;
            if !is_binary_observable(op.matrix(), OBSERVABLE_TOL) {
                return Err(Error::InvalidArgument(format!("W({a}) is not a binary observable")));
            }
        }
        let mut fam = ObservableFamily { label: label.into(), n, ops, exactly_linear: false };
        fam.exactly_linear = fam.check_linear();
        Ok(fam)
    }

    /// Builds `W(a) = Π_{i: a_i=1} W(e_i)` from commuting binary generators.
    pub fn from_generators(label: impl Into<String>, gens: &[Mat]) -> Result<Self> {
        let n = gens.len();
        let d = gens.first().map(|g| g.nrows()).ok_or(Error::EmptySubset)?;
        let mut ops = BTreeMap::new();
        let mut cache: Vec<Mat> = Vec::with_capacity(1 << n);
        for idx in 0..1usize << n {
            let m = if idx == 0 {
                eye(d)
            } else {
                let low = idx.trailing_zeros() as usize;
                // bit `low` of the index is string position n-1-low
                &cache[idx & (idx - 1)] * &gens[n - 1 - low]
            };
            cache.push(m.clone());
            ops.insert(Bits::from_index(idx as u64, n), DenseOperator::from_matrix(m)?);
        }
        ObservableFamily::new(label, n, ops)
    }

    /// `σ_{W^n}(a)` for a single letter `W`.
    pub fn pauli(letter: Letter, n: usize) -> Result<Self> {
        let w = PauliString::uniform(letter, n);
        let ops = (0..1u64 << n)
            .map(|i| {
                let a = Bits::from_index(i, n);
                Ok((a.clone(), sigma_dense(&w, &a)?))
            })
            .collect::<Result<_>>()?;
        ObservableFamily::new(format!("{}^{n}", letter.as_char()), n, ops)
    }

    /// Diagonal family `D(a) = diag((−1)^{c_j·a})` on `2^qubits` dimensions.
    pub fn diagonal(n: usize, chars: &[Bits]) -> Result<Self> {
        let d = chars.len();
        let gens: Vec<Mat> = (0..n)
            .map(|i| Mat::from_diagonal(&nalgebra::DVector::from_iterator(d, chars.iter().map(|ch| c(if ch.get(i) { -1.0 } else { 1.0 })))))
            .collect();
        ObservableFamily::from_generators("diagonal", &gens)
    }

    /// `O(a) = Σ_u (−1)^{a·u} M_u` for a complete projective family.
    pub fn fourier(label: impl Into<String>, mfam: &Family) -> Result<Self> {
        let n = mfam.keys().next().map(Bits::len).ok_or(Error::NotComplete(f64::INFINITY))?;
        let ops = (0..1u64 << n)
            .map(|i| {
                let a = Bits::from_index(i, n);
                Ok((a.clone(), DenseOperator::from_matrix(fourier_at(mfam, &a)?)?))
            })
            .collect::<Result<_>>()?;
        ObservableFamily::new(label, n, ops)
    }

    /// `U W(a) U†` for every `a`.
    pub fn conjugated(&self, u: &Mat) -> Result<Self> {
        check_square(u, self.dim(), "unitary")?;
        let ops = self
            .ops
            .iter()
            .map(|(a, op)| Ok((a.clone(), DenseOperator::from_matrix(u * op.matrix() * u.adjoint())?)))
            .collect::<Result<_>>()?;
        ObservableFamily::new(format!("{}~", self.label), self.n, ops)
    }

    /// `W(a) ⊗ 𝟙` on `extra` more qubits.
    pub fn padded(&self, extra: usize) -> Result<Self> {
        let id = DenseOperator::identity(extra);
        let ops = self.ops.iter().map(|(a, op)| (a.clone(), op.kron(&id))).collect();
        ObservableFamily::new(self.label.clone(), self.n, ops)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.ops.values().next().map(DenseOperator::dim).unwrap_or(0)
    }

    pub fn is_exactly_linear(&self) -> bool {
        self.exactly_linear
    }

    pub fn get(&self, a: &Bits) -> Result<&Mat> {
        self.ops
            .get(a)
            .map(DenseOperator::matrix)
            .ok_or_else(|| Error::InvalidArgument(format!("no entry {a} in family {}", self.label)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Bits, &Mat)> {
        self.ops.iter().map(|(a, op)| (a, op.matrix()))
    }

    fn check_linear(&self) -> bool {
        let gens: Vec<Bits> = (0..self.n)
            .map(|i| {
                let mut e = Bits::zeros(self.n);
                e.set(i, true);
                e
            })
            .collect();
        let zero_ok = max_abs(&(self.ops[&Bits::zeros(self.n)].matrix() - eye(self.dim()))) <= OBSERVABLE_TOL;
        zero_ok
            && self.ops.iter().all(|(a, op)| {
                gens.iter().all(|e| {
                    let ae = a.xor(e).expect("equal lengths");
                    max_abs(&(op.matrix() * self.ops[e].matrix() - self.ops[&ae].matrix())) <= OBSERVABLE_TOL
                })
            })
    }
}

pub(crate) fn fourier_at(mfam: &Family, a: &Bits) -> Result<Mat> {
    let d = mfam.values().next().map(DenseOperator::dim).ok_or(Error::NotComplete(f64::INFINITY))?;
    let mut o = Mat::zeros(d, d);
    for (u, m) in mfam {
        let s = if u.dot(a)? { -1.0 } else { 1.0 };
        o += m.matrix() * c(s);
    }
    Ok(o)
}

/// A distribution over pairs `(a, b)`.
pub type PairDist = Vec<(Bits, Bits, f64)>;

pub fn uniform_pairs(n: usize) -> PairDist {
    let side = 1u64 << n;
    let p = 1.0 / (side * side) as f64;
    (0..side).flat_map(|a| (0..side).map(move |b| (Bits::from_index(a, n), Bits::from_index(b, n), p))).collect()
}

/// Uniform over `S × S` for a multiset `S`.
pub fn product_pairs(members: &[Bits]) -> PairDist {
    let p = 1.0 / (members.len() * members.len()) as f64;
    members.iter().flat_map(|a| members.iter().map(move |b| (a.clone(), b.clone(), p))).collect()
}

/// `Z(a)X(b) − (−1)^{a·b} X(b)Z(a)`.
pub fn twisted_commutator(z: &Mat, x: &Mat, ab: bool) -> Mat {
    let s = if ab { -1.0 } else { 1.0 };
    z * x - (x * z) * c(s)
}

/// `E_{(a,b)∼dist} ‖Z(a)X(b) − (−1)^{a·b} X(b)Z(a)‖²_ψ`.
pub fn commutator_residual(zfam: &ObservableFamily, xfam: &ObservableFamily, psi: &Mat, dist: &[(Bits, Bits, f64)]) -> Result<f64> {
    if zfam.dim() != xfam.dim() || zfam.n() != xfam.n() {
        return Err(Error::DimensionMismatch(format!(
            "families {} ({} dims, n={}) and {} ({} dims, n={})",
            zfam.label,
            zfam.dim(),
            zfam.n(),
            xfam.label,
            xfam.dim(),
            xfam.n()
        )));
    }
    check_square(psi, zfam.dim(), "state")?;
    let mut total = 0.0;
    for (a, b, p) in dist {
        total += p * norm_sq(&twisted_commutator(zfam.get(a)?, xfam.get(b)?, a.dot(b)?), psi);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::super::linalg::{maximally_mixed, random_hermitian, random_state, random_unitary, exp_i};
    use super::*;
    use crate::rng::TrialRng;

    #[test]
    fn pauli_families_are_exact_representations() {
        for n in 1..=3 {
            let z = ObservableFamily::pauli(Letter::Z, n).unwrap();
            let x = ObservableFamily::pauli(Letter::X, n).unwrap();
            assert!(z.is_exactly_linear() && x.is_exactly_linear());
            let psi = random_state(1 << n, 1.0, &mut TrialRng::new(3, n as u64));
            assert!(commutator_residual(&z, &x, &psi, &uniform_pairs(n)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn generators_reproduce_pauli_family() {
        let z = ObservableFamily::pauli(Letter::Z, 3).unwrap();
        let gens: Vec<Mat> = (0..3)
            .map(|i| {
                let mut e = Bits::zeros(3);
                e.set(i, true);
                z.get(&e).unwrap().clone()
            })
            .collect();
        let g = ObservableFamily::from_generators("z", &gens).unwrap();
        for (a, m) in z.iter() {
            assert!(max_abs(&(m - g.get(a).unwrap())) < 1e-12);
        }
    }

    #[test]
    fn same_diagonal_family_gives_closed_form() {
        let mut rng = TrialRng::new(3, 9);
        let n = 3;
        let chars: Vec<Bits> = (0..8).map(|_| rng.bits(n)).collect();
        let d = ObservableFamily::diagonal(n, &chars).unwrap();
        let psi = random_state(8, 1.0, &mut rng);
        let dist = uniform_pairs(n);
        let odd = dist.iter().filter(|(a, b, _)| a.dot(b).unwrap()).map(|t| t.2).sum::<f64>();
        let r = commutator_residual(&d, &d, &psi, &dist).unwrap();
        assert!((r - 4.0 * odd).abs() < 1e-10, "{r} vs {}", 4.0 * odd);
    }

    #[test]
    fn residual_grows_with_perturbation() {
        let mut rng = TrialRng::new(3, 10);
        let n = 2;
        let z = ObservableFamily::pauli(Letter::Z, n).unwrap();
        let x = ObservableFamily::pauli(Letter::X, n).unwrap();
        let h = random_hermitian(4, &mut rng);
        let psi = maximally_mixed(4);
        let mut last = -1.0;
        for k in 1..=10 {
            let theta = 0.02 * k as f64;
            let xt = x.conjugated(&exp_i(&h, theta)).unwrap();
            assert!(xt.is_exactly_linear());
            let r = commutator_residual(&z, &xt, &psi, &uniform_pairs(n)).unwrap();
            assert!(r > last, "not monotone at θ = {theta}");
            last = r;
        }
    }

    #[test]
    fn non_linear_families_are_flagged() {
        let mut rng = TrialRng::new(3, 11);
        let z = ObservableFamily::pauli(Letter::Z, 2).unwrap();
        let mut ops: BTreeMap<Bits, DenseOperator> = z.iter().map(|(a, m)| (a.clone(), DenseOperator::from_matrix(m.clone()).unwrap())).collect();
        let u = random_unitary(4, &mut rng);
        let a = Bits::parse("11").unwrap();
        let bent = &u * ops[&a].matrix() * u.adjoint();
        ops.insert(a, DenseOperator::from_matrix(bent).unwrap());
        assert!(!ObservableFamily::new("bent", 2, ops).unwrap().is_exactly_linear());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let z = ObservableFamily::pauli(Letter::Z, 1).unwrap();
        let x = ObservableFamily::pauli(Letter::X, 1).unwrap().padded(1).unwrap();
        assert!(matches!(commutator_residual(&z, &x, &maximally_mixed(2), &uniform_pairs(1)), Err(Error::DimensionMismatch(_))));
    }
}
