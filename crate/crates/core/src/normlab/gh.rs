//! Rounding approximate representations of the Heisenberg-Weyl group.
//!
//! The group `W_n` is enumerated as `±X^x Z^z` in the order of
//! [`enumerate_group`], so element `(neg, x, z)` sits at index
//! `neg·4^n + x·2^n + z`. The regular representation acts by
//! `π(g)|k⟩ = |k g⁻¹⟩`, which is `Σ_h |h⟩⟨hg|`.

use serde::{Deserialize, Serialize};

use super::family::{commutator_residual, uniform_pairs, ObservableFamily, PairDist};
use super::linalg::{c, check_square, exp_i, eye, hermitian_eigen, is_unitary, max_abs, random_hermitian, validate_state, Mat};
use super::norm::norm_sq;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pauli::{enumerate_group, sigma_dense, word_mul, word_to_dense, Letter, PauliString, PauliWord};
use crate::rng::TrialRng;

pub const MAX_GROUP_QUBITS: usize = 2;
pub const CHOI_PSD_TOL: f64 = 1e-9;
pub const CHOI_CLIP: f64 = 1e-12;
/// Instances needing a larger constant are flagged in reports.
pub const FLAG_CONSTANT: f64 = 100.0;

/// `W_n` with its multiplication table.
#[derive(Clone, Debug)]
pub struct HwGroup {
    n: usize,
    elements: Vec<PauliWord>,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
}

impl HwGroup {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_GROUP_QUBITS {
            return Err(Error::InvalidArgument(format!("group tables are enumerated for 1 ≤ n ≤ {MAX_GROUP_QUBITS}, got {n}")));
        }
        let elements = enumerate_group(n);
        let index = |w: &PauliWord| -> usize { ((w.negative as usize) << (2 * n)) | ((w.x.to_index() as usize) << n) | w.z.to_index() as usize };
        let mut mul = Vec::with_capacity(elements.len());
        for g in &elements {
            mul.push(elements.iter().map(|h| word_mul(g, h).map(|p| index(&p))).collect::<Result<Vec<_>>>()?);
        }
        let inv = elements.iter().map(|g| index(&g.inverse())).collect();
        Ok(HwGroup { n, elements, mul, inv })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, i: usize) -> &PauliWord {
        &self.elements[i]
    }

    pub fn index_of(&self, w: &PauliWord) -> usize {
        ((w.negative as usize) << (2 * self.n)) | ((w.x.to_index() as usize) << self.n) | w.z.to_index() as usize
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.mul[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn minus_one(&self) -> usize {
        1 << (2 * self.n)
    }

    /// `π(g)` as a permutation: column `k` maps to row `k g⁻¹`.
    pub fn regular_perm(&self, g: usize) -> Vec<usize> {
        (0..self.order()).map(|k| self.mul(k, self.inv(g))).collect()
    }

    pub fn regular_matrix(&self, g: usize) -> Mat {
        let mut m = Mat::zeros(self.order(), self.order());
        for (k, r) in self.regular_perm(g).into_iter().enumerate() {
            m[(r, k)] = c(1.0);
        }
        m
    }

    /// One-dimensional character `(−1)^{s·x + t·z}` with `r = s·2^n + t`.
    pub fn character(&self, r: usize, g: usize) -> f64 {
        let side = 1usize << self.n;
        let (s, t) = (Bits::from_index((r / side) as u64, self.n), Bits::from_index((r % side) as u64, self.n));
        let w = &self.elements[g];
        let odd = s.dot(&w.x).expect("n bits") ^ t.dot(&w.z).expect("n bits");
        if odd {
            -1.0
        } else {
            1.0
        }
    }

    pub fn uniform(&self) -> Vec<f64> {
        vec![1.0 / self.order() as f64; self.order()]
    }

    pub fn point(&self, g: usize) -> Vec<f64> {
        let mut mu = vec![0.0; self.order()];
        mu[g] = 1.0;
        mu
    }
}

/// A unitary-valued table `f: W_n → U(H)`.
#[derive(Clone, Debug)]
pub struct GroupFunction {
    group: HwGroup,
    table: Vec<Mat>,
}

impl GroupFunction {
    pub fn from_fn(n: usize, f: impl Fn(&PauliWord) -> Result<Mat>) -> Result<Self> {
        let group = HwGroup::new(n)?;
        let table = group.elements.iter().map(f).collect::<Result<Vec<_>>>()?;
        let d = table[0].nrows();
        for (g, m) in table.iter().enumerate() {
            check_square(m, d, "table entry")?;
            if !is_unitary(m, 1e-9) {
                return Err(Error::InvalidArgument(format!("f({:?}) is not unitary", group.elements[g])));
            }
        }
        Ok(GroupFunction { group, table })
    }

    /// The Pauli matrices themselves.
    pub fn fundamental(n: usize) -> Result<Self> {
        GroupFunction::from_fn(n, |w| Ok(word_to_dense(w)?.into_matrix()))
    }

    /// The one-dimensional representation with index `r`.
    pub fn sign(n: usize, r: usize) -> Result<Self> {
        let group = HwGroup::new(n)?;
        if r >= 1 << (2 * n) {
            return Err(Error::InvalidArgument(format!("character index {r} out of range")));
        }
        let table = (0..group.order()).map(|g| Mat::from_element(1, 1, c(group.character(r, g)))).collect();
        Ok(GroupFunction { group, table })
    }

    /// `f(±σ_Z(a)σ_X(b)) = ±Z(a)X(b)`.
    pub fn from_families(zfam: &ObservableFamily, xfam: &ObservableFamily) -> Result<Self> {
        if zfam.n() != xfam.n() || zfam.dim() != xfam.dim() {
            return Err(Error::DimensionMismatch("Z and X families differ in shape".into()));
        }
        GroupFunction::from_fn(zfam.n(), |w| {
            let flip = w.negative ^ w.x.dot(&w.z)?;
            let m = zfam.get(&w.z)? * xfam.get(&w.x)?;
            Ok(if flip { -m } else { m })
        })
    }

    /// `U_g f(g) U_g†` with independent `U_g = exp(iθH_g)`, `‖H_g‖ = 1`.
    pub fn perturbed(&self, theta: f64, rng: &mut TrialRng) -> Self {
        let d = self.dim();
        let table = self
            .table
            .iter()
            .map(|m| {
                let u = exp_i(&random_hermitian(d, rng), theta);
                &u * m * u.adjoint()
            })
            .collect();
        GroupFunction { group: self.group.clone(), table }
    }

    pub fn group(&self) -> &HwGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.table[0].nrows()
    }

    pub fn get(&self, g: usize) -> &Mat {
        &self.table[g]
    }

    /// `f*(g) = E_h f(h)† f(hg)`.
    pub fn convolution(&self, g: usize) -> Mat {
        let order = self.group.order();
        let mut acc = Mat::zeros(self.dim(), self.dim());
        for h in 0..order {
            acc += self.table[h].adjoint() * &self.table[self.group.mul(h, g)];
        }
        acc * c(1.0 / order as f64)
    }

    /// `E_{g∼μ, h uniform} ‖f(h)f(g) − f(hg)‖²_ψ`.
    pub fn hypothesis(&self, psi: &Mat, mu: &[f64]) -> f64 {
        let order = self.group.order();
        let mut total = 0.0;
        for (g, &p) in mu.iter().enumerate().filter(|(_, &p)| p > 0.0) {
            let mut inner = 0.0;
            for h in 0..order {
                inner += norm_sq(&(&self.table[h] * &self.table[g] - &self.table[self.group.mul(h, g)]), psi);
            }
            total += p * inner / order as f64;
        }
        total
    }
}

/// Output of [`gh_round`]: the isometry `V: H → C^{|G|} ⊗ K` and the regular
/// representation, with the residual on the given measure.
#[derive(Clone, Debug)]
pub struct RoundingResult {
    pub group: HwGroup,
    pub v: Mat,
    pub aux_dim: usize,
    /// `pi[g][k]` is the row of the single 1 in column `k` of `π(g)`.
    pub pi: Vec<Vec<usize>>,
    pub residual: f64,
    pub hypothesis: f64,
    pub choi_min_eigenvalue: f64,
    /// `max |V†V − 𝟙|`.
    pub isometry_error: f64,
    /// `max_g max |V†π(g)V − f*(g)|`.
    pub dilation_error: f64,
    pub holds: bool,
}

impl RoundingResult {
    /// `V†(π(g) ⊗ 𝟙_K)V = Σ_h V_h† V_{hg}`.
    pub fn rounded(&self, g: usize) -> Mat {
        let k = self.aux_dim;
        let order = self.group.order();
        let d = self.v.ncols();
        let mut acc = Mat::zeros(d, d);
        for h in 0..order {
            let hg = self.group.mul(h, g);
            acc += self.v.rows(h * k, k).adjoint() * self.v.rows(hg * k, k);
        }
        acc
    }

    pub fn pi_matrix(&self, g: usize) -> Mat {
        self.group.regular_matrix(g).kronecker(&eye(self.aux_dim))
    }

    /// `max_{g,h} |π(g)π(h) − π(gh)|` over the whole group.
    pub fn homomorphism_error(&self) -> f64 {
        let order = self.group.order();
        let mats: Vec<Mat> = (0..order).map(|g| self.group.regular_matrix(g)).collect();
        let mut worst: f64 = 0.0;
        for g in 0..order {
            for h in 0..order {
                worst = worst.max(max_abs(&(&mats[g] * &mats[h] - &mats[self.group.mul(g, h)])));
            }
        }
        worst
    }

    /// `max_g |f(g) − V†π(g)V|`.
    pub fn max_rounding_error(&self, f: &GroupFunction) -> f64 {
        (0..self.group.order()).map(|g| max_abs(&(f.get(g) - self.rounded(g)))).fold(0.0, f64::max)
    }
}

fn check_measure(mu: &[f64], order: usize) -> Result<()> {
    if mu.len() != order || mu.iter().any(|&p| p < 0.0 || !p.is_finite()) || (mu.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("measure must be {order} nonnegative weights summing to 1")));
    }
    Ok(())
}

/// Rounds `f` to the regular representation through a Stinespring dilation
/// of `φ(|g⟩⟨h|) = f*(g⁻¹h)/|G|`.
pub fn gh_round(f: &GroupFunction, psi: &Mat, mu: &[f64]) -> Result<RoundingResult> {
    let group = f.group.clone();
    let order = group.order();
    let d = f.dim();
    check_square(psi, d, "state")?;
    validate_state(psi)?;
    check_measure(mu, order)?;

    let conv: Vec<Mat> = (0..order).map(|g| f.convolution(g)).collect();
    // Choi operator on H ⊗ C^{|G|}, row index i·|G| + g
    let mut choi = Mat::zeros(d * order, d * order);
    for g in 0..order {
        for h in 0..order {
            let block = &conv[group.mul(group.inv(g), h)];
            for i in 0..d {
                for j in 0..d {
                    choi[(i * order + g, j * order + h)] = block[(i, j)] / order as f64;
                }
            }
        }
    }
    let (vals, vecs) = hermitian_eigen(&choi);
    let min = vals.first().copied().unwrap_or(0.0);
    if min < -CHOI_PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > CHOI_CLIP).collect();
    let aux = kept.len().max(1);
    // Kraus K_k = Σ_g |x^k_g⟩⟨g| with x^k_g[i] = √λ_k c_k[i·|G| + g];
    // V = Σ_k K_k† ⊗ |k⟩, rows g·K + k
    let mut v = Mat::zeros(order * aux, d);
    for (slot, &k) in kept.iter().enumerate() {
        let s = vals[k].sqrt();
        for g in 0..order {
            for i in 0..d {
                v[(g * aux + slot, i)] = (vecs[(i * order + g, k)] * s).conj();
            }
        }
    }
    let pi = (0..order).map(|g| group.regular_perm(g)).collect();
    let mut out = RoundingResult {
        group,
        v,
        aux_dim: aux,
        pi,
        residual: 0.0,
        hypothesis: f.hypothesis(psi, mu),
        choi_min_eigenvalue: min,
        isometry_error: 0.0,
        dilation_error: 0.0,
        holds: false,
    };
    out.isometry_error = max_abs(&(out.v.adjoint() * &out.v - eye(d)));
    let rounded: Vec<Mat> = (0..order).map(|g| out.rounded(g)).collect();
    out.dilation_error = rounded.iter().zip(&conv).map(|(r, s)| max_abs(&(r - s))).fold(0.0, f64::max);
    out.residual = mu.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(g, &p)| p * norm_sq(&(f.get(g) - &rounded[g]), psi)).sum();
    out.holds = out.residual <= out.hypothesis + 1e-8;
    Ok(out)
}

/// Character decomposition of the regular representation of `W_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrrepDecomposition {
    pub n: usize,
    pub group_order: usize,
    /// One-dimensional irreps occurring (each once).
    pub one_dimensional: usize,
    pub fundamental_multiplicity: usize,
    /// `Σ multiplicity · dimension`.
    pub accounted_dimension: usize,
    /// Largest deviation of character inner products from `δ_{ρσ}`.
    pub orthonormality_error: f64,
}

pub fn regular_irrep_decomposition(n: usize) -> Result<IrrepDecomposition> {
    let group = HwGroup::new(n)?;
    let order = group.order();
    let side = 1usize << n;
    let regular: Vec<f64> = (0..order).map(|g| group.regular_perm(g).iter().enumerate().filter(|(k, &r)| *k == r).count() as f64).collect();
    let fundamental: Vec<f64> = (0..order).map(|g| word_to_dense(group.element(g)).map(|m| m.trace().re)).collect::<Result<_>>()?;
    let mut chars: Vec<Vec<f64>> = (0..side * side).map(|r| (0..order).map(|g| group.character(r, g)).collect()).collect();
    chars.push(fundamental);
    // every character here is real
    let inner = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / order as f64;
    let mut orthonormality_error: f64 = 0.0;
    for (i, a) in chars.iter().enumerate() {
        for (j, b) in chars.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            orthonormality_error = orthonormality_error.max((inner(a, b) - target).abs());
        }
    }
    let mults: Vec<f64> = chars.iter().map(|ch| inner(&regular, ch)).collect();
    let as_int = |m: f64| -> Result<usize> {
        let r = m.round();
        if (m - r).abs() > 1e-9 || r < 0.0 {
            return Err(Error::InvalidArgument(format!("non-integral multiplicity {m}")));
        }
        Ok(r as usize)
    };
    let ones = mults[..side * side].iter().map(|&m| as_int(m)).collect::<Result<Vec<_>>>()?;
    let fund = as_int(mults[side * side])?;
    Ok(IrrepDecomposition {
        n,
        group_order: order,
        one_dimensional: ones.iter().filter(|&&m| m == 1).count(),
        fundamental_multiplicity: fund,
        accounted_dimension: ones.iter().sum::<usize>() + fund * side,
        orthonormality_error,
    })
}

/// Intertwiner from the regular representation onto `C^{2^n} ⊗ C^{2^n}`
/// carrying its fundamental part to `σ(g) ⊗ 𝟙`. Row `l·2^n + i`, column `h`,
/// entry `sqrt(2^n/|G|)·conj(ρ(h)_{il})`.
pub fn fundamental_intertwiner(group: &HwGroup) -> Result<Mat> {
    let side = 1usize << group.n();
    let order = group.order();
    let scale = (side as f64 / order as f64).sqrt();
    let mut t = Mat::zeros(side * side, order);
    for h in 0..order {
        let rho = word_to_dense(group.element(h))?.into_matrix();
        for l in 0..side {
            for i in 0..side {
                t[(l * side + i, h)] = rho[(i, l)].conj() * scale;
            }
        }
    }
    Ok(t)
}

/// Rows `r` are the normalized one-dimensional characters.
pub fn character_projector(group: &HwGroup) -> Mat {
    let order = group.order();
    let count = 1usize << (2 * group.n());
    let scale = 1.0 / (order as f64).sqrt();
    Mat::from_fn(count, order, |r, h| c(group.character(r, h) * scale))
}

/// Moves the dilation onto `C^{2^n} ⊗ aux`: the fundamental part of the
/// regular representation goes through the intertwiner, the one-dimensional
/// part is parked in a second aux block so the map stays isometric.
/// Rows are `((l·2 + block)·2^n + i)·K + κ`.
pub fn pauli_isometry(r: &RoundingResult) -> Result<Mat> {
    let group = &r.group;
    let side = 1usize << group.n();
    let k = r.aux_dim;
    let d = r.v.ncols();
    let order = group.order();
    let blocks = [fundamental_intertwiner(group)?, character_projector(group)];
    let aux = 2 * side * k;
    let mut out = Mat::zeros(side * aux, d);
    for (blk, t) in blocks.iter().enumerate() {
        for l in 0..side {
            for i in 0..side {
                let row_t = l * side + i;
                for h in 0..order {
                    let coef = t[(row_t, h)];
                    if coef.norm() == 0.0 {
                        continue;
                    }
                    for kappa in 0..k {
                        let dst = ((l * 2 + blk) * side + i) * k + kappa;
                        for col in 0..d {
                            out[(dst, col)] += coef * r.v[(h * k + kappa, col)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `V†(σ ⊗ 𝟙_aux)V` for `V` with rows `l·aux + α`.
pub fn sandwich(v: &Mat, sigma: &Mat) -> Mat {
    let side = sigma.nrows();
    let aux = v.nrows() / side;
    let d = v.ncols();
    let mut sv = Mat::zeros(v.nrows(), d);
    for l in 0..side {
        for lp in 0..side {
            let s = sigma[(l, lp)];
            if s.norm() == 0.0 {
                continue;
            }
            let src = v.rows(lp * aux, aux) * s;
            let mut dst = sv.rows_mut(l * aux, aux);
            dst += src;
        }
    }
    v.adjoint() * sv
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliRounding {
    /// Uniform commutation residual.
    pub epsilon: f64,
    /// `E_{(a,b)∼μ} ‖Z(a)X(b) − V†(σ_Z(a)σ_X(b) ⊗ 𝟙)V‖²_ψ`.
    pub residual: f64,
    /// `residual / ε`, or 0 when both vanish.
    pub measured_constant: f64,
    pub constant: f64,
    pub bound: f64,
    pub holds: bool,
    /// The instance needs a constant above [`FLAG_CONSTANT`].
    pub flagged: bool,
    pub isometry_error: f64,
}

fn twirl_deviation(fam: &ObservableFamily, psi: &Mat) -> Result<f64> {
    let mut tw = Mat::zeros(psi.nrows(), psi.ncols());
    let count = 1usize << fam.n();
    for (_, w) in fam.iter() {
        tw += w * psi * w;
    }
    Ok(max_abs(&(tw * c(1.0 / count as f64) - psi)))
}

/// Rounds two exact `Z_2^n` representations jointly to Pauli matrices and
/// measures the residual on an arbitrary pair distribution `mu`.
pub fn rounding_all_dist_check(zfam: &ObservableFamily, xfam: &ObservableFamily, psi: &Mat, mu: &PairDist, constant: f64) -> Result<PauliRounding> {
    for f in [zfam, xfam] {
        if !f.is_exactly_linear() {
            return Err(Error::InvalidArgument(format!("family {} is not exactly linear", f.label)));
        }
    }
    validate_state(psi)?;
    check_square(psi, zfam.dim(), "state")?;
    for f in [zfam, xfam] {
        let dev = twirl_deviation(f, psi)?;
        if dev > 1e-9 {
            return Err(Error::NonInvariantState(dev));
        }
    }
    let total: f64 = mu.iter().map(|t| t.2).sum();
    if mu.iter().any(|t| t.2 < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("pair distribution must be nonnegative and sum to 1".into()));
    }
    let n = zfam.n();
    let epsilon = commutator_residual(zfam, xfam, psi, &uniform_pairs(n))?;
    let f = GroupFunction::from_families(zfam, xfam)?;
    let gh = gh_round(&f, psi, &f.group().uniform())?;
    let v = pauli_isometry(&gh)?;
    let (zs, xs) = (PauliString::uniform(Letter::Z, n), PauliString::uniform(Letter::X, n));
    let mut residual = 0.0;
    for (a, b, p) in mu.iter().filter(|t| t.2 > 0.0) {
        let target = sigma_dense(&zs, a)?.into_matrix() * sigma_dense(&xs, b)?.into_matrix();
        residual += p * norm_sq(&(zfam.get(a)? * xfam.get(b)? - sandwich(&v, &target)), psi);
    }
    let measured_constant = if epsilon > 0.0 { residual / epsilon } else if residual > 1e-12 { f64::MAX } else { 0.0 };
    let bound = constant * epsilon + 1e-6;
    Ok(PauliRounding {
        epsilon,
        residual,
        measured_constant,
        constant,
        bound,
        holds: residual <= bound,
        flagged: residual > FLAG_CONSTANT * epsilon + 1e-6,
        isometry_error: max_abs(&(v.adjoint() * &v - eye(v.ncols()))),
    })
}
