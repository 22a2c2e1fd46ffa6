//! Dense statevector simulation.
//!
//! Qubit 0 is the leftmost tensor factor and the most significant bit of the
//! amplitude index. States may be subnormalized: a measurement branch keeps
//! the weight it was produced with.

mod script;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliWord, DEFAULT_DENSE_CAP};
use crate::rng::TrialRng;

pub use script::{exact_accept_prob, sample_script, ScriptStep};

/// Largest register a state may occupy.
pub const STATE_CAP: usize = 16;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    qubits: usize,
    amps: Vec<Complex64>,
}

/// One outcome of a projective measurement: the outcome string, the
/// unnormalized branch `P_u|ψ⟩`, and its weight `‖P_u|ψ⟩‖²`.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub bits: Bits,
    pub branch: QuantumState,
    pub probability: f64,
}

impl MeasurementOutcome {
    pub fn post_state(&self) -> QuantumState {
        self.branch.normalized()
    }
}

/// Outcome of a batch of Bell measurements with the measured qubits removed.
#[derive(Clone, Debug)]
pub struct TeleportOutcome {
    pub ux: Bits,
    pub uz: Bits,
    pub branch: QuantumState,
    pub probability: f64,
}

#[derive(Serialize)]
struct AmpDump {
    index: usize,
    re: f64,
    im: f64,
}

fn check_qubits(qubits: usize) -> Result<()> {
    if qubits > STATE_CAP {
        return Err(Error::CapExceeded { qubits, cap: STATE_CAP });
    }
    Ok(())
}

impl QuantumState {
    pub fn new(qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(qubits)?;
        if amps.len() != 1 << qubits {
            return Err(Error::LengthMismatch { expected: 1 << qubits, got: amps.len() });
        }
        let s = QuantumState { qubits, amps };
        let nrm = s.norm_sqr();
        if !(nrm > 0.0 && nrm <= 1.0 + 1e-9) {
            return Err(Error::InvalidArgument(format!("squared norm {nrm} outside (0, 1]")));
        }
        Ok(s)
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        check_qubits(qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { qubits, amps })
    }

    /// Haar-random pure state from Gaussian amplitudes.
    pub fn random(qubits: usize, rng: &mut TrialRng) -> Result<Self> {
        check_qubits(qubits)?;
        let mut gauss = || {
            let (u1, u2) = (1.0 - rng.unit(), rng.unit());
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let amps = (0..1usize << qubits).map(|_| Complex64::new(gauss(), gauss())).collect();
        Ok(QuantumState { qubits, amps }.normalized())
    }

    pub fn from_bits(bits: &Bits) -> Result<Self> {
        QuantumState::basis(bits.len(), bits.to_index() as usize)
    }

    /// `k` EPR pairs: Alice holds qubits `0..k`, Bob holds `k..2k`, pairing `i ↔ k+i`.
    pub fn prepare_epr(k: usize) -> Result<Self> {
        if 2 * k > DEFAULT_DENSE_CAP {
            return Err(Error::CapExceeded { qubits: 2 * k, cap: DEFAULT_DENSE_CAP });
        }
        let amp = Complex64::new((0.5f64).powf(k as f64 / 2.0), 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * k)];
        for a in 0..1usize << k {
            amps[(a << k) | a] = amp;
        }
        Ok(QuantumState { qubits: 2 * k, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        QuantumState { qubits: self.qubits, amps: self.amps.iter().map(|a| a / n).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        QuantumState { qubits: self.qubits, amps: self.amps.iter().map(|a| a * c).collect() }
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &QuantumState) -> Result<Self> {
        check_qubits(self.qubits + other.qubits)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(QuantumState { qubits: self.qubits + other.qubits, amps })
    }

    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn shift(&self, q: usize) -> usize {
        self.qubits - 1 - q
    }

    fn check_index(&self, q: usize) -> Result<()> {
        if q >= self.qubits {
            return Err(Error::QubitOutOfRange { index: q, qubits: self.qubits });
        }
        Ok(())
    }

    fn check_distinct(&self, qs: &[usize]) -> Result<()> {
        for (i, &q) in qs.iter().enumerate() {
            self.check_index(q)?;
            if qs[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    pub fn apply_x(&mut self, q: usize) {
        let m = 1 << self.shift(q);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                self.amps.swap(i, i | m);
            }
        }
    }

    pub fn apply_z(&mut self, q: usize) {
        let m = 1 << self.shift(q);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a = -*a;
            }
        }
    }

    pub fn apply_h(&mut self, q: usize) {
        let m = 1 << self.shift(q);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (a, b) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                self.amps[i | m] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let c = 1 << self.shift(control);
        let t = 1 << self.shift(target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    /// Applies a single-qubit unitary given row-major.
    pub fn apply_1q(&mut self, q: usize, u: [[Complex64; 2]; 2]) {
        let m = 1 << self.shift(q);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let (a, b) = (self.amps[i], self.amps[i | m]);
                self.amps[i] = u[0][0] * a + u[0][1] * b;
                self.amps[i | m] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    /// Applies `±σ_X(x)σ_Z(z)` acting on the listed qubits.
    pub fn apply_word(&mut self, qubits: &[usize], word: &PauliWord) -> Result<()> {
        if qubits.len() != word.n() {
            return Err(Error::LengthMismatch { expected: word.n(), got: qubits.len() });
        }
        self.check_distinct(qubits)?;
        for (k, &q) in qubits.iter().enumerate() {
            if word.z.get(k) {
                self.apply_z(q);
            }
        }
        for (k, &q) in qubits.iter().enumerate() {
            if word.x.get(k) {
                self.apply_x(q);
            }
        }
        if word.negative {
            for a in self.amps.iter_mut() {
                *a = -*a;
            }
        }
        Ok(())
    }

    fn bucket(&self, qubits: &[usize]) -> Vec<(Bits, QuantumState)> {
        let k = qubits.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut buckets: Vec<Option<Vec<Complex64>>> = vec![None; 1 << k];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let mut key = 0usize;
            for &q in qubits {
                key = (key << 1) | ((i >> self.shift(q)) & 1);
            }
            buckets[key].get_or_insert_with(|| vec![zero; self.amps.len()])[i] = *a;
        }
        buckets
            .into_iter()
            .enumerate()
            .filter_map(|(key, amps)| {
                amps.map(|amps| (Bits::from_index(key as u64, k), QuantumState { qubits: self.qubits, amps }))
            })
            .collect()
    }

    /// All outcomes of measuring `qubits` in the bases `w`.
    ///
    /// Identity letters are not measured and always report 0. Zero-weight
    /// outcomes are omitted.
    pub fn measure_bases_branches(&self, qubits: &[usize], w: &PauliString) -> Result<Vec<MeasurementOutcome>> {
        if qubits.len() != w.len() {
            return Err(Error::LengthMismatch { expected: w.len(), got: qubits.len() });
        }
        self.check_distinct(qubits)?;
        let active: Vec<usize> = (0..w.len()).filter(|&i| w.get(i) != Letter::I).collect();
        let xs: Vec<usize> = active.iter().filter(|&&i| w.get(i) == Letter::X).map(|&i| qubits[i]).collect();
        let mut rotated = self.clone();
        for &q in &xs {
            rotated.apply_h(q);
        }
        let measured: Vec<usize> = active.iter().map(|&i| qubits[i]).collect();
        let mut out = Vec::new();
        for (key, mut branch) in rotated.bucket(&measured) {
            for &q in &xs {
                branch.apply_h(q);
            }
            let mut bits = Bits::zeros(w.len());
            for (k, &i) in active.iter().enumerate() {
                bits.set(i, key.get(k));
            }
            let probability = branch.norm_sqr();
            if probability > 0.0 {
                out.push(MeasurementOutcome { bits, branch, probability });
            }
        }
        Ok(out)
    }

    /// Samples one outcome; the returned branch is renormalized to the
    /// input's weight and `probability` is conditional on the input.
    pub fn measure_bases(&self, qubits: &[usize], w: &PauliString, rng: &mut TrialRng) -> Result<MeasurementOutcome> {
        let branches = self.measure_bases_branches(qubits, w)?;
        Ok(self.pick(branches, rng))
    }

    fn pick(&self, branches: Vec<MeasurementOutcome>, rng: &mut TrialRng) -> MeasurementOutcome {
        let total = self.norm_sqr();
        let weights: Vec<f64> = branches.iter().map(|b| b.probability).collect();
        let idx = rng.pick_weighted(&weights);
        let mut chosen = branches.into_iter().nth(idx).expect("nonempty branch list");
        let p = chosen.probability / total;
        chosen.branch = chosen.branch.scaled((total / chosen.probability).sqrt());
        chosen.probability = p;
        chosen
    }

    /// Measures the binary observable `word` on `qubits`: bit 0 is the `+1`
    /// eigenspace, bit 1 the `−1` eigenspace.
    pub fn measure_observable_branches(&self, qubits: &[usize], word: &PauliWord) -> Result<Vec<MeasurementOutcome>> {
        if !word.is_hermitian() {
            return Err(Error::InvalidArgument("observable word is not Hermitian".into()));
        }
        let mut flipped = self.clone();
        flipped.apply_word(qubits, word)?;
        let mut out = Vec::with_capacity(2);
        for (bit, sign) in [(false, 1.0), (true, -1.0)] {
            let amps: Vec<Complex64> =
                self.amps.iter().zip(&flipped.amps).map(|(a, b)| (a + b * sign) * 0.5).collect();
            let branch = QuantumState { qubits: self.qubits, amps };
            let probability = branch.norm_sqr();
            if probability > 1e-30 {
                out.push(MeasurementOutcome { bits: Bits::from_bools(&[bit]), branch, probability });
            }
        }
        Ok(out)
    }

    pub fn measure_observable(&self, qubits: &[usize], word: &PauliWord, rng: &mut TrialRng) -> Result<MeasurementOutcome> {
        let branches = self.measure_observable_branches(qubits, word)?;
        Ok(self.pick(branches, rng))
    }

    /// Removes `qubits`, assuming each is already in the given basis state.
    /// The amplitudes of the retained register are read off that slice.
    pub fn remove_qubits(&self, qubits: &[usize], values: &Bits) -> Result<Self> {
        self.check_distinct(qubits)?;
        let keep: Vec<usize> = (0..self.qubits).filter(|q| !qubits.contains(q)).collect();
        let mut base = 0usize;
        for (k, &q) in qubits.iter().enumerate() {
            if values.get(k) {
                base |= 1 << self.shift(q);
            }
        }
        let m = keep.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << m];
        for (j, amp) in amps.iter_mut().enumerate() {
            let mut idx = base;
            for (k, &q) in keep.iter().enumerate() {
                if (j >> (m - 1 - k)) & 1 == 1 {
                    idx |= 1 << self.shift(q);
                }
            }
            *amp = self.amps[idx];
        }
        Ok(QuantumState { qubits: m, amps })
    }

    /// Bell-measures each `(source, alice_half)` pair and discards both.
    ///
    /// For every pair, `uz` is the source bit and `ux` the Alice-half bit
    /// after `CNOT(source → alice_half)` and `H(source)`; the partner of the
    /// Alice half then holds `σ_X^{ux}σ_Z^{uz}` applied to the source state.
    pub fn teleport_branches(&self, pairs: &[(usize, usize)]) -> Result<Vec<TeleportOutcome>> {
        let mut all: Vec<usize> = Vec::new();
        for &(s, a) in pairs {
            all.push(s);
            all.push(a);
        }
        self.check_distinct(&all)?;
        let mut rotated = self.clone();
        for &(s, a) in pairs {
            rotated.apply_cnot(s, a);
            rotated.apply_h(s);
        }
        let n = pairs.len();
        let mut out = Vec::new();
        for (key, branch) in rotated.bucket(&all) {
            let probability = branch.norm_sqr();
            if probability <= 0.0 {
                continue;
            }
            let mut ux = Bits::zeros(n);
            let mut uz = Bits::zeros(n);
            for i in 0..n {
                uz.set(i, key.get(2 * i));
                ux.set(i, key.get(2 * i + 1));
            }
            let branch = branch.remove_qubits(&all, &key)?;
            out.push(TeleportOutcome { ux, uz, branch, probability });
        }
        Ok(out)
    }

    /// Single-pair teleportation, sampled.
    pub fn teleport(&self, source: usize, pair: (usize, usize), rng: &mut TrialRng) -> Result<(bool, bool, QuantumState)> {
        if pair.0 == source || pair.1 == source || pair.0 == pair.1 {
            return Err(Error::DuplicateQubit(source));
        }
        self.check_index(pair.1)?;
        let branches = self.teleport_branches(&[(source, pair.0)])?;
        let weights: Vec<f64> = branches.iter().map(|b| b.probability).collect();
        let t = &branches[rng.pick_weighted(&weights)];
        let scale = (self.norm_sqr() / t.probability).sqrt();
        Ok((t.ux.get(0), t.uz.get(0), t.branch.scaled(scale)))
    }

    /// Reduced density matrix on `qubits`, in the listed order.
    pub fn reduced_density(&self, qubits: &[usize]) -> Result<DMatrix<Complex64>> {
        self.check_distinct(qubits)?;
        let k = qubits.len();
        let rest: Vec<usize> = (0..self.qubits).filter(|q| !qubits.contains(q)).collect();
        let mut rho = DMatrix::from_element(1 << k, 1 << k, Complex64::new(0.0, 0.0));
        let index = |sub: usize, env: usize| -> usize {
            let mut idx = 0;
            for (j, &q) in qubits.iter().enumerate() {
                if (sub >> (k - 1 - j)) & 1 == 1 {
                    idx |= 1 << self.shift(q);
                }
            }
            for (j, &q) in rest.iter().enumerate() {
                if (env >> (rest.len() - 1 - j)) & 1 == 1 {
                    idx |= 1 << self.shift(q);
                }
            }
            idx
        };
        for env in 0..1usize << rest.len() {
            for r in 0..1usize << k {
                let ar = self.amps[index(r, env)];
                if ar.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..1usize << k {
                    rho[(r, c)] += ar * self.amps[index(c, env)].conj();
                }
            }
        }
        Ok(rho)
    }

    /// Density matrix `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DMatrix<Complex64> {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        &v * v.adjoint()
    }

    /// JSON list of nonzero `(index, re, im)` entries.
    pub fn dump_json(&self) -> String {
        let entries: Vec<AmpDump> = self
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(index, a)| AmpDump { index, re: a.re, im: a.im })
            .collect();
        serde_json::to_string(&entries).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn random_qubit(rng: &mut ChaCha8Rng) -> QuantumState {
        let v: Vec<f64> = (0..4).map(|_| rng.random::<f64>() - 0.5).collect();
        let amps = vec![Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])];
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        QuantumState::new(1, amps.into_iter().map(|a| a / n).collect()).unwrap()
    }

    #[test]
    fn epr_examples() {
        let s = QuantumState::prepare_epr(1).unwrap();
        let h = FRAC_1_SQRT_2;
        let expect = [h, 0.0, 0.0, h];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a.re - e).abs() < 1e-15 && a.im == 0.0);
        }
        assert!(QuantumState::prepare_epr(7).is_err());

        let s2 = QuantumState::prepare_epr(2).unwrap();
        for basis in ["ZZ", "XX"] {
            let br = s2.measure_bases_branches(&[0, 2], &ps(basis)).unwrap();
            let total: f64 = br.iter().map(|b| b.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for b in &br {
                assert_eq!(b.bits.get(0), b.bits.get(1));
                assert!((b.probability - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn measure_bases_examples() {
        let zero = QuantumState::basis(1, 0).unwrap();
        let br = zero.measure_bases_branches(&[0], &ps("Z")).unwrap();
        assert_eq!(br.len(), 1);
        assert!(!br[0].bits.get(0));
        assert!((br[0].probability - 1.0).abs() < 1e-15);

        let mut plus = zero.clone();
        plus.apply_h(0);
        let br = plus.measure_bases_branches(&[0], &ps("Z")).unwrap();
        assert_eq!(br.len(), 2);
        assert!(br.iter().all(|b| (b.probability - 0.5).abs() < 1e-12));

        let id = plus.measure_bases_branches(&[0], &ps("I")).unwrap();
        assert_eq!(id.len(), 1);
        assert!(!id[0].bits.get(0));

        let epr = QuantumState::prepare_epr(1).unwrap();
        assert_eq!(epr.measure_bases_branches(&[0, 0], &ps("ZZ")).unwrap_err(), Error::DuplicateQubit(0));
    }

    #[test]
    fn measurement_is_repeatable() {
        let mut rng = TrialRng::new(3, 0);
        let s = QuantumState::prepare_epr(2).unwrap();
        for basis in ["XZ", "ZX", "XX"] {
            let first = s.measure_bases(&[0, 1], &ps(basis), &mut rng).unwrap();
            let again = first.post_state().measure_bases_branches(&[0, 1], &ps(basis)).unwrap();
            assert_eq!(again.len(), 1);
            assert_eq!(again[0].bits, first.bits);
        }
    }

    #[test]
    fn observable_branches_conserve_norm() {
        let s = QuantumState::prepare_epr(2).unwrap();
        let w = PauliWord::new(false, Bits::parse("11").unwrap(), Bits::parse("11").unwrap()).unwrap();
        let br = s.measure_observable_branches(&[0, 1], &w).unwrap();
        let total: f64 = br.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let bad = PauliWord::new(false, Bits::parse("1").unwrap(), Bits::parse("1").unwrap()).unwrap();
        assert!(s.measure_observable_branches(&[0], &bad).is_err());
    }

    fn corrected(t: &TeleportOutcome) -> QuantumState {
        // Bob holds X^{ux}Z^{uz}|φ⟩; undo X first, then Z
        let mut b = t.branch.normalized();
        if t.ux.get(0) {
            b.apply_x(0);
        }
        if t.uz.get(0) {
            b.apply_z(0);
        }
        b
    }

    #[test]
    fn teleport_basis_states() {
        for (prep_h, basis) in [(false, "Z"), (true, "X")] {
            let mut src = QuantumState::basis(1, 0).unwrap();
            if prep_h {
                src.apply_h(0);
            }
            let s = src.tensor(&QuantumState::prepare_epr(1).unwrap()).unwrap();
            let branches = s.teleport_branches(&[(0, 1)]).unwrap();
            assert_eq!(branches.len(), 4);
            for t in &branches {
                assert!((t.probability - 0.25).abs() < 1e-12);
                let bob = corrected(t);
                let m = bob.measure_bases_branches(&[0], &ps(basis)).unwrap();
                assert_eq!(m.len(), 1);
                assert!(!m[0].bits.get(0));
            }
        }
    }

    #[test]
    fn teleport_random_states_with_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let src = random_qubit(&mut rng);
            let s = src.tensor(&QuantumState::prepare_epr(1).unwrap()).unwrap();
            for t in s.teleport_branches(&[(0, 1)]).unwrap() {
                let bob = corrected(&t);
                let rho = bob.reduced_density(&[0]).unwrap();
                let v = nalgebra::DVector::from_column_slice(src.amplitudes());
                let fid = (v.adjoint() * &rho * &v)[(0, 0)].re;
                assert!(fid >= 1.0 - 1e-9, "fidelity {fid}");
            }
        }
    }

    #[test]
    fn correction_pairing_reproduces_source_statistics() {
        // s = v ⊕ ux when Bob measures Z, s = v ⊕ uz when Bob measures X
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let src = random_qubit(&mut rng);
            let s = src.tensor(&QuantumState::prepare_epr(1).unwrap()).unwrap();
            for basis in ["Z", "X"] {
                let direct = src.measure_bases_branches(&[0], &ps(basis)).unwrap();
                let p_direct: f64 = direct.iter().filter(|b| b.bits.get(0)).map(|b| b.probability).sum();
                let mut p_corrected = 0.0;
                for t in s.teleport_branches(&[(0, 1)]).unwrap() {
                    let fix = if basis == "Z" { t.ux.get(0) } else { t.uz.get(0) };
                    for m in t.branch.measure_bases_branches(&[0], &ps(basis)).unwrap() {
                        if m.bits.get(0) ^ fix {
                            p_corrected += m.probability;
                        }
                    }
                }
                assert!((p_corrected - p_direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn swapped_pairing_fails_on_basis_state() {
        let src = QuantumState::basis(1, 1).unwrap();
        let s = src.tensor(&QuantumState::prepare_epr(1).unwrap()).unwrap();
        let mut p = 0.0;
        for t in s.teleport_branches(&[(0, 1)]).unwrap() {
            for m in t.branch.measure_bases_branches(&[0], &ps("Z")).unwrap() {
                if m.bits.get(0) ^ t.uz.get(0) {
                    p += m.probability;
                }
            }
        }
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn remove_and_dump() {
        let s = QuantumState::basis(3, 0b101).unwrap();
        let r = s.remove_qubits(&[1], &Bits::parse("0").unwrap()).unwrap();
        assert_eq!(r.qubits(), 2);
        assert!((r.amplitudes()[0b11].re - 1.0).abs() < 1e-15);
        assert_eq!(s.dump_json(), r#"[{"index":5,"re":1.0,"im":0.0}]"#);
    }
}
