use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pauli::{word_to_dense, Letter, PauliString, PauliWord, DEFAULT_DENSE_CAP};
use crate::simulator::QuantumState;

/// `coeff · ⊗_k σ_{bases[k]}` on `qubits`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XZTerm {
    pub coeff: f64,
    pub qubits: Vec<usize>,
    pub bases: String,
}

impl XZTerm {
    pub fn new(coeff: f64, qubits: Vec<usize>, bases: &str) -> Self {
        XZTerm { coeff, qubits, bases: bases.to_string() }
    }

    fn letters(&self) -> Result<Vec<Letter>> {
        self.bases
            .chars()
            .map(|c| match c {
                'X' => Ok(Letter::X),
                'Z' => Ok(Letter::Z),
                _ => Err(Error::InvalidTerm(format!("basis {c:?} is not X or Z"))),
            })
            .collect()
    }
}

/// A 2-local Hamiltonian with X and Z terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XZHamiltonian {
    pub n: usize,
    pub terms: Vec<XZTerm>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum XZFile {
    Full { n: usize, terms: Vec<XZTerm> },
    Bare(Vec<XZTerm>),
}

impl XZHamiltonian {
    pub fn new(n: usize, terms: Vec<XZTerm>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("hamiltonian needs n >= 1".into()));
        }
        for t in &terms {
            if !t.coeff.is_finite() {
                return Err(Error::InvalidTerm(format!("coefficient {} is not finite", t.coeff)));
            }
            if t.qubits.is_empty() || t.qubits.len() > 2 {
                return Err(Error::InvalidTerm(format!("term acts on {} qubits", t.qubits.len())));
            }
            if t.qubits.len() != t.bases.chars().count() {
                return Err(Error::InvalidTerm("qubit and basis counts differ".into()));
            }
            if t.qubits.len() == 2 && t.qubits[0] == t.qubits[1] {
                return Err(Error::InvalidTerm(format!("repeated qubit {}", t.qubits[0])));
            }
            if let Some(&q) = t.qubits.iter().find(|&&q| q >= n) {
                return Err(Error::QubitOutOfRange { index: q, qubits: n });
            }
            t.letters()?;
        }
        Ok(XZHamiltonian { n, terms })
    }

    /// Reads `{"n": .., "terms": [..]}` or a bare term list (n inferred).
    pub fn from_json(s: &str) -> Result<Self> {
        let parsed: XZFile = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        match parsed {
            XZFile::Full { n, terms } => XZHamiltonian::new(n, terms),
            XZFile::Bare(terms) => {
                let n = terms.iter().flat_map(|t| t.qubits.iter()).max().map_or(0, |m| m + 1);
                XZHamiltonian::new(n, terms)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Unsigned Pauli string of term `j` on all `n` qubits.
    pub fn term_string(&self, j: usize) -> PauliString {
        let t = &self.terms[j];
        let mut letters = vec![Letter::I; self.n];
        for (&q, l) in t.qubits.iter().zip(t.letters().expect("validated")) {
            letters[q] = l;
        }
        PauliString::new(letters).expect("n >= 1")
    }

    /// Support of term `j` as a mask.
    pub fn term_mask(&self, j: usize) -> Bits {
        let mut m = Bits::zeros(self.n);
        for &q in &self.terms[j].qubits {
            m.set(q, true);
        }
        m
    }

    pub fn term_word(&self, j: usize) -> PauliWord {
        let w = self.term_string(j);
        PauliWord::new(false, w.mask_of(Letter::X), w.mask_of(Letter::Z)).expect("equal lengths")
    }

    /// Dense `P_j` without its coefficient.
    pub fn dense_term(&self, j: usize) -> Result<DMatrix<Complex64>> {
        Ok(word_to_dense(&self.term_word(j))?.into_matrix())
    }

    pub fn dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n > DEFAULT_DENSE_CAP {
            return Err(Error::CapExceeded { qubits: self.n, cap: DEFAULT_DENSE_CAP });
        }
        let d = 1 << self.n;
        let mut h = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for (j, t) in self.terms.iter().enumerate() {
            h += self.dense_term(j)? * Complex64::new(t.coeff, 0.0);
        }
        Ok(h)
    }

    /// Lowest eigenvalue and a corresponding eigenvector.
    pub fn ground_state(&self) -> Result<(f64, QuantumState)> {
        ground_state_of(&self.dense()?, self.n)
    }
}

/// Lowest eigenpair of a Hermitian matrix on `n` qubits.
pub fn ground_state_of(h: &DMatrix<Complex64>, n: usize) -> Result<(f64, QuantumState)> {
    let eig = h.clone().symmetric_eigen();
    let (k, e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InvalidArgument("empty matrix".into()))?;
    let v: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
    Ok((*e, QuantumState::new(n, v)?.normalized()))
}
