//! The Mermin-Peres square with `σ_Z(a)` and `σ_X(b)` in cells 2 and 4.
//!
//! Cells are numbered 1..=9 row by row. Two classical values are computed by
//! enumeration: the line/cell variant played by the anticommutation test
//! (17/18) and the row/column game (8/9). Cell words act on `n+1` qubits; the
//! leading qubit is the first EPR half.

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::pauli::{word_mul, PauliWord};
use crate::simulator::QuantumState;

/// Rows, then columns.
pub const LINES: [[u8; 3]; 6] = [[1, 2, 3], [4, 5, 6], [7, 8, 9], [1, 4, 7], [2, 5, 8], [3, 6, 9]];

pub fn is_line(cells: &[u8; 3]) -> bool {
    LINES.contains(cells)
}

/// The row and the column through `cell`.
pub fn lines_through(cell: u8) -> Result<[[u8; 3]; 2]> {
    if !(1..=9).contains(&cell) {
        return Err(Error::InvalidArgument(format!("cell {cell} outside 1..=9")));
    }
    let (r, c) = ((cell - 1) / 3, (cell - 1) % 3);
    Ok([LINES[r as usize], LINES[3 + c as usize]])
}

fn lead(bit: bool, rest: &Bits) -> Bits {
    Bits::from_bools(&[bit]).concat(rest)
}

/// The observable in `cell` for masks `a` (Z side) and `b` (X side).
pub fn cell_word(cell: u8, a: &Bits, b: &Bits) -> Result<PauliWord> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    let zero = Bits::zeros(a.len());
    let w = |neg: bool, x: Bits, z: Bits| PauliWord::new(neg, x, z);
    match cell {
        1 => w(false, lead(false, &zero), lead(true, &zero)),
        2 => w(false, lead(false, &zero), lead(false, a)),
        3 => w(false, lead(false, &zero), lead(true, a)),
        4 => w(false, lead(false, b), lead(false, &zero)),
        5 => w(false, lead(true, &zero), lead(false, &zero)),
        6 => w(false, lead(true, b), lead(false, &zero)),
        7 => w(true, lead(false, b), lead(true, &zero)),
        8 => w(true, lead(true, &zero), lead(false, a)),
        9 => w(a.dot(b)?, lead(true, b), lead(true, a)),
        _ => Err(Error::InvalidArgument(format!("cell {cell} outside 1..=9"))),
    }
}

/// Whether the product of the line's observables is `−𝟙`.
pub fn line_negative(cells: &[u8; 3], a: &Bits, b: &Bits) -> Result<bool> {
    if !is_line(cells) {
        return Err(Error::NotALine(*cells));
    }
    let mut p = PauliWord::identity(a.len() + 1);
    for &c in cells {
        p = word_mul(&p, &cell_word(c, a, b)?)?;
    }
    if !p.x.is_zero() || !p.z.is_zero() {
        return Err(Error::ConventionViolation(format!("line {cells:?} does not multiply to a scalar")));
    }
    Ok(p.negative)
}

/// Best deterministic score in the line/cell variant played by the
/// anticommutation test: uniform cell, then uniform line through it. Alice
/// answers a line, Bob a single cell.
///
/// Returns the winning count out of 18 equally likely questions.
pub fn classical_best_count() -> u32 {
    let neg = negs();
    // score[line][alice triple][bob bits on the line's three cells]
    let mut score = [[[0u32; 8]; 8]; 6];
    for (l, s) in score.iter_mut().enumerate() {
        for (t, row) in s.iter_mut().enumerate() {
            let parity_ok = ((t.count_ones() % 2) == 1) == neg[l];
            for (bb, v) in row.iter_mut().enumerate() {
                if parity_ok {
                    *v = (0..3).filter(|k| ((t >> (2 - k)) & 1) == ((bb >> (2 - k)) & 1)).count() as u32;
                }
            }
        }
    }
    let mut best = 0;
    for bob in 0u32..512 {
        let local: Vec<usize> = LINES
            .iter()
            .map(|l| l.iter().fold(0usize, |acc, &c| (acc << 1) | ((bob >> (c - 1)) & 1) as usize))
            .collect();
        let per: Vec<[u32; 8]> = (0..6).map(|l| std::array::from_fn(|t| score[l][t][local[l]])).collect();
        for alice in 0u32..(1 << 18) {
            let total: u32 = (0..6).map(|l| per[l][((alice >> (3 * l)) & 7) as usize]).sum();
            best = best.max(total);
        }
    }
    best
}

fn negs() -> Vec<bool> {
    let a = Bits::parse("1").unwrap();
    LINES.iter().map(|l| line_negative(l, &a, &a).unwrap()).collect()
}

/// Best deterministic score in the row/column game: Alice answers a row, Bob
/// a column, and they must agree on the shared cell.
///
/// Returns the winning count out of 9 equally likely question pairs.
pub fn row_column_classical_best() -> u32 {
    let neg = negs();
    let valid = |l: usize| -> Vec<u8> { (0u8..8).filter(|t| (t.count_ones() % 2 == 1) == neg[l]).collect() };
    let rows: Vec<Vec<u8>> = (0..3).map(valid).collect();
    let cols: Vec<Vec<u8>> = (3..6).map(valid).collect();
    let tables = |opts: &Vec<Vec<u8>>| -> Vec<[u8; 3]> {
        let mut out = Vec::new();
        for &x in &opts[0] {
            for &y in &opts[1] {
                for &z in &opts[2] {
                    out.push([x, y, z]);
                }
            }
        }
        out
    };
    let bit = |t: u8, k: usize| (t >> (2 - k)) & 1;
    let mut best = 0;
    for alice in tables(&rows) {
        for bob in tables(&cols) {
            let wins = (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).filter(|&(r, c)| bit(alice[r], c) == bit(bob[c], r)).count();
            best = best.max(wins as u32);
        }
    }
    best
}

fn transpose(w: &PauliWord) -> PauliWord {
    let mut t = w.clone();
    t.negative ^= w.x.dot(&w.z).expect("equal lengths");
    t
}

/// Winning probability of the grid observables in the row/column game on two
/// EPR pairs. Bob measures the transposed column observables on his halves.
pub fn row_column_quantum_value() -> Result<f64> {
    let one = Bits::parse("1")?;
    let neg = negs();
    let epr = QuantumState::prepare_epr(2)?;
    let measure = |states: Vec<(Bits, QuantumState)>, qubits: &[usize], w: &PauliWord| -> Result<Vec<(Bits, QuantumState)>> {
        let mut out = Vec::new();
        for (bits, st) in states {
            for o in st.measure_observable_branches(qubits, w)? {
                out.push((bits.concat(&o.bits), o.branch));
            }
        }
        Ok(out)
    };
    let mut total = 0.0;
    for r in 0..3 {
        for c in 0..3 {
            let mut states = vec![(Bits::zeros(0), epr.clone())];
            for &cell in &LINES[r] {
                states = measure(states, &[0, 1], &cell_word(cell, &one, &one)?)?;
            }
            for &cell in &LINES[3 + c] {
                states = measure(states, &[2, 3], &transpose(&cell_word(cell, &one, &one)?))?;
            }
            for (bits, st) in states {
                let parity = |off: usize| bits.get(off) ^ bits.get(off + 1) ^ bits.get(off + 2);
                if parity(0) == neg[r] && parity(3) == neg[3 + c] && bits.get(c) == bits.get(3 + r) {
                    total += st.norm_sqr();
                }
            }
        }
    }
    Ok(total / 9.0)
}
