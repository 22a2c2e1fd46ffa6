use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hash::HashSpec;
use super::merkle::{merkle_commit, merkle_verify};
use super::rs::{self, Layout, BLOCK_DATA};
use super::saok::{sample_challenges, Relation, SaokProver};
use crate::error::Result;
use crate::rng::TrialRng;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ExtractOutcome {
    Success {
        #[serde(with = "hex::serde")]
        witness: Vec<u8>,
        rewinds: usize,
    },
    Failure {
        reason: String,
        rewinds: usize,
    },
    /// Two valid openings of the same position to different symbols.
    BindingViolation {
        index: u64,
        first: u8,
        second: u8,
        rewinds: usize,
    },
}

impl ExtractOutcome {
    pub fn witness(&self) -> Option<&[u8]> {
        match self {
            ExtractOutcome::Success { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

/// Rewinds suggested for a codeword of `code_len` symbols and `k` queries per run.
pub fn default_budget(code_len: usize, k: usize) -> usize {
    let log = (code_len.max(2) as f64).log2().ceil() as usize;
    code_len.div_ceil(k.max(1)) * (log + 1)
}

/// Rewinds a deterministic prover on fresh challenges, keeping every symbol
/// whose path verifies, until each block of the codeword decodes. A decoding
/// that disagrees with `rt_w` is discarded and retried on a larger view.
pub fn classical_extract(
    prover: &dyn SaokProver,
    relation: &dyn Relation,
    hash: &HashSpec,
    k: usize,
    budget: usize,
    rng: &mut TrialRng,
) -> Result<ExtractOutcome> {
    let roots = prover.commit();
    let Ok(layout) = Layout::new(roots.witness_len as usize) else {
        return Ok(ExtractOutcome::Failure { reason: "empty witness".into(), rewinds: 0 });
    };
    let code_len = layout.code_len() as u64;
    let mut known: BTreeMap<u64, u8> = BTreeMap::new();
    let mut decoded: Vec<Option<Vec<u8>>> = vec![None; layout.blocks()];
    let mut attempted: Vec<usize> = vec![0; layout.blocks()];
    let mut last = None;
    for rewind in 1..=budget {
        let challenges = sample_challenges(code_len, k, rng);
        for o in prover.open(&challenges) {
            if o.index >= code_len || !merkle_verify(&roots.rt_m, o.index, &[o.symbol], &o.symbol_path, hash).unwrap_or(false) {
                continue;
            }
            match known.insert(o.index, o.symbol) {
                Some(prev) if prev != o.symbol => {
                    return Ok(ExtractOutcome::BindingViolation { index: o.index, first: prev, second: o.symbol, rewinds: rewind });
                }
                _ => {}
            }
        }
        for (b, slot) in decoded.iter_mut().enumerate() {
            if slot.is_some() {
                continue;
            }
            let start = (b * 2 * BLOCK_DATA) as u64;
            let view: Vec<(usize, u8)> = known.range(start..start + 2 * layout.block_data(b) as u64).map(|(&j, &s)| ((j - start) as usize, s)).collect();
            if view.len() < layout.block_data(b) || view.len() == attempted[b] {
                continue;
            }
            attempted[b] = view.len();
            if let Ok(data) = rs::decode_partial(&layout, b, &view) {
                *slot = Some(data);
            }
        }
        if decoded.iter().all(Option::is_some) {
            let witness: Vec<u8> = decoded.iter().flatten().flatten().copied().collect();
            let blocks = witness.chunks(BLOCK_DATA).map(<[u8]>::to_vec).collect();
            if merkle_commit(blocks, hash)?.root() != roots.rt_w {
                last = Some("decoded witness does not match rt_w");
                decoded = vec![None; layout.blocks()];
                continue;
            }
            if !relation.holds(&witness) {
                return Ok(ExtractOutcome::Failure { reason: "decoded witness does not satisfy the relation".into(), rewinds: rewind });
            }
            return Ok(ExtractOutcome::Success { witness, rewinds: rewind });
        }
    }
    let reason = match last {
        Some(r) => format!("{r} after {budget} rewinds"),
        None => format!("{} blocks undecoded after {budget} rewinds", decoded.iter().filter(|d| d.is_none()).count()),
    };
    Ok(ExtractOutcome::Failure { reason, rewinds: budget })
}
