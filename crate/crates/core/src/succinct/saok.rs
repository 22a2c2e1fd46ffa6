use serde::{Deserialize, Serialize};

use super::hash::HashSpec;
use super::merkle::{merkle_commit, merkle_verify, MerkleCommitment, MerklePath, MerkleRoot};
use super::rs::{self, Layout, BLOCK_DATA};
use super::wire::{Direction, FieldReader, FieldWriter, Frame, MessageKind, MessageRecord};
use crate::bits::{index_width, BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::rng::TrialRng;

pub const DEFAULT_QUERIES: usize = 32;

/// An NP relation with a public instance.
pub trait Relation {
    fn name(&self) -> String;
    fn instance(&self) -> Vec<u8>;
    fn holds(&self, witness: &[u8]) -> bool;
    /// Step bound for deciding a witness of `witness_len` bytes.
    fn time_bound(&self, witness_len: usize) -> u64 {
        (witness_len as u64 + 1) * 64
    }
}

/// Accepts exactly one witness.
pub struct EqualsRelation(pub Vec<u8>);

impl Relation for EqualsRelation {
    fn name(&self) -> String {
        "equals".into()
    }

    fn instance(&self) -> Vec<u8> {
        self.0.clone()
    }

    fn holds(&self, witness: &[u8]) -> bool {
        witness == self.0
    }
}

/// Accepts every nonempty witness.
pub struct AnyRelation;

impl Relation for AnyRelation {
    fn name(&self) -> String {
        "any".into()
    }

    fn instance(&self) -> Vec<u8> {
        Vec::new()
    }

    fn holds(&self, witness: &[u8]) -> bool {
        !witness.is_empty()
    }
}

/// The prover's first message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaokRoots {
    pub rt_m: MerkleRoot,
    pub rt_w: MerkleRoot,
    pub witness_len: u64,
}

impl SaokRoots {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = FieldWriter::new();
        for r in [&self.rt_m, &self.rt_w] {
            w = w.field(&r.digest.0).field(&r.leaves.to_be_bytes());
        }
        w.field(&self.witness_len.to_be_bytes()).finish()
    }

    /// Leaf count of `rt_m` implied by the claimed witness length.
    fn expected_leaves(&self) -> Option<(u64, u64)> {
        let layout = Layout::new(self.witness_len as usize).ok()?;
        Some(((layout.code_len() + layout.blocks()) as u64, layout.blocks() as u64))
    }
}

/// One answered query: a codeword symbol and the witness block it encodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub index: u64,
    pub symbol: u8,
    pub symbol_path: MerklePath,
    #[serde(with = "hex::serde")]
    pub block: Vec<u8>,
    pub block_path: MerklePath,
}

/// Bytes used to send one index into `count` positions.
pub fn index_bytes(count: u64) -> usize {
    index_width(count).div_ceil(8).max(1)
}

fn push_index(out: &mut Vec<u8>, index: u64, width: usize) {
    out.extend_from_slice(&index.to_be_bytes()[8 - width..]);
}

/// Challenge indices packed at `index_width(code_len)` bits each.
pub fn encode_challenges(challenges: &[u64], code_len: u64) -> Vec<u8> {
    let width = index_width(code_len);
    let mut w = BitWriter::new();
    for &j in challenges {
        w.push_uint(j, width);
    }
    w.finish()
}

pub fn decode_challenges(bytes: &[u8], count: usize, code_len: u64) -> Result<Vec<u64>> {
    let width = index_width(code_len);
    if bytes.len() != (count * width).div_ceil(8) {
        return Err(Error::MalformedFrame("challenge length mismatch".into()));
    }
    let mut r = BitReader::new(bytes);
    (0..count).map(|_| r.read_uint(width)).collect()
}

pub fn encode_openings(openings: &[Opening], code_len: u64) -> Vec<u8> {
    let width = index_bytes(code_len);
    let mut w = FieldWriter::new();
    for o in openings {
        let mut head = Vec::with_capacity(width + 1);
        push_index(&mut head, o.index, width);
        head.push(o.symbol);
        let path = |p: &MerklePath| p.siblings.iter().flat_map(|d| d.0.clone()).collect::<Vec<u8>>();
        w = w.field(&head).field(&path(&o.symbol_path)).field(&o.block).field(&path(&o.block_path));
    }
    w.finish()
}

pub fn decode_openings(bytes: &[u8], count: usize, code_len: u64, digest_len: usize) -> Result<Vec<Opening>> {
    let width = index_bytes(code_len);
    let mut r = FieldReader::new(bytes);
    let path = |raw: &[u8]| -> Result<MerklePath> {
        if digest_len == 0 || !raw.len().is_multiple_of(digest_len) {
            return Err(Error::MalformedFrame("path length is not a multiple of the digest size".into()));
        }
        Ok(MerklePath { siblings: raw.chunks(digest_len).map(|c| super::hash::Digest(c.to_vec())).collect() })
    };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let head = r.field()?;
        if head.len() != width + 1 {
            return Err(Error::MalformedFrame("bad opening header".into()));
        }
        let mut idx = [0u8; 8];
        idx[8 - width..].copy_from_slice(&head[..width]);
        let symbol_path = path(r.field()?)?;
        let block = r.field()?.to_vec();
        let block_path = path(r.field()?)?;
        out.push(Opening { index: u64::from_be_bytes(idx), symbol: head[width], symbol_path, block, block_path });
    }
    r.finish()?;
    Ok(out)
}

/// A prover for the three-message argument. `open` must be a function of
/// the challenges alone so that a verifier may rewind it.
pub trait SaokProver {
    fn commit(&self) -> SaokRoots;
    fn open(&self, challenges: &[u64]) -> Vec<Opening>;
    /// The committed message `(w̃, π)`, for harness mode.
    fn reveal(&self) -> Option<(Vec<u8>, Vec<u8>)>;
}

/// Commits to a codeword string and a proof string, then answers honestly
/// with respect to those commitments.
pub struct CommittedProver {
    layout: Layout,
    code: Vec<u8>,
    proof: Vec<u8>,
    m_tree: MerkleCommitment,
    w_tree: MerkleCommitment,
}

impl CommittedProver {
    pub fn honest(witness: &[u8], hash: &HashSpec) -> Result<Self> {
        let code = rs::encode(witness)?;
        CommittedProver::from_parts(code, witness.to_vec(), hash)
    }

    /// `code` may be any string of the right length; `proof` is the claimed
    /// witness and also fixes `rt_w`.
    pub fn from_parts(code: Vec<u8>, proof: Vec<u8>, hash: &HashSpec) -> Result<Self> {
        let layout = Layout::new(proof.len())?;
        if code.len() != layout.code_len() {
            return Err(Error::LengthMismatch { expected: layout.code_len(), got: code.len() });
        }
        let blocks: Vec<Vec<u8>> = proof.chunks(BLOCK_DATA).map(<[u8]>::to_vec).collect();
        let mut leaves: Vec<Vec<u8>> = code.iter().map(|&s| vec![s]).collect();
        leaves.extend(blocks.iter().cloned());
        let m_tree = merkle_commit(leaves, hash)?;
        let w_tree = merkle_commit(blocks, hash)?;
        Ok(CommittedProver { layout, code, proof, m_tree, w_tree })
    }

    pub fn code(&self) -> &[u8] {
        &self.code
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }
}

impl SaokProver for CommittedProver {
    fn commit(&self) -> SaokRoots {
        SaokRoots { rt_m: self.m_tree.root(), rt_w: self.w_tree.root(), witness_len: self.proof.len() as u64 }
    }

    fn open(&self, challenges: &[u64]) -> Vec<Opening> {
        let code_len = self.code.len() as u64;
        challenges
            .iter()
            .filter(|&&j| j < code_len)
            .map(|&j| {
                let (b, _) = self.layout.locate(j as usize);
                let (_, symbol_path) = self.m_tree.open(j).expect("index in range");
                let (block, block_path) = self.m_tree.open(code_len + b as u64).expect("block in range");
                Opening { index: j, symbol: self.code[j as usize], symbol_path, block, block_path }
            })
            .collect()
    }

    fn reveal(&self) -> Option<(Vec<u8>, Vec<u8>)> {
        Some((self.code.clone(), self.proof.clone()))
    }
}

/// Outcome of the spot checks on one set of openings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpotCheck {
    pub paths_ok: bool,
    pub consistent: bool,
}

/// Checks each opening's two paths and that the block encodes the symbol.
pub fn check_openings(roots: &SaokRoots, challenges: &[u64], openings: &[Opening], hash: &HashSpec) -> SpotCheck {
    let fail = SpotCheck { paths_ok: false, consistent: false };
    let Some((m_leaves, w_blocks)) = roots.expected_leaves() else { return fail };
    if roots.rt_m.leaves != m_leaves || roots.rt_w.leaves != w_blocks || openings.len() != challenges.len() {
        return fail;
    }
    let layout = Layout::new(roots.witness_len as usize).expect("checked above");
    let code_len = layout.code_len() as u64;
    let mut out = SpotCheck { paths_ok: true, consistent: true };
    for (o, &j) in openings.iter().zip(challenges) {
        let (b, pos) = layout.locate(j as usize);
        let ok_sym = o.index == j && merkle_verify(&roots.rt_m, j, &[o.symbol], &o.symbol_path, hash).unwrap_or(false);
        let ok_blk = merkle_verify(&roots.rt_m, code_len + b as u64, &o.block, &o.block_path, hash).unwrap_or(false);
        if !(ok_sym && ok_blk) {
            out.paths_ok = false;
            out.consistent = false;
            continue;
        }
        if o.block.len() != layout.block_data(b) || rs::encode_symbol(&o.block, pos) != o.symbol {
            out.consistent = false;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaokTranscript {
    pub relation: String,
    pub roots: SaokRoots,
    pub challenges: Vec<u64>,
    pub openings: Vec<Opening>,
    pub paths_ok: bool,
    pub spot_checks_ok: bool,
    /// Harness-mode evaluation of the relation on the decoded message.
    pub harness_relation: Option<bool>,
    pub verdict: bool,
    pub messages: Vec<MessageRecord>,
    pub v2p_bytes: usize,
    pub p2v_bytes: usize,
}

/// Decodes the revealed codeword and checks it against the relation and `rt_w`.
fn harness_check(relation: &dyn Relation, roots: &SaokRoots, code: &[u8], hash: &HashSpec) -> bool {
    let Ok(w) = rs::decode(code) else { return false };
    if w.len() as u64 != roots.witness_len {
        return false;
    }
    let blocks = w.chunks(BLOCK_DATA).map(<[u8]>::to_vec).collect();
    let Ok(tree) = merkle_commit(blocks, hash) else { return false };
    tree.root() == roots.rt_w && relation.holds(&w)
}

pub fn sample_challenges(code_len: u64, k: usize, rng: &mut TrialRng) -> Vec<u64> {
    (0..k).map(|_| rng.below(code_len)).collect()
}

/// Runs the three messages against `prover`. With `harness` set, the
/// verifier also decodes the revealed codeword and evaluates the relation.
pub fn saok_run_with(
    relation: &dyn Relation,
    prover: &dyn SaokProver,
    hash: &HashSpec,
    k: usize,
    harness: bool,
    phase: u8,
    rng: &mut TrialRng,
) -> Result<SaokTranscript> {
    if k == 0 {
        return Err(Error::InvalidArgument("query count must be positive".into()));
    }
    let roots = prover.commit();
    let code_len = 2 * roots.witness_len;
    let mut messages = Vec::new();
    let mut record = |kind: MessageKind, payload: Vec<u8>| {
        let f = Frame::new(kind, payload);
        messages.push(MessageRecord { phase, kind, direction: kind.direction(), bytes: f.wire_len() });
    };
    record(MessageKind::SaokRoots, roots.encode());
    let challenges = if code_len == 0 { Vec::new() } else { sample_challenges(code_len, k, rng) };
    record(MessageKind::Challenge, encode_challenges(&challenges, code_len));
    let openings = prover.open(&challenges);
    record(MessageKind::Openings, encode_openings(&openings, code_len));
    let spot = check_openings(&roots, &challenges, &openings, hash);
    let harness_relation = harness.then(|| match prover.reveal() {
        Some((code, _)) => harness_check(relation, &roots, &code, hash),
        None => false,
    });
    let verdict = spot.paths_ok && spot.consistent && harness_relation.unwrap_or(true);
    let bytes = |d: Direction| messages.iter().filter(|m| m.direction == d).map(|m| m.bytes).sum();
    Ok(SaokTranscript {
        relation: relation.name(),
        v2p_bytes: bytes(Direction::VerifierToProver),
        p2v_bytes: bytes(Direction::ProverToVerifier),
        roots,
        challenges,
        openings,
        paths_ok: spot.paths_ok,
        spot_checks_ok: spot.consistent,
        harness_relation,
        verdict,
        messages,
    })
}

/// Honest prover on `witness`, harness mode on.
pub fn saok_run(relation: &dyn Relation, witness: &[u8], hash: &HashSpec, k: usize, rng: &mut TrialRng) -> Result<SaokTranscript> {
    let prover = CommittedProver::honest(witness, hash)?;
    saok_run_with(relation, &prover, hash, k, true, 0, rng)
}

/// Chance that `k` uniform queries hit at least one of `bad` positions out of `total`.
pub fn catch_probability(bad: usize, total: usize, k: usize) -> f64 {
    1.0 - (1.0 - bad as f64 / total as f64).powi(k as i32)
}

/// Byte sizes of the three argument messages for a `witness_len`-byte
/// witness, computed from the wire layout without building the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaokSizes {
    pub roots: usize,
    pub challenge: usize,
    pub openings: usize,
}

impl SaokSizes {
    pub fn total(&self) -> usize {
        self.roots + self.challenge + self.openings
    }
}

pub fn saok_sizes(witness_len: usize, k: usize, digest_len: usize) -> Result<SaokSizes> {
    let layout = Layout::new(witness_len)?;
    let code_len = layout.code_len() as u64;
    let m_leaves = (layout.code_len() + layout.blocks()) as u64;
    let depth = m_leaves.next_power_of_two().trailing_zeros() as usize;
    let width = index_bytes(code_len);
    let frame = super::wire::FRAME_HEADER;
    let roots = frame + 2 * (4 + digest_len + 4 + 8) + 4 + 8;
    let challenge = frame + (k * index_width(code_len)).div_ceil(8);
    let largest_block = layout.block_data(0);
    let openings = frame + k * (4 + width + 1 + 4 + depth * digest_len + 4 + largest_block + 4 + depth * digest_len);
    Ok(SaokSizes { roots, challenge, openings })
}

#[cfg(test)]
mod tests {
    use super::super::hash::HashKind;
    use super::*;

    fn hash() -> HashSpec {
        HashSpec::new(HashKind::Blake3, [3; 32]).unwrap()
    }

    #[test]
    fn honest_witness_is_accepted() {
        let mut rng = TrialRng::new(2, 0);
        for len in [1, 5, 127, 128, 300] {
            let w: Vec<u8> = (0..len).map(|i| (i * 7 + 1) as u8).collect();
            let t = saok_run(&EqualsRelation(w.clone()), &w, &hash(), DEFAULT_QUERIES, &mut rng).unwrap();
            assert!(t.verdict && t.paths_ok && t.spot_checks_ok, "len {len}");
            assert_eq!(t.harness_relation, Some(true));
            assert_eq!(t.openings.len(), DEFAULT_QUERIES);
        }
    }

    #[test]
    fn false_witness_fails_only_in_harness() {
        let mut rng = TrialRng::new(2, 1);
        let t = saok_run(&EqualsRelation(vec![1, 2, 3]), &[1, 2, 4], &hash(), 8, &mut rng).unwrap();
        assert!(t.paths_ok && t.spot_checks_ok);
        assert_eq!(t.harness_relation, Some(false));
        assert!(!t.verdict);
    }

    #[test]
    fn corrupted_symbols_are_caught_at_the_closed_form_rate() {
        let h = hash();
        let w: Vec<u8> = (0..64u8).collect();
        let mut code = rs::encode(&w).unwrap();
        for s in code.iter_mut().take(32) {
            *s ^= 0x5a;
        }
        let p = CommittedProver::from_parts(code, w.clone(), &h).unwrap();
        let mut rng = TrialRng::new(9, 0);
        let trials = 4000;
        let mut caught = 0;
        for _ in 0..trials {
            let t = saok_run_with(&AnyRelation, &p, &h, 4, false, 0, &mut rng).unwrap();
            assert!(t.paths_ok);
            caught += (!t.verdict) as usize;
        }
        let expect = catch_probability(32, 128, 4);
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((caught as f64 / trials as f64 - expect).abs() < 4.0 * sigma);
    }

    #[test]
    fn forged_symbol_fails_its_path() {
        let h = hash();
        let w = vec![9u8; 40];
        let p = CommittedProver::honest(&w, &h).unwrap();
        let roots = p.commit();
        let ch = vec![3, 70];
        let mut op = p.open(&ch);
        assert!(check_openings(&roots, &ch, &op, &h).paths_ok);
        op[1].symbol ^= 1;
        let c = check_openings(&roots, &ch, &op, &h);
        assert!(!c.paths_ok && !c.consistent);
    }

    #[test]
    fn wrong_leaf_counts_reject() {
        let h = hash();
        let p = CommittedProver::honest(&[1, 2, 3], &h).unwrap();
        let mut roots = p.commit();
        roots.witness_len = 4;
        let ch = vec![0];
        assert!(!check_openings(&roots, &ch, &p.open(&ch), &h).paths_ok);
    }

    #[test]
    fn openings_roundtrip_and_sizes_match() {
        let h = hash();
        let mut rng = TrialRng::new(4, 0);
        for len in [1, 100, 127, 1000, 4096] {
            let w: Vec<u8> = (0..len).map(|i| (i % 251) as u8).collect();
            let t = saok_run(&AnyRelation, &w, &h, 16, &mut rng).unwrap();
            let code_len = 2 * len as u64;
            let bytes = encode_openings(&t.openings, code_len);
            assert_eq!(decode_openings(&bytes, 16, code_len, 32).unwrap(), t.openings);
            assert_eq!(decode_challenges(&encode_challenges(&t.challenges, code_len), 16, code_len).unwrap(), t.challenges);
            let s = saok_sizes(len, 16, 32).unwrap();
            assert_eq!(t.messages[0].bytes, s.roots);
            assert_eq!(t.p2v_bytes, s.roots + t.messages[2].bytes);
            assert_eq!(t.v2p_bytes, s.challenge);
            assert!(t.messages[2].bytes <= s.openings);
            if len % BLOCK_DATA == 0 || len < BLOCK_DATA {
                assert_eq!(t.messages[2].bytes, s.openings);
            }
        }
    }
}
