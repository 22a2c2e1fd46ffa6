use serde::{Deserialize, Serialize};

use super::hash::{HashKind, HashSpec};
use super::merkle::{commit_bytes, MerkleRoot};
use super::saok::{saok_run_with, CommittedProver, Relation, SaokTranscript, DEFAULT_QUERIES};
use super::wire::{Direction, FieldReader, FieldWriter, Frame, MessageKind, MessageRecord};
use crate::bits::Bits;
use crate::compiler::{codec_for, encode_question, Ciphertext, CompiledProver, QheScheme, SecretKey};
use crate::error::{Error, Result};
use crate::games::{sample_round, verify, GameSpec, Protocol, Question, Round, TestId};
use crate::rng::TrialRng;
use crate::simulator::QuantumState;

/// `u32` bit length, then the packed bits.
pub fn encode_answer(a: &Bits) -> Vec<u8> {
    let mut out = (a.len() as u32).to_be_bytes().to_vec();
    out.extend(a.to_bytes());
    out
}

pub fn decode_answer(bytes: &[u8]) -> Result<Bits> {
    if bytes.len() < 4 {
        return Err(Error::MalformedFrame("truncated answer".into()));
    }
    let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
    if bytes.len() - 4 != len.div_ceil(8) {
        return Err(Error::MalformedFrame("answer length disagrees with its prefix".into()));
    }
    Bits::from_bytes(&bytes[4..], len)
}

fn root_bytes(r: &MerkleRoot) -> Vec<u8> {
    let mut out = r.digest.0.clone();
    out.extend(r.leaves.to_be_bytes());
    out
}

/// `w` is a valid opening of the byte commitment `com`.
pub struct OpeningRelation {
    pub label: &'static str,
    pub hash: HashSpec,
    pub com: MerkleRoot,
}

impl Relation for OpeningRelation {
    fn name(&self) -> String {
        self.label.into()
    }

    fn instance(&self) -> Vec<u8> {
        root_bytes(&self.com)
    }

    fn holds(&self, witness: &[u8]) -> bool {
        commit_bytes(witness, &self.hash).is_ok_and(|c| c.root() == self.com)
    }
}

/// The third-phase relation: the witness `(w1, w2)` opens both commitments,
/// and the game verifier accepts the decrypted transcript.
pub struct VerdictRelation<'a> {
    pub spec: &'a GameSpec,
    pub qhe: &'a dyn QheScheme,
    pub hash: HashSpec,
    pub test: TestId,
    pub com1: MerkleRoot,
    pub com2: MerkleRoot,
    pub c_hat: Ciphertext,
    pub q2: Question,
    pub sk: SecretKey,
}

impl VerdictRelation<'_> {
    pub fn witness(w1: &[u8], w2: &[u8]) -> Vec<u8> {
        FieldWriter::new().field(w1).field(w2).finish()
    }

    fn check(&self, witness: &[u8]) -> Result<bool> {
        let mut r = FieldReader::new(witness);
        let (w1, w2) = (r.field()?, r.field()?);
        r.finish()?;
        if commit_bytes(w1, &self.hash)?.root() != self.com1 || commit_bytes(w2, &self.hash)?.root() != self.com2 {
            return Ok(false);
        }
        let codec = codec_for(self.spec);
        let q1 = codec.decode(&self.qhe.dec(&self.sk, &self.c_hat)?.to_bytes())?;
        let a1 = self.qhe.dec(&self.sk, &Ciphertext::from_wire(w1)?)?;
        let a2 = decode_answer(w2)?;
        let round = Round { test: self.test, alice: Some(q1), bob: Some(self.q2.clone()) };
        verify(self.spec, &round, Some(&a1), Some(&a2))
    }
}

impl Relation for VerdictRelation<'_> {
    fn name(&self) -> String {
        "R3".into()
    }

    fn instance(&self) -> Vec<u8> {
        let q2 = codec_for(self.spec).encode(&self.q2).unwrap_or_default();
        FieldWriter::new()
            .field(format!("{:?}", self.test).as_bytes())
            .field(&root_bytes(&self.com1))
            .field(&root_bytes(&self.com2))
            .field(&self.c_hat.to_wire())
            .field(&q2)
            .field(&self.sk.material)
            .finish()
    }

    fn holds(&self, witness: &[u8]) -> bool {
        self.check(witness).unwrap_or(false)
    }
}

/// The prover side of the three phases. Each call returns the string the
/// prover commits to and then argues knowledge of.
pub trait SuccinctProver {
    fn n(&self) -> usize;
    fn phase1(&mut self, qhe: &dyn QheScheme, c_hat: &Ciphertext, rng: &mut TrialRng) -> Result<Vec<u8>>;
    fn phase2(&mut self, q2: &Question, rng: &mut TrialRng) -> Result<Vec<u8>>;
    fn phase3(&mut self, sk: &SecretKey) -> Result<Vec<u8>>;
}

/// Wraps a compiled prover, sampling one branch per round.
pub struct HonestSuccinctProver<P> {
    pub inner: P,
    state: Option<QuantumState>,
    w1: Vec<u8>,
    w2: Vec<u8>,
}

impl<P: CompiledProver> HonestSuccinctProver<P> {
    pub fn new(inner: P) -> Self {
        HonestSuccinctProver { inner, state: None, w1: Vec::new(), w2: Vec::new() }
    }
}

fn sample<T>(branches: Vec<(T, f64)>, rng: &mut TrialRng) -> Result<T> {
    let weights: Vec<f64> = branches.iter().map(|b| b.1).collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Protocol("no branch with positive weight".into()));
    }
    let i = rng.pick_weighted(&weights);
    Ok(branches.into_iter().nth(i).expect("index in range").0)
}

impl<P: CompiledProver> SuccinctProver for HonestSuccinctProver<P> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn phase1(&mut self, qhe: &dyn QheScheme, c_hat: &Ciphertext, rng: &mut TrialRng) -> Result<Vec<u8>> {
        let branches = self.inner.round1(qhe, c_hat, &self.inner.initial_state())?;
        let weighted = branches.into_iter().map(|(c, s)| {
            let w = s.norm_sqr();
            ((c, s), w)
        });
        let (alpha, state) = sample(weighted.collect(), rng)?;
        self.state = Some(state);
        self.w1 = alpha.to_wire();
        Ok(self.w1.clone())
    }

    fn phase2(&mut self, q2: &Question, rng: &mut TrialRng) -> Result<Vec<u8>> {
        let state = self.state.take().ok_or_else(|| Error::Protocol("second phase before the first".into()))?;
        let b = sample(self.inner.round2(q2, &state)?, rng)?;
        self.w2 = encode_answer(&b);
        Ok(self.w2.clone())
    }

    fn phase3(&mut self, _sk: &SecretKey) -> Result<Vec<u8>> {
        Ok(VerdictRelation::witness(&self.w1, &self.w2))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccinctConfig {
    pub hash: HashKind,
    pub k: usize,
    pub secparam: usize,
    /// Evaluate each relation on the decoded witness.
    pub harness: bool,
}

impl Default for SuccinctConfig {
    fn default() -> Self {
        SuccinctConfig { hash: HashKind::Blake3, k: DEFAULT_QUERIES, secparam: 128, harness: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase: u8,
    pub com: Option<MerkleRoot>,
    pub saok: SaokTranscript,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccinctTranscript {
    pub test: TestId,
    pub x: Option<Question>,
    pub y: Option<Question>,
    pub phases: Vec<PhaseRecord>,
    pub verdict: bool,
    pub rejected_phase: Option<u8>,
    pub diagnostic: Option<String>,
    pub messages: Vec<MessageRecord>,
    pub v2p_bytes: usize,
    pub p2v_bytes: usize,
    pub rng_trail: Vec<u64>,
}

impl SuccinctTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    fn record(&mut self, phase: u8, kind: MessageKind, payload: Vec<u8>) {
        let f = Frame::new(kind, payload);
        self.messages.push(MessageRecord { phase, kind, direction: kind.direction(), bytes: f.wire_len() });
    }

    fn reject(&mut self, phase: u8, why: String) {
        self.verdict = false;
        self.rejected_phase = Some(phase);
        self.diagnostic = Some(why);
    }

    fn finish(mut self, rng: &mut TrialRng) -> Self {
        let bytes = |d: Direction, m: &[MessageRecord]| m.iter().filter(|r| r.direction == d).map(|r| r.bytes).sum();
        self.v2p_bytes = bytes(Direction::VerifierToProver, &self.messages);
        self.p2v_bytes = bytes(Direction::ProverToVerifier, &self.messages);
        self.rng_trail = rng.take_trail();
        self
    }
}

pub fn hash_key_payload(hk: &HashSpec) -> Vec<u8> {
    let mut out = serde_json::to_vec(&hk.kind).expect("plain data serializes");
    out.extend_from_slice(&hk.key);
    out
}

pub fn secret_key_payload(sk: &SecretKey) -> Vec<u8> {
    FieldWriter::new().field(sk.scheme.as_bytes()).field(&(sk.secparam as u32).to_be_bytes()).field(&sk.material).finish()
}

/// Commits to `w`, then runs the argument for `relation` on it.
fn argue(
    t: &mut SuccinctTranscript,
    phase: u8,
    relation: &dyn Relation,
    w: &[u8],
    com: Option<MerkleRoot>,
    hk: &HashSpec,
    cfg: &SuccinctConfig,
    rng: &mut TrialRng,
) -> Result<bool> {
    let prover = match CommittedProver::honest(w, hk) {
        Ok(p) => p,
        Err(e) => {
            t.reject(phase, format!("phase {phase}: {e}"));
            return Ok(false);
        }
    };
    let saok = saok_run_with(relation, &prover, hk, cfg.k, cfg.harness, phase, rng)?;
    t.messages.extend(saok.messages.iter().cloned());
    let ok = saok.verdict;
    t.phases.push(PhaseRecord { phase, com, saok });
    if !ok {
        t.reject(phase, format!("phase {phase}: argument for {} rejected", relation.name()));
    }
    Ok(ok)
}

/// One run of the three-phase protocol on a round sampled from `protocol`.
pub fn run_succinct_protocol(
    spec: &GameSpec,
    protocol: Protocol,
    qhe: &dyn QheScheme,
    prover: &mut dyn SuccinctProver,
    cfg: &SuccinctConfig,
    rng: &mut TrialRng,
) -> Result<SuccinctTranscript> {
    if prover.n() != spec.n() {
        return Err(Error::DimensionMismatch(format!("prover on n = {}, game on n = {}", prover.n(), spec.n())));
    }
    let round = sample_round(spec, protocol, rng)?;
    let mut t = SuccinctTranscript {
        test: round.test,
        x: round.alice.clone(),
        y: round.bob.clone(),
        phases: Vec::new(),
        verdict: false,
        rejected_phase: None,
        diagnostic: None,
        messages: Vec::new(),
        v2p_bytes: 0,
        p2v_bytes: 0,
        rng_trail: Vec::new(),
    };
    let (Some(x), Some(y)) = (&round.alice, &round.bob) else {
        t.verdict = verify(spec, &round, None, None)?;
        return Ok(t.finish(rng));
    };
    let codec = codec_for(spec);

    let hk = HashSpec::sample(cfg.hash, rng)?;
    let sk = qhe.gen(cfg.secparam, rng)?;
    let c_hat = qhe.enc(&sk, &encode_question(&codec, x)?)?;
    t.record(1, MessageKind::HashKey, hash_key_payload(&hk));
    t.record(1, MessageKind::EncryptedQuestion, c_hat.to_wire());
    let w1 = match prover.phase1(qhe, &c_hat, rng) {
        Ok(w) => w,
        Err(e) => {
            t.reject(1, format!("phase 1: {e}"));
            return Ok(t.finish(rng));
        }
    };
    let com1 = commit_bytes(&w1, &hk)?.root();
    t.record(1, MessageKind::Commitment, root_bytes(&com1));
    let r1 = OpeningRelation { label: "R1", hash: hk.clone(), com: com1.clone() };
    if !argue(&mut t, 1, &r1, &w1, Some(com1.clone()), &hk, cfg, rng)? {
        return Ok(t.finish(rng));
    }

    t.record(2, MessageKind::PlainQuestion, codec.encode(y)?);
    let w2 = match prover.phase2(y, rng) {
        Ok(w) => w,
        Err(e) => {
            t.reject(2, format!("phase 2: {e}"));
            return Ok(t.finish(rng));
        }
    };
    let com2 = commit_bytes(&w2, &hk)?.root();
    t.record(2, MessageKind::Commitment, root_bytes(&com2));
    let r2 = OpeningRelation { label: "R2", hash: hk.clone(), com: com2.clone() };
    if !argue(&mut t, 2, &r2, &w2, Some(com2.clone()), &hk, cfg, rng)? {
        return Ok(t.finish(rng));
    }

    t.record(3, MessageKind::SecretKey, secret_key_payload(&sk));
    let w3 = match prover.phase3(&sk) {
        Ok(w) => w,
        Err(e) => {
            t.reject(3, format!("phase 3: {e}"));
            return Ok(t.finish(rng));
        }
    };
    let r3 = VerdictRelation { spec, qhe, hash: hk.clone(), test: round.test, com1, com2, c_hat, q2: y.clone(), sk };
    t.verdict = argue(&mut t, 3, &r3, &w3, None, &hk, cfg, rng)?;
    Ok(t.finish(rng))
}
