use serde::{Deserialize, Serialize};

use super::{Ciphertext, Circuit, QheScheme, SecretKey};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::games::{round_distribution, sample_round, verify, Answer, GameSpec, HexBits, Protocol, Question, QuestionCodec, Round, TestId, TwoProverStrategy};
use crate::rng::TrialRng;
use crate::simulator::QuantumState;

/// The single prover of the compiled protocol.
///
/// `round1` sees only the encrypted question. The engine calls `round2` with
/// the plaintext second question only after `round1` has returned, on the
/// branch it produced.
pub trait CompiledProver {
    fn n(&self) -> usize;
    fn initial_state(&self) -> QuantumState;
    fn round1(&self, qhe: &dyn QheScheme, c: &Ciphertext, state: &QuantumState) -> Result<Vec<(Ciphertext, QuantumState)>>;
    fn round2(&self, y: &Question, state: &QuantumState) -> Result<Vec<(Answer, f64)>>;
}

/// Alice's response to an encoded question, as a circuit for `eval`.
pub struct AliceCircuit<'a, S: TwoProverStrategy + ?Sized> {
    pub strategy: &'a S,
    pub codec: QuestionCodec,
}

impl<S: TwoProverStrategy + ?Sized> Circuit for AliceCircuit<'_, S> {
    fn name(&self) -> String {
        "alice".into()
    }

    fn run(&self, input: &Bits, state: &QuantumState) -> Result<Vec<(Bits, QuantumState)>> {
        let q = self.codec.decode(&input.to_bytes())?;
        let out = self.strategy.alice(&q, state)?;
        for (a, _) in &out {
            q.check_answer(self.strategy.n(), a)?;
        }
        Ok(out)
    }
}

/// Runs Alice under the encryption and Bob in the clear.
#[derive(Clone, Debug)]
pub struct HonestCompiledProver<S> {
    pub strategy: S,
    pub codec: QuestionCodec,
}

pub fn honest_compiled_prover<S: TwoProverStrategy>(strategy: S, spec: &GameSpec) -> HonestCompiledProver<S> {
    HonestCompiledProver { strategy, codec: codec_for(spec) }
}

/// The codec sized for `spec`'s index and seed lengths.
pub fn codec_for(spec: &GameSpec) -> QuestionCodec {
    QuestionCodec::new(spec.set.index_bits(), spec.mh.seed_bits)
}

impl<S: TwoProverStrategy> CompiledProver for HonestCompiledProver<S> {
    fn n(&self) -> usize {
        self.strategy.n()
    }

    fn initial_state(&self) -> QuantumState {
        self.strategy.initial_state()
    }

    fn round1(&self, qhe: &dyn QheScheme, c: &Ciphertext, state: &QuantumState) -> Result<Vec<(Ciphertext, QuantumState)>> {
        let circuit = AliceCircuit { strategy: &self.strategy, codec: self.codec };
        if !qhe.supports(&circuit) {
            return Err(Error::UnsupportedCircuit(format!("{} under {}", circuit.name(), qhe.id())));
        }
        qhe.eval(&circuit, state, c)
    }

    fn round2(&self, y: &Question, state: &QuantumState) -> Result<Vec<(Answer, f64)>> {
        self.strategy.bob(y, state)
    }
}

/// One compiled run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledTranscript {
    pub test: TestId,
    pub x: Option<Question>,
    /// Wire bytes of the encrypted question, hex.
    pub c: Option<String>,
    /// Wire bytes of the encrypted first answer, hex.
    pub alpha: Option<String>,
    pub y: Option<Question>,
    pub b: Option<HexBits>,
    /// The decrypted first answer.
    pub a: Option<HexBits>,
    pub verdict: bool,
    pub diagnostic: Option<String>,
    /// The key, revealed after the run.
    pub sk: Option<SecretKey>,
    pub verifier_bytes: usize,
    pub prover_bytes: usize,
    pub rng_trail: Vec<u64>,
}

impl CompiledTranscript {
    /// Re-evaluates the game predicate on `(x, y, a, b)`.
    pub fn recompute_verdict(&self, spec: &GameSpec) -> Result<bool> {
        let round = Round { test: self.test, alice: self.x.clone(), bob: self.y.clone() };
        if round.alice.is_some() && self.a.is_none() {
            return Ok(false);
        }
        let a = self.a.as_ref().map(HexBits::to_bits).transpose()?;
        let b = self.b.as_ref().map(HexBits::to_bits).transpose()?;
        Ok(verify(spec, &round, a.as_ref(), b.as_ref()).unwrap_or(false))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

/// The encoded question, trimmed to its bit length.
pub fn encode_question(codec: &QuestionCodec, q: &Question) -> Result<Bits> {
    Bits::from_bytes(&codec.encode(q)?, codec.bit_len(q))
}

fn pick<T>(items: Vec<T>, weight: impl Fn(&T) -> f64, rng: &mut TrialRng) -> Result<T> {
    let weights: Vec<f64> = items.iter().map(&weight).collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Protocol("prover returned no outcome with positive weight".into()));
    }
    let i = rng.pick_weighted(&weights);
    Ok(items.into_iter().nth(i).expect("index in range"))
}

/// Samples `(x, y)` from `protocol`, then runs the five compiled steps.
pub fn compile_and_run<P: CompiledProver + ?Sized>(
    spec: &GameSpec,
    protocol: Protocol,
    qhe: &dyn QheScheme,
    prover: &P,
    secparam: usize,
    rng: &mut TrialRng,
) -> Result<CompiledTranscript> {
    if prover.n() != spec.n() {
        return Err(Error::DimensionMismatch(format!("prover on n = {}, game on n = {}", prover.n(), spec.n())));
    }
    let round = sample_round(spec, protocol, rng)?;
    let mut t = CompiledTranscript {
        test: round.test,
        x: round.alice.clone(),
        c: None,
        alpha: None,
        y: round.bob.clone(),
        b: None,
        a: None,
        verdict: false,
        diagnostic: None,
        sk: None,
        verifier_bytes: 0,
        prover_bytes: 0,
        rng_trail: Vec::new(),
    };
    let (Some(x), Some(y)) = (&round.alice, &round.bob) else {
        t.verdict = verify(spec, &round, None, None)?;
        t.rng_trail = rng.take_trail();
        return Ok(t);
    };
    let codec = codec_for(spec);
    let sk = qhe.gen(secparam, rng)?;
    let c = qhe.enc(&sk, &encode_question(&codec, x)?)?;
    let (alpha, state) = pick(prover.round1(qhe, &c, &prover.initial_state())?, |b| b.1.norm_sqr(), rng)?;
    let (b, _) = pick(prover.round2(y, &state)?, |b| b.1, rng)?;
    t.verifier_bytes = c.wire_len() + codec.bit_len(y).div_ceil(8);
    t.prover_bytes = alpha.wire_len() + b.len().div_ceil(8);
    t.c = Some(hex::encode(c.to_wire()));
    t.alpha = Some(hex::encode(alpha.to_wire()));
    t.b = Some(HexBits::from(&b));
    t.sk = Some(sk.clone());
    match qhe.dec(&sk, &alpha) {
        Ok(a) => {
            t.a = Some(HexBits::from(&a));
            match verify(spec, &round, Some(&a), Some(&b)) {
                Ok(v) => t.verdict = v,
                Err(e) => t.diagnostic = Some(format!("rejected: {e}")),
            }
        }
        Err(e) => t.diagnostic = Some(format!("decryption failed: {e}")),
    }
    t.rng_trail = rng.take_trail();
    Ok(t)
}

/// Joint distribution of the decrypted first answer and the second answer.
pub fn compiled_round_joint<P: CompiledProver + ?Sized>(
    spec: &GameSpec,
    qhe: &dyn QheScheme,
    prover: &P,
    round: &Round,
    key: &SecretKey,
) -> Result<Vec<(Answer, Answer, f64)>> {
    let (Some(x), Some(y)) = (&round.alice, &round.bob) else {
        return Ok(Vec::new());
    };
    let init = prover.initial_state();
    let norm = init.norm_sqr();
    let c = qhe.enc(key, &encode_question(&codec_for(spec), x)?)?;
    let mut out = Vec::new();
    for (alpha, st) in prover.round1(qhe, &c, &init)? {
        let a = qhe.dec(key, &alpha)?;
        for (b, w) in prover.round2(y, &st)? {
            out.push((a.clone(), b, w / norm));
        }
    }
    Ok(out)
}

/// Exact acceptance probability of the compiled protocol. Rounds whose
/// answers fail to decrypt or to parse count as rejections.
pub fn compiled_exact_accept<P: CompiledProver + ?Sized>(
    spec: &GameSpec,
    protocol: Protocol,
    qhe: &dyn QheScheme,
    prover: &P,
    secparam: usize,
    rng: &mut TrialRng,
) -> Result<f64> {
    let mut total = 0.0;
    for (round, p) in round_distribution(spec, protocol)? {
        if round.alice.is_none() {
            total += p;
            continue;
        }
        let key = qhe.gen(secparam, rng)?;
        let init = prover.initial_state();
        let c = qhe.enc(&key, &encode_question(&codec_for(spec), round.alice.as_ref().unwrap())?)?;
        let mut acc = 0.0;
        for (alpha, st) in prover.round1(qhe, &c, &init)? {
            let Ok(a) = qhe.dec(&key, &alpha) else { continue };
            for (b, w) in prover.round2(round.bob.as_ref().unwrap(), &st)? {
                if verify(spec, &round, Some(&a), Some(&b)).unwrap_or(false) {
                    acc += w;
                }
            }
        }
        total += p * acc / init.norm_sqr();
    }
    Ok(total)
}
