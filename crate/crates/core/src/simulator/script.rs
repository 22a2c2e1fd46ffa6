use super::QuantumState;
use crate::bits::Bits;
use crate::error::Result;
use crate::pauli::{PauliString, PauliWord};
use crate::rng::TrialRng;

/// One measurement in a script; each step yields one outcome string.
#[derive(Clone, Debug)]
pub enum ScriptStep {
    Bases { qubits: Vec<usize>, bases: PauliString },
    Observable { qubits: Vec<usize>, word: PauliWord },
}

fn branches(state: &QuantumState, step: &ScriptStep) -> Result<Vec<super::MeasurementOutcome>> {
    match step {
        ScriptStep::Bases { qubits, bases } => state.measure_bases_branches(qubits, bases),
        ScriptStep::Observable { qubits, word } => state.measure_observable_branches(qubits, word),
    }
}

/// Total Born weight of the outcome sequences accepted by `verdict`.
pub fn exact_accept_prob(
    initial: &QuantumState,
    script: &[ScriptStep],
    verdict: &dyn Fn(&[Bits]) -> bool,
) -> Result<f64> {
    fn go(
        state: &QuantumState,
        rest: &[ScriptStep],
        outcomes: &mut Vec<Bits>,
        verdict: &dyn Fn(&[Bits]) -> bool,
    ) -> Result<f64> {
        let Some((step, tail)) = rest.split_first() else {
            return Ok(if verdict(outcomes) { state.norm_sqr() } else { 0.0 });
        };
        let mut total = 0.0;
        for b in branches(state, step)? {
            outcomes.push(b.bits);
            total += go(&b.branch, tail, outcomes, verdict)?;
            outcomes.pop();
        }
        Ok(total)
    }
    let norm = initial.norm_sqr();
    Ok(go(initial, script, &mut Vec::new(), verdict)? / norm)
}

/// Runs the script once, returning the outcomes and the verdict.
pub fn sample_script(
    initial: &QuantumState,
    script: &[ScriptStep],
    verdict: &dyn Fn(&[Bits]) -> bool,
    rng: &mut TrialRng,
) -> Result<(Vec<Bits>, bool)> {
    let mut state = initial.normalized();
    let mut outcomes = Vec::with_capacity(script.len());
    for step in script {
        let bs = branches(&state, step)?;
        let picked = state.pick(bs, rng);
        outcomes.push(picked.bits);
        state = picked.branch;
    }
    let ok = verdict(&outcomes);
    Ok((outcomes, ok))
}
