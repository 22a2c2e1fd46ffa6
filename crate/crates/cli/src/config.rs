use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use qmarg::games::BraidingMode;
use qmarg::hamiltonian::KsvRule;
use qmarg::normlab::{SuiteConfig, ALL_CHECKS};
use qmarg::succinct::HashKind;
use serde::{Deserialize, Serialize};

/// Oracle checks run by `checks` in addition to the normlab suite.
pub const ORACLE_CHECKS: [&str; 3] = ["smallbias", "ksv", "energy"];

pub const MAX_GAME_QUBITS: usize = 4;
pub const MAX_BIAS_QUBITS: usize = 24;
pub const MAX_T: usize = 1000;
pub const MAX_TRIALS: u64 = 10_000_000;
pub const MAX_K: usize = 1024;
pub const MAX_SECPARAM: usize = 4096;
pub const MAX_INSTANCES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProverKind {
    #[default]
    Honest,
    /// The classical table prover that answers all zeros.
    Zeros,
}

/// Every parameter of a run. All fields have defaults, so an empty file is a
/// valid configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub n: usize,
    pub bias: f64,
    /// Amplification factor for the KSV step.
    pub t: usize,
    pub secparam: usize,
    pub trials: u64,
    /// `sha256`, `blake3` or `sha256-trunc<bytes>`.
    pub hash: String,
    /// Spot checks per argument.
    pub k: usize,
    pub strict_braiding: bool,
    /// Use the signed-sum threshold instead of the midpoint rule.
    pub literal_ksv_threshold: bool,
    pub prover: ProverKind,
    /// XZ Hamiltonian as JSON; the built-in toy instance when absent.
    pub hamiltonian: Option<PathBuf>,
    pub checks: CheckSection,
}

/// The `[checks]` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSection {
    /// Random instances per normlab check.
    pub instances: usize,
    /// Names from the normlab suite and the oracle list; empty runs nothing.
    pub checks: Vec<String>,
    pub inject_failure: bool,
}

impl Default for CheckSection {
    fn default() -> Self {
        let checks = ALL_CHECKS.iter().chain(ORACLE_CHECKS.iter()).map(|s| s.to_string()).collect();
        CheckSection { instances: 5, checks, inject_failure: false }
    }
}

impl CheckSection {
    pub fn suite(&self) -> SuiteConfig {
        let checks = self.checks.iter().filter(|c| ALL_CHECKS.contains(&c.as_str())).cloned().collect();
        SuiteConfig { instances: self.instances, checks, inject_failure: self.inject_failure }
    }

    pub fn oracles(&self) -> Vec<&str> {
        self.checks.iter().map(String::as_str).filter(|c| ORACLE_CHECKS.contains(c)).collect()
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            n: 3,
            bias: 0.5,
            t: 60,
            secparam: 128,
            trials: 1000,
            hash: "blake3".into(),
            k: 32,
            strict_braiding: false,
            literal_ksv_threshold: false,
            prover: ProverKind::Honest,
            hamiltonian: None,
            checks: CheckSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_BIAS_QUBITS {
            bail!("n = {} outside 1..={MAX_BIAS_QUBITS}", self.n);
        }
        if !(self.bias > 0.0 && self.bias < 1.0) {
            bail!("bias {} outside (0, 1)", self.bias);
        }
        if self.t == 0 || self.t > MAX_T {
            bail!("t = {} outside 1..={MAX_T}", self.t);
        }
        if self.secparam == 0 || self.secparam > MAX_SECPARAM {
            bail!("secparam {} outside 1..={MAX_SECPARAM}", self.secparam);
        }
        if self.trials == 0 || self.trials > MAX_TRIALS {
            bail!("trials {} outside 1..={MAX_TRIALS}", self.trials);
        }
        if self.k == 0 || self.k > MAX_K {
            bail!("k = {} outside 1..={MAX_K}", self.k);
        }
        if self.checks.instances > MAX_INSTANCES {
            bail!("{} check instances exceeds {MAX_INSTANCES}", self.checks.instances);
        }
        for c in &self.checks.checks {
            if !ALL_CHECKS.contains(&c.as_str()) && !ORACLE_CHECKS.contains(&c.as_str()) {
                bail!("unknown check {c:?}");
            }
        }
        self.hash_kind()?;
        Ok(())
    }

    /// Games simulate `2n + 2` qubits, so they have a tighter cap.
    pub fn require_game_size(&self) -> Result<()> {
        if self.n > MAX_GAME_QUBITS {
            bail!("n = {} exceeds the game simulation cap of {MAX_GAME_QUBITS}", self.n);
        }
        Ok(())
    }

    pub fn hash_kind(&self) -> Result<HashKind> {
        Ok(HashKind::parse(&self.hash)?)
    }

    pub fn braiding_mode(&self) -> BraidingMode {
        if self.strict_braiding {
            BraidingMode::Strict
        } else {
            BraidingMode::CoinFirst
        }
    }

    pub fn ksv_rule(&self) -> KsvRule {
        if self.literal_ksv_threshold {
            KsvRule::SignedSum
        } else {
            KsvRule::Midpoint
        }
    }
}
