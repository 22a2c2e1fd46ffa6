use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qmarg_cli::commands;
use qmarg_cli::config::{ProverKind, RunConfig};
use qmarg_cli::RunReport;

#[derive(Parser)]
#[command(name = "qmarg", version, about = "Run qmarg protocol simulations and checks in batch")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play the two-prover protocols uncompiled.
    Game(Common),
    /// Play the protocols through the single-prover compiler.
    Compiled(Common),
    /// Run the succinct protocol and the communication accounting.
    Succinct(Common),
    /// Build the Hamiltonian pipeline and write the final Hamiltonian.
    HamBuild(Common),
    /// Build a small-bias set and measure its bias.
    BiasBuild(Common),
    /// Run the numerical inequality suite and oracle checks.
    Checks(Common),
}

#[derive(Args)]
struct Common {
    /// Config file (key = value, TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the built artifact (Hamiltonian JSON or set members) here.
    #[arg(long)]
    artifact: Option<PathBuf>,
    /// Record zero wall-clock time, making reports byte-identical on replay.
    #[arg(long)]
    no_wall_clock: bool,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of witness qubits.
    #[arg(long)]
    n: Option<usize>,
    /// Target bias of the question set.
    #[arg(long)]
    bias: Option<f64>,
    /// KSV repetition count.
    #[arg(long)]
    t: Option<usize>,
    /// Security parameter for key generation.
    #[arg(long)]
    secparam: Option<usize>,
    /// Number of sampled protocol runs.
    #[arg(long)]
    trials: Option<u64>,
    /// Hash for commitments: blake3, sha256 or sha256-truncN.
    #[arg(long)]
    hash: Option<String>,
    /// Spot checks per succinct argument.
    #[arg(long)]
    k: Option<usize>,
    /// Pick the braiding subtest from a·b instead of a coin.
    #[arg(long)]
    strict_braiding: bool,
    /// Use the signed-sum KSV threshold instead of the midpoint rule.
    #[arg(long)]
    literal_ksv_threshold: bool,
    /// Prover strategy.
    #[arg(long, value_parser = ["honest", "zeros"])]
    prover: Option<String>,
    /// XZ Hamiltonian JSON replacing the built-in toy instance.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Feed a deliberately invalid instance to the suite.
    #[arg(long)]
    inject_failure: bool,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &self.$f { cfg.$f = v.clone(); })*};
        }
        set!(seed, n, bias, t, secparam, trials, hash, k);
        if self.hamiltonian.is_some() {
            cfg.hamiltonian = self.hamiltonian.clone();
        }
        if let Some(p) = &self.prover {
            cfg.prover = if p == "zeros" { ProverKind::Zeros } else { ProverKind::Honest };
        }
        cfg.strict_braiding |= self.strict_braiding;
        cfg.literal_ksv_threshold |= self.literal_ksv_threshold;
        cfg.checks.inject_failure |= self.inject_failure;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    let start = Instant::now();
    let (common, mut report): (&Common, RunReport) = match &cli.command {
        Command::Game(c) => (c, commands::cmd_game(&c.config()?)?),
        Command::Compiled(c) => (c, commands::cmd_compiled(&c.config()?)?),
        Command::Succinct(c) => (c, commands::cmd_succinct(&c.config()?)?),
        Command::HamBuild(c) => {
            let (r, mh) = commands::cmd_ham_build(&c.config()?)?;
            if let Some(p) = &c.artifact {
                write(p, &mh.to_json())?;
            }
            (c, r)
        }
        Command::BiasBuild(c) => {
            let (r, set) = commands::cmd_bias_build(&c.config()?)?;
            if let Some(p) = &c.artifact {
                write(p, &set.export())?;
            }
            (c, r)
        }
        Command::Checks(c) => (c, commands::cmd_checks(&c.config()?)?),
    };
    if !common.no_wall_clock {
        report.wall_clock_ms = start.elapsed().as_millis() as u64;
    }
    let json = report.to_json();
    match &common.report {
        Some(p) => write(p, &json)?,
        None => {
            if let Err(e) = writeln!(std::io::stdout().lock(), "{json}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    for v in report.verdicts.iter().filter(|v| !v.passed) {
        eprintln!("invariant failed: {} {}", v.name, v.detail);
    }
    Ok(report.all_passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
