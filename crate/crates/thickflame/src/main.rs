use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use thickflame::cli;
use thickflame::config::{parse_config_text, Mode, RunConfig};
use thickflame::{Error, Result};

#[derive(Parser)]
#[command(name = "thickflame", version, about = "Thick-flame model with two free interfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Planar traveling wave profiles
    Wave(Flags),
    /// Growth rate of the first mode as a function of Le
    Dispersion(Flags),
    /// Critical Lewis number of every unstable mode
    Lecrit(Flags),
    /// Linearized perturbation run
    Linear(Flags),
    /// Fully nonlinear perturbation run
    Nonlinear(Flags),
    /// Discretization and dispersion cross-checks
    Validate(Flags),
}

#[derive(Args)]
struct Flags {
    /// key = value file applied before the flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    theta_i: Option<f64>,
    #[arg(long)]
    le: Option<f64>,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Extent of the burnt region
    #[arg(long)]
    a: Option<f64>,
    /// Extent of the fresh region
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    snapshot_every: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Zero the upper third of the spectrum of nonlinear products
    #[arg(long)]
    dealias: bool,
    #[arg(long, env = "THICKFLAME_OUT")]
    out: Option<PathBuf>,
}

impl Flags {
    fn pairs(&self) -> Result<Vec<(String, String)>> {
        let mut pairs = match &self.config {
            Some(p) => parse_config_text(&std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?)?,
            None => Vec::new(),
        };
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k.to_string(), v));
            }
        };
        push("theta_i", self.theta_i.map(|v| v.to_string()));
        push("le", self.le.map(|v| v.to_string()));
        push("ell", self.ell.map(|v| v.to_string()));
        push("delta", self.delta.map(|v| v.to_string()));
        push("a_ext", self.a.map(|v| v.to_string()));
        push("b_ext", self.b.map(|v| v.to_string()));
        push("n_x", self.nx.map(|v| v.to_string()));
        push("n_y", self.ny.map(|v| v.to_string()));
        push("dt", self.dt.map(|v| v.to_string()));
        push("t_final", self.t_final.map(|v| v.to_string()));
        push("snapshot_every", self.snapshot_every.map(|v| v.to_string()));
        push("epsilon", self.eps.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("samples", self.samples.map(|v| v.to_string()));
        push("dealias", self.dealias.then(|| "true".to_string()));
        push("output_dir", self.out.as_ref().map(|p| p.display().to_string()));
        Ok(pairs)
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (mode, flags) = match cli.command {
        Command::Wave(f) => (Mode::Wave, f),
        Command::Dispersion(f) => (Mode::Dispersion, f),
        Command::Lecrit(f) => (Mode::Lecrit, f),
        Command::Linear(f) => (Mode::Linear, f),
        Command::Nonlinear(f) => (Mode::Nonlinear, f),
        Command::Validate(f) => (Mode::Validate, f),
    };
    let pairs: Vec<_> = flags.pairs()?.into_iter().filter(|(k, _)| k != "mode").collect();
    let config = RunConfig::from_pairs(mode, &pairs)?;
    let report = cli::run(&config)?;
    for line in &report.lines {
        println!("{line}");
    }
    for path in &report.artifacts {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
