mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use commands::NumericalFailure;

#[derive(Parser)]
#[command(name = "pesinlab", version, about = "Pesin blocks, shadowing and periodic approximation on torus maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lyapunov spectrum per sample point (CSV).
    Exponents(Common),
    /// Pesin-block certificates over sample points or an x-grid (JSON lines).
    Classify(Common),
    /// Finite-horizon exponents and limit domination along orbits (JSON lines).
    Domination(Common),
    /// Canonical partition of a segment of length n.
    Partition(Common),
    /// Quasi-hyperbolicity of segments or of a pseudo-orbit file.
    QhCheck(Common),
    /// Newton shadowing of a pseudo-orbit file.
    Shadow(Common),
    /// Periodic points near recurrent segments.
    Close(Common),
    /// Glues segments through observed transits into one periodic orbit.
    Glue(Common),
    /// Periodic approximants of the measure of a sampled orbit (CSV).
    Measure(Common),
    /// Empirical shadowing constant.
    #[command(name = "probe-L")]
    ProbeL(Common),
    /// Fraction of sample points with a nearby periodic orbit.
    #[command(name = "probe-per")]
    ProbePer(Common),
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Any config entry as key=value (value read as JSON when it parses).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    fiber: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    /// Block size K.
    #[arg(long = "block")]
    k_block: Option<u64>,
    /// Block index k.
    #[arg(short, long)]
    k: Option<u64>,
    #[arg(short, long)]
    n: Option<u64>,
    #[arg(long)]
    grid: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    mesh: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> anyhow::Result<Vec<(String, Value)>> {
        let mut out = Vec::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        put("system", self.system.clone().map(Value::from));
        put("horizon", self.horizon.map(Value::from));
        put("fiber", self.fiber.map(Value::from));
        put("zeta", self.zeta.map(Value::from));
        put("K", self.k_block.map(Value::from));
        put("k", self.k.map(Value::from));
        put("n", self.n.map(Value::from));
        put("grid", self.grid.map(Value::from));
        put("samples", self.samples.map(Value::from));
        put("delta", self.delta.map(Value::from));
        put("eps", self.eps.map(Value::from));
        put("tol", self.tol.map(Value::from));
        put("mesh", self.mesh.map(Value::from));
        put("seed", self.seed.map(Value::from));
        put("input", self.input.as_ref().map(|p| Value::from(p.to_string_lossy().into_owned())));
        put("output", self.output.as_ref().map(|p| Value::from(p.to_string_lossy().into_owned())));
        for s in &self.set {
            out.push(config::parse_override(s)?);
        }
        Ok(out)
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<NumericalFailure>().is_some() {
        return 1;
    }
    match err.downcast_ref::<pesinlab::Error>() {
        Some(e) => {
            use pesinlab::Error::*;
            match e {
                DimensionMismatch { .. }
                | UnsupportedDimension(_)
                | InverseUnavailable(_)
                | UnsupportedSystem(_)
                | InvalidParameter(_)
                | Parse { .. }
                | Formula(_) => 2,
                _ => 1,
            }
        }
        None => 2,
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("PESINLAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("PESINLAB_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("PESINLAB_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    let (common, cmd): (&Common, fn(&config::RunConfig) -> anyhow::Result<()>) = match &cli.command {
        Command::Exponents(c) => (c, commands::exponents),
        Command::Classify(c) => (c, commands::classify),
        Command::Domination(c) => (c, commands::domination),
        Command::Partition(c) => (c, commands::partition),
        Command::QhCheck(c) => (c, commands::qh_check),
        Command::Shadow(c) => (c, commands::shadow),
        Command::Close(c) => (c, commands::close),
        Command::Glue(c) => (c, commands::glue),
        Command::Measure(c) => (c, commands::measure),
        Command::ProbeL(c) => (c, commands::probe_l),
        Command::ProbePer(c) => (c, commands::probe_per),
    };
    let cfg = config::load(common.config.as_deref(), &common.overrides()?)?;
    cmd(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
