use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levykb::commands::{self, Example};
use levykb::config::{parse_spec, parse_t_grid, parse_tail, Format, RunConfig};
use levykb::output::{self, Report};
use levykb::CliError;

/// Small-time transition density estimates for one-dimensional Levy processes.
#[derive(Parser)]
#[command(name = "levykb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrability, infinite activity and symmetry of the measure.
    Validate(Common),
    /// psi, psi_L, psi_U on a frequency grid and the index beta.
    Exponents(Common),
    /// rho_t, rho_t^U, rho_t^L on the time grid.
    Scales(Common),
    /// Densities on [-50/rho_t, 50/rho_t] with the convolution and mass checks.
    Density(Common),
    /// On-diagonal, compound kernel, derivative and bell certificates.
    Bounds(Common),
    /// Monte Carlo increments compared with the inverted density.
    Mc(Common),
    /// Reproduce one of the worked examples.
    Example {
        #[arg(value_enum)]
        name: Example,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Preset (`cauchy`, `stable:1.5`, `dyadic:1,1`, `oscillating:0.8,1.6`) or a JSON spec file.
    #[arg(long)]
    spec: Option<String>,
    /// Log-spaced times `a:b:n`; `b` is t0.
    #[arg(long, default_value = "1e-4:1:25")]
    t_grid: String,
    /// Points per time on [-50/rho_t, 50/rho_t].
    #[arg(long, default_value_t = 4001)]
    x_points: usize,
    /// Derivative order for `density`.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=2))]
    k: u8,
    /// Tail `{"alpha": a}` with 1 - G(v) = v^-a.
    #[arg(long, conflicts_with = "tail_density")]
    tail_cdf: Option<String>,
    /// Tail `{"alpha": a, "scale": c}` with g(u) = c u^(-1-a).
    #[arg(long)]
    tail_density: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    mc_n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Step-halving tolerance of the Fourier inversion.
    #[arg(long)]
    alias_tol: Option<f64>,
    #[arg(long, default_value = "levykb-out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl Common {
    fn config(&self, default_spec: &str) -> Result<RunConfig, CliError> {
        let spec_source = self.spec.clone().unwrap_or_else(|| default_spec.into());
        let (t0, t_grid) = parse_t_grid(&self.t_grid)?;
        let tail = match (&self.tail_cdf, &self.tail_density) {
            (Some(j), _) => Some(parse_tail(j, false)?),
            (_, Some(j)) => Some(parse_tail(j, true)?),
            _ => None,
        };
        Ok(RunConfig {
            spec: parse_spec(&spec_source)?,
            spec_source,
            t0,
            t_grid,
            x_points: self.x_points,
            k: self.k as usize,
            tail,
            mc_n: self.mc_n,
            seed: self.seed,
            alias_tol: self.alias_tol,
            out: self.out.clone(),
            format: self.format,
        })
    }
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let (common, default_spec, f): (&Common, &str, Box<dyn Fn(&RunConfig) -> Result<Report, CliError>>) = match &cli.command {
        Command::Validate(c) => (c, "cauchy", Box::new(commands::validate)),
        Command::Exponents(c) => (c, "cauchy", Box::new(commands::exponents)),
        Command::Scales(c) => (c, "cauchy", Box::new(commands::scales)),
        Command::Density(c) => (c, "cauchy", Box::new(commands::density)),
        Command::Bounds(c) => (c, "cauchy", Box::new(commands::bounds)),
        Command::Mc(c) => (c, "cauchy", Box::new(commands::mc)),
        Command::Example { name, common } => {
            let name = *name;
            (common, name.default_spec(), Box::new(move |cfg| commands::example(name, cfg)))
        }
    };
    let cfg = common.config(default_spec)?;
    let report = f(&cfg)?;
    let files = output::write(&report, &cfg)?;
    for line in &report.summary {
        println!("{line}");
    }
    println!("verdict {} ({} files in {})", report.verdict, files.len(), cfg.out.display());
    Ok(report)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(r) => ExitCode::from(r.verdict.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
