use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use thermoform::cli::{exit_code, run, Command, ExperimentConfig, Overrides};
use thermoform::operator::Scheme;

#[derive(Parser, Debug)]
#[command(name = "thermoform", version, about = "Transfer-operator pressure experiments")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Monte Carlo quadrature seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    /// Refinement ladder, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, allow_hyphen_values = true)]
    t_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_max: Option<f64>,
    #[arg(long)]
    t_steps: Option<usize>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s {
        "ulam" => Ok(Scheme::Ulam),
        "collocation" => Ok(Scheme::Collocation),
        _ => Err(format!("unknown scheme '{s}' (expected ulam or collocation)")),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        out: args.out,
        workers: args.workers,
        seed: args.seed,
        scheme: args.scheme,
        n: args.n,
        t_min: args.t_min,
        t_max: args.t_max,
        t_steps: args.t_steps,
    };
    let result = ExperimentConfig::load(&args.config).and_then(|mut cfg| {
        overrides.apply(&mut cfg)?;
        run(args.command, &cfg)
    });
    match &result {
        Ok(outcome) => {
            for p in &outcome.artifacts {
                println!("{}", p.display());
            }
            if !outcome.converged {
                eprintln!("warning: some t values did not converge; see the converged column");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
