use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gapdecomp::cli::{error_message, exit_code, run, validate, OutputFormat, RunConfig};
use gapdecomp::synth::{generate, DgpSpec};
use gapdecomp::Error;

#[derive(Parser)]
#[command(name = "gapdecomp", version, about = "Decompose between-group gaps in binary outcomes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit, decompose and write the report.
    Run(Options),
    /// Check the config against the data without fitting.
    Validate(Options),
    /// Write a synthetic dataset drawn from a TOML process description.
    Simulate {
        #[arg(long)]
        dgp: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct Options {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `decomp.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Bootstrap replications (0 disables).
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, value_parser = ["text", "csv", "json"])]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Options {
    fn load(&self) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.decomp.seed = s;
        }
        if let Some(n) = self.iterations {
            cfg.decomp.iterations = n;
        }
        if let Some(b) = self.bootstrap {
            cfg.decomp.bootstrap_reps = b;
        }
        if let Some(f) = &self.format {
            cfg.output.format = f.parse::<OutputFormat>()?;
        }
        if let Some(o) = &self.out {
            cfg.output.path = Some(o.clone());
        }
        Ok(cfg)
    }
}

fn execute(cmd: &Command) -> Result<u8, Error> {
    match cmd {
        Command::Validate(opts) => {
            let cfg = opts.load()?;
            let diags = validate(&cfg);
            for d in &diags {
                println!("{d}");
            }
            if diags.is_empty() {
                println!("ok");
                Ok(0)
            } else {
                Ok(2)
            }
        }
        Command::Run(opts) => {
            let cfg = opts.load()?;
            eprintln!("seed = {}", cfg.decomp.seed);
            let report = run(&cfg)?;
            let text = report.render(cfg.output.format);
            match &cfg.output.path {
                Some(p) => std::fs::write(p, text)
                    .map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display())))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Simulate { dgp, out, seed } => {
            let mut spec = DgpSpec::load(dgp)?;
            if let Some(s) = seed {
                spec.seed = *s;
            }
            generate(&spec)?.save_csv(out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", error_message(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
