use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wgfem::error::WgError;
use wgfem::harness::verify::{check_names, run_check};
use wgfem::harness::{
    emit_study, export_surface, property_suite, reproduce_table, run_study, OutputFormat, ReproduceOptions, StudySpec,
};

#[derive(Parser)]
#[command(name = "wgfem", version, about = "Weak Galerkin convergence studies for the 2D heat equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study described by a key=value config file.
    Study {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Rerun a stored reference table and compare.
    ReproduceTable {
        /// Caption number (`16`), or `label:N`.
        id: String,
        /// Mesh ladder, e.g. `4,8,16`.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        /// Use the reference τ and also compare magnitudes.
        #[arg(long)]
        reference_tau: bool,
        #[arg(long)]
        order_tol: Option<f64>,
        #[arg(long)]
        mag_tol: Option<f64>,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample u_0 at the final time on a regular grid.
    ExportSurface {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the property suite, or selected checks.
    Verify {
        #[arg(long = "check")]
        checks: Vec<String>,
        /// List check names and exit.
        #[arg(long)]
        list: bool,
    },
}

/// Command-line values win over the config file.
#[derive(Args)]
struct Overrides {
    /// Any config key, repeatable: `--set gamma=1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    output: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Result<Vec<(String, String)>, WgError> {
        let mut pairs = Vec::new();
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| WgError::Config(format!("--set expects KEY=VALUE, got '{item}'")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let named = [
            ("levels", &self.levels),
            ("tau", &self.tau),
            ("gamma", &self.gamma),
            ("format", &self.format),
            ("output", &self.output),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                pairs.push((key.to_string(), v.clone()));
            }
        }
        Ok(pairs)
    }

    fn load(&self, path: &Path) -> Result<StudySpec, WgError> {
        let text = fs::read_to_string(path).map_err(|e| WgError::Config(format!("{}: {e}", path.display())))?;
        let mut spec = StudySpec::parse(&text)?;
        spec.apply(&self.pairs()?)?;
        spec.validate()?;
        Ok(spec)
    }
}

fn write_out(text: &str, output: Option<&Path>) -> Result<(), WgError> {
    match output {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<bool, WgError> {
    match command {
        Command::Study { config, overrides } => {
            let spec = overrides.load(&config)?;
            let tables = run_study(&spec)?;
            write_out(&emit_study(&tables, spec.format), spec.output.as_deref())?;
            Ok(true)
        }
        Command::ReproduceTable {
            id,
            levels,
            reference_tau,
            order_tol,
            mag_tol,
            format,
            output,
        } => {
            let opts = ReproduceOptions {
                levels,
                reference_tau,
                order_tol,
                mag_tol,
                format,
            };
            let r = reproduce_table(&id, &opts)?;
            write_out(&r.text, output.as_deref())?;
            if output.is_some() {
                println!("{}", r.report.summary());
            }
            Ok(r.passed())
        }
        Command::ExportSurface { config, overrides } => {
            let spec = overrides.load(&config)?;
            write_out(&export_surface(&spec)?, spec.output.as_deref())?;
            Ok(true)
        }
        Command::Verify { checks, list } => {
            if list {
                for name in check_names() {
                    println!("{name}");
                }
                return Ok(true);
            }
            let outcomes = if checks.is_empty() {
                property_suite()
            } else {
                checks
                    .iter()
                    .map(|name| run_check(name).ok_or_else(|| WgError::Config(format!("unknown check '{name}'"))))
                    .collect::<Result<Vec<_>, _>>()?
            };
            for o in &outcomes {
                println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            Ok(outcomes.iter().all(|o| o.passed))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                WgError::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
