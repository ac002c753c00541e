use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ccl::config::{Pipeline, Scenario};
use ccl::pipelines::{exit_code, run};
use ccl::Error;

#[derive(Parser)]
#[command(name = "ccl", version, about = "Weighted entire-function experiments over cones")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV reports.
    #[arg(long, global = true, env = "CCL_OUT_DIR", default_value = "ccl-out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum number of grid nodes per field.
    #[arg(long, global = true)]
    grid_budget: Option<usize>,
    /// Override a scenario key, e.g. `--set decompose.a=3`.
    #[arg(long = "set", global = true, value_name = "K=V")]
    set: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    VerifyProfiles,
    Cone,
    Psh,
    Dbar,
    Decompose,
    Density,
    All,
}

impl Command {
    fn pipelines(self) -> Vec<Pipeline> {
        match self {
            Command::VerifyProfiles => vec![Pipeline::VerifyProfiles],
            Command::Cone => vec![Pipeline::Cone],
            Command::Psh => vec![Pipeline::Psh],
            Command::Dbar => vec![Pipeline::Dbar],
            Command::Decompose => vec![Pipeline::Decompose],
            Command::Density => vec![Pipeline::Density],
            Command::All => Pipeline::ALL.to_vec(),
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let mut overrides = cli.set.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(b) = cli.grid_budget {
        overrides.push(format!("grid_budget={b}"));
    }
    let scenario = Scenario::load(cli.config.as_deref(), &overrides)?;
    let pipelines = match (cli.command, scenario.pipeline) {
        (Some(c), _) => c.pipelines(),
        (None, Some(p)) => vec![p],
        (None, None) => return Err(Error::Config("no subcommand given and the scenario names no pipeline".into())),
    };
    let mut ok = true;
    for p in pipelines {
        let report = run(p, &scenario)?;
        for line in report.lines() {
            println!("{line}");
        }
        for path in report.write(&cli.out)? {
            eprintln!("wrote {}", path.display());
        }
        ok &= report.passed();
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
