use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use downlink::config::{self, Scenario};
use downlink::{runner, Error};

/// Satellite downlink budget and tomography simulator.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// TOML scenario file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
}

fn run(args: Args) -> Result<runner::RunReport, Error> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => String::new(),
    };
    let mut cfg = config::parse_config(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(s) = args.scenario {
        cfg.scenario = s;
    }
    if let Some(out) = args.out {
        cfg.output = out.to_string_lossy().into_owned();
    }
    runner::run(&cfg)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            println!("{}", report.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
                "exit_code": e.exit_code(),
            });
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
