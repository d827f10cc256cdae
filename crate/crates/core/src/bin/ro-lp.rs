use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use ro_lp::concentration;
use ro_lp::harness::{self, GenSpec, RunConfig};
use ro_lp::oracle;
use ro_lp::reduction::{self, LpToLbConfig};
use ro_lp::{Error, PcmcLp, Result};

#[derive(Parser)]
#[command(name = "ro-lp", version, about = "Random-order online packing/covering LPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance from a spec JSON.
    Gen {
        spec: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance offline and print the oracle result.
    SolveOffline { instance: PathBuf },
    /// Run an online algorithm over seeded permutations.
    Run {
        instance: PathBuf,
        config: PathBuf,
        /// CSV destination (stdout when omitted).
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check the tail bounds against simulation.
    VerifyBounds {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Width, stability and reduction report for an instance.
    Audit {
        instance: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn audit(lp: &PcmcLp, eps: f64, delta: f64) -> Result<serde_json::Value> {
    let solved = oracle::solve(lp)?;
    let opt = solved.is_optimal().then_some(solved.value);
    let width = lp.width_report(opt.filter(|o| *o > 0.0))?;
    let sigma = match (lp.m_c(), opt) {
        (0, _) => Some(if lp.is_packing_only() { 1.0 } else { 0.0 }),
        (_, Some(o)) if o > 0.0 => Some(oracle::stability_sigma(lp, eps)?),
        _ => None,
    };
    let reduction = match opt {
        Some(o) if o > 0.0 => {
            let cfg = LpToLbConfig::new(o, eps, delta).with_eps0(eps.max(reduction::DEFAULT_EPS0));
            Some(reduction::audit_reduction(lp, &cfg)?)
        }
        _ => None,
    };
    Ok(json!({
        "n": lp.n(),
        "k": lp.k(),
        "m_p": lp.m_p(),
        "m_c": lp.m_c(),
        "status": solved.status,
        "opt": opt,
        "width": width,
        "stability_sigma": sigma,
        "reduction": reduction,
    }))
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Gen { spec, out } => {
            let spec: GenSpec = serde_json::from_str(&read(&spec)?)?;
            let lp = harness::generate(&spec)?;
            emit(out.as_deref(), &lp.to_json_string()?)?;
        }
        Command::SolveOffline { instance } => {
            let lp = PcmcLp::from_json_str(&read(&instance)?)?;
            emit(None, &serde_json::to_string_pretty(&oracle::solve(&lp)?)?)?;
        }
        Command::Run { instance, config, csv, json } => {
            let lp = PcmcLp::from_json_str(&read(&instance)?)?;
            let cfg = RunConfig::from_json_str(&read(&config)?)?;
            let report = harness::experiment(&lp, &cfg)?;
            emit(csv.as_deref(), &report.csv_string()?)?;
            if let Some(p) = json {
                fs::write(p, report.to_json_string()?)?;
            }
        }
        Command::VerifyBounds { trials, seed } => {
            let points = concentration::verify_all(trials, seed)?;
            let mut all = true;
            for p in &points {
                all &= p.passes();
                println!(
                    "{} {:?} {} bound={:.6} empirical={:.6} se={:.2e}",
                    if p.passes() { "PASS" } else { "FAIL" },
                    p.kind,
                    p.params,
                    p.bound,
                    p.empirical,
                    p.std_error
                );
            }
            return Ok(all);
        }
        Command::Audit { instance, eps, delta } => {
            let lp = PcmcLp::from_json_str(&read(&instance)?)?;
            emit(None, &serde_json::to_string_pretty(&audit(&lp, eps, delta)?)?)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ro-lp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
