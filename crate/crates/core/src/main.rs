use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use animeval::aggregate::ReportFormat;
use animeval::batch;
use animeval::config::{load_config, MetricConfig};
use animeval::io::BatchManifest;
use animeval::reliability::ApiInventory;

#[derive(Parser)]
#[command(name = "animeval", version, about = "Funnel evaluation of generated animation code")]
struct Cli {
    /// Metric configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the bootstrap seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Batch {
    /// Batch manifest (TOML); repeat for several models or languages.
    #[arg(long, required = true)]
    manifest: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate batches and write verdicts, violations and a report.
    Evaluate {
        #[command(flatten)]
        batch: Batch,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "table-text")]
        format: ReportFormat,
        /// Line-delimited API symbol list used to classify failures.
        #[arg(long)]
        inventory: Option<PathBuf>,
        /// Renderer command run for entries that have no artifacts yet.
        #[arg(long, num_args = 1.., allow_hyphen_values = true)]
        render: Option<Vec<String>>,
    },
    /// Fit reference distributions and write an updated config.
    Calibrate {
        #[command(flatten)]
        batch: Batch,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hard-filter samples with any unsuppressed spatial violation.
    Filter {
        #[command(flatten)]
        batch: Batch,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Re-render a report from a verdicts file.
    Report {
        #[arg(long)]
        verdicts: PathBuf,
        #[arg(long, default_value = "table-text")]
        format: ReportFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the API inventory with an external command.
    Inventory {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true, num_args = 1.., trailing_var_arg = true, allow_hyphen_values = true)]
        command: Vec<String>,
    },
}

fn manifests(batch: &Batch) -> anyhow::Result<Vec<BatchManifest>> {
    batch
        .manifest
        .iter()
        .map(|p| BatchManifest::load(p).with_context(|| format!("loading {}", p.display())))
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p).with_context(|| format!("loading {}", p.display()))?,
        None => MetricConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.bootstrap_seed = seed;
    }
    match cli.command {
        Cmd::Evaluate {
            batch,
            out,
            format,
            inventory,
            render,
        } => {
            let manifests = manifests(&batch)?;
            if let Some(cmd) = render {
                for m in &manifests {
                    batch::render_missing(m, &cmd)?;
                }
            }
            let inventory = match inventory {
                Some(p) => ApiInventory::load(&p)?,
                None => ApiInventory::empty(),
            };
            let result = batch::run_evaluate(&manifests, &inventory, &cfg, cli.jobs)?;
            let report = batch::write_evaluation(&out, &result, format)?;
            println!("{} verdicts, report at {}", result.verdicts.len(), report.display());
        }
        Cmd::Calibrate { batch, out } => {
            let (fitted, summary) = batch::run_calibrate(&manifests(&batch)?, &cfg, cli.jobs)?;
            for s in &summary {
                println!(
                    "{}: n={} padvc mu={:.4} sigma={:.4}  td mu={:.4} sigma={:.4}",
                    s.language, s.n, s.padvc_mu, s.padvc_sigma, s.td_mu, s.td_sigma
                );
            }
            fitted.save(&out)?;
        }
        Cmd::Filter { batch, out } => {
            let result = batch::run_filter(&manifests(&batch)?, &cfg, cli.jobs)?;
            batch::write_filter(&out, &result)?;
            println!("{} accepted, {} rejected", result.accepted.len(), result.rejected.len());
        }
        Cmd::Report { verdicts, format, out } => {
            let text = batch::run_report(&verdicts, &cfg, format)?;
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
        }
        Cmd::Inventory { out, command } => {
            if command.is_empty() {
                bail!("no inventory command given");
            }
            let inv = batch::run_inventory(&command)?;
            let text: String = inv.symbols().iter().map(|s| format!("{s}\n")).collect();
            std::fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
            println!("{} symbols", inv.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
