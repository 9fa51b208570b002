use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use dephasing::PhysicalParams;
use dephasing_cli::config::{parse_multiples_of_l, ExperimentConfig, ExperimentKind, KINDS};
use dephasing_cli::output::{write_manifest, write_run};
use dephasing_cli::sweep::{parse_values, sweep, Axis};
use dephasing_cli::{run, CliError};

#[derive(Parser)]
#[command(name = "dephase", version, about = "Dephasing of double-well impurities in a Bose gas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment preset: fig2, fig3, fig4, fig5, fig6, spectral, densmat, oracle
    #[arg(long)]
    preset: Option<String>,

    /// Flat `key = value` config file
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (default: out/<preset>)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override a parameter or experiment key, e.g. --override T=1e-8
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads
    #[arg(long, env = "DEPHASE_THREADS")]
    threads: Option<usize>,

    /// Pair separations 2D as multiples of L, e.g. 8L,16L,40L
    #[arg(long)]
    distances: Option<String>,

    /// Logarithmic time axis in the plots
    #[arg(long)]
    log_x: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write CSV, JSON, SVG and a manifest
    Run(Common),
    /// Repeat an experiment over the values of one parameter
    Sweep {
        #[command(flatten)]
        common: Common,
        /// D, T or a_AB
        #[arg(long)]
        axis: String,
        /// Comma-separated values; suffix L (multiples of L) or a0 (Bohr radii)
        #[arg(long)]
        values: String,
    },
    /// Print a parameter set as a config file
    Preset {
        /// paper-sec4 or one-dimensional
        name: String,
    },
    /// List experiment presets
    List,
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let preset = match &common.preset {
        Some(p) => Some(ExperimentKind::parse(p).ok_or_else(|| CliError::Config(format!("unknown preset `{p}`")))?),
        None => None,
    };
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_text(&text, preset)?
        }
        None => ExperimentConfig::preset(preset.ok_or_else(|| CliError::Config("give --preset or --config".into()))?),
    };
    cfg.apply_overrides(&common.overrides)?;
    if let Some(d) = &common.distances {
        cfg.separations = parse_multiples_of_l(d)?;
    }
    if common.log_x {
        cfg.log_x = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set_threads(n: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(rayon::current_num_threads())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(common) => {
            let threads = set_threads(common.threads)?;
            let cfg = load(&common)?;
            let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("out").join(cfg.kind.preset_name()));
            let start = Instant::now();
            let out = run(&cfg)?;
            let files = write_run(&dir, &cfg, &out)?;
            write_manifest(&dir, &cfg, &out, &files, start.elapsed().as_secs_f64(), threads)?;
            println!("{}: {} curves written to {}", cfg.kind, out.curves.len(), dir.display());
        }
        Command::Sweep { common, axis, values } => {
            set_threads(common.threads)?;
            let cfg = load(&common)?;
            let axis = Axis::parse(&axis)?;
            let values = parse_values(&values, cfg.params.l)?;
            let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("out").join(format!("sweep_{}", axis.key())));
            let points = sweep(&cfg, axis, &values, &dir)?;
            for p in &points {
                for (bath, onset, ratio, _) in &p.baths {
                    let onset = onset.map(|t| format!("{t:.3e} s")).unwrap_or_else(|| "never".into());
                    let ratio = ratio.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into());
                    println!("{} = {:<8} {:<10} onset {:<12} max|δ|/2Γ₀ {}", axis.key(), p.label, bath, onset, ratio);
                }
            }
            println!("summary written to {}", dir.join("summary.csv").display());
        }
        Command::Preset { name } => {
            let p = match name.as_str() {
                "paper-sec4" => PhysicalParams::paper_sec4(),
                "one-dimensional" => PhysicalParams::one_dimensional(),
                other => return Err(CliError::Config(format!("unknown parameter preset `{other}` (paper-sec4, one-dimensional)"))),
            };
            print!("{}", p.to_kv_string());
        }
        Command::List => {
            for k in KINDS {
                println!("{:<10} {}", k.preset_name(), k.label());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
