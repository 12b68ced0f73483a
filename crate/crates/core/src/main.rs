use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use subcell_dg::harness::output::{write_artifacts, write_convergence};
use subcell_dg::harness::reference::{default_cache_dir, fv_reference, ReferenceCase};
use subcell_dg::harness::{convergence_study, run_case, RawConfig, RunConfig};
use subcell_dg::projections::check_injectivity;
use subcell_dg::{Error, Result};

#[derive(Parser)]
#[command(name = "subcell-dg", version, about = "1D sub-cell DG solver and experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and write snapshots, sensor tables and summary.json.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run a case at several element counts and write convergence.csv.
    Convergence {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated element counts.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
    },
    /// Report whether sub-cell averaging is injective on polynomials.
    CheckInjectivity {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Compute (or load from cache) a fine-grid finite-volume reference.
    Reference {
        #[arg(long)]
        case: String,
        #[arg(long)]
        cells: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
}

/// Config file plus one flag per config key.
#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    n_elements: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    c_pen: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// `<element>:<gamma>`
    #[arg(long)]
    force_gamma: Option<String>,
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Option<Vec<f64>>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    entropy_fix: Option<bool>,
    #[arg(long)]
    reference_cells: Option<usize>,
}

impl ConfigArgs {
    fn resolve(self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        let flags = RawConfig {
            case: self.case,
            p: self.p,
            n: self.n,
            n_elements: self.n_elements,
            dt: self.dt,
            t_final: self.t_final,
            c_pen: self.c_pen,
            tau: self.tau,
            force_gamma: self.force_gamma,
            snapshot_times: self.snapshot_times,
            output_dir: self.output_dir,
            seed: self.seed,
            cfl: self.cfl,
            entropy_fix: self.entropy_fix,
            reference_cells: self.reference_cells,
        };
        RunConfig::from_raw(file.overridden_by(flags))
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config } => {
            let cfg = config.resolve()?;
            let art = run_case(&cfg)?;
            write_artifacts(&art, &cfg.output_dir)?;
            println!("{}", serde_json::to_string_pretty(&art.summary)?);
        }
        Command::Convergence { config, levels } => {
            let cfg = config.resolve()?;
            let records = convergence_study(&cfg, &levels)?;
            let path = write_convergence(&records, &cfg.output_dir)?;
            for r in &records {
                println!(
                    "n_elements={:<5} {} error={} order={}",
                    r.n_elements,
                    r.norm.name(),
                    r.error.map_or("-".into(), |e| format!("{e:.3e}")),
                    r.observed_order.map_or("-".into(), |o| format!("{o:.2}")),
                );
            }
            eprintln!("wrote {}", path.display());
        }
        Command::CheckInjectivity { p, r, d } => {
            let report = check_injectivity(p, r, d)?;
            println!("{}", serde_json::to_string(&report)?);
        }
        Command::Reference {
            case,
            cells,
            cache_dir,
            output_dir,
        } => {
            let case = ReferenceCase::from_name(&case)?;
            let cache = cache_dir.unwrap_or_else(default_cache_dir);
            let sol = fv_reference(case, cells, Some(&cache))?;
            std::fs::create_dir_all(&output_dir)?;
            let path = output_dir.join(format!("reference_{}_{}.csv", case.name(), cells));
            let mut text = String::from("x");
            for c in 0..sol.components {
                text.push_str(&format!(",u{c}"));
            }
            text.push('\n');
            for (i, v) in sol.values.iter().enumerate() {
                let x = sol.domain.0 + (i as f64 + 0.5) * sol.dx();
                text.push_str(&format!("{x:.15e}"));
                for val in v.iter().take(sol.components) {
                    text.push_str(&format!(",{val:.15e}"));
                }
                text.push('\n');
            }
            std::fs::write(&path, text)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &Error) -> u8 {
    e.exit_code().clamp(1, 255) as u8
}
