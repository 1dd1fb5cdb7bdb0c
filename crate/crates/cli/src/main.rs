use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use epsense::check::run_checks;
use epsense::config::{SweepVar, SystemKind};
use epsense::output::{emit, Format};
use epsense::sweep::{evaluate_point, point_at, run_sweep, sweep_threshold};
use epsense::{validate_config, SweepConfig};
use epsense_core::active::{ep_inversion, lasing_threshold, singularity_scan, GainModel};
use serde_json::json;

#[derive(Parser)]
#[command(name = "epsense", version, about = "Fisher information of coupled-cavity sensors near exceptional points")]
struct Cli {
    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout if omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; defaults to the --out extension, else csv
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; EPSENSE_JOBS takes precedence when set
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured parameter sweep
    Sweep,
    /// Evaluate the configured outputs at the fixed parameters and print JSON
    Point,
    /// Print the lasing threshold and exceptional-point locations
    Threshold,
    /// Run the oracle-agreement suite
    Check,
}

enum Failure {
    Config(String),
    Io(String),
    Numeric(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (code, msg) = match self {
            Self::Config(m) => (1, m),
            Self::Io(m) => (2, m),
            Self::Numeric(m) => (3, m),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

fn load(path: Option<&Path>) -> Result<SweepConfig, Failure> {
    let path = path.ok_or_else(|| Failure::Config("--config <path> is required".into()))?;
    let raw = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    validate_config(&raw).map_err(|e| Failure::Config(e.to_string()))
}

fn jobs(cli: &Cli, cfg: &SweepConfig) -> Result<usize, Failure> {
    if let Ok(v) = std::env::var("EPSENSE_JOBS") {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Failure::Config(format!("EPSENSE_JOBS must be a positive integer, got {v:?}"))),
        };
    }
    if cli.jobs == Some(0) {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    Ok(cli.jobs.or(cfg.jobs).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

fn format(cli: &Cli) -> Format {
    cli.format.unwrap_or_else(|| match cli.out.as_deref().and_then(Path::extension) {
        Some(ext) if ext == "json" => Format::Json,
        _ => Format::Csv,
    })
}

fn print_json(cli: &Cli, value: &serde_json::Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Numeric(e.to_string()))?;
    text.push('\n');
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep => {
            let cfg = load(cli.config.as_deref())?;
            if cfg.sweep.is_none() {
                return Err(Failure::Config("sweep: missing required section for the sweep command".into()));
            }
            let n = jobs(cli, &cfg)?;
            let result = run_sweep(&cfg, n).map_err(|e| Failure::Numeric(e.to_string()))?;
            let flagged = result.rows.iter().filter(|r| r.status != "ok").count();
            if flagged > 0 {
                log::warn!("{flagged} of {} rows flagged in the status column", result.rows.len());
            }
            emit(&result, format(cli), cli.out.as_deref())
                .map_err(|e| Failure::Io(format!("{}: {e}", cli.out.as_deref().unwrap_or(Path::new("-")).display())))
        }
        Command::Point => {
            let cfg = load(cli.config.as_deref())?;
            let pt = point_at(&cfg, SweepVar::G, cfg.passive.g, None);
            let row = evaluate_point(&cfg, &pt);
            let mut values = serde_json::Map::new();
            for (out, v) in cfg.outputs.iter().zip(&row.values) {
                values.insert(out.name().into(), serde_json::to_value(v).unwrap_or_default());
            }
            values.insert("status".into(), json!(row.status));
            print_json(cli, &serde_json::Value::Object(values))?;
            // an infinite susceptibility at the EP is an expected result, not a failure
            if row.status.split('|').any(|c| c != "ok" && c != "divergent_at_ep") {
                return Err(Failure::Numeric(format!("point evaluation flagged: {}", row.status)));
            }
            Ok(())
        }
        Command::Threshold => {
            let cfg = load(cli.config.as_deref())?;
            let coupling = cfg.passive.coupling();
            let (ep_g, ep_eps) = coupling.ep_location();
            let mut report = json!({
                "ep_g": ep_g,
                "ep_epsilon": ep_eps,
                "ep_g_bare": 0.5 * cfg.passive.gamma_diff_bare().abs(),
            });
            if cfg.system == SystemKind::Active {
                let a = cfg.active_system().expect("active config has gain parameters");
                let sc = sweep_threshold(&cfg).unwrap_or_else(|| lasing_threshold(&a));
                let window = (cfg.passive.nu_b - 50.0, cfg.passive.nu_b + 50.0);
                let scanned =
                    singularity_scan(&a, window, GainModel::Full3).map_err(|e| Failure::Numeric(e.to_string()))?;
                let s_ep = ep_inversion(&a);
                report["s_c"] = json!(sc);
                report["s_c_scan"] = json!(scanned);
                report["s_z_ep"] = json!(s_ep);
                report["s_z_ep_over_s_c"] = json!(s_ep / sc);
            }
            print_json(cli, &report)
        }
        Command::Check => {
            let outcomes = run_checks();
            let mut all = true;
            for o in &outcomes {
                all &= o.passed;
                println!(
                    "{} {:<55} worst {:.3e} (tolerance {:.0e})",
                    if o.passed { "PASS" } else { "FAIL" },
                    o.name,
                    o.worst,
                    o.tolerance
                );
            }
            if all {
                Ok(())
            } else {
                Err(Failure::Numeric("oracle checks failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
