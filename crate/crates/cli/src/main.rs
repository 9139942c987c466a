use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use conecalc_cli::{emit, run, spin_demo_config, Overrides, Task};

#[derive(Parser)]
#[command(name = "conecalc", version, about = "Cone positivity and ground-state inheritance checks")]
struct Args {
    task: Task,
    /// JSON run configuration (optional for spin-demo).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory receiving report.json (and hasse.dot).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    sites: Option<usize>,
    /// Sublattice pattern such as AABB.
    #[arg(long)]
    partition: Option<String>,
    /// Magnetization sector M.
    #[arg(long, allow_negative_numbers = true)]
    sector: Option<f64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = std::env::var("CONECALC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A second initialisation only fails when a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let bytes = match (&args.config, args.task) {
        (Some(path), _) => match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("conecalc: cannot read {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
        (None, Task::SpinDemo) => spin_demo_config(),
        (None, _) => {
            eprintln!("conecalc: --config is required for {}", args.task.name());
            return ExitCode::from(2);
        }
    };
    let overrides = Overrides {
        tol: args.tol,
        sites: args.sites,
        partition: args.partition,
        sector: args.sector,
    };
    let report = match run(args.task, &bytes, &overrides) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("conecalc: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&report, &args.out) {
        eprintln!("conecalc: cannot write {}: {e}", args.out.display());
        return ExitCode::from(1);
    }
    eprintln!("{}: {}", report.task.name(), report.status.as_str());
    ExitCode::from(report.status.exit_code() as u8)
}
