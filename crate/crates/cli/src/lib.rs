//! Batch front-end for `conecalc`: reads a JSON run configuration, runs one
//! task and writes a canonical `report.json` (plus `hasse.dot` for lattice
//! runs).

pub mod canonical;
pub mod config;
mod tasks;

use std::fmt;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::canonical::Canon;
pub use crate::config::{Model, RunConfig};

pub const TOOL_VERSION: &str = concat!("conecalc ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Task {
    Classify,
    Mu,
    Chain,
    Lattice,
    Trotter,
    SpinDemo,
    Richness,
    WeakEquiv,
    Stability,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Classify => "classify",
            Task::Mu => "mu",
            Task::Chain => "chain",
            Task::Lattice => "lattice",
            Task::Trotter => "trotter",
            Task::SpinDemo => "spin-demo",
            Task::Richness => "richness",
            Task::WeakEquiv => "weak-equiv",
            Task::Stability => "stability",
        }
    }
}

/// Malformed configuration or unresolved reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError(pub String);

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "schema error: {}", self.0)
    }
}

impl std::error::Error for SchemaError {}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail | Status::Error => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub task: Task,
    pub status: Status,
    pub payload: Canon,
    pub config_digest: String,
    /// DOT text for lattice runs.
    pub diagram: Option<String>,
}

impl RunReport {
    pub fn to_canon(&self) -> Canon {
        Canon::object([
            ("task", Canon::Str(self.task.name().into())),
            ("status", Canon::Str(self.status.as_str().into())),
            ("payload", self.payload.clone()),
            ("tool_version", Canon::Str(TOOL_VERSION.into())),
            ("config_digest", Canon::Str(self.config_digest.clone())),
        ])
    }
}

/// Options given on the command line rather than in the config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub sites: Option<usize>,
    pub partition: Option<String>,
    pub sector: Option<f64>,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses `bytes` and runs `task`. Task failures are reported in the
/// returned report; only schema problems are errors.
pub fn run(task: Task, bytes: &[u8], overrides: &Overrides) -> Result<RunReport, SchemaError> {
    let cfg = RunConfig::parse(bytes)?;
    if let Some(named) = &cfg.task {
        if named != task.name() {
            return Err(SchemaError(format!(
                "config is for task {named:?}, invoked as {:?}",
                task.name()
            )));
        }
    }
    let model = Model::build(&cfg)?;
    let tol = overrides
        .tol
        .or(cfg.tolerances.cone)
        .unwrap_or(conecalc::cones::DEFAULT_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SchemaError(format!("tolerance must be positive, got {tol}")));
    }
    let (status, payload, diagram) = match tasks::dispatch(task, &cfg, &model, tol, overrides)? {
        Ok(outcome) => (
            if outcome.pass { Status::Pass } else { Status::Fail },
            outcome.payload,
            outcome.diagram,
        ),
        Err(e) => (
            Status::Error,
            Canon::object([("error", Canon::Str(e.to_string()))]),
            None,
        ),
    };
    Ok(RunReport {
        task,
        status,
        payload,
        config_digest: digest(bytes),
        diagram,
    })
}

/// Minimal config for a `spin-demo` run given only by flags.
pub fn spin_demo_config() -> Vec<u8> {
    b"{\n  \"version\": 1,\n  \"task\": \"spin-demo\"\n}\n".to_vec()
}

/// Writes `report.json` and, for lattice runs, `hasse.dot` into `out`.
pub fn emit(report: &RunReport, out: &Path) -> Result<(), std::io::Error> {
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), report.to_canon().render())?;
    if let Some(dot) = &report.diagram {
        fs::write(out.join("hasse.dot"), dot)?;
    }
    Ok(())
}
