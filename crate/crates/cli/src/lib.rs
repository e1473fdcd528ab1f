//! Command-line front end for the two-stage segmentation pipeline.
//!
//! Exit codes: 0 success, 2 bad input, 3 degenerate case (for example an
//! empty prediction that has no boundary band).

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use bfseg_core::bvol::pair_paths;
use rayon::prelude::*;

pub mod args;
mod commands;
pub mod config;

pub use args::{Cli, Command};
pub use config::Config;

pub const EXIT_OK: u8 = 0;
pub const EXIT_BAD_INPUT: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;

/// A command failure carrying its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn bad_input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_BAD_INPUT,
            message: message.into(),
        }
    }

    pub fn degenerate(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DEGENERATE,
            message: message.into(),
        }
    }

    fn context(self, what: &str) -> Self {
        Failure {
            code: self.code,
            message: format!("{what}: {}", self.message),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<bfseg_core::Error> for Failure {
    fn from(e: bfseg_core::Error) -> Self {
        use bfseg_core::Error as E;
        match e {
            E::Degenerate(_) | E::NoBackground | E::UndefinedMetric(_) => {
                Failure::degenerate(e.to_string())
            }
            _ => Failure::bad_input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::bad_input(e.to_string())
    }
}

pub type CmdResult = Result<(), Failure>;

/// Runs a parsed command line, writing reports to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> CmdResult {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Synth(a) => commands::synth::run(a, &config, out),
        Command::UamFit(a) => commands::uam_fit::run(a, &config, out),
        Command::Stage1Post(a) => commands::stage1::run(a, &config, out),
        Command::Stage2Prep(a) => commands::stage2::run(a, &config, out),
        Command::Evaluate(a) => commands::evaluate::run(a, &config, out),
        Command::LossEval(a) => commands::loss_eval::run(a, &config, out),
        Command::Resample(a) => commands::resample::run(a, out),
    }
}

pub(crate) fn resolve_jobs(flag: Option<usize>, config: &Config) -> Result<usize, Failure> {
    let jobs = flag
        .or(config.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(Failure::bad_input("--jobs must be at least 1"));
    }
    Ok(jobs)
}

/// Maps `f` over `items` on a pool of `jobs` threads; results keep input order.
pub(crate) fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>, Failure>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::bad_input(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

/// Subdirectories of `root` that hold a volume named `stem`, sorted by name.
pub(crate) fn list_cases(root: &Path, stem: &str) -> Result<Vec<(String, PathBuf)>, Failure> {
    let entries = std::fs::read_dir(root)
        .map_err(|e| Failure::bad_input(format!("{}: {e}", root.display())))?;
    let mut cases = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_dir() && pair_paths(&path.join(stem)).0.is_file() {
            let id = path.file_name().unwrap().to_string_lossy().into_owned();
            cases.push((id, path));
        }
    }
    cases.sort();
    Ok(cases)
}

/// Returns the first failure in case order, after reporting every one.
pub(crate) fn first_failure<T>(
    results: Vec<(String, Result<T, Failure>)>,
) -> Result<Vec<(String, T)>, Failure> {
    let mut ok = Vec::new();
    let mut first = None;
    for (id, r) in results {
        match r {
            Ok(v) => ok.push((id, v)),
            Err(f) => {
                eprintln!("error: {id}: {f}");
                first.get_or_insert(f.context(&id));
            }
        }
    }
    match first {
        Some(f) => Err(f),
        None => Ok(ok),
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).map_err(|e| Failure::bad_input(format!("{}: {e}", path.display())))
}
