//! Batch runner for fockmet experiments: TOML configuration in, CSV tables
//! out.

// NaN must fail these checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{RunConfig, OUT_DIR_ENV};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// File name of the resolved-configuration echo.
pub const CONFIG_ECHO: &str = "resolved_config.toml";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        source: fockmet_core::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Validation { .. } => 2,
            CliError::Io { .. } | CliError::Numerical { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Value of [`OUT_DIR_ENV`], passed in so callers control the lookup.
    pub env_out: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Validates, resolves and runs `config`, then writes the echo and every
/// table. Nothing is written unless the whole run succeeds.
pub fn run(config: &RunConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut cfg = config.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let out_dir = cfg.output_dir(opts.out.as_deref(), opts.env_out.as_deref());
    cfg.output_path = out_dir.display().to_string();
    cfg.validate()?;
    let cfg = cfg.resolved()?;
    log::info!(
        "running {} into {}",
        cfg.experiment.name(),
        out_dir.display()
    );
    let outcome = experiments::execute(&cfg)?;

    let mut provenance = vec![
        format!("fockmet {VERSION}"),
        format!("experiment = {}", cfg.experiment.name()),
        format!("seed = {}", cfg.seed),
        format!("shots = {}", cfg.shots),
    ];
    provenance.extend(outcome.provenance);

    fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
        path: out_dir.clone(),
        source,
    })?;
    let mut files = Vec::new();
    let echo = format!(
        "# fockmet {VERSION} resolved configuration\n{}",
        cfg.to_toml()
    );
    files.push(write(&out_dir.join(CONFIG_ECHO), &echo)?);
    for t in &outcome.tables {
        files.push(write(
            &out_dir.join(format!("{}.csv", t.name)),
            &t.render(&provenance),
        )?);
    }
    Ok(RunReport { out_dir, files })
}

fn write(path: &Path, text: &str) -> Result<PathBuf, CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}
