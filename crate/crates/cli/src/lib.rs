//! Driver behind the `mpvlasov` binary: configuration, subcommands, CSV and
//! manifest output.

pub mod config;
pub mod csv;
pub mod manifest;
pub mod scenario;

use config::Config;
use manifest::Manifest;
use scenario::{Outcome, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};

/// Exit code for a run that completed with every invariant satisfied.
pub const EXIT_OK: i32 = 0;
/// Exit code for a violated invariant or a runtime failure.
pub const EXIT_FAILED: i32 = 1;
/// Exit code for an unusable configuration; nothing is written.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Subcommand,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub quiet: bool,
}

/// Loads the configuration, applying a seed override.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<Config, config::ConfigError> {
    let mut cfg = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn manifest(cmd: Subcommand, cfg: &Config, outcome: &Outcome, error: Option<String>) -> Manifest {
    let status = if error.is_some() {
        "error"
    } else if outcome.violations.is_empty() {
        "ok"
    } else {
        "violation"
    };
    Manifest {
        program: "mpvlasov",
        version: env!("CARGO_PKG_VERSION"),
        core_version: mpvlasov_core::VERSION,
        subcommand: cmd.name().to_string(),
        status: status.to_string(),
        config: cfg.echo().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        timings_seconds: outcome.timings.clone(),
        tolerances: outcome.tolerances.clone(),
        normalizations: manifest::normalizations(),
        lcg: manifest::lcg(),
        outputs: outcome.files.iter().map(|(n, _)| n.clone()).collect(),
        summary: outcome.summary.clone(),
        violations: outcome.violations.clone(),
        metrics: outcome.metrics.clone(),
        error,
    }
}

fn write_all(dir: &Path, files: &[(String, String)], m: &Manifest) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, body) in files {
        fs::write(dir.join(name), body)?;
    }
    let json = serde_json::to_string_pretty(m).expect("manifest serializes");
    fs::write(dir.join("manifest.json"), json + "\n")
}

/// Runs one invocation end to end and returns the process exit code.
pub fn execute(inv: &Invocation) -> i32 {
    let cfg = match load_config(inv.config.as_deref(), inv.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mpvlasov: {e}");
            return EXIT_CONFIG;
        }
    };
    let start = std::time::Instant::now();
    let (outcome, error) = match scenario::run(inv.command, &cfg) {
        Ok(o) => (o, None),
        Err(e) => (Outcome::default(), Some(e.to_string())),
    };
    let mut m = manifest(inv.command, &cfg, &outcome, error.clone());
    m.timings_seconds.insert("total".into(), start.elapsed().as_secs_f64());
    if let Err(e) = write_all(&inv.out, &outcome.files, &m) {
        eprintln!("mpvlasov: cannot write {}: {e}", inv.out.display());
        return EXIT_FAILED;
    }
    if !inv.quiet {
        for line in &outcome.summary {
            println!("{line}");
        }
    }
    if let Some(e) = error {
        eprintln!("mpvlasov: {}: {e}", inv.command);
        return EXIT_FAILED;
    }
    if outcome.violations.is_empty() {
        EXIT_OK
    } else {
        for v in &outcome.violations {
            eprintln!("violated: {v}");
        }
        EXIT_FAILED
    }
}
