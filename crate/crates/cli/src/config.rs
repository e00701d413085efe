//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment. Numbers may be written as
//! `pi`, `4*pi` or `2.5`. Unknown and repeated keys are rejected.

use mpvlasov_core::gridcore::DiffScheme;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("invalid `{key}`: {msg}")]
    Invalid { key: &'static str, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldModeKind {
    SelfConsistent,
    Prescribed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BackgroundKind {
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub length: f64,
    pub nq: usize,
    pub np: usize,
    pub pmax: f64,
    pub dt: f64,
    pub t_end: f64,
    pub mass: f64,
    pub charge: f64,
    pub k: usize,
    pub scheme: DiffScheme,
    pub field_mode: FieldModeKind,
    pub seed: u64,
    pub order_cap: usize,
    pub bernoulli_half_factor: bool,
    /// Instances of the exact algebra corpus.
    pub instances: usize,
    /// Instances of the grid dual checks.
    pub dual_instances: usize,
    /// Perturbation amplitude of the initial data.
    pub alpha: f64,
    /// Index of the perturbed Fourier mode, `k = 2π·mode/L`.
    pub mode: usize,
    /// Amplitude of the prescribed potential `phi_amp·sin(kq)`.
    pub phi_amp: f64,
    /// Neutralizing background density.
    pub background: BackgroundKind,
    /// Steps between phase-space snapshots; 0 keeps only the first and last.
    pub snapshot_every: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            length: 4.0 * PI,
            nq: 64,
            np: 128,
            pmax: 8.0,
            dt: 0.01,
            t_end: 1.0,
            mass: 1.0,
            charge: 1.0,
            k: 4,
            scheme: DiffScheme::Fourier,
            field_mode: FieldModeKind::SelfConsistent,
            seed: 1,
            order_cap: mpvlasov_core::schouten::DEFAULT_ORDER_CAP,
            bernoulli_half_factor: false,
            instances: 100,
            dual_instances: 50,
            alpha: 0.01,
            mode: 1,
            phi_amp: 0.0,
            background: BackgroundKind::Auto,
            snapshot_every: 0,
        }
    }
}

pub const KEYS: [&str; 21] = [
    "L",
    "Nq",
    "Np",
    "Pmax",
    "dt",
    "t_end",
    "m",
    "e",
    "K",
    "scheme",
    "field_mode",
    "seed",
    "order_cap",
    "bernoulli_half_factor",
    "instances",
    "dual_instances",
    "alpha",
    "mode",
    "phi_amp",
    "background",
    "snapshot_every",
];

fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if s == "pi" {
        return Some(PI);
    }
    if let Some(coef) = s.strip_suffix("*pi") {
        return coef.trim().parse::<f64>().ok().map(|c| c * PI);
    }
    s.parse::<f64>().ok()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "on" | "yes" | "1" => Some(true),
        "false" | "off" | "no" | "0" => Some(false),
        _ => None,
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                msg: format!("expected `key = value`, got `{body}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.into(),
                });
            }
            if seen.insert(key.to_string(), line).is_some() {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.into(),
                });
            }
            cfg.set(key, value).map_err(|msg| ConfigError::Syntax { line, msg })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let real = || parse_real(value).ok_or_else(|| format!("`{key}` needs a number, got `{value}`"));
        let count = || {
            value
                .parse::<usize>()
                .map_err(|_| format!("`{key}` needs a non-negative integer, got `{value}`"))
        };
        match key {
            "L" => self.length = real()?,
            "Nq" => self.nq = count()?,
            "Np" => self.np = count()?,
            "Pmax" => self.pmax = real()?,
            "dt" => self.dt = real()?,
            "t_end" => self.t_end = real()?,
            "m" => self.mass = real()?,
            "e" => self.charge = real()?,
            "K" => self.k = count()?,
            "scheme" => {
                self.scheme = value
                    .parse()
                    .map_err(|_| format!("`scheme` is FD4 or Fourier, got `{value}`"))?
            }
            "field_mode" => {
                self.field_mode = match value {
                    "self_consistent" => FieldModeKind::SelfConsistent,
                    "prescribed" => FieldModeKind::Prescribed,
                    _ => return Err(format!("`field_mode` is self_consistent or prescribed, got `{value}`")),
                }
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| format!("`seed` needs an unsigned integer, got `{value}`"))?
            }
            "order_cap" => self.order_cap = count()?,
            "bernoulli_half_factor" => {
                self.bernoulli_half_factor =
                    parse_bool(value).ok_or_else(|| format!("`{key}` needs true or false, got `{value}`"))?
            }
            "instances" => self.instances = count()?,
            "dual_instances" => self.dual_instances = count()?,
            "alpha" => self.alpha = real()?,
            "mode" => self.mode = count()?,
            "phi_amp" => self.phi_amp = real()?,
            "background" => {
                self.background = if value == "auto" {
                    BackgroundKind::Auto
                } else {
                    BackgroundKind::Fixed(real()?)
                }
            }
            "snapshot_every" => self.snapshot_every = count()?,
            _ => unreachable!("key list checked by the caller"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Invalid {
                    key,
                    msg: format!("must be positive and finite, got {v}"),
                })
            }
        };
        positive("L", self.length)?;
        positive("Pmax", self.pmax)?;
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("m", self.mass)?;
        let finite = |key: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Invalid {
                    key,
                    msg: "must be finite".into(),
                })
            }
        };
        finite("e", self.charge)?;
        finite("alpha", self.alpha)?;
        finite("phi_amp", self.phi_amp)?;
        if let BackgroundKind::Fixed(v) = self.background {
            finite("background", v)?;
        }
        let at_least = |key: &'static str, v: usize, lo: usize| {
            if v >= lo {
                Ok(())
            } else {
                Err(ConfigError::Invalid {
                    key,
                    msg: format!("must be at least {lo}, got {v}"),
                })
            }
        };
        at_least("Nq", self.nq, 8)?;
        at_least("Np", self.np, 16)?;
        at_least("K", self.k, 2)?;
        at_least("order_cap", self.order_cap, 1)?;
        at_least("mode", self.mode, 1)?;
        if self.mode >= self.nq / 2 {
            return Err(ConfigError::Invalid {
                key: "mode",
                msg: format!("must be below the Nyquist index {}", self.nq / 2),
            });
        }
        if self.scheme == DiffScheme::Fourier {
            for (key, n) in [("Nq", self.nq), ("Np", self.np)] {
                if !n.is_power_of_two() {
                    return Err(ConfigError::Invalid {
                        key,
                        msg: format!("must be a power of two with the Fourier scheme, got {n}"),
                    });
                }
            }
        }
        if self.dt > self.t_end {
            return Err(ConfigError::Invalid {
                key: "dt",
                msg: format!("exceeds t_end = {}", self.t_end),
            });
        }
        Ok(())
    }

    /// Number of steps of length `dt` covering `t_end`, rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }

    /// Wavenumber of the perturbed mode.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI * self.mode as f64 / self.length
    }

    /// Canonical `key -> value` echo, in the key order of the config format.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let field_mode = match self.field_mode {
            FieldModeKind::SelfConsistent => "self_consistent".to_string(),
            FieldModeKind::Prescribed => "prescribed".to_string(),
        };
        let background = match self.background {
            BackgroundKind::Auto => "auto".to_string(),
            BackgroundKind::Fixed(v) => format!("{v:e}"),
        };
        vec![
            ("L", format!("{:e}", self.length)),
            ("Nq", self.nq.to_string()),
            ("Np", self.np.to_string()),
            ("Pmax", format!("{:e}", self.pmax)),
            ("dt", format!("{:e}", self.dt)),
            ("t_end", format!("{:e}", self.t_end)),
            ("m", format!("{:e}", self.mass)),
            ("e", format!("{:e}", self.charge)),
            ("K", self.k.to_string()),
            ("scheme", self.scheme.to_string()),
            ("field_mode", field_mode),
            ("seed", self.seed.to_string()),
            ("order_cap", self.order_cap.to_string()),
            ("bernoulli_half_factor", self.bernoulli_half_factor.to_string()),
            ("instances", self.instances.to_string()),
            ("dual_instances", self.dual_instances.to_string()),
            ("alpha", format!("{:e}", self.alpha)),
            ("mode", self.mode.to_string()),
            ("phi_amp", format!("{:e}", self.phi_amp)),
            ("background", background),
            ("snapshot_every", self.snapshot_every.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_pi() {
        let cfg = Config::parse(
            "# free streaming\nL = 4*pi\nNq = 128 # grid\n\nfield_mode = prescribed\nbernoulli_half_factor = true\n",
        )
        .unwrap();
        assert!((cfg.length - 4.0 * PI).abs() < 1e-15);
        assert_eq!(cfg.nq, 128);
        assert_eq!(cfg.field_mode, FieldModeKind::Prescribed);
        assert!(cfg.bernoulli_half_factor);
        assert_eq!(cfg.np, Config::default().np);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Config::parse("Nq 64"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(Config::parse("nq = 64"), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(Config::parse("Nq = 64\nNq = 32"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(Config::parse("dt = -1"), Err(ConfigError::Invalid { key: "dt", .. })));
        assert!(matches!(Config::parse("Nq = 48"), Err(ConfigError::Invalid { key: "Nq", .. })));
        assert!(Config::parse("Nq = 48\nscheme = FD4").is_ok());
        assert!(matches!(Config::parse("m = 0"), Err(ConfigError::Invalid { key: "m", .. })));
        assert!(matches!(Config::parse("scheme = spectral"), Err(ConfigError::Syntax { .. })));
    }

    #[test]
    fn echo_round_trips() {
        let cfg = Config::parse("L = 3\nbackground = 0.5\nseed = 42").unwrap();
        let text: String = cfg.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(Config::parse(&text).unwrap(), cfg);
    }
}
