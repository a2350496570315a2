//! Run configuration: flat `key = value` files overridden by flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::Params;

/// What a run computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Wave,
    Dispersion,
    Lecrit,
    Linear,
    Nonlinear,
    Validate,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Wave,
        Mode::Dispersion,
        Mode::Lecrit,
        Mode::Linear,
        Mode::Nonlinear,
        Mode::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Wave => "wave",
            Mode::Dispersion => "dispersion",
            Mode::Lecrit => "lecrit",
            Mode::Linear => "linear",
            Mode::Nonlinear => "nonlinear",
            Mode::Validate => "validate",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown mode '{s}'")))
    }
}

/// Everything a run needs; echoed into every artifact.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub theta_i: f64,
    pub le: f64,
    pub ell: f64,
    /// Cutoff half-plateau; `None` means R/8.
    pub delta: Option<f64>,
    pub a_ext: f64,
    pub b_ext: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_every: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Sample count of the wave profile and the growth curve.
    pub samples: usize,
    pub dealias: bool,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn defaults(mode: Mode) -> Self {
        let nonlinear = mode == Mode::Nonlinear;
        RunConfig {
            mode,
            theta_i: 0.75,
            le: 0.3,
            ell: 100.0,
            delta: None,
            a_ext: 10.0,
            b_ext: 10.0,
            n_x: 32,
            n_y: 64,
            dt: if nonlinear { 1e-5 } else { 1e-3 },
            t_final: 1.0,
            snapshot_every: if nonlinear { 1000 } else { 10 },
            epsilon: if nonlinear { 1e-3 } else { 1e-2 },
            seed: 0,
            samples: if mode == Mode::Dispersion { 100 } else { 401 },
            dealias: false,
            output_dir: PathBuf::from("out"),
        }
    }

    /// Defaults for the mode, then `pairs` applied in order.
    pub fn from_pairs(mode: Mode, pairs: &[(String, String)]) -> Result<Self> {
        let mut c = RunConfig::defaults(mode);
        for (k, v) in pairs {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Sets one field by its key; dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
        }
        match key.as_str() {
            "mode" => self.mode = value.parse()?,
            "theta_i" => self.theta_i = num(&key, value)?,
            "le" => self.le = num(&key, value)?,
            "ell" => self.ell = num(&key, value)?,
            "delta" => self.delta = Some(num(&key, value)?),
            "a" | "a_ext" => self.a_ext = num(&key, value)?,
            "b" | "b_ext" => self.b_ext = num(&key, value)?,
            "nx" | "n_x" => self.n_x = num(&key, value)?,
            "ny" | "n_y" => self.n_y = num(&key, value)?,
            "dt" => self.dt = num(&key, value)?,
            "t_final" => self.t_final = num(&key, value)?,
            "snapshot_every" => self.snapshot_every = num(&key, value)?,
            "eps" | "epsilon" => self.epsilon = num(&key, value)?,
            "seed" => self.seed = num(&key, value)?,
            "samples" => self.samples = num(&key, value)?,
            "dealias" => self.dealias = num(&key, value)?,
            "out" | "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Checks ranges and builds the model constants; errors name the field.
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    field,
                    reason: format!("{v} must be positive"),
                })
            }
        };
        if !(self.theta_i > 0.0 && self.theta_i < 1.0) {
            return Err(Error::InvalidParameter {
                field: "theta_i",
                reason: format!("{} must lie in (0, 1)", self.theta_i),
            });
        }
        positive("ell", self.ell)?;
        positive("le", self.le)?;
        positive("dt", self.dt)?;
        positive("a_ext", self.a_ext)?;
        positive("b_ext", self.b_ext)?;
        if !(self.t_final >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "t_final",
                reason: format!("{} must be nonnegative", self.t_final),
            });
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "epsilon",
                reason: format!("{} must be nonnegative", self.epsilon),
            });
        }
        if self.n_x < 4 {
            return Err(Error::InvalidParameter {
                field: "n_x",
                reason: format!("{} must be at least 4", self.n_x),
            });
        }
        if self.n_y < 4 || !self.n_y.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                field: "n_y",
                reason: format!("{} must be even and at least 4", self.n_y),
            });
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter {
                field: "samples",
                reason: format!("{} must be at least 2", self.samples),
            });
        }
        self.params().map(|_| ())
    }

    pub fn params(&self) -> Result<Params<f64>> {
        let base = Params::new(self.theta_i, self.le, self.ell)?;
        Params::with_geometry(
            self.theta_i,
            self.le,
            self.ell,
            self.delta.unwrap_or(base.delta),
            self.a_ext,
            self.b_ext,
        )
    }

    /// All fields as `key = value` pairs, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("mode", self.mode.to_string()),
            ("theta_i", self.theta_i.to_string()),
            ("le", self.le.to_string()),
            ("ell", self.ell.to_string()),
            (
                "delta",
                self.delta.map_or_else(|| "auto".to_string(), |d| d.to_string()),
            ),
            ("a_ext", self.a_ext.to_string()),
            ("b_ext", self.b_ext.to_string()),
            ("n_x", self.n_x.to_string()),
            ("n_y", self.n_y.to_string()),
            ("dt", self.dt.to_string()),
            ("t_final", self.t_final.to_string()),
            ("snapshot_every", self.snapshot_every.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("seed", self.seed.to_string()),
            ("samples", self.samples.to_string()),
            ("dealias", self.dealias.to_string()),
        ];
        out.push(("output_dir", self.output_dir.display().to_string()));
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let delta_auto = k.trim() == "delta" && v.trim() == "auto";
        if !delta_auto {
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    Ok(out)
}
