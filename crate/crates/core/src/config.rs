// Copyright 2026 The chain-transport Authors
// SPDX-License-Identifier: Apache-2.0

//! TOML run configuration for single simulations.
//!
//! ```toml
//! [chain]
//! omega = [1.0, 1.0]
//! lambda = [0.1]
//! kappa = [0.1, 0.1]
//! kappa_sink = 0.6
//!
//! [[dephasing]]          # one entry per site, or a single entry for all
//! gamma0 = 0.1
//! J = 10.0
//! theta = "pi/3"
//!
//! [integrator]
//! residual_eps = 1e-6
//!
//! [output]
//! dir = "out"
//! record_every = 0.05
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Result, TransportError};
use crate::integrator::IntegratorConfig;
use crate::model::{ChainModel, DephasingSchedule};

/// Parses an angle: a plain number or a product/quotient of numbers and
/// `pi`, e.g. `pi/3`, `-pi/4`, `2*pi/3`, `0.8`.
pub fn parse_angle(src: &str) -> std::result::Result<f64, String> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
    };
    if body.is_empty() {
        return Err(format!("empty angle expression {src:?}"));
    }
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = body;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let (tok, tail) = rest.split_at(end);
        let factor = match tok {
            "pi" | "PI" | "π" => std::f64::consts::PI,
            "" => return Err(format!("malformed angle expression {src:?}")),
            num => num.parse::<f64>().map_err(|_| format!("bad token {num:?} in angle {src:?}"))?,
        };
        match op {
            '*' => value *= factor,
            _ => value /= factor,
        }
        let mut chars = tail.chars();
        match chars.next() {
            None => break,
            Some(c) => {
                op = c;
                rest = chars.as_str();
            }
        }
    }
    let v = sign * value;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("angle {src:?} is not finite"))
    }
}

/// Serde helper accepting either a number or an angle expression string.
pub fn de_angle<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Int(i64),
        Expr(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Int(v) => Ok(v as f64),
        Raw::Expr(s) => parse_angle(&s).map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Minimum spacing of trajectory rows; `0` keeps every accepted step.
    #[serde(default)]
    pub record_every: f64,
    #[serde(default = "default_until")]
    pub record_until: f64,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_until() -> f64 {
    f64::INFINITY
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir(), record_every: 0.0, record_until: default_until() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    chain: ChainModel,
    #[serde(default)]
    dephasing: Vec<DephasingSchedule>,
    #[serde(default)]
    integrator: IntegratorConfig,
    #[serde(default)]
    output: OutputConfig,
}

/// Command-line overrides applied on top of a configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub t_max: Option<f64>,
    pub residual_eps: Option<f64>,
}

/// Fully validated single-simulation specification.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub model: ChainModel,
    pub schedules: Vec<DephasingSchedule>,
    pub integrator: IntegratorConfig,
    pub output: OutputConfig,
}

impl RunSpec {
    pub fn from_toml(text: &str, overrides: &Overrides) -> Result<Self> {
        let file: RunFile = toml::from_str(text).map_err(|e| TransportError::Config(e.to_string()))?;
        let n = file.chain.n_sites();
        let schedules = match file.dephasing.len() {
            0 => vec![DephasingSchedule::none(); n],
            1 => vec![file.dephasing[0]; n],
            k if k == n => file.dephasing,
            k => {
                return Err(TransportError::Config(format!(
                    "{k} dephasing entries for {n} sites (give 1 or {n})"
                )))
            }
        };
        let mut spec = RunSpec { model: file.chain, schedules, integrator: file.integrator, output: file.output };
        if let Some(dir) = &overrides.out {
            spec.output.dir = dir.clone();
        }
        if let Some(t) = overrides.t_max {
            spec.integrator.t_max = t;
        }
        if let Some(eps) = overrides.residual_eps {
            spec.integrator.residual_eps = eps;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TransportError::io(path, e))?;
        RunSpec::from_toml(&text, overrides).map_err(|e| match e {
            TransportError::Config(msg) => TransportError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks everything that can be checked before integrating, including
    /// rate poles inside the integration horizon.
    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if !(self.output.record_every >= 0.0 && self.output.record_every.is_finite()) {
            return Err(TransportError::Config("record_every must be finite and non-negative".into()));
        }
        if self.schedules.len() != self.model.n_sites() {
            return Err(TransportError::Config("schedule count does not match chain length".into()));
        }
        for s in &self.schedules {
            if let Some(t) = s.first_pole(self.integrator.t_max) {
                return Err(TransportError::SingularSchedule { t, j: s.j(), theta: s.theta() });
            }
        }
        Ok(())
    }
}
