//! Model constants and their flat key-value file format.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of `u'(t) = -gamma u(t) - kappa1 u(t - a1 - c u(t)) - kappa2 u(t - a2 - c u(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub gamma: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub a1: f64,
    pub a2: f64,
    pub c: f64,
}

impl Default for Parameters {
    fn default() -> Self {
        Self {
            gamma: 4.75,
            kappa1: 0.0,
            kappa2: 0.0,
            a1: 1.3,
            a2: 6.0,
            c: 1.0,
        }
    }
}

pub const KEYS: [&str; 6] = ["gamma", "kappa1", "kappa2", "a1", "a2", "c"];

impl Parameters {
    /// Default constants with the given feedback strengths.
    pub fn with_kappa(kappa1: f64, kappa2: f64) -> Self {
        Self {
            kappa1,
            kappa2,
            ..Self::default()
        }
    }

    /// Same constants, new feedback strengths.
    pub fn set_kappa(mut self, kappa1: f64, kappa2: f64) -> Self {
        self.kappa1 = kappa1;
        self.kappa2 = kappa2;
        self
    }

    pub fn new(gamma: f64, kappa1: f64, kappa2: f64, a1: f64, a2: f64, c: f64) -> Result<Self> {
        let p = Self {
            gamma,
            kappa1,
            kappa2,
            a1,
            a2,
            c,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks the structural invariants (finite values, sign constraints, `a2 > a1`).
    ///
    /// `gamma > kappa2` is not checked here; it is only required where the
    /// well-posedness bounds are used.
    pub fn validate(&self) -> Result<()> {
        for (k, v) in KEYS.iter().zip(self.values()) {
            if !v.is_finite() {
                return Err(Error::InvalidParameters(format!("{k} is not finite")));
            }
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameters("gamma must be positive".into()));
        }
        if self.kappa1 < 0.0 || self.kappa2 < 0.0 {
            return Err(Error::InvalidParameters(
                "feedback strengths must be non-negative".into(),
            ));
        }
        if self.a1 <= 0.0 || self.a2 <= self.a1 {
            return Err(Error::InvalidParameters(
                "delays must satisfy 0 < a1 < a2".into(),
            ));
        }
        if self.c < 0.0 {
            return Err(Error::InvalidParameters("c must be non-negative".into()));
        }
        Ok(())
    }

    pub fn is_well_posed(&self) -> bool {
        self.gamma > self.kappa2
    }

    pub fn values(&self) -> [f64; 6] {
        [
            self.gamma,
            self.kappa1,
            self.kappa2,
            self.a1,
            self.a2,
            self.c,
        ]
    }

    pub fn kappa(&self, j: usize) -> f64 {
        match j {
            1 => self.kappa1,
            2 => self.kappa2,
            _ => panic!("kappa index must be 1 or 2"),
        }
    }

    pub fn delay(&self, j: usize) -> f64 {
        match j {
            1 => self.a1,
            2 => self.a2,
            _ => panic!("delay index must be 1 or 2"),
        }
    }

    fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "gamma" => self.gamma = value,
            "kappa1" => self.kappa1 = value,
            "kappa2" => self.kappa2 = value,
            "a1" => self.a1 = value,
            "a2" => self.a2 = value,
            "c" => self.c = value,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines. `#` starts a comment; missing keys keep defaults.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut p = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "line {}: '{}' is not a number",
                    lineno + 1,
                    value.trim()
                ))
            })?;
            p.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse_config(&text)
    }

    /// Writes every key in decimal notation with round-trip precision.
    pub fn to_config(&self) -> String {
        let mut out = String::from("# twodelay parameters\n");
        for (k, v) in KEYS.iter().zip(self.values()) {
            let _ = writeln!(out, "{k} = {v:?}");
        }
        out
    }
}
