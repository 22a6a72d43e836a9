//! Run configuration: tolerances, default ladders, sieve limit, output
//! format, and the sweep seed. Parsed from a flat key=value file with
//! command-line overrides layered on top; the canonical string below is what
//! gets hashed into every output for reproducibility.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Plain,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "plain" => Ok(Self::Plain),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Json => "json",
            Self::Csv => "csv",
            Self::Plain => "plain",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunConfig {
    /// Tolerance for valuation extrapolation checks.
    pub extrapolation_tol: f64,
    /// R² below which exponent fits are flagged invalid.
    pub r2_threshold: f64,
    /// Tolerance for algebraic-identity residuals.
    pub residual_tol: f64,
    pub sieve_limit: u64,
    /// Deepest cover level the CLI will materialize.
    pub max_level: u32,
    pub format: OutputFormat,
    /// Seed for randomized sweeps; recorded in every output.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            extrapolation_tol: 1e-3,
            r2_threshold: 0.99,
            residual_tol: 1e-10,
            sieve_limit: 10_000_000,
            max_level: 40,
            format: OutputFormat::Json,
            seed: 20_260_809,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("extrapolation_tol", self.extrapolation_tol),
            ("r2_threshold", self.r2_threshold),
            ("residual_tol", self.residual_tol),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.sieve_limit < 10_000 {
            return Err(Error::Config(format!(
                "sieve_limit must be at least 10000, got {}",
                self.sieve_limit
            )));
        }
        if self.max_level == 0 {
            return Err(Error::Config("max_level must be at least 1".into()));
        }
        Ok(())
    }

    /// Apply one key=value pair (file line or flag override).
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("invalid float '{v}' for {key}")))
        };
        match key {
            "extrapolation_tol" => self.extrapolation_tol = parse_f64(value)?,
            "r2_threshold" => self.r2_threshold = parse_f64(value)?,
            "residual_tol" => self.residual_tol = parse_f64(value)?,
            "sieve_limit" => {
                self.sieve_limit = value
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("invalid integer '{value}' for {key}")))?
            }
            "max_level" => {
                self.max_level = value
                    .parse::<u32>()
                    .map_err(|_| Error::Config(format!("invalid integer '{value}' for {key}")))?
            }
            "format" => self.format = value.parse()?,
            "seed" => {
                self.seed = value
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("invalid integer '{value}' for {key}")))?
            }
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Parse a flat key=value file ('#' starts a comment).
    pub fn from_file_contents(contents: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in contents.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
            })?;
            cfg.apply_kv(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical rendering used for the config hash: fixed key order, one
    /// key=value per line.
    pub fn canonical_string(&self) -> String {
        format!(
            "extrapolation_tol={:e}\nformat={}\nmax_level={}\nr2_threshold={:e}\nresidual_tol={:e}\nseed={}\nsieve_limit={}\n",
            self.extrapolation_tol,
            self.format,
            self.max_level,
            self.r2_threshold,
            self.residual_tol,
            self.seed,
            self.sieve_limit,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.format, OutputFormat::Json);
    }

    #[test]
    fn file_parsing_and_overrides() {
        let cfg = RunConfig::from_file_contents(
            "# comment\nseed=42\nsieve_limit=20000\nformat=csv\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.sieve_limit, 20_000);
        assert_eq!(cfg.format, OutputFormat::Csv);

        assert!(RunConfig::from_file_contents("sieve_limit=10\n").is_err());
        assert!(RunConfig::from_file_contents("nonsense\n").is_err());
        assert!(RunConfig::from_file_contents("mystery=1\n").is_err());
    }

    #[test]
    fn canonical_string_is_stable() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.canonical_string(), cfg.canonical_string());
        let mut other = cfg.clone();
        other.seed = 7;
        assert_ne!(cfg.canonical_string(), other.canonical_string());
    }
}
