//! Run configuration: defaults, then a `key = value` file, then flags.
//! `HF_SEED` in the environment overrides every other seed source.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hypersmooth::lineelement::PhysicalConstants;
use hypersmooth::{Lc, Rational, TruncationPolicy};
use serde::Serialize;

use crate::UsageError;

pub const DEFAULT_SEED: u64 = 1;
pub const SEED_ENV: &str = "HF_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(UsageError(format!("unknown format {other:?} (expected csv or json)"))),
        }
    }
}

/// The transition parameter: a standard positive rational or an infinitesimal series.
#[derive(Debug, Clone, PartialEq)]
pub enum Parameter {
    Standard(Rational),
    Series(Lc),
}

impl Parameter {
    pub fn epsilon() -> Self {
        Parameter::Series(Lc::epsilon(Rational::one()))
    }

    pub fn as_series(&self) -> Lc {
        match self {
            Parameter::Standard(q) => Lc::constant(q.clone()),
            Parameter::Series(x) => x.clone(),
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parameter::Standard(q) => write!(f, "{q}"),
            Parameter::Series(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Parameter {
    type Err = UsageError;

    /// `eps`/`epsilon`, a rational such as `1/2` or `0.25`, or a series such as `2*e^(1)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let parsed = if matches!(t, "eps" | "epsilon" | "e") {
            Parameter::epsilon()
        } else if let Ok(q) = t.parse::<Rational>() {
            Parameter::Standard(q)
        } else {
            let x: Lc = t
                .parse()
                .map_err(|e| UsageError(format!("cannot parse a = {t:?}: {e}")))?;
            if x.is_standard() {
                Parameter::Standard(x.coefficient(&Rational::zero()))
            } else {
                Parameter::Series(x)
            }
        };
        let positive = match &parsed {
            Parameter::Standard(q) => q.is_positive(),
            Parameter::Series(x) => x.signum().is_gt(),
        };
        if !positive {
            return Err(UsageError(format!("a must be > 0, got {t}")));
        }
        Ok(parsed)
    }
}

/// Options shared by every subcommand, before merging.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub g: Option<String>,
    pub m: Option<String>,
    pub c: Option<String>,
    pub a: Option<String>,
    pub window: Option<String>,
    pub max_terms: Option<String>,
    pub out: Option<String>,
    pub format: Option<String>,
    pub seed: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub constants: PhysicalConstants,
    pub a: Option<Parameter>,
    pub policy: TruncationPolicy,
    pub out: PathBuf,
    pub format: Format,
    pub seed: u64,
    pub seed_source: &'static str,
}

const KNOWN_KEYS: [&str; 9] = ["G", "M", "c", "a", "window", "max_terms", "out", "format", "seed"];

/// Reads a `key = value` file. Values may be bare numbers or quoted strings,
/// so `M = 1.5` and `M = "3/2"` are equivalent.
pub fn read_config_file(path: &Path) -> Result<Overrides, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    let table: BTreeMap<String, toml::Value> = toml::from_str(&text)
        .map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))?;
    let mut o = Overrides::default();
    for (key, value) in table {
        let v = match value {
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            other => {
                return Err(UsageError(format!("config key {key}: unsupported value {other}")));
            }
        };
        let slot = match key.as_str() {
            "G" => &mut o.g,
            "M" => &mut o.m,
            "c" => &mut o.c,
            "a" => &mut o.a,
            "window" => &mut o.window,
            "max_terms" => &mut o.max_terms,
            "out" => &mut o.out,
            "format" => &mut o.format,
            "seed" => &mut o.seed,
            _ => {
                return Err(UsageError(format!(
                    "unknown config key {key:?} (known: {})",
                    KNOWN_KEYS.join(", ")
                )));
            }
        };
        *slot = Some(v);
    }
    Ok(o)
}

fn pick(flag: &Option<String>, file: &Option<String>) -> Option<String> {
    flag.clone().or_else(|| file.clone())
}

fn rational(name: &str, v: Option<String>, default: i64) -> Result<Rational, UsageError> {
    match v {
        None => Ok(Rational::from_integer(default)),
        Some(s) => s
            .parse()
            .map_err(|e| UsageError(format!("{name}: {e}"))),
    }
}

fn parse_seed(s: &str, source: &str) -> Result<u64, UsageError> {
    s.trim()
        .parse()
        .map_err(|_| UsageError(format!("{source}: seed must be an unsigned integer, got {s:?}")))
}

impl RunConfig {
    /// Flags win over the file; `env_seed` (the value of `HF_SEED`) wins over both.
    pub fn resolve(
        flags: &Overrides,
        file: &Overrides,
        env_seed: Option<&str>,
    ) -> Result<Self, UsageError> {
        let g = rational("G", pick(&flags.g, &file.g), 1)?;
        let m = rational("M", pick(&flags.m, &file.m), 1)?;
        let c = rational("c", pick(&flags.c, &file.c), 1)?;
        let constants =
            PhysicalConstants::new(g, m, c).map_err(|e| UsageError(e.to_string()))?;

        let a = pick(&flags.a, &file.a).map(|s| s.parse()).transpose()?;

        let window = match pick(&flags.window, &file.window) {
            Some(s) => s.parse().map_err(|e| UsageError(format!("window: {e}")))?,
            None => Rational::from_integer(TruncationPolicy::DEFAULT_WINDOW),
        };
        let max_terms = match pick(&flags.max_terms, &file.max_terms) {
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| UsageError(format!("max_terms must be an integer, got {s:?}")))?,
            None => TruncationPolicy::DEFAULT_MAX_TERMS,
        };
        let policy =
            TruncationPolicy::new(window, max_terms).map_err(|e| UsageError(e.to_string()))?;

        let out = PathBuf::from(pick(&flags.out, &file.out).unwrap_or_else(|| ".".into()));
        let format = match pick(&flags.format, &file.format) {
            Some(s) => s.parse()?,
            None => Format::Csv,
        };

        let (seed, seed_source) = if let Some(s) = env_seed {
            (parse_seed(s, SEED_ENV)?, "env")
        } else if let Some(s) = &flags.seed {
            (parse_seed(s, "--seed")?, "flag")
        } else if let Some(s) = &file.seed {
            (parse_seed(s, "config")?, "config")
        } else {
            (DEFAULT_SEED, "default")
        };

        Ok(RunConfig {
            constants,
            a,
            policy,
            out,
            format,
            seed,
            seed_source,
        })
    }
}
