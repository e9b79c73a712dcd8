//! Experiment configuration: a JSON file mirroring the CLI flags, with flags
//! taking precedence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::digits::{parse_digit_specs, DigitSetSpec, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 0.1;

/// Which digit position the chain normalizes by.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PivotPolicy {
    /// The largest digit set (first on ties).
    #[default]
    Auto,
    /// Zero-based position.
    Index(usize),
}

impl FromStr for PivotPolicy {
    type Err = Error;

    /// `auto`, or a one-based position.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(PivotPolicy::Auto);
        }
        match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(PivotPolicy::Index(n - 1)),
            _ => Err(Error::Config(format!("pivot must be `auto` or a position >= 1, got {s:?}"))),
        }
    }
}

impl fmt::Display for PivotPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PivotPolicy::Auto => f.write_str("auto"),
            PivotPolicy::Index(i) => write!(f, "{}", i + 1),
        }
    }
}

impl Serialize for PivotPolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PivotPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(usize),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Num(n) => n.to_string(),
            Raw::Text(t) => t,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Digit sets as one `;`/`,`-separated string or a list of specs.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum DigitsField {
    Joined(String),
    Each(Vec<String>),
}

impl DigitsField {
    pub fn specs(&self) -> Result<Vec<DigitSetSpec>> {
        match self {
            DigitsField::Joined(s) => parse_digit_specs(s),
            DigitsField::Each(v) => v.iter().map(|s| s.parse()).collect(),
        }
    }
}

/// Digit-set family used by sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Independent seeded k-subsets per position.
    #[default]
    Random,
    /// D_i = {0, ..., k-1} for every position.
    Range,
    /// D_i = F_p; one instance per (p, r).
    Full,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Family::Random),
            "range" => Ok(Family::Range),
            "full" => Ok(Family::Full),
            _ => Err(Error::Config(format!("unknown family {s:?}"))),
        }
    }
}

/// An explicitly listed instance appended to a sweep.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtraInstance {
    pub p: u64,
    pub r: usize,
    pub digits: DigitsField,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub primes: Vec<u64>,
    pub degrees: Vec<usize>,
    pub family: Family,
    pub min_size: u64,
    /// Defaults to p.
    pub max_size: Option<u64>,
    /// Repetitions per (p, r, size) for the random family.
    pub seeds: u64,
    /// Run the proof-chain diagnostics on every row.
    pub chain: bool,
    pub extra: Vec<ExtraInstance>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            primes: Vec::new(),
            degrees: Vec::new(),
            family: Family::Random,
            min_size: 2,
            max_size: None,
            seeds: 1,
            chain: true,
            extra: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaConfig {
    pub primes: Vec<u64>,
    pub degrees: Vec<usize>,
    pub orders: Vec<u64>,
    /// Exhaustive when the unordered pair count is at most this.
    pub pair_cap: u64,
    /// Pairs drawn when sampling.
    pub samples: u64,
    /// Sample even when exhaustive would fit under the cap.
    pub force_sampling: bool,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            primes: Vec::new(),
            degrees: Vec::new(),
            orders: vec![2],
            pair_cap: 1_000_000,
            samples: 500,
            force_sampling: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub p: Option<u64>,
    pub r: Option<usize>,
    /// Polynomial text, constant term first.
    pub modulus: Option<String>,
    pub digits: Option<DigitsField>,
    pub pivot: PivotPolicy,
    pub eps: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub cap: u64,
    pub sweep: Option<SweepConfig>,
    pub lemma: Option<LemmaConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p: None,
            r: None,
            modulus: None,
            digits: None,
            pivot: PivotPolicy::Auto,
            eps: DEFAULT_EPS,
            seed: 0,
            out: None,
            cap: DEFAULT_ENUMERATION_CAP,
            sweep: None,
            lemma: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses JSON text; errors carry the line and column.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn require_p(&self) -> Result<u64> {
        self.p.ok_or_else(|| Error::Config("missing field `p`".into()))
    }

    pub fn require_r(&self) -> Result<usize> {
        self.r.ok_or_else(|| Error::Config("missing field `r`".into()))
    }
}
