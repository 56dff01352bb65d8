use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{r_star, RStarMethod};
use crate::buyers::{DEFAULT_DP_CAP, DEFAULT_GRID_STEP};
use crate::error::{Error, Result};
use crate::sellers::{PenaltySemantics, SellerMachine};

/// Schema version this build reads and writes.
pub const CONFIG_VERSION: u32 = 1;

/// Geometric ratio of the monotone seller.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum BetaPolicy {
    Fixed { value: f64 },
    /// `1 - 1/√(T T_γ)`.
    Auto,
}

/// Penalty length of penalized fast search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum RPolicy {
    Fixed { value: u32 },
    /// `max(1, ⌈ln T⌉)`.
    CeilLogT,
    /// `⌈r̄*⌉` for `γ₀`, the minimizer of the penalty objective.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SellerConfig {
    Monotone {
        beta: BetaPolicy,
    },
    FastSearch,
    Pfs {
        r: RPolicy,
        /// Overrides the experiment-wide semantics.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        semantics: Option<PenaltySemantics>,
    },
    Bisection,
}

impl SellerConfig {
    pub fn label(&self) -> &'static str {
        match self {
            SellerConfig::Monotone { .. } => "monotone",
            SellerConfig::FastSearch => "fast-search",
            SellerConfig::Pfs { .. } => "pfs",
            SellerConfig::Bisection => "bisection",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BuyerConfig {
    Truthful,
    Grid {
        #[serde(default = "default_step")]
        step: f64,
    },
    /// Exact best response; rows beyond the cap are marked skipped.
    Dp {
        #[serde(default = "default_cap")]
        cap: usize,
    },
    /// Exact best response, falling back to the grid buyer beyond the cap.
    Auto {
        #[serde(default = "default_cap")]
        cap: usize,
        #[serde(default = "default_step")]
        step: f64,
    },
}

fn default_step() -> f64 {
    DEFAULT_GRID_STEP
}

fn default_cap() -> usize {
    DEFAULT_DP_CAP
}

impl Default for BuyerConfig {
    fn default() -> Self {
        BuyerConfig::Grid {
            step: DEFAULT_GRID_STEP,
        }
    }
}

/// Horizons as an explicit list or a log-spaced range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizons {
    List(Vec<usize>),
    LogSpaced { from: usize, to: usize, points: usize },
}

impl Horizons {
    /// Sorted, de-duplicated horizons.
    pub fn resolve(&self) -> Result<Vec<usize>> {
        let mut ts = match self {
            Horizons::List(ts) => ts.clone(),
            Horizons::LogSpaced { from, to, points } => {
                if *from == 0 || from > to || *points == 0 {
                    return Err(Error::Config(format!(
                        "invalid log-spaced horizons from {from} to {to} with {points} points"
                    )));
                }
                if *points == 1 {
                    vec![*from]
                } else {
                    let (lo, hi) = ((*from as f64).ln(), (*to as f64).ln());
                    (0..*points)
                        .map(|i| (lo + (hi - lo) * i as f64 / (*points - 1) as f64).exp().round() as usize)
                        .collect()
                }
            }
        };
        if ts.contains(&0) {
            return Err(Error::Config("horizons must be at least 1".into()));
        }
        ts.sort_unstable();
        ts.dedup();
        Ok(ts)
    }
}

/// Axis scale of the regret chart.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axes {
    #[default]
    LogLog,
    LinearLinear,
    LogLinear,
    LinearLog,
}

impl Axes {
    /// `(x is log, y is log)`.
    pub fn log_flags(self) -> (bool, bool) {
        match self {
            Axes::LogLog => (true, true),
            Axes::LinearLinear => (false, false),
            Axes::LogLinear => (true, false),
            Axes::LinearLog => (false, true),
        }
    }
}

impl std::str::FromStr for Axes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-log" => Ok(Axes::LogLog),
            "linear-linear" => Ok(Axes::LinearLinear),
            "log-linear" => Ok(Axes::LogLinear),
            "linear-log" => Ok(Axes::LinearLog),
            other => Err(Error::Config(format!("unknown axes spec '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    #[serde(default)]
    pub axes: Axes,
}

/// One sweep: every seller is played at every horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub sellers: Vec<SellerConfig>,
    #[serde(default)]
    pub buyer: BuyerConfig,
    pub horizons: Horizons,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    pub v: f64,
    #[serde(default)]
    pub semantics: PenaltySemantics,
    #[serde(default)]
    pub output: OutputConfig,
    /// Worker cap; `PPLAB_THREADS` lowers it further.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Recorded for reproducibility; every built-in component is
    /// deterministic.
    #[serde(default)]
    pub seed: u64,
    /// Fill the `wall_ms` column. Off by default so output is reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    /// Monotone (auto β) against PFS with `r = ⌈ln T⌉`, grid buyer,
    /// nine log-spaced horizons in `[100, 10000]`.
    pub fn figure(gamma: f64, v: f64) -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            sellers: vec![
                SellerConfig::Monotone {
                    beta: BetaPolicy::Auto,
                },
                SellerConfig::Pfs {
                    r: RPolicy::CeilLogT,
                    semantics: None,
                },
            ],
            buyer: BuyerConfig::default(),
            horizons: Horizons::LogSpaced {
                from: 100,
                to: 10_000,
                points: 9,
            },
            gamma,
            gamma0: None,
            v,
            semantics: PenaltySemantics::Strict,
            output: OutputConfig::default(),
            threads: None,
            seed: 0,
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Json {
            path: PathBuf::from("<inline>"),
            source: e,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.v) {
            return Err(Error::Config(format!("v must lie in [0, 1], got {}", self.v)));
        }
        if let Some(g0) = self.gamma0 {
            if !(g0 > 0.0 && g0 < 1.0) {
                return Err(Error::Config(format!("gamma0 must lie in (0, 1), got {g0}")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        match self.buyer {
            BuyerConfig::Grid { step } | BuyerConfig::Auto { step, .. } if !(step > 0.0) => {
                return Err(Error::Config(format!("grid step must be positive, got {step}")));
            }
            _ => {}
        }
        for seller in &self.sellers {
            match seller {
                SellerConfig::Monotone {
                    beta: BetaPolicy::Fixed { value },
                } if !(*value > 0.0 && *value < 1.0) => {
                    return Err(Error::Config(format!("beta must lie in (0, 1), got {value}")));
                }
                SellerConfig::Pfs {
                    r: RPolicy::Fixed { value: 0 },
                    ..
                } => return Err(Error::Config("r must be at least 1".into())),
                SellerConfig::Pfs {
                    r: RPolicy::Auto, ..
                } if self.gamma0.is_none() => {
                    return Err(Error::Config("r policy 'auto' requires gamma0".into()));
                }
                _ => {}
            }
        }
        self.horizons.resolve()?;
        Ok(())
    }
}

/// A seller with its policies evaluated at one horizon.
#[derive(Clone, Debug)]
pub struct ResolvedSeller {
    pub machine: SellerMachine,
    pub label: &'static str,
    pub beta: Option<f64>,
    pub r: Option<u32>,
    pub semantics: Option<PenaltySemantics>,
}

/// `1 - 1/√(T T_γ)`.
pub fn auto_beta(horizon: usize, gamma: f64) -> f64 {
    1.0 - 1.0 / (horizon as f64 / (1.0 - gamma)).sqrt()
}

/// `max(1, ⌈ln T⌉)`.
pub fn ceil_log_r(horizon: usize) -> u32 {
    ((horizon as f64).ln().ceil() as u32).max(1)
}

impl SellerConfig {
    pub fn resolve(&self, config: &ExperimentConfig, horizon: usize) -> Result<ResolvedSeller> {
        let base = ResolvedSeller {
            machine: SellerMachine::bisection(horizon),
            label: self.label(),
            beta: None,
            r: None,
            semantics: None,
        };
        Ok(match self {
            SellerConfig::Monotone { beta } => {
                let beta = match beta {
                    BetaPolicy::Fixed { value } => *value,
                    BetaPolicy::Auto => auto_beta(horizon, config.gamma),
                };
                // T = 1 gives β = 0 under the auto policy; nudge into (0, 1).
                let beta = beta.max(f64::MIN_POSITIVE);
                ResolvedSeller {
                    machine: SellerMachine::monotone_geometric(beta, horizon)?,
                    beta: Some(beta),
                    ..base
                }
            }
            SellerConfig::FastSearch => ResolvedSeller {
                machine: SellerMachine::fast_search(horizon),
                ..base
            },
            SellerConfig::Pfs { r, semantics } => {
                let r = match r {
                    RPolicy::Fixed { value } => *value,
                    RPolicy::CeilLogT => ceil_log_r(horizon),
                    RPolicy::Auto => {
                        let g0 = config
                            .gamma0
                            .ok_or_else(|| Error::Config("r policy 'auto' requires gamma0".into()))?;
                        r_star(g0, horizon, RStarMethod::ClosedForm)?.r_star
                    }
                };
                let semantics = semantics.unwrap_or(config.semantics);
                ResolvedSeller {
                    machine: SellerMachine::penalized(r, semantics, horizon)?,
                    r: Some(r),
                    semantics: Some(semantics),
                    ..base
                }
            }
            SellerConfig::Bisection => base,
        })
    }
}
