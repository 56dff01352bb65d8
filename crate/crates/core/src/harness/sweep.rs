use std::time::Instant;

use rayon::prelude::*;

use super::config::{BetaPolicy, BuyerConfig, ExperimentConfig, RPolicy, ResolvedSeller, SellerConfig};
use crate::analysis::{monotone_lower_bound, optimal_penalty_regret_bound, pfs_regret_bound};
use crate::buyers::{best_false_valuation, DpBuyer, FalseValuation, Truthful};
use crate::error::{Error, Result};
use crate::game::{play_game, score, GameConfig, Transcript};
use crate::sellers::PenaltySemantics;

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "PPLAB_THREADS";

/// One (seller, horizon) cell of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub seller: String,
    /// Buyer that actually ran, or `skipped:<reason>`.
    pub buyer: String,
    pub semantics: Option<PenaltySemantics>,
    pub horizon: usize,
    pub gamma: f64,
    pub gamma0: Option<f64>,
    pub v: f64,
    pub r: Option<u32>,
    pub beta: Option<f64>,
    pub grid_step: Option<f64>,
    pub revenue: Option<f64>,
    pub regret: Option<f64>,
    pub surplus: Option<f64>,
    pub kappa_star: Option<usize>,
    pub lie_count: Option<usize>,
    pub best_false_valuation: Option<f64>,
    pub bound_eq_reggamma: Option<f64>,
    pub bound_thm1: Option<f64>,
    pub lower_prop1: f64,
    pub wall_ms: Option<f64>,
}

impl SweepRow {
    pub fn is_skipped(&self) -> bool {
        self.buyer.starts_with("skipped:")
    }
}

struct Played {
    buyer: String,
    transcript: Transcript,
    declared: Option<f64>,
    step: Option<f64>,
}

fn play_grid(seller: &ResolvedSeller, game: &GameConfig, step: f64) -> Result<Played> {
    let (declared, _) = best_false_valuation(&seller.machine, game, step)?;
    Ok(Played {
        buyer: "grid".into(),
        transcript: play_game(&seller.machine, &mut FalseValuation::new(declared), game)?,
        declared: Some(declared),
        step: Some(step),
    })
}

fn play_dp(seller: &ResolvedSeller, game: &GameConfig, cap: usize) -> Result<Played> {
    let mut dp = DpBuyer::new(&seller.machine, game, cap)?;
    Ok(Played {
        buyer: "dp".into(),
        transcript: play_game(&seller.machine, &mut dp, game)?,
        declared: None,
        step: None,
    })
}

/// Play one cell. An inner `Err` carries the reason the cell was skipped.
fn play_cell(
    seller: &ResolvedSeller,
    game: &GameConfig,
    buyer: BuyerConfig,
) -> Result<std::result::Result<Played, String>> {
    Ok(Ok(match buyer {
        BuyerConfig::Truthful => Played {
            buyer: "truthful".into(),
            transcript: play_game(&seller.machine, &mut Truthful::new(game.valuation()), game)?,
            declared: None,
            step: None,
        },
        BuyerConfig::Grid { step } => play_grid(seller, game, step)?,
        BuyerConfig::Dp { cap } => match play_dp(seller, game, cap) {
            Err(Error::Intractable { cap }) => {
                return Ok(Err(format!("dp state cap {cap} exceeded")));
            }
            other => other?,
        },
        BuyerConfig::Auto { cap, step } => match play_dp(seller, game, cap) {
            Err(Error::Intractable { .. }) => play_grid(seller, game, step)?,
            other => other?,
        },
    }))
}

fn run_cell(
    config: &ExperimentConfig,
    seller_idx: usize,
    label: &str,
    horizon: usize,
) -> Result<SweepRow> {
    let start = Instant::now();
    let seller = config.sellers[seller_idx].resolve(config, horizon)?;
    let game = GameConfig::new(horizon, config.gamma, config.v)?;
    let mut row = SweepRow {
        seller: label.to_string(),
        buyer: String::new(),
        semantics: seller.semantics,
        horizon,
        gamma: config.gamma,
        gamma0: config.gamma0,
        v: config.v,
        r: seller.r,
        beta: seller.beta,
        grid_step: None,
        revenue: None,
        regret: None,
        surplus: None,
        kappa_star: None,
        lie_count: None,
        best_false_valuation: None,
        bound_eq_reggamma: seller
            .r
            .map(|r| pfs_regret_bound(config.gamma, config.v, horizon, r)),
        bound_thm1: match (seller.r, config.gamma0) {
            (Some(_), Some(g0)) => Some(optimal_penalty_regret_bound(g0, config.v, horizon)),
            _ => None,
        },
        lower_prop1: monotone_lower_bound(horizon),
        wall_ms: None,
    };
    match play_cell(&seller, &game, config.buyer)? {
        Ok(played) => {
            let outcome = score(&played.transcript, &game)?;
            row.buyer = played.buyer;
            row.grid_step = played.step;
            row.best_false_valuation = played.declared;
            row.revenue = Some(outcome.revenue);
            row.regret = Some(outcome.regret);
            row.surplus = Some(outcome.surplus);
            row.kappa_star = outcome.kappa_star;
            row.lie_count = Some(outcome.lie_count);
        }
        Err(reason) => row.buyer = format!("skipped:{reason}"),
    }
    if config.timing {
        row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(row)
}

fn policy_suffix(seller: &SellerConfig) -> Option<String> {
    match seller {
        SellerConfig::Monotone { beta: BetaPolicy::Auto } => Some("beta=auto".into()),
        SellerConfig::Monotone { beta: BetaPolicy::Fixed { value } } => Some(format!("beta={value}")),
        SellerConfig::Pfs { r, semantics } => {
            let r = match r {
                RPolicy::Fixed { value } => value.to_string(),
                RPolicy::CeilLogT => "ceil-log-t".into(),
                RPolicy::Auto => "auto".into(),
            };
            Some(match semantics {
                Some(sem) => format!("r={r},{sem}"),
                None => format!("r={r}"),
            })
        }
        SellerConfig::FastSearch | SellerConfig::Bisection => None,
    }
}

/// Series label of every configured seller: the bare algorithm name, with
/// the policy appended when two sellers share a name, and the config
/// position appended if that still collides.
pub fn seller_labels(sellers: &[SellerConfig]) -> Vec<String> {
    let count = |f: &dyn Fn(usize) -> String, x: &str| {
        (0..sellers.len()).filter(|&j| f(j) == x).count()
    };
    let bare = |i: usize| sellers[i].label().to_string();
    let described = |i: usize| {
        let name = bare(i);
        if count(&bare, &name) == 1 {
            return name;
        }
        match policy_suffix(&sellers[i]) {
            Some(suffix) => format!("{name}({suffix})"),
            None => name,
        }
    };
    (0..sellers.len())
        .map(|i| {
            let label = described(i);
            if count(&described, &label) == 1 {
                label
            } else {
                format!("{label}#{}", i + 1)
            }
        })
        .collect()
}

/// Worker count: the config value (or all cores), lowered by `PPLAB_THREADS`.
pub fn worker_count(config: &ExperimentConfig) -> usize {
    let from_env = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|n| *n > 0);
    let base = config
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    from_env.map_or(base, |n| n.min(base))
}

/// Play every seller at every horizon. Rows come back ordered by seller
/// (in config order), then horizon, whatever the worker count.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let horizons = config.horizons.resolve()?;
    let jobs: Vec<(usize, usize)> = (0..config.sellers.len())
        .flat_map(|s| horizons.iter().map(move |&t| (s, t)))
        .collect();
    let labels = seller_labels(&config.sellers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(config))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut rows: Vec<(usize, SweepRow)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(s, t)| run_cell(config, s, &labels[s], t).map(|row| (s, row)))
            .collect::<Result<_>>()
    })?;
    rows.sort_by_key(|(s, row)| (*s, row.horizon));
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}
