use crate::buyers::{DpBuyer, Truthful};
use crate::error::{Error, Result};
use crate::game::{acceptance_time, play_game, strategic_regret, GameConfig, Transcript};
use crate::sellers::PriceMachine;

/// Buyer used when searching for the worst valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessBuyer {
    Truthful,
    Optimal { cap: usize },
}

/// Valuation on a grid maximizing the seller's regret.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorstCase {
    pub valuation: f64,
    pub regret: f64,
    /// First acceptance at `v = 1`.
    pub kappa_min: Option<usize>,
    /// First acceptance at `v = 1/2`.
    pub kappa_max: Option<usize>,
    pub evaluated: usize,
}

fn play<M: PriceMachine>(seller: &M, buyer: WitnessBuyer, config: &GameConfig) -> Result<Transcript> {
    match buyer {
        WitnessBuyer::Truthful => play_game(seller, &mut Truthful::new(config.valuation()), config),
        WitnessBuyer::Optimal { cap } => {
            play_game(seller, &mut DpBuyer::new(seller, config, cap)?, config)
        }
    }
}

/// Play every valuation of `grid` and return the one with the largest
/// regret (the first one on ties).
pub fn worst_case_valuation<M: PriceMachine>(
    seller: &M,
    horizon: usize,
    gamma: f64,
    buyer: WitnessBuyer,
    grid: &[f64],
) -> Result<WorstCase> {
    if grid.is_empty() {
        return Err(Error::Empty("valuation grid".into()));
    }
    let base = GameConfig::new(horizon, gamma, 1.0)?;
    let mut best: Option<(f64, f64)> = None;
    for &v in grid {
        let config = base.with_valuation(v)?;
        let regret = strategic_regret(&play(seller, buyer, &config)?, &config)?;
        if best.map_or(true, |(_, r)| regret > r) {
            best = Some((v, regret));
        }
    }
    let (valuation, regret) = best.expect("grid is non-empty");
    let kappa_at = |v: f64| -> Result<Option<usize>> {
        let config = base.with_valuation(v)?;
        Ok(acceptance_time(&play(seller, buyer, &config)?))
    };
    Ok(WorstCase {
        valuation,
        regret,
        kappa_min: kappa_at(1.0)?,
        kappa_max: kappa_at(0.5)?,
        evaluated: grid.len(),
    })
}

/// `lo, lo + step, …` up to and including `hi` (within rounding).
pub fn valuation_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(lo <= hi) {
        return Err(Error::Parameter(format!(
            "invalid grid [{lo}, {hi}] with step {step}"
        )));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| (lo + i as f64 * step).min(hi)).collect())
}
