//! Buyer decision rules: truthful, exact best response, the constant
//! false-valuation buyer, and an exhaustive oracle.

mod brute;
mod dp;

use crate::error::{Error, Result};
use crate::game::{discounted_surplus, play_game, BuyerPolicy, GameConfig, Round};
use crate::sellers::PriceMachine;

pub use brute::{brute_force_best_response, BRUTE_FORCE_LIMIT};
pub use dp::{optimal_surplus, DpBuyer, ValueFunction, ValueFunctionEntry, DEFAULT_DP_CAP};

/// Grid step of the false-valuation buyer when none is given.
pub const DEFAULT_GRID_STEP: f64 = 0.03;

/// Accepts exactly the prices at or below its valuation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truthful {
    valuation: f64,
}

impl Truthful {
    pub fn new(valuation: f64) -> Self {
        Truthful { valuation }
    }
}

impl<M: PriceMachine> BuyerPolicy<M> for Truthful {
    fn decide(&mut self, _t: usize, seller: &M, _history: &[Round]) -> bool {
        seller.quote() <= self.valuation
    }

    fn name(&self) -> String {
        "truthful".into()
    }
}

/// Behaves truthfully for a declared valuation that may differ from the
/// real one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FalseValuation {
    declared: f64,
}

impl FalseValuation {
    pub fn new(declared: f64) -> Self {
        FalseValuation { declared }
    }

    pub fn declared(&self) -> f64 {
        self.declared
    }
}

impl<M: PriceMachine> BuyerPolicy<M> for FalseValuation {
    fn decide(&mut self, _t: usize, seller: &M, _history: &[Round]) -> bool {
        seller.quote() <= self.declared
    }

    fn name(&self) -> String {
        "grid".into()
    }
}

/// Replays a fixed decision list; rejects once the list runs out.
#[derive(Clone, Debug, PartialEq)]
pub struct Scripted {
    decisions: Vec<bool>,
}

impl Scripted {
    pub fn new(decisions: Vec<bool>) -> Self {
        Scripted { decisions }
    }
}

impl<M: PriceMachine> BuyerPolicy<M> for Scripted {
    fn decide(&mut self, t: usize, _seller: &M, _history: &[Round]) -> bool {
        self.decisions.get(t - 1).copied().unwrap_or(false)
    }

    fn name(&self) -> String {
        "scripted".into()
    }
}

/// Buyer kinds the harness can request.
#[derive(Clone, Debug, PartialEq)]
pub enum BuyerSpec {
    Truthful,
    /// Exact best response, refusing beyond `cap` memo entries.
    Optimal { cap: usize },
    /// Best constant false valuation on a grid of the given step.
    Grid { step: f64 },
    BruteForce,
    Scripted { decisions: Vec<bool> },
}

/// Instantiate the buyer described by `spec` against `seller`.
pub fn make_buyer<M: PriceMachine + 'static>(
    spec: &BuyerSpec,
    seller: &M,
    config: &GameConfig,
) -> Result<Box<dyn BuyerPolicy<M>>> {
    let v = config.valuation();
    Ok(match spec {
        BuyerSpec::Truthful => Box::new(Truthful::new(v)),
        BuyerSpec::Optimal { cap } => Box::new(DpBuyer::new(seller, config, *cap)?),
        BuyerSpec::Grid { step } => {
            let (declared, _) = best_false_valuation(seller, config, *step)?;
            Box::new(FalseValuation::new(declared))
        }
        BuyerSpec::BruteForce => {
            let (_, decisions) = brute_force_best_response(seller, config)?;
            Box::new(Scripted::new(decisions))
        }
        BuyerSpec::Scripted { decisions } => Box::new(Scripted::new(decisions.clone())),
    })
}

/// Candidate declared valuations `{step, 2·step, …} ∪ {v}`, all at most `v`.
pub fn false_valuation_grid(valuation: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Parameter(format!("grid step must be positive, got {step}")));
    }
    // Points within 1e-9 of v are represented by v itself.
    let mut grid: Vec<f64> = (1..)
        .map(|k| k as f64 * step)
        .take_while(|x| *x < valuation - 1e-9)
        .collect();
    grid.push(valuation);
    Ok(grid)
}

/// Best constant false valuation for the buyer, scored with the true
/// valuation. Ties go to the largest (most truthful) declaration.
pub fn best_false_valuation<M: PriceMachine>(
    seller: &M,
    config: &GameConfig,
    step: f64,
) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for declared in false_valuation_grid(config.valuation(), step)? {
        let transcript = play_game(seller, &mut FalseValuation::new(declared), config)?;
        let surplus = discounted_surplus(&transcript, config)?;
        if best.map_or(true, |(_, s)| surplus >= s) {
            best = Some((declared, surplus));
        }
    }
    Ok(best.expect("grid always contains the true valuation"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::play_game;
    use crate::sellers::{PenaltySemantics, SellerMachine};

    #[test]
    fn grid_has_25_points_for_075() {
        let g = false_valuation_grid(0.75, 0.03).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(*g.last().unwrap(), 0.75);
        assert!((g[0] - 0.03).abs() < 1e-15);
        assert_eq!(false_valuation_grid(0.02, 0.03).unwrap(), vec![0.02]);
        assert!(false_valuation_grid(0.5, 0.0).is_err());
    }

    #[test]
    fn near_myopic_buyer_does_not_lie_to_fast_search() {
        let c = GameConfig::new(200, 0.01, 0.62).unwrap();
        let (declared, _) = best_false_valuation(&SellerMachine::fast_search(200), &c, 0.03).unwrap();
        assert_eq!(declared, 0.62);
    }

    #[test]
    fn patient_buyer_underdeclares_to_monotone() {
        let t = 1000usize;
        let gamma = 0.95;
        let beta = 1.0 - 1.0 / (t as f64 / (1.0 - gamma)).sqrt();
        let c = GameConfig::new(t, gamma, 0.75).unwrap();
        let seller = SellerMachine::monotone_geometric(beta, t).unwrap();
        let (declared, surplus) = best_false_valuation(&seller, &c, 0.03).unwrap();
        assert!(declared < 0.75, "declared {declared}");
        let truthful = play_game(&seller, &mut Truthful::new(0.75), &c).unwrap();
        assert!(surplus >= discounted_surplus(&truthful, &c).unwrap());
    }

    #[test]
    fn make_buyer_kinds() {
        let c = GameConfig::new(6, 0.7, 0.6).unwrap();
        let seller = SellerMachine::penalized(2, PenaltySemantics::Strict, 6).unwrap();
        let specs = [
            BuyerSpec::Truthful,
            BuyerSpec::Optimal { cap: DEFAULT_DP_CAP },
            BuyerSpec::Grid { step: 0.1 },
            BuyerSpec::BruteForce,
            BuyerSpec::Scripted { decisions: vec![true; 6] },
        ];
        let mut surpluses = Vec::new();
        for spec in &specs {
            let mut b = make_buyer(spec, &seller, &c).unwrap();
            let tr = play_game(&seller, &mut b, &c).unwrap();
            surpluses.push(discounted_surplus(&tr, &c).unwrap());
        }
        let dp = surpluses[1];
        assert!((dp - surpluses[3]).abs() < 1e-12);
        assert!(surpluses.iter().all(|s| *s <= dp + 1e-12));
    }

    #[test]
    fn large_r_small_gamma_dp_is_truthful() {
        for t in [5usize, 9, 12] {
            for v in [0.15, 0.4, 0.66, 0.9] {
                let c = GameConfig::new(t, 0.05, v).unwrap();
                let seller = SellerMachine::penalized(6, PenaltySemantics::Strict, t).unwrap();
                let mut dp = DpBuyer::new(&seller, &c, DEFAULT_DP_CAP).unwrap();
                let a = play_game(&seller, &mut dp, &c).unwrap();
                let b = play_game(&seller, &mut Truthful::new(v), &c).unwrap();
                assert_eq!(a, b, "T={t} v={v}");
            }
        }
    }
}
