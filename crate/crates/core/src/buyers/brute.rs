use crate::error::{Error, Result};
use crate::game::GameConfig;
use crate::sellers::PriceMachine;

/// Largest horizon the exhaustive search accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

struct Search {
    gamma: f64,
    valuation: f64,
    horizon: usize,
    best: f64,
    best_path: Vec<bool>,
    path: Vec<bool>,
}

impl Search {
    fn visit<M: PriceMachine>(&mut self, machine: &M, t: usize, weight: f64, surplus: f64) {
        if t > self.horizon {
            // Accept-first traversal visits sequences in preference order,
            // so only a strictly better sequence replaces the incumbent.
            if surplus > self.best {
                self.best = surplus;
                self.best_path.clone_from(&self.path);
            }
            return;
        }
        let price = machine.quote();
        for accepted in [true, false] {
            let mut next = machine.clone();
            next.advance(accepted);
            let gained = if accepted {
                surplus + weight * (self.valuation - price)
            } else {
                surplus
            };
            self.path.push(accepted);
            self.visit(&next, t + 1, weight * self.gamma, gained);
            self.path.pop();
        }
    }
}

/// Enumerate all `2^T` decision sequences and return the one with the
/// largest discounted surplus. Among equal surpluses the sequence accepting
/// at the earliest differing round wins.
pub fn brute_force_best_response<M: PriceMachine>(
    seller: &M,
    config: &GameConfig,
) -> Result<(f64, Vec<bool>)> {
    if config.horizon() > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "exhaustive best response",
            requested: config.horizon(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if seller.horizon() != config.horizon() {
        return Err(Error::HorizonMismatch {
            seller: seller.horizon(),
            game: config.horizon(),
        });
    }
    let mut search = Search {
        gamma: config.gamma(),
        valuation: config.valuation(),
        horizon: config.horizon(),
        best: f64::NEG_INFINITY,
        best_path: Vec::new(),
        path: Vec::with_capacity(config.horizon()),
    };
    search.visit(seller, 1, 1.0, 0.0);
    Ok((search.best, search.best_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sellers::SellerMachine;

    #[test]
    fn bisection_three_rounds() {
        let c = GameConfig::new(3, 0.9, 0.75).unwrap();
        let (s, d) = brute_force_best_response(&SellerMachine::bisection(3), &c).unwrap();
        assert!((s - 0.75375).abs() < 1e-12);
        assert_eq!(d, vec![false, true, true]);
    }

    #[test]
    fn single_round() {
        for (v, accept) in [(0.4, false), (0.5, true), (0.9, true)] {
            let c = GameConfig::new(1, 0.5, v).unwrap();
            let (s, d) = brute_force_best_response(&SellerMachine::fast_search(1), &c).unwrap();
            assert_eq!(d, vec![accept]);
            assert_eq!(s, if accept { v - 0.5 } else { 0.0 });
        }
    }

    #[test]
    fn ties_prefer_early_acceptance() {
        // Every price equals v: all sequences have zero surplus.
        let c = GameConfig::new(3, 0.5, 0.0).unwrap();
        let seller = SellerMachine::monotone_sequence_from(vec![0.0], 3).unwrap();
        let (s, d) = brute_force_best_response(&seller, &c).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(d, vec![true, true, true]);
    }

    #[test]
    fn guard() {
        let c = GameConfig::new(21, 0.5, 0.5).unwrap();
        assert!(matches!(
            brute_force_best_response(&SellerMachine::fast_search(21), &c),
            Err(Error::TooLarge { limit: 20, .. })
        ));
    }
}
