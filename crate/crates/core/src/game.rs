//! Game parameters, play records and the round-by-round engine.
//!
//! The seller's revenue is undiscounted; only the buyer discounts, with
//! weight `γ^(t-1)` on round `t` (and `0^0 = 1`, so `γ = 0` is the myopic
//! buyer).

use crate::error::{Error, Result};
use crate::sellers::PriceMachine;

/// Horizon, discount factor and buyer valuation of one game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameConfig {
    horizon: usize,
    gamma: f64,
    valuation: f64,
}

impl GameConfig {
    pub fn new(horizon: usize, gamma: f64, valuation: f64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Config("horizon T must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Config(format!("discount factor must lie in [0, 1), got {gamma}")));
        }
        if !(0.0..=1.0).contains(&valuation) {
            return Err(Error::Config(format!("valuation must lie in [0, 1], got {valuation}")));
        }
        Ok(GameConfig {
            horizon,
            gamma,
            valuation,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn valuation(&self) -> f64 {
        self.valuation
    }

    /// Same game with a different valuation.
    pub fn with_valuation(&self, valuation: f64) -> Result<Self> {
        GameConfig::new(self.horizon, self.gamma, valuation)
    }

    /// Buyer's discount weight of round `t` (1-based).
    pub fn discount(&self, t: usize) -> f64 {
        self.gamma.powi((t - 1) as i32)
    }
}

/// One round of play.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Round {
    pub t: usize,
    pub price: f64,
    pub accepted: bool,
}

/// Full record of a game.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    rounds: Vec<Round>,
}

impl Transcript {
    /// Build a transcript from `(price, accepted)` pairs numbered from 1.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, bool)>) -> Result<Self> {
        let rounds: Vec<Round> = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (price, accepted))| Round {
                t: i + 1,
                price,
                accepted,
            })
            .collect();
        if let Some(r) = rounds.iter().find(|r| !(0.0..=1.0).contains(&r.price)) {
            return Err(Error::Parameter(format!(
                "price {} at round {} outside [0, 1]",
                r.price, r.t
            )));
        }
        Ok(Transcript { rounds })
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.rounds.iter().map(|r| r.price)
    }

    pub fn decisions(&self) -> Vec<bool> {
        self.rounds.iter().map(|r| r.accepted).collect()
    }

    /// Sum of accepted prices.
    pub fn revenue(&self) -> f64 {
        self.rounds
            .iter()
            .filter(|r| r.accepted)
            .map(|r| r.price)
            .sum()
    }
}

/// A rule deciding, each round, whether the buyer accepts the offer.
///
/// The buyer sees the announced machine in its current state, which carries
/// everything the history determines about future prices.
pub trait BuyerPolicy<M: PriceMachine> {
    fn decide(&mut self, t: usize, seller: &M, history: &[Round]) -> bool;

    fn name(&self) -> String;
}

impl<M: PriceMachine, B: BuyerPolicy<M> + ?Sized> BuyerPolicy<M> for Box<B> {
    fn decide(&mut self, t: usize, seller: &M, history: &[Round]) -> bool {
        (**self).decide(t, seller, history)
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

/// Play `seller` against `buyer` for the configured horizon.
///
/// The seller is cloned; the caller's machine is left in its initial state.
pub fn play_game<M, B>(seller: &M, buyer: &mut B, config: &GameConfig) -> Result<Transcript>
where
    M: PriceMachine,
    B: BuyerPolicy<M> + ?Sized,
{
    if seller.horizon() != config.horizon() {
        return Err(Error::HorizonMismatch {
            seller: seller.horizon(),
            game: config.horizon(),
        });
    }
    let mut machine = seller.clone();
    let mut rounds = Vec::with_capacity(config.horizon());
    for t in 1..=config.horizon() {
        let price = machine.quote();
        debug_assert!((0.0..=1.0).contains(&price), "price {price} outside [0, 1]");
        let accepted = buyer.decide(t, &machine, &rounds);
        rounds.push(Round { t, price, accepted });
        machine.advance(accepted);
    }
    Ok(Transcript { rounds })
}

fn check_length(transcript: &Transcript, config: &GameConfig) -> Result<()> {
    if transcript.len() != config.horizon() {
        return Err(Error::LengthMismatch {
            expected: config.horizon(),
            actual: transcript.len(),
        });
    }
    Ok(())
}

/// `Σ γ^(t-1) a_t (v - p_t)`. Negative when the buyer overpaid.
pub fn discounted_surplus(transcript: &Transcript, config: &GameConfig) -> Result<f64> {
    check_length(transcript, config)?;
    let v = config.valuation();
    let mut weight = 1.0;
    let mut total = 0.0;
    for r in transcript.rounds() {
        if r.accepted {
            total += weight * (v - r.price);
        }
        weight *= config.gamma();
    }
    Ok(total)
}

/// `T v - Σ a_t p_t`.
pub fn strategic_regret(transcript: &Transcript, config: &GameConfig) -> Result<f64> {
    check_length(transcript, config)?;
    Ok(config.horizon() as f64 * config.valuation() - transcript.revenue())
}

/// First round with an acceptance.
pub fn acceptance_time(transcript: &Transcript) -> Option<usize> {
    transcript.rounds().iter().find(|r| r.accepted).map(|r| r.t)
}

/// Rounds where the buyer rejected a price strictly below her valuation.
pub fn lie_count(transcript: &Transcript, valuation: f64) -> usize {
    transcript
        .rounds()
        .iter()
        .filter(|r| !r.accepted && r.price < valuation)
        .count()
}

/// Scores of a finished game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameOutcome {
    pub revenue: f64,
    pub regret: f64,
    pub surplus: f64,
    pub kappa_star: Option<usize>,
    pub lie_count: usize,
}

pub fn score(transcript: &Transcript, config: &GameConfig) -> Result<GameOutcome> {
    Ok(GameOutcome {
        revenue: transcript.revenue(),
        regret: strategic_regret(transcript, config)?,
        surplus: discounted_surplus(transcript, config)?,
        kappa_star: acceptance_time(transcript),
        lie_count: lie_count(transcript, config.valuation()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buyers::{Scripted, Truthful};
    use crate::sellers::SellerMachine;

    fn cfg(t: usize, gamma: f64, v: f64) -> GameConfig {
        GameConfig::new(t, gamma, v).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(GameConfig::new(0, 0.5, 0.5).is_err());
        assert!(GameConfig::new(3, 1.0, 0.5).is_err());
        assert!(GameConfig::new(3, -0.1, 0.5).is_err());
        assert!(GameConfig::new(3, 0.5, 1.5).is_err());
        assert!(GameConfig::new(3, 0.0, 0.0).is_ok());
    }

    #[test]
    fn monotone_half_truthful_v075() {
        let c = cfg(4, 0.9, 0.75);
        let seller = SellerMachine::monotone_geometric(0.5, 4).unwrap();
        let tr = play_game(&seller, &mut Truthful::new(0.75), &c).unwrap();
        let pairs: Vec<_> = tr.rounds().iter().map(|r| (r.t, r.price, r.accepted)).collect();
        assert_eq!(
            pairs,
            vec![(1, 1.0, false), (2, 0.5, true), (3, 0.5, true), (4, 0.5, true)]
        );
        assert_eq!(strategic_regret(&tr, &c).unwrap(), 1.5);
        assert_eq!(acceptance_time(&tr), Some(2));
        let out = score(&tr, &c).unwrap();
        assert_eq!(out.lie_count, 0);
        assert_eq!(out.revenue, 1.5);
    }

    #[test]
    fn valuation_one_accepts_everything() {
        let c = cfg(5, 0.7, 1.0);
        let seller = SellerMachine::monotone_geometric(0.3, 5).unwrap();
        let tr = play_game(&seller, &mut Truthful::new(1.0), &c).unwrap();
        assert!(tr.rounds().iter().all(|r| r.accepted && r.price == 1.0));
        assert_eq!(strategic_regret(&tr, &c).unwrap(), 0.0);
    }

    #[test]
    fn surplus_examples() {
        let c = cfg(3, 0.9, 0.75);
        let tr = Transcript::from_pairs([(0.5, false), (0.25, true), (0.375, true)]).unwrap();
        let s = discounted_surplus(&tr, &c).unwrap();
        assert!((s - 0.75375).abs() < 1e-12);

        let none = Transcript::from_pairs([(0.5, false); 3]).unwrap();
        assert_eq!(discounted_surplus(&none, &c).unwrap(), 0.0);

        let one = Transcript::from_pairs([(0.3, true)]).unwrap();
        assert_eq!(discounted_surplus(&one, &cfg(1, 0.5, 0.8)).unwrap(), 0.8 - 0.3);
    }

    #[test]
    fn gamma_zero_keeps_first_round() {
        let c = cfg(2, 0.0, 0.8);
        let tr = Transcript::from_pairs([(0.3, true), (0.1, true)]).unwrap();
        assert_eq!(discounted_surplus(&tr, &c).unwrap(), 0.8 - 0.3);
    }

    #[test]
    fn regret_examples() {
        let c = cfg(10, 0.5, 0.6);
        let none = Transcript::from_pairs([(0.9, false); 10]).unwrap();
        assert_eq!(strategic_regret(&none, &c).unwrap(), 6.0);
        let all = Transcript::from_pairs([(0.6, true); 10]).unwrap();
        assert!(strategic_regret(&all, &c).unwrap().abs() < 1e-12);
    }

    #[test]
    fn acceptance_time_examples() {
        let none = Transcript::from_pairs([(0.9, false); 4]).unwrap();
        assert_eq!(acceptance_time(&none), None);
        let third = Transcript::from_pairs([(0.9, false), (0.8, false), (0.7, true), (0.7, false)])
            .unwrap();
        assert_eq!(acceptance_time(&third), Some(3));
    }

    #[test]
    fn length_and_horizon_mismatch() {
        let c = cfg(3, 0.5, 0.5);
        let tr = Transcript::from_pairs([(0.5, true)]).unwrap();
        assert!(matches!(
            discounted_surplus(&tr, &c),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(strategic_regret(&tr, &c).is_err());
        let seller = SellerMachine::fast_search(4);
        assert!(matches!(
            play_game(&seller, &mut Truthful::new(0.5), &c),
            Err(Error::HorizonMismatch { seller: 4, game: 3 })
        ));
    }

    #[test]
    fn scripted_replay_reproduces_transcript() {
        let c = cfg(30, 0.8, 0.63);
        let seller = SellerMachine::fast_search(30);
        let tr = play_game(&seller, &mut Truthful::new(0.63), &c).unwrap();
        let replay = play_game(&seller, &mut Scripted::new(tr.decisions()), &c).unwrap();
        assert_eq!(tr, replay);
    }

    #[test]
    fn lies_counted() {
        let tr = Transcript::from_pairs([(0.5, false), (0.75, false), (0.2, true)]).unwrap();
        assert_eq!(lie_count(&tr, 0.75), 1);
    }
}
