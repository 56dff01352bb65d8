//! Announced seller algorithms as explicit, cloneable state machines.
//!
//! Every machine exposes the same three-part contract: a `quote` for the
//! current round, an `advance` that consumes the buyer's decision, and a
//! canonical `state_key` such that two machines with equal keys produce
//! identical futures. The exact best-response solver memoizes on that key.

mod fast_search;
mod tree;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fast_search::{trace_phases, FastSearchPhaseState, PhaseRecord};
pub use tree::{
    check_consistent, left_increment, node_tree, price_tree, ConsistencyReport, ConsistencyViolation,
    PriceTree, PriceTreeNode, MAX_TREE_DEPTH,
};

/// Canonical, hashable encoding of a seller's internal state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(pub [u64; 3]);

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}:{:016x}:{:016x}", self.0[0], self.0[1], self.0[2])
    }
}

/// A deterministic pricing algorithm announced to the buyer.
pub trait PriceMachine: Clone {
    /// Number of rounds the machine was built for.
    fn horizon(&self) -> usize;

    /// Price offered in the current state.
    fn quote(&self) -> f64;

    /// Consume the buyer's decision for the current quote.
    fn advance(&mut self, accepted: bool);

    /// Canonical encoding of the current state, if the machine has one.
    fn state_key(&self) -> Option<StateKey>;

    /// Price the machine will offer forever regardless of the buyer's
    /// decisions, once it has stopped learning.
    fn frozen_price(&self) -> Option<f64> {
        None
    }

    /// True when the current quote re-offers a price the buyer already
    /// rejected at this node under strict penalty semantics. For consistent
    /// machines accepting such a re-offer is weakly dominated by accepting
    /// the first offer, so the best-response solver only lets the buyer
    /// reject here.
    fn is_penalty_requote(&self) -> bool {
        false
    }

    /// True at the first offer of a decision node, false inside the rounds
    /// of a penalty. Machines without penalties are always at a fresh node.
    fn at_fresh_node(&self) -> bool {
        true
    }

    /// Short human-readable name.
    fn label(&self) -> String;
}

/// How a penalized search treats rounds after a rejection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltySemantics {
    /// A rejected price is re-offered until it has been rejected `r` times in
    /// total; accepting any re-offer moves to the accept branch.
    #[default]
    Strict,
    /// After the first rejection the price is offered `r` more rounds, then
    /// the machine moves to the reject branch whatever the buyer did.
    Literal,
}

impl fmt::Display for PenaltySemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltySemantics::Strict => f.write_str("strict"),
            PenaltySemantics::Literal => f.write_str("literal"),
        }
    }
}

/// Fully resolved description of a seller algorithm.
#[derive(Clone, Debug, PartialEq)]
pub enum SellerSpec {
    /// `1, β, β², …` until the first acceptance, then frozen.
    MonotoneGeometric { beta: f64 },
    /// Explicit non-increasing price list starting at 1, then frozen.
    MonotoneSequence { prices: Vec<f64> },
    /// Phase-based feasible-interval search.
    FastSearch,
    /// Fast search with a rejected price re-offered for `r` rounds.
    Penalized { r: u32, semantics: PenaltySemantics },
    /// Binary search on `[0, 1]`.
    Bisection,
}

#[derive(Clone, Debug, PartialEq)]
enum Machine {
    Geometric {
        beta: f64,
        price: f64,
        frozen: bool,
    },
    Sequence {
        prices: Arc<[f64]>,
        index: usize,
        frozen: bool,
    },
    FastSearch(FastSearchPhaseState),
    Penalized {
        search: FastSearchPhaseState,
        r: u32,
        semantics: PenaltySemantics,
        // Strict: rejections of the current price so far.
        // Literal: penalty rounds still to be served.
        counter: u32,
    },
    Bisection {
        lo: f64,
        hi: f64,
    },
}

const TAG_GEOMETRIC: u64 = 1;
const TAG_SEQUENCE: u64 = 2;
const TAG_FAST_SEARCH: u64 = 3;
const TAG_PENALIZED: u64 = 4;
const TAG_BISECTION: u64 = 5;

/// One of the built-in seller algorithms, with its current state.
#[derive(Clone, Debug, PartialEq)]
pub struct SellerMachine {
    horizon: usize,
    machine: Machine,
}

/// Build the machine for `spec` over `horizon` rounds.
pub fn make_seller(spec: &SellerSpec, horizon: usize) -> Result<SellerMachine> {
    if horizon == 0 {
        return Err(Error::Parameter("horizon must be at least 1".into()));
    }
    let machine = match spec {
        SellerSpec::MonotoneGeometric { beta } => {
            if !(*beta > 0.0 && *beta < 1.0) {
                return Err(Error::Parameter(format!("beta must lie in (0, 1), got {beta}")));
            }
            Machine::Geometric {
                beta: *beta,
                price: 1.0,
                frozen: false,
            }
        }
        SellerSpec::MonotoneSequence { prices } => {
            validate_sequence(prices)?;
            if prices[0] != 1.0 {
                return Err(Error::Parameter(format!(
                    "explicit sequence must start at price 1, got {}",
                    prices[0]
                )));
            }
            Machine::Sequence {
                prices: prices.as_slice().into(),
                index: 0,
                frozen: false,
            }
        }
        SellerSpec::FastSearch => Machine::FastSearch(FastSearchPhaseState::new(horizon)),
        SellerSpec::Penalized { r, semantics } => {
            if *r < 1 {
                return Err(Error::Parameter("penalty length r must be at least 1".into()));
            }
            Machine::Penalized {
                search: FastSearchPhaseState::new(horizon),
                r: *r,
                semantics: *semantics,
                counter: 0,
            }
        }
        SellerSpec::Bisection => Machine::Bisection { lo: 0.0, hi: 1.0 },
    };
    Ok(SellerMachine { horizon, machine })
}

fn validate_sequence(prices: &[f64]) -> Result<()> {
    if prices.is_empty() {
        return Err(Error::Parameter("explicit price sequence is empty".into()));
    }
    if let Some(p) = prices.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Parameter(format!("price {p} outside [0, 1]")));
    }
    if let Some(w) = prices.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::Parameter(format!(
            "explicit sequence is not monotone: p[{}] = {} < p[{}] = {}",
            w + 1,
            prices[w],
            w + 2,
            prices[w + 1]
        )));
    }
    Ok(())
}

impl SellerMachine {
    /// Shorthand for [`make_seller`] with the geometric monotone algorithm.
    pub fn monotone_geometric(beta: f64, horizon: usize) -> Result<Self> {
        make_seller(&SellerSpec::MonotoneGeometric { beta }, horizon)
    }

    pub fn monotone_sequence(prices: Vec<f64>, horizon: usize) -> Result<Self> {
        make_seller(&SellerSpec::MonotoneSequence { prices }, horizon)
    }

    pub fn fast_search(horizon: usize) -> Self {
        SellerMachine {
            horizon,
            machine: Machine::FastSearch(FastSearchPhaseState::new(horizon)),
        }
    }

    pub fn penalized(r: u32, semantics: PenaltySemantics, horizon: usize) -> Result<Self> {
        make_seller(&SellerSpec::Penalized { r, semantics }, horizon)
    }

    pub fn bisection(horizon: usize) -> Self {
        SellerMachine {
            horizon,
            machine: Machine::Bisection { lo: 0.0, hi: 1.0 },
        }
    }

    /// Monotone machine over a non-increasing sequence that need not start
    /// at 1. Used where a price list is studied in isolation.
    pub(crate) fn monotone_sequence_from(prices: Vec<f64>, horizon: usize) -> Result<Self> {
        validate_sequence(&prices)?;
        Ok(SellerMachine {
            horizon,
            machine: Machine::Sequence {
                prices: prices.into(),
                index: 0,
                frozen: false,
            },
        })
    }

    /// Feasible-interval state for fast-search based machines.
    pub fn search_state(&self) -> Option<&FastSearchPhaseState> {
        match &self.machine {
            Machine::FastSearch(s) | Machine::Penalized { search: s, .. } => Some(s),
            _ => None,
        }
    }

    /// Whether the machine never raises a price after a rejection and never
    /// lowers one after an acceptance, by construction.
    pub fn is_monotone(&self) -> bool {
        matches!(self.machine, Machine::Geometric { .. } | Machine::Sequence { .. })
    }

    /// The unpenalized search underlying a penalized machine, positioned at
    /// the current node. Other machines return a copy of themselves.
    pub fn unpenalized(&self) -> SellerMachine {
        match &self.machine {
            Machine::Penalized { search, .. } => SellerMachine {
                horizon: self.horizon,
                machine: Machine::FastSearch(search.clone()),
            },
            _ => self.clone(),
        }
    }
}

impl PriceMachine for SellerMachine {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn quote(&self) -> f64 {
        match &self.machine {
            Machine::Geometric { price, .. } => *price,
            Machine::Sequence { prices, index, .. } => prices[(*index).min(prices.len() - 1)],
            Machine::FastSearch(s) | Machine::Penalized { search: s, .. } => s.quote(),
            Machine::Bisection { lo, hi } => 0.5 * (lo + hi),
        }
    }

    fn advance(&mut self, accepted: bool) {
        match &mut self.machine {
            Machine::Geometric {
                beta,
                price,
                frozen,
            } => {
                if *frozen {
                    return;
                }
                if accepted {
                    *frozen = true;
                } else {
                    *price *= *beta;
                }
            }
            Machine::Sequence {
                prices,
                index,
                frozen,
            } => {
                if *frozen {
                    return;
                }
                if accepted {
                    *frozen = true;
                } else if *index + 1 < prices.len() {
                    *index += 1;
                }
            }
            Machine::FastSearch(s) => s.advance(accepted),
            Machine::Penalized {
                search,
                r,
                semantics,
                counter,
            } => {
                if search.is_terminal() {
                    return;
                }
                match semantics {
                    PenaltySemantics::Strict => {
                        if accepted {
                            *counter = 0;
                            search.advance(true);
                        } else {
                            *counter += 1;
                            if *counter >= *r {
                                *counter = 0;
                                search.advance(false);
                            }
                        }
                    }
                    PenaltySemantics::Literal => {
                        if *counter > 0 {
                            *counter -= 1;
                            if *counter == 0 {
                                search.advance(false);
                            }
                        } else if accepted {
                            search.advance(true);
                        } else {
                            *counter = *r;
                        }
                    }
                }
            }
            Machine::Bisection { lo, hi } => {
                let mid = 0.5 * (*lo + *hi);
                if accepted {
                    *lo = mid;
                } else {
                    *hi = mid;
                }
            }
        }
    }

    fn state_key(&self) -> Option<StateKey> {
        let key = match &self.machine {
            Machine::Geometric { price, frozen, .. } => {
                [price.to_bits(), 0, TAG_GEOMETRIC << 56 | u64::from(*frozen)]
            }
            Machine::Sequence { index, frozen, .. } => {
                [*index as u64, 0, TAG_SEQUENCE << 56 | u64::from(*frozen)]
            }
            Machine::FastSearch(s) => s.key_words(TAG_FAST_SEARCH, 0),
            Machine::Penalized { search, counter, .. } => {
                search.key_words(TAG_PENALIZED, *counter)
            }
            Machine::Bisection { lo, hi } => [lo.to_bits(), hi.to_bits(), TAG_BISECTION << 56],
        };
        Some(StateKey(key))
    }

    fn frozen_price(&self) -> Option<f64> {
        match &self.machine {
            Machine::Geometric { price, frozen, .. } => frozen.then_some(*price),
            Machine::Sequence {
                prices,
                index,
                frozen,
            } => (*frozen || *index + 1 >= prices.len()).then(|| prices[*index]),
            Machine::FastSearch(s) | Machine::Penalized { search: s, .. } => {
                s.is_terminal().then(|| s.quote())
            }
            Machine::Bisection { .. } => None,
        }
    }

    fn at_fresh_node(&self) -> bool {
        match &self.machine {
            Machine::Penalized { counter, .. } => *counter == 0,
            _ => true,
        }
    }

    fn is_penalty_requote(&self) -> bool {
        matches!(
            self.machine,
            Machine::Penalized {
                semantics: PenaltySemantics::Strict,
                counter: 1..,
                ..
            }
        )
    }

    fn label(&self) -> String {
        match &self.machine {
            Machine::Geometric { beta, .. } => format!("monotone(beta={beta})"),
            Machine::Sequence { prices, .. } => format!("monotone-sequence(n={})", prices.len()),
            Machine::FastSearch(_) => "fast-search".into(),
            Machine::Penalized { r, semantics, .. } => format!("pfs(r={r},{semantics})"),
            Machine::Bisection { .. } => "bisection".into(),
        }
    }
}

/// Whether consecutive price drops never grow: `p[t] - p[t+1] >= p[t+1] - p[t+2]`.
///
/// Drops are compared with an absolute slack of `1e-12` so that sequences
/// with mathematically equal drops (arithmetic sequences) are not rejected
/// over rounding. Returns false if the sequence increases anywhere.
pub fn is_convex_sequence(prices: &[f64]) -> bool {
    const SLACK: f64 = 1e-12;
    if prices.windows(2).any(|w| w[1] > w[0]) {
        return false;
    }
    prices
        .windows(3)
        .all(|w| (w[0] - w[1]) + SLACK >= w[1] - w[2])
}
