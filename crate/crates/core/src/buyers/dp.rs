//! Exact best response by backward induction over canonical seller states.
//!
//! Values are kept relative to the current round: `W(s, t)` is the optimal
//! surplus from round `t` on, measured in round-`t` money, so that
//!
//! ```text
//! W(s, t) = max(v - p(s) + γ W(accept(s), t+1), γ W(reject(s), t+1)),   W(·, T+1) = 0
//! ```
//!
//! and the absolute value of a node is `S(s, t) = γ^(t-1) W(s, t)`. Working
//! in relative terms keeps decisions exact late in long games, where
//! `γ^(t-1)` underflows. Ties go to acceptance.
//!
//! Under strict penalties a rejected price is re-offered until it has been
//! rejected `r` times. The solver lets the buyer only reject re-offers, so a
//! rejection at node `n` leads to the reject child `r` rounds later. For
//! consistent machines this leaves the root value and every decision on the
//! optimal path unchanged: below the price nothing in the accept subtree is
//! worth buying, and above it accepting the first offer beats waiting. It
//! keeps one arrival round per tree node instead of one per delay pattern,
//! and re-offer states are stepped over rather than stored, so the memo size
//! does not grow with `r`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::game::{BuyerPolicy, GameConfig, Round};
use crate::sellers::{PriceMachine, StateKey};

/// Default cap on memoized `(state, round)` entries.
pub const DEFAULT_DP_CAP: usize = 50_000_000;

#[derive(Clone, Copy, Debug)]
struct Cell {
    value: f64,
    accept: bool,
}

/// One memoized node of the value function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueFunctionEntry {
    pub key: StateKey,
    pub round: usize,
    /// Optimal remaining discounted surplus, discounted to round 1.
    pub value: f64,
    pub accept: bool,
}

/// Memoized optimal surplus of a buyer facing one announced machine.
#[derive(Clone, Debug)]
pub struct ValueFunction {
    gamma: f64,
    valuation: f64,
    horizon: usize,
    cap: usize,
    memo: FxHashMap<(StateKey, u32), Cell>,
}

enum Child {
    Known(f64),
    Pending(StateKey),
}

enum Task<M> {
    Visit(M, usize),
    Combine {
        key: StateKey,
        t: usize,
        price: f64,
        accept: Child,
        reject: Child,
        /// Round at which the reject branch resumes.
        reject_round: usize,
    },
}

impl ValueFunction {
    /// Solve the game from the seller's current state at round 1.
    pub fn solve<M: PriceMachine>(seller: &M, config: &GameConfig, cap: usize) -> Result<Self> {
        if seller.horizon() != config.horizon() {
            return Err(Error::HorizonMismatch {
                seller: seller.horizon(),
                game: config.horizon(),
            });
        }
        if seller.state_key().is_none() {
            return Err(Error::NoStateKey);
        }
        let mut vf = ValueFunction {
            gamma: config.gamma(),
            valuation: config.valuation(),
            horizon: config.horizon(),
            cap,
            memo: FxHashMap::default(),
        };
        vf.relative_value(seller, 1)?;
        Ok(vf)
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }

    /// Surplus collected from round `t` on when `price` is offered forever.
    fn frozen_value(&self, price: f64, t: usize) -> f64 {
        let gain = self.valuation - price;
        if gain < 0.0 {
            return 0.0;
        }
        let remaining = (self.horizon + 1 - t) as i32;
        let weight = if self.gamma == 0.0 {
            1.0
        } else {
            (1.0 - self.gamma.powi(remaining)) / (1.0 - self.gamma)
        };
        gain * weight
    }

    fn child<M: PriceMachine>(&self, machine: &M, t: usize) -> Result<(Child, Option<M>)> {
        if t > self.horizon {
            return Ok((Child::Known(0.0), None));
        }
        if let Some(p) = machine.frozen_price() {
            return Ok((Child::Known(self.frozen_value(p, t)), None));
        }
        let key = machine.state_key().ok_or(Error::NoStateKey)?;
        match self.memo.get(&(key, t as u32)) {
            Some(cell) => Ok((Child::Known(cell.value), None)),
            None => Ok((Child::Pending(key), Some(machine.clone()))),
        }
    }

    /// Step over forced rejections of re-offered prices, at most up to the
    /// end of the game. Returns the machine and the rounds consumed.
    fn skip_requotes<M: PriceMachine>(&self, mut machine: M, t: usize) -> (M, usize) {
        let mut steps = 0;
        while t + steps <= self.horizon && machine.is_penalty_requote() && machine.frozen_price().is_none() {
            machine.advance(false);
            steps += 1;
        }
        (machine, steps)
    }

    fn resolve(&self, child: &Child, t: usize) -> f64 {
        match child {
            Child::Known(v) => *v,
            Child::Pending(key) => self.memo[&(*key, t as u32)].value,
        }
    }

    /// `W(seller, t)`, extending the memo as needed.
    fn relative_value<M: PriceMachine>(&mut self, seller: &M, t: usize) -> Result<f64> {
        if seller.is_penalty_requote() && seller.frozen_price().is_none() {
            let (fresh, steps) = self.skip_requotes(seller.clone(), t);
            let w = self.relative_value(&fresh, t + steps)?;
            return Ok(self.gamma.powi(steps as i32) * w);
        }
        if let (Child::Known(v), _) = self.child(seller, t)? {
            return Ok(v);
        }
        let mut stack = vec![Task::Visit(seller.clone(), t)];
        while let Some(task) = stack.pop() {
            match task {
                Task::Visit(machine, t) => {
                    let key = machine.state_key().ok_or(Error::NoStateKey)?;
                    if self.memo.contains_key(&(key, t as u32)) {
                        continue;
                    }
                    let mut on_reject = machine.clone();
                    on_reject.advance(false);
                    let (on_reject, steps) = self.skip_requotes(on_reject, t + 1);
                    let reject_round = t + 1 + steps;
                    let (reject, r_next) = self.child(&on_reject, reject_round)?;
                    let mut on_accept = machine.clone();
                    on_accept.advance(true);
                    let (accept, a_next) = self.child(&on_accept, t + 1)?;
                    stack.push(Task::Combine {
                        key,
                        t,
                        price: machine.quote(),
                        accept,
                        reject,
                        reject_round,
                    });
                    if let Some(m) = r_next {
                        stack.push(Task::Visit(m, reject_round));
                    }
                    if let Some(m) = a_next {
                        stack.push(Task::Visit(m, t + 1));
                    }
                }
                Task::Combine {
                    key,
                    t,
                    price,
                    accept,
                    reject,
                    reject_round,
                } => {
                    let on_accept =
                        self.valuation - price + self.gamma * self.resolve(&accept, t + 1);
                    let on_reject = self.gamma.powi((reject_round - t) as i32)
                        * self.resolve(&reject, reject_round);
                    let cell = if on_accept >= on_reject {
                        Cell {
                            value: on_accept,
                            accept: true,
                        }
                    } else {
                        Cell {
                            value: on_reject,
                            accept: false,
                        }
                    };
                    if self.memo.len() >= self.cap {
                        return Err(Error::Intractable { cap: self.cap });
                    }
                    self.memo.insert((key, t as u32), cell);
                }
            }
        }
        let key = seller.state_key().ok_or(Error::NoStateKey)?;
        Ok(self.memo[&(key, t as u32)].value)
    }

    /// Optimal surplus from round `t` on, discounted to round 1.
    pub fn surplus_at<M: PriceMachine>(&mut self, seller: &M, t: usize) -> Result<f64> {
        Ok(self.gamma.powi((t - 1) as i32) * self.relative_value(seller, t)?)
    }

    /// Optimal decision when `seller` quotes at round `t`.
    pub fn accepts<M: PriceMachine>(&mut self, seller: &M, t: usize) -> Result<bool> {
        if let Some(p) = seller.frozen_price() {
            return Ok(self.valuation >= p);
        }
        if seller.is_penalty_requote() {
            return Ok(false);
        }
        self.relative_value(seller, t)?;
        let key = seller.state_key().ok_or(Error::NoStateKey)?;
        Ok(self.memo[&(key, t as u32)].accept)
    }

    /// All memoized entries, sorted by round then key.
    pub fn entries(&self) -> Vec<ValueFunctionEntry> {
        let mut out: Vec<ValueFunctionEntry> = self
            .memo
            .iter()
            .map(|(&(key, t), cell)| ValueFunctionEntry {
                key,
                round: t as usize,
                value: self.gamma.powi(t as i32 - 1) * cell.value,
                accept: cell.accept,
            })
            .collect();
        out.sort_by(|a, b| (a.round, a.key).cmp(&(b.round, b.key)));
        out
    }

    /// Write `state_key,round,value,action` rows for debugging.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(w, "state_key,round,value,action").map_err(io)?;
        for e in self.entries() {
            let action = if e.accept { "accept" } else { "reject" };
            writeln!(w, "{},{},{:e},{}", e.key, e.round, e.value, action).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Exact optimal surplus `S(root)` of the buyer against `seller`.
pub fn optimal_surplus<M: PriceMachine>(seller: &M, config: &GameConfig, cap: usize) -> Result<f64> {
    let mut vf = ValueFunction::solve(seller, config, cap)?;
    vf.surplus_at(seller, 1)
}

/// Buyer playing the exact best response to the announced machine.
#[derive(Clone, Debug)]
pub struct DpBuyer {
    values: ValueFunction,
}

impl DpBuyer {
    pub fn new<M: PriceMachine>(seller: &M, config: &GameConfig, cap: usize) -> Result<Self> {
        Ok(DpBuyer {
            values: ValueFunction::solve(seller, config, cap)?,
        })
    }

    pub fn value_function(&self) -> &ValueFunction {
        &self.values
    }
}

impl<M: PriceMachine> BuyerPolicy<M> for DpBuyer {
    fn decide(&mut self, t: usize, seller: &M, _history: &[Round]) -> bool {
        // Every state reachable from the root was solved at construction.
        self.values
            .accepts(seller, t)
            .expect("state reachable from the solved root")
    }

    fn name(&self) -> String {
        "dp".into()
    }
}
