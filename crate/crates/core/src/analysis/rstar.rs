use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How [`r_star`] picks the penalty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RStarMethod {
    /// Integer minimizer of the penalty objective by exhaustive scan.
    Scan,
    /// `max(1, ⌈r̄*⌉)` from the continuous minimizer, the penalty the
    /// optimal-penalty regret bound is stated for.
    #[default]
    ClosedForm,
}

/// Optimal penalty for a discount bound `γ₀` and horizon `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RStarResult {
    pub r_star: u32,
    /// Continuous minimizer `ln F / ln γ₀`.
    pub r_bar_star: f64,
    /// `F = γ₀^r̄*`.
    pub f_value: f64,
    pub method: RStarMethod,
    pub scan_argmin: u32,
    pub closed_form: u32,
}

impl RStarResult {
    /// Whether the scan and the rounded closed form agree.
    pub fn methods_agree(&self) -> bool {
        self.scan_argmin == self.closed_form
    }
}

/// `f(r) = r + γ₀^r T / ((1 - γ₀)(1 - γ₀^r))`, the `r`-dependent part of the
/// penalized regret bound.
pub fn penalty_objective(r: f64, gamma0: f64, horizon: usize) -> f64 {
    let gr = gamma0.powf(r);
    r + gr * horizon as f64 / ((1.0 - gamma0) * (1.0 - gr))
}

/// `F = 2 / (2 + D + √((2 + D)² - 4))` with `D = T ln(1/γ₀) / (1 - γ₀)`,
/// the root in `(0, 1)` of the stationarity condition of the objective.
/// Written so no cancellation occurs for large `D`.
pub fn optimal_penalty_root(gamma0: f64, horizon: usize) -> f64 {
    let d = horizon as f64 * (1.0 / gamma0).ln() / (1.0 - gamma0);
    let s = 2.0 + d;
    2.0 / (s + ((s - 2.0) * (s + 2.0)).sqrt())
}

/// Scan limit: beyond it `γ₀^r < 1/T²` and the objective only grows.
fn scan_limit(gamma0: f64, horizon: usize) -> u32 {
    let t = (horizon as f64).max(2.0);
    let r_max = (2.0 * t.ln() / (1.0 / gamma0).ln()).ceil() + 1.0;
    r_max.clamp(2.0, u32::MAX as f64) as u32
}

/// Integer `r ≥ 1` minimizing the objective; the smallest one on ties.
pub fn scan_argmin(gamma0: f64, horizon: usize) -> u32 {
    let mut best = (1u32, penalty_objective(1.0, gamma0, horizon));
    for r in 2..=scan_limit(gamma0, horizon) {
        let f = penalty_objective(f64::from(r), gamma0, horizon);
        if f < best.1 {
            best = (r, f);
        }
    }
    best.0
}

pub fn r_star(gamma0: f64, horizon: usize, method: RStarMethod) -> Result<RStarResult> {
    if !(gamma0 > 0.0 && gamma0 < 1.0) {
        return Err(Error::Parameter(format!("γ₀ must lie in (0, 1), got {gamma0}")));
    }
    if horizon == 0 {
        return Err(Error::Parameter("T must be at least 1".into()));
    }
    let f_value = optimal_penalty_root(gamma0, horizon);
    let r_bar_star = f_value.ln() / gamma0.ln();
    let closed_form = (r_bar_star.ceil().max(1.0)).min(u32::MAX as f64) as u32;
    let scan_argmin = scan_argmin(gamma0, horizon);
    Ok(RStarResult {
        r_star: match method {
            RStarMethod::Scan => scan_argmin,
            RStarMethod::ClosedForm => closed_form,
        },
        r_bar_star,
        f_value,
        method,
        scan_argmin,
        closed_form,
    })
}
