use std::f64::consts::LN_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::harness::format12;

/// `⌈log₂ log₂ T⌉ + 1`, computed exactly: the smallest `m ≥ 0` with
/// `T ≤ 2^(2^m)`, plus one. Horizons of 1 and 2 give 1.
pub fn phase_bound(horizon: usize) -> u32 {
    let t = horizon as u128;
    let mut m = 0u32;
    // 2^(2^m) for m = 0..=6 covers every u64 horizon.
    while m < 6 && t > 1u128 << (1u32 << m) {
        m += 1;
    }
    m + 1
}

/// `T_γ = 1 / (1 - γ)`.
pub fn effective_horizon(gamma: f64) -> f64 {
    1.0 / (1.0 - gamma)
}

/// `γ^r / ((1 - γ)(1 - γ^r))`, the price of one lie under a penalty of `r`.
pub fn rejection_coefficient(gamma: f64, r: u32) -> f64 {
    let gr = gamma.powi(r as i32);
    gr / ((1.0 - gamma) * (1.0 - gr))
}

/// Necessary condition for a strategic buyer to reject the price `p_n` of a
/// node with left increment `delta_l` and right increment `delta_r`:
/// `v - p_n < γ^r / ((1-γ)(1-γ^r)) · (δˡ + γ δʳ)`.
pub fn rejection_condition(
    valuation: f64,
    price: f64,
    delta_l: f64,
    delta_r: f64,
    gamma: f64,
    r: u32,
) -> bool {
    valuation - price < rejection_coefficient(gamma, r) * (delta_l + gamma * delta_r)
}

/// Regret upper bound of penalized fast search with penalty `r`:
/// `(v r + 1) K + (1 + γ) γ^r T / (2 (1 - γ)(1 - γ^r))` with
/// `K = ⌈log₂ log₂ T⌉ + 1`.
pub fn pfs_regret_bound(gamma: f64, valuation: f64, horizon: usize, r: u32) -> f64 {
    let k = f64::from(phase_bound(horizon));
    let gr = gamma.powi(r as i32);
    (valuation * f64::from(r) + 1.0) * k
        + (1.0 + gamma) * gr * horizon as f64 / (2.0 * (1.0 - gamma) * (1.0 - gr))
}

/// Regret bound of penalized fast search run with the optimal penalty for
/// the discount bound `γ₀`:
/// `(2 v γ₀ T_γ₀ ln(cT) + 1 + v)(⌈log₂ log₂ T⌉ + 1) + 4 T_γ₀`, `c = 4 ln 2`.
pub fn optimal_penalty_regret_bound(gamma0: f64, valuation: f64, horizon: usize) -> f64 {
    let t_gamma0 = effective_horizon(gamma0);
    let c = 4.0 * LN_2;
    let k = f64::from(phase_bound(horizon));
    (2.0 * valuation * gamma0 * t_gamma0 * (c * horizon as f64).ln() + 1.0 + valuation) * k
        + 4.0 * t_gamma0
}

/// Regret every monotone algorithm suffers for some truthful valuation:
/// `¼ √(T - √T)`.
pub fn monotone_lower_bound(horizon: usize) -> f64 {
    let t = horizon as f64;
    0.25 * (t - t.sqrt()).sqrt()
}

/// Lower bound for monotone algorithms with convex price sequences:
/// `max(⅛ √(T - √T), √(C_γ (T - √(T_γ T)) (½ - √(C_γ / T))))`. The second
/// term is taken as zero when either factor under the root is negative.
pub fn convex_monotone_lower_bound(gamma: f64, horizon: usize) -> f64 {
    let t = horizon as f64;
    let c_gamma = gamma / (2.0 * (1.0 - gamma));
    let first = 0.125 * (t - t.sqrt()).sqrt();
    let a = t - (effective_horizon(gamma) * t).sqrt();
    let b = 0.5 - (c_gamma / t).sqrt();
    let second = if a > 0.0 && b > 0.0 {
        (c_gamma * a * b).sqrt()
    } else {
        0.0
    };
    first.max(second)
}

/// Whether `T ≥ T_γ + 2 log(2/γ) / log(1/γ)`, the horizon condition of the
/// convex-sequence lower bound.
pub fn convex_bound_applies(gamma: f64, horizon: usize) -> bool {
    if !(gamma > 0.0 && gamma < 1.0) {
        return false;
    }
    horizon as f64 >= effective_horizon(gamma) + 2.0 * (2.0 / gamma).ln() / (1.0 / gamma).ln()
}

/// Inputs of [`bound_report`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    pub gamma: f64,
    /// Known upper bound on γ, needed for the optimal-penalty bound.
    pub gamma0: Option<f64>,
    pub valuation: f64,
    pub horizon: usize,
    pub r: u32,
    /// Universal constant of the truthful `log log T` lower bound.
    pub kl_constant: f64,
}

impl BoundParams {
    pub fn new(gamma: f64, valuation: f64, horizon: usize, r: u32) -> Self {
        BoundParams {
            gamma,
            gamma0: None,
            valuation,
            horizon,
            r,
            kl_constant: 1.0,
        }
    }

    pub fn with_gamma0(mut self, gamma0: f64) -> Self {
        self.gamma0 = Some(gamma0);
        self
    }
}

/// Every closed-form quantity for one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub params: BoundParams,
    pub t_gamma: f64,
    pub c_gamma: f64,
    /// `⌈log₂ log₂ T⌉ + 1`.
    pub phases: u32,
    pub eq_reggamma_bound: f64,
    pub thm1_bound: Option<f64>,
    /// `1/2 < γ < γ₀ < 1` and `T > 4`.
    pub thm1_applicable: bool,
    pub prop1_lower: f64,
    pub prop6_lower: f64,
    pub prop6_applicable: bool,
    pub kau_lower: f64,
    pub kl_lower: f64,
    pub corollary_lower: f64,
}

pub fn bound_report(params: BoundParams) -> Result<BoundReport> {
    let BoundParams {
        gamma,
        gamma0,
        valuation,
        horizon,
        r,
        kl_constant,
    } = params;
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("γ must lie in [0, 1), got {gamma}")));
    }
    if !(0.0..=1.0).contains(&valuation) {
        return Err(Error::Parameter(format!("v must lie in [0, 1], got {valuation}")));
    }
    if horizon == 0 {
        return Err(Error::Parameter("T must be at least 1".into()));
    }
    if r == 0 {
        return Err(Error::Parameter("r must be at least 1".into()));
    }
    if let Some(g0) = gamma0 {
        if !(g0 > 0.0 && g0 < 1.0) {
            return Err(Error::Parameter(format!("γ₀ must lie in (0, 1), got {g0}")));
        }
    }
    let t_gamma = effective_horizon(gamma);
    let kau_lower = t_gamma / 12.0;
    let ln_t = (horizon as f64).ln();
    let kl_lower = if ln_t > 1.0 {
        kl_constant * ln_t.ln()
    } else {
        0.0
    };
    Ok(BoundReport {
        params,
        t_gamma,
        c_gamma: gamma / (2.0 * (1.0 - gamma)),
        phases: phase_bound(horizon),
        eq_reggamma_bound: pfs_regret_bound(gamma, valuation, horizon, r),
        thm1_bound: gamma0.map(|g0| optimal_penalty_regret_bound(g0, valuation, horizon)),
        thm1_applicable: gamma0.is_some_and(|g0| 0.5 < gamma && gamma < g0) && horizon > 4,
        prop1_lower: monotone_lower_bound(horizon),
        prop6_lower: convex_monotone_lower_bound(gamma, horizon),
        prop6_applicable: convex_bound_applies(gamma, horizon),
        kau_lower,
        kl_lower,
        corollary_lower: kau_lower.max(kl_lower),
    })
}

impl fmt::Display for BoundReport {
    /// Values are shown to 12 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        let x = format12;
        let flag = |ok: bool| if ok { "" } else { "  (inapplicable)" };
        writeln!(
            f,
            "gamma = {}  v = {}  T = {}  r = {}",
            p.gamma, p.valuation, p.horizon, p.r
        )?;
        writeln!(f, "T_gamma                 = {}", x(self.t_gamma))?;
        writeln!(f, "C_gamma                 = {}", x(self.c_gamma))?;
        writeln!(f, "phases (ceil loglog+1)  = {}", self.phases)?;
        writeln!(f, "pfs regret bound        = {}", x(self.eq_reggamma_bound))?;
        match (self.thm1_bound, p.gamma0) {
            (Some(b), Some(g0)) => writeln!(
                f,
                "optimal-r bound         = {}{} (gamma0 = {g0})",
                x(b),
                flag(self.thm1_applicable)
            )?,
            _ => writeln!(f, "optimal-r bound         = n/a (no gamma0)")?,
        }
        writeln!(f, "monotone lower bound    = {}", x(self.prop1_lower))?;
        writeln!(
            f,
            "convex lower bound      = {}{}",
            x(self.prop6_lower),
            flag(self.prop6_applicable)
        )?;
        writeln!(f, "T_gamma/12 lower bound  = {}", x(self.kau_lower))?;
        writeln!(
            f,
            "C loglog T lower bound  = {} (C = {})",
            x(self.kl_lower),
            p.kl_constant
        )?;
        write!(f, "combined lower bound    = {}", x(self.corollary_lower))
    }
}
