//! Closed-form regret bounds, the optimal penalty, numeric checks of the
//! supporting inequalities, and worst-case valuation search.

mod bounds;
mod lemmas;
mod rstar;
mod witness;

pub use bounds::{
    bound_report, convex_bound_applies, convex_monotone_lower_bound, effective_horizon,
    monotone_lower_bound, optimal_penalty_regret_bound, pfs_regret_bound, phase_bound,
    rejection_coefficient, rejection_condition, BoundParams, BoundReport,
};
pub use lemmas::{
    lemma3_exact, lemma3_monte_carlo, lemma_numeric_checks, log_ratio, root_family, Lemma3Report,
    LemmaGrid, LEMMA3_MIN_SAMPLES, LEMMA3_THRESHOLD,
};
pub use rstar::{
    optimal_penalty_root, penalty_objective, r_star, scan_argmin, RStarMethod, RStarResult,
};
pub use witness::{valuation_grid, worst_case_valuation, WitnessBuyer, WorstCase};
