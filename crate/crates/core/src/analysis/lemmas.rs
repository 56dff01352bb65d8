use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::rstar::optimal_penalty_root;
use crate::error::{Error, Result};
use crate::sellers::{PriceMachine, SellerMachine};
use crate::verify::{CheckEntry, CheckReport};

/// `g(γ) = ln(1/γ) / (1 - γ)`; decreasing on `(0, 1)` with limit 1 at 1.
pub fn log_ratio(gamma: f64) -> f64 {
    (1.0 / gamma).ln() / (1.0 - gamma)
}

/// `F_b(γ) = g(γ) - √(g(γ)² - b)` for `0 ≤ b ≤ 1`.
pub fn root_family(gamma: f64, b: f64) -> f64 {
    let g = log_ratio(gamma);
    g - (g * g - b).sqrt()
}

/// Grids for [`lemma_numeric_checks`].
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaGrid {
    /// Points per monotonicity scan (at least 10).
    pub points: usize,
    /// Horizons at which `F(γ₀)` is checked to increase.
    pub horizons: Vec<usize>,
    /// `(γ₀, T)` pairs for the bracket `1/(4T ln 2) ≤ F ≤ 2/T`.
    pub bracket_pairs: Vec<(f64, usize)>,
}

impl Default for LemmaGrid {
    fn default() -> Self {
        LemmaGrid {
            points: 200,
            horizons: vec![5, 100, 10_000, 1_000_000],
            bracket_pairs: [0.51, 0.6, 0.75, 0.9, 0.99, 0.999]
                .iter()
                .flat_map(|&g| [5usize, 100, 10_000, 1_000_000].map(move |t| (g, t)))
                .collect(),
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn strictly_increasing(values: &[(f64, f64)]) -> Option<(f64, f64)> {
    values
        .windows(2)
        .find(|w| !(w[1].1 > w[0].1))
        .map(|w| (w[0].0, w[1].0))
}

/// Monotonicity of `g` and of the root `F`, the root family `F_b`, and the
/// bracket on `F`, evaluated on grids.
pub fn lemma_numeric_checks(grid: &LemmaGrid) -> Result<CheckReport> {
    if grid.points < 10 {
        return Err(Error::Parameter(format!(
            "at least 10 grid points required, got {}",
            grid.points
        )));
    }
    let mut report = CheckReport::default();

    let g: Vec<(f64, f64)> = linspace(0.01, 0.99, grid.points)
        .map(|x| (x, -log_ratio(x)))
        .collect();
    let bad = strictly_increasing(&g);
    report.push(CheckEntry::new(
        "g decreasing on (0, 1)",
        bad.is_none(),
        bad.map_or(format!("{} points in [0.01, 0.99]", grid.points), |(a, b)| {
            format!("g({b}) >= g({a})")
        }),
    ));

    for b in [0.0, 0.5, 1.0] {
        // F_0 is identically 0; check it is non-decreasing instead.
        let vals: Vec<(f64, f64)> = linspace(0.01, 0.99, grid.points)
            .map(|x| (x, root_family(x, b)))
            .collect();
        let bad = if b == 0.0 {
            vals.windows(2)
                .find(|w| w[1].1 < w[0].1)
                .map(|w| (w[0].0, w[1].0))
        } else {
            strictly_increasing(&vals)
        };
        report.push(CheckEntry::new(
            format!("F_b increasing, b = {b}"),
            bad.is_none(),
            bad.map_or(String::new(), |(x, y)| format!("F({y}) <= F({x})")),
        ));
    }

    for &t in &grid.horizons {
        let vals: Vec<(f64, f64)> = linspace(0.501, 0.999, grid.points)
            .map(|x| (x, optimal_penalty_root(x, t)))
            .collect();
        let bad = strictly_increasing(&vals);
        report.push(CheckEntry::new(
            format!("F(gamma0) increasing, T = {t}"),
            bad.is_none(),
            bad.map_or(String::new(), |(x, y)| format!("F({y}) <= F({x})")),
        ));
    }

    for &(g0, t) in &grid.bracket_pairs {
        let f = optimal_penalty_root(g0, t);
        let lo = 1.0 / (4.0 * t as f64 * std::f64::consts::LN_2);
        let hi = 2.0 / t as f64;
        report.push(CheckEntry::new(
            format!("F bracket, gamma0 = {g0}, T = {t}"),
            lo <= f && f <= hi,
            format!("{lo:.6e} <= {f:.6e} <= {hi:.6e}"),
        ));
    }
    Ok(report)
}

/// Monte Carlo estimate of `E[κ*] · E[v - p_κ*]` for a truthful buyer with
/// `v ~ U[1/2, 1]` facing a fixed non-increasing price sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma3Report {
    pub samples: usize,
    pub mean_kappa: f64,
    pub mean_gap: f64,
    pub product: f64,
    /// Delta-method standard error of `product`.
    pub std_error: f64,
    /// Exact value from integrating over the price intervals.
    pub exact_product: f64,
    /// `product + 3 · std_error ≥ 1/32`.
    pub passed: bool,
}

/// Smallest number of samples [`lemma3_monte_carlo`] accepts.
pub const LEMMA3_MIN_SAMPLES: usize = 10_000;

pub const LEMMA3_THRESHOLD: f64 = 1.0 / 32.0;

fn validate_lemma3_prices(prices: &[f64]) -> Result<()> {
    match prices.last() {
        None => Err(Error::Empty("price sequence".into())),
        Some(&last) if last > 0.5 => Err(Error::Parameter(format!(
            "sequence must reach 1/2 so every v in [1/2, 1] accepts, last price is {last}"
        ))),
        _ => Ok(()),
    }
}

/// Exact `E[κ*] · E[v - p_κ*]`: `κ* = κ` exactly when `v ∈ [p_κ, p_{κ-1})`.
pub fn lemma3_exact(prices: &[f64]) -> Result<f64> {
    validate_lemma3_prices(prices)?;
    let (mut e_kappa, mut e_gap) = (0.0, 0.0);
    let mut upper = f64::INFINITY;
    for (i, &p) in prices.iter().enumerate() {
        let lo = p.max(0.5);
        let hi = upper.min(1.0);
        if hi > lo {
            // Density of v is 2 on [1/2, 1].
            e_kappa += 2.0 * (hi - lo) * (i + 1) as f64;
            e_gap += (hi - p).powi(2) - (lo - p).powi(2);
        }
        upper = upper.min(p);
    }
    Ok(e_kappa * e_gap)
}

pub fn lemma3_monte_carlo(prices: &[f64], samples: usize, seed: u64) -> Result<Lemma3Report> {
    validate_lemma3_prices(prices)?;
    if samples < LEMMA3_MIN_SAMPLES {
        return Err(Error::Parameter(format!(
            "at least {LEMMA3_MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    let machine = SellerMachine::monotone_sequence_from(prices.to_vec(), prices.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(0.5, 1.0);
    let n = samples as f64;
    let (mut sk, mut sg, mut skk, mut sgg, mut skg) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let v: f64 = dist.sample(&mut rng);
        let mut m = machine.clone();
        let mut kappa = 1usize;
        while m.quote() > v {
            m.advance(false);
            kappa += 1;
        }
        let (k, g) = (kappa as f64, v - m.quote());
        sk += k;
        sg += g;
        skk += k * k;
        sgg += g * g;
        skg += k * g;
    }
    let (mk, mg) = (sk / n, sg / n);
    let var_k = (skk / n - mk * mk).max(0.0);
    let var_g = (sgg / n - mg * mg).max(0.0);
    let cov = skg / n - mk * mg;
    let var_product = (mg * mg * var_k + mk * mk * var_g + 2.0 * mk * mg * cov).max(0.0) / n;
    let product = mk * mg;
    let std_error = var_product.sqrt();
    Ok(Lemma3Report {
        samples,
        mean_kappa: mk,
        mean_gap: mg,
        product,
        std_error,
        exact_product: lemma3_exact(prices)?,
        passed: product + 3.0 * std_error >= LEMMA3_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_at_half() {
        assert!((log_ratio(0.5) - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn default_checks_pass() {
        let report = lemma_numeric_checks(&LemmaGrid::default()).unwrap();
        assert!(report.all_passed(), "{report}");
        assert!(report.entries().len() > 20);
    }

    #[test]
    fn too_few_points() {
        let grid = LemmaGrid {
            points: 5,
            ..LemmaGrid::default()
        };
        assert!(lemma_numeric_checks(&grid).is_err());
    }

    #[test]
    fn constant_half_sequence() {
        // κ* = 1 and E[v - 1/2] = 1/4.
        assert!((lemma3_exact(&[0.5]).unwrap() - 0.25).abs() < 1e-15);
        let r = lemma3_monte_carlo(&[0.5], 20_000, 7).unwrap();
        assert_eq!(r.mean_kappa, 1.0);
        assert!((r.product - 0.25).abs() < 4.0 * r.std_error);
        assert!(r.passed);
    }

    #[test]
    fn exact_matches_hand_integral() {
        // Prices 1, 3/4, 1/2: κ* = 2 on [3/4, 1), κ* = 3 on [1/2, 3/4).
        // E[κ*] = 2·½ + 3·½ = 5/2; E[gap] = 2(∫(v-¾) + ∫(v-½)) = 1/16 + 1/16.
        let exact = lemma3_exact(&[1.0, 0.75, 0.5]).unwrap();
        assert!((exact - 2.5 * 0.125).abs() < 1e-15);
        let mc = lemma3_monte_carlo(&[1.0, 0.75, 0.5], 50_000, 11).unwrap();
        assert!((mc.product - exact).abs() < 4.0 * mc.std_error);
    }

    #[test]
    fn seeded_runs_repeat() {
        let p: Vec<f64> = (0..40).map(|i| 0.98f64.powi(i)).collect();
        let a = lemma3_monte_carlo(&p, 10_000, 3).unwrap();
        let b = lemma3_monte_carlo(&p, 10_000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lemma3_preconditions() {
        assert!(lemma3_monte_carlo(&[1.0, 0.6], 20_000, 0).is_err());
        assert!(lemma3_monte_carlo(&[0.5], 100, 0).is_err());
        assert!(lemma3_monte_carlo(&[], 20_000, 0).is_err());
        assert!(lemma3_monte_carlo(&[0.4, 0.5], 20_000, 0).is_err());
    }
}
