//! End-to-end acceptance gates. Prints one `PASS`/`FAIL` line per
//! criterion and exits non-zero if any gate fails.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pplab_core::analysis::{
    lemma3_exact, lemma3_monte_carlo, lemma_numeric_checks, monotone_lower_bound, phase_bound,
    valuation_grid, worst_case_valuation, LemmaGrid, WitnessBuyer, LEMMA3_THRESHOLD,
};
use pplab_core::harness::{auto_beta, format12, run_sweep, ExperimentConfig};
use pplab_core::verify::{self, random_decreasing_sequence, CheckReport};
use pplab_core::{play_game, score, GameConfig, SellerMachine};
use pplab_core::buyers::Truthful;

const SEED: u64 = 20_240_601;

fn gate(id: u32, title: &str, passed: bool, detail: impl AsRef<str>) -> bool {
    println!(
        "{} criterion {id:>2} {title}: {}",
        if passed { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    passed
}

fn report_gate(id: u32, title: &str, report: CheckReport) -> bool {
    let detail = report
        .entries()
        .iter()
        .map(|e| format!("[{}] {}", e.name, e.detail))
        .collect::<Vec<_>>()
        .join("; ");
    gate(id, title, report.all_passed(), detail)
}

fn c01_dp_matches_brute_force() -> bool {
    report_gate(1, "dp = brute force on 500 small games", verify::dp_oracle(500, SEED).unwrap())
}

fn c02_rejection_condition() -> bool {
    report_gate(2, "rejection condition in 100 dp-vs-pfs games", verify::prop3(100, SEED).unwrap())
}

fn c03_pfs_bound_dominance() -> bool {
    report_gate(3, "pfs regret under its bound, 50 configs", verify::pfs_bound_dominance(50, SEED).unwrap())
}

fn c04_optimal_penalty_bound_dominance() -> bool {
    report_gate(
        4,
        "pfs(r*) regret under the optimal-r bound, 25 configs",
        verify::optimal_penalty_bound_dominance(25, SEED).unwrap(),
    )
}

fn c05_truthful_fast_search() -> bool {
    let mut worst: (f64, usize, f64) = (0.0, 0, 0.0);
    let mut failures = 0;
    let mut cases = 0;
    for e in 4..=20u32 {
        let t = 1usize << e;
        let seller = SellerMachine::fast_search(t);
        for k in 1..=9 {
            let v = k as f64 / 10.0;
            let config = GameConfig::new(t, 0.5, v).unwrap();
            let tr = play_game(&seller, &mut Truthful::new(v), &config).unwrap();
            let regret = score(&tr, &config).unwrap().regret;
            let bound = (v + 1.0) * f64::from(phase_bound(t));
            let ratio = regret / bound;
            cases += 1;
            if regret > bound + 1e-9 {
                failures += 1;
            }
            if ratio > worst.0 {
                worst = (ratio, t, v);
            }
        }
    }
    gate(
        5,
        "truthful fast-search regret <= (v+1)K",
        failures == 0,
        format!(
            "{cases} cases, {failures} violations, max regret/bound {:.3} at T={} v={}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn c06_monotone_witness() -> bool {
    let grid = valuation_grid(0.5, 1.0, 1e-3).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for gamma in [0.75, 0.8, 0.85, 0.95] {
        for t in [100usize, 1000, 10_000] {
            let seller = SellerMachine::monotone_geometric(auto_beta(t, gamma), t).unwrap();
            let w = worst_case_valuation(&seller, t, gamma, WitnessBuyer::Truthful, &grid).unwrap();
            let need = 0.99 * monotone_lower_bound(t);
            ok &= w.regret >= need;
            lines.push(format!(
                "g={gamma} T={t}: {:.2} at v0={:.3} (need {:.2})",
                w.regret, w.valuation, need
            ));
        }
    }
    gate(6, "monotone witness reaches 0.99 of the lower bound", ok, lines.join(", "))
}

fn c07_rstar() -> bool {
    report_gate(7, "r* scan vs closed form and bracket", verify::rstar(1000, SEED).unwrap())
}

fn c08_auxiliary_inequalities() -> bool {
    let mut report = lemma_numeric_checks(&LemmaGrid {
        points: 1000,
        ..LemmaGrid::default()
    })
    .unwrap();
    // Monte Carlo gate: product >= 1/32 - 3 standard errors.
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut min_margin = f64::INFINITY;
    let mut failures = 0;
    for i in 0..20u64 {
        let prices = random_decreasing_sequence(&mut rng);
        let mc = lemma3_monte_carlo(&prices, 100_000, SEED + i).unwrap();
        let exact = lemma3_exact(&prices).unwrap();
        let margin = mc.product - (LEMMA3_THRESHOLD - 3.0 * mc.std_error);
        min_margin = min_margin.min(margin);
        if margin < 0.0 || exact < LEMMA3_THRESHOLD {
            failures += 1;
        }
    }
    report.push(verify::CheckEntry::new(
        "expectation inequality, monte carlo",
        failures == 0,
        format!("20 sequences x 1e5 samples, {failures} failures, min margin {min_margin:.4}"),
    ));
    report_gate(8, "auxiliary inequality checks", report)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn c09_figure_reproduction() -> bool {
    let config = ExperimentConfig::figure(0.85, 0.75);
    let rows = run_sweep(&config).unwrap();
    let series = |label: &str| -> (Vec<f64>, Vec<f64>) {
        rows.iter()
            .filter(|r| r.seller == label)
            .map(|r| (r.horizon as f64, r.regret.expect("grid rows are never skipped")))
            .unzip()
    };
    let (t_mono, reg_mono) = series("monotone");
    let (t_pfs, reg_pfs) = series("pfs");
    let ratio = reg_mono.last().unwrap() / reg_pfs.last().unwrap();
    let ln = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
    let corr = pearson(&ln(&t_pfs), &reg_pfs);
    let exponent = slope(&ln(&t_mono), &ln(&reg_mono));
    let declared = |label: &str| {
        rows.iter()
            .rev()
            .find(|r| r.seller == label)
            .and_then(|r| r.best_false_valuation)
            .map(format12)
            .unwrap()
    };
    let detail = format!(
        "at T=1e4 monotone {:.1} (declared {}) / pfs {:.1} (declared {}) = {ratio:.3} (need >= 5); \
         pfs corr vs ln T {corr:.3} (need >= 0.95); monotone log-log slope {exponent:.3} (need >= 0.3)",
        reg_mono.last().unwrap(),
        declared("monotone"),
        reg_pfs.last().unwrap(),
        declared("pfs"),
    );
    gate(
        9,
        "figure at gamma=0.85 v=0.75",
        ratio >= 5.0 && corr >= 0.95 && exponent >= 0.3,
        detail,
    )
}

fn c10_consistency() -> bool {
    report_gate(10, "fast-search and pfs consistent to depth 12", verify::consistency(12).unwrap())
}

fn main() {
    let criteria: [fn() -> bool; 10] = [
        c01_dp_matches_brute_force,
        c02_rejection_condition,
        c03_pfs_bound_dominance,
        c04_optimal_penalty_bound_dominance,
        c05_truthful_fast_search,
        c06_monotone_witness,
        c07_rstar,
        c08_auxiliary_inequalities,
        c09_figure_reproduction,
        c10_consistency,
    ];
    let passed = criteria.iter().filter(|c| c()).count();
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed < criteria.len() {
        std::process::exit(1);
    }
}
