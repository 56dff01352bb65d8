//! Self-checks comparing the solvers and closed forms against independent
//! oracles.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    lemma3_monte_carlo, lemma_numeric_checks, optimal_penalty_regret_bound, optimal_penalty_root,
    pfs_regret_bound, r_star, rejection_condition, LemmaGrid, RStarMethod, LEMMA3_THRESHOLD,
};
use crate::buyers::{
    best_false_valuation, brute_force_best_response, optimal_surplus, DpBuyer, FalseValuation,
    DEFAULT_DP_CAP, DEFAULT_GRID_STEP,
};
use crate::error::{Error, Result};
use crate::game::{play_game, strategic_regret, GameConfig, Transcript};
use crate::sellers::{check_consistent, left_increment, PenaltySemantics, PriceMachine, SellerMachine};

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckEntry {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckEntry {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Ordered list of check outcomes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckReport {
    entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.entries.extend(other.entries);
    }

    pub fn entries(&self) -> &[CheckEntry] {
        &self.entries
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let status = if e.passed { "PASS" } else { "FAIL" };
            if e.detail.is_empty() {
                writeln!(f, "{status} {}", e.name)?;
            } else {
                writeln!(f, "{status} {}: {}", e.name, e.detail)?;
            }
        }
        Ok(())
    }
}

/// Named property suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    DpOracle,
    Prop3,
    Lemma3,
    LemmaNumeric,
    RStar,
    Consistency,
    BoundDominance,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::DpOracle,
        Suite::Prop3,
        Suite::Lemma3,
        Suite::LemmaNumeric,
        Suite::RStar,
        Suite::Consistency,
        Suite::BoundDominance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::DpOracle => "dp-oracle",
            Suite::Prop3 => "prop3",
            Suite::Lemma3 => "lemma3",
            Suite::LemmaNumeric => "lemma-numeric",
            Suite::RStar => "rstar",
            Suite::Consistency => "consistency",
            Suite::BoundDominance => "bound-dominance",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                Error::Parameter(format!("unknown suite '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

/// Seed and size of a suite run. `cases: None` uses the suite default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub cases: Option<usize>,
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<CheckReport> {
    let n = |default: usize| opts.cases.unwrap_or(default);
    match suite {
        Suite::DpOracle => dp_oracle(n(500), opts.seed),
        Suite::Prop3 => prop3(n(100), opts.seed),
        Suite::Lemma3 => lemma3(n(20), 100_000, opts.seed),
        Suite::LemmaNumeric => lemma_numeric_checks(&LemmaGrid {
            points: n(1000),
            ..LemmaGrid::default()
        }),
        Suite::RStar => rstar(n(1000), opts.seed),
        Suite::Consistency => consistency(n(12)),
        Suite::BoundDominance => {
            let mut report = pfs_bound_dominance(n(50), opts.seed)?;
            report.extend(optimal_penalty_bound_dominance(n(25), opts.seed)?);
            Ok(report)
        }
    }
}

/// Per-group pass counter that keeps the first failure.
struct Tally {
    name: String,
    cases: usize,
    failures: usize,
    first_failure: Option<String>,
    worst: f64,
}

impl Tally {
    fn new(name: impl Into<String>) -> Self {
        Tally {
            name: name.into(),
            cases: 0,
            failures: 0,
            first_failure: None,
            worst: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, ok: bool, score: f64, detail: impl FnOnce() -> String) {
        self.cases += 1;
        self.worst = self.worst.max(score);
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(detail());
            }
        }
    }

    fn entry(self, worst_label: &str) -> CheckEntry {
        let mut detail = format!("{} cases, {} failures", self.cases, self.failures);
        if self.cases > 0 {
            detail.push_str(&format!(", {worst_label} {:.3e}", self.worst));
        }
        if let Some(f) = self.first_failure {
            detail.push_str(&format!("; first failure: {f}"));
        }
        CheckEntry::new(self.name, self.failures == 0, detail)
    }
}

const ORACLE_GAMMAS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];

fn oracle_seller(kind: usize, rng: &mut ChaCha8Rng, t: usize) -> Result<(String, SellerMachine)> {
    Ok(match kind {
        0 => {
            let beta = rng.gen_range(0.2..0.95);
            (format!("monotone(beta={beta:.4})"), SellerMachine::monotone_geometric(beta, t)?)
        }
        1 => ("fast-search".into(), SellerMachine::fast_search(t)),
        2..=4 => {
            let r = (kind - 1) as u32;
            (format!("pfs-strict(r={r})"), SellerMachine::penalized(r, PenaltySemantics::Strict, t)?)
        }
        5 => ("bisection".into(), SellerMachine::bisection(t)),
        _ => {
            let r = (kind - 5) as u32;
            (format!("pfs-literal(r={r})"), SellerMachine::penalized(r, PenaltySemantics::Literal, t)?)
        }
    })
}

const ORACLE_GROUPS: [&str; 5] = ["monotone", "fast-search", "pfs-strict", "bisection", "pfs-literal"];

fn oracle_group(kind: usize) -> usize {
    match kind {
        0 => 0,
        1 => 1,
        2..=4 => 2,
        5 => 3,
        _ => 4,
    }
}

/// Exact DP surplus against exhaustive enumeration on random small games.
pub fn dp_oracle(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tallies: Vec<Tally> = ORACLE_GROUPS
        .iter()
        .map(|g| Tally::new(format!("dp = brute force, {g}")))
        .collect();
    for _ in 0..cases {
        let kind = rng.gen_range(0..8);
        let t = rng.gen_range(1..=12);
        let gamma = ORACLE_GAMMAS[rng.gen_range(0..ORACLE_GAMMAS.len())];
        let v = f64::from(rng.gen_range(1..=19u32)) * 0.05;
        let (label, seller) = oracle_seller(kind, &mut rng, t)?;
        let config = GameConfig::new(t, gamma, v)?;
        let dp = optimal_surplus(&seller, &config, DEFAULT_DP_CAP)?;
        let (brute, _) = brute_force_best_response(&seller, &config)?;
        let diff = (dp - brute).abs();
        tallies[oracle_group(kind)].record(diff <= 1e-9, diff, || {
            format!("{label} T={t} gamma={gamma} v={v}: dp {dp} vs brute {brute}")
        });
    }
    let mut report = CheckReport::default();
    for t in tallies {
        report.push(t.entry("max |diff|"));
    }
    Ok(report)
}

/// Every price the dp buyer rejects at a fresh node of strict PFS satisfies
/// the rejection condition, with increments taken from the unpenalized tree.
pub fn prop3(games: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("rejection condition at first rejections");
    let mut lies = 0usize;
    for _ in 0..games {
        let gamma: f64 = rng.gen_range(0.01..0.99);
        let v: f64 = rng.gen_range(0.0..=1.0);
        let r: u32 = rng.gen_range(1..=5);
        let t_max: usize = rng.gen_range(2..=512);
        let seller = SellerMachine::penalized(r, PenaltySemantics::Strict, t_max)?;
        let config = GameConfig::new(t_max, gamma, v)?;
        let mut buyer = DpBuyer::new(&seller, &config, DEFAULT_DP_CAP)?;
        let transcript = play_game(&seller, &mut buyer, &config)?;
        let mut m = seller.clone();
        let mut depth = 0usize;
        for round in transcript.rounds() {
            if m.at_fresh_node() && m.frozen_price().is_none() {
                if !round.accepted {
                    let node = m.unpenalized();
                    let price = node.quote();
                    let levels = t_max - depth - 1;
                    let delta_l = left_increment(&node, levels).unwrap_or(0.0);
                    let delta_r = if levels > 0 {
                        let mut up = node.clone();
                        up.advance(true);
                        up.quote() - price
                    } else {
                        0.0
                    };
                    let ok = rejection_condition(v, price, delta_l, delta_r, gamma, r);
                    lies += usize::from(price < v);
                    tally.record(ok, v - price, || {
                        format!(
                            "gamma={gamma} v={v} r={r} T={t_max} round {}: p={price} dl={delta_l} dr={delta_r}",
                            round.t
                        )
                    });
                }
                depth += 1;
            }
            m.advance(round.accepted);
        }
    }
    let mut entry = tally.entry("max v - p");
    entry.detail = format!("{games} games, {lies} lies; {}", entry.detail);
    let mut report = CheckReport::default();
    report.push(entry);
    Ok(report)
}

/// Geometric prices `1, β, β², …` down to the first one at or below 1/2,
/// for a random `β`.
pub fn random_geometric_sequence(rng: &mut impl Rng) -> Vec<f64> {
    let beta: f64 = rng.gen_range(0.3..0.999);
    let mut prices = vec![1.0];
    while *prices.last().unwrap() > 0.5 {
        prices.push(prices.last().unwrap() * beta);
    }
    prices
}

/// Non-increasing sequence starting at 1 and ending at or below 1/2.
pub fn random_decreasing_sequence(rng: &mut impl Rng) -> Vec<f64> {
    let len = rng.gen_range(2..=200);
    let mut tail: Vec<f64> = (0..len - 2).map(|_| rng.gen_range(0.0..=1.0)).collect();
    tail.push(rng.gen_range(0.0..=0.5));
    tail.sort_by(|a, b| b.total_cmp(a));
    let mut prices = Vec::with_capacity(len);
    prices.push(1.0);
    prices.extend(tail);
    prices
}

pub fn lemma3(sequences: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::default();
    for i in 0..sequences {
        // Alternate sorted uniform draws with geometric decay.
        let prices = if i % 2 == 0 {
            random_decreasing_sequence(&mut rng)
        } else {
            random_geometric_sequence(&mut rng)
        };
        let mc = lemma3_monte_carlo(&prices, samples, seed.wrapping_add(i as u64))?;
        report.push(CheckEntry::new(
            format!("E[kappa] E[v - p] >= 1/32, sequence {i} (length {})", prices.len()),
            mc.passed && mc.exact_product >= LEMMA3_THRESHOLD,
            format!(
                "estimate {:.5} ± {:.5}, exact {:.5}",
                mc.product, mc.std_error, mc.exact_product
            ),
        ));
    }
    Ok(report)
}

pub fn rstar(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agree = Tally::new("scan and closed-form r* within 1");
    let mut bracket = Tally::new("1/(4T ln 2) <= F <= 2/T");
    let log_t = Uniform::new_inclusive(5f64.ln(), 1e6f64.ln());
    let mut exact = 0usize;
    for _ in 0..cases {
        let g0: f64 = rng.gen_range(0.5..0.999);
        let g0 = g0.max(0.5 + 1e-9);
        let t = log_t.sample(&mut rng).exp().round() as usize;
        let res = r_star(g0, t, RStarMethod::Scan)?;
        let diff = res.scan_argmin.abs_diff(res.closed_form);
        exact += usize::from(diff == 0);
        agree.record(diff <= 1, f64::from(diff), || {
            format!("gamma0={g0} T={t}: scan {} vs closed {}", res.scan_argmin, res.closed_form)
        });
        let f = optimal_penalty_root(g0, t);
        let lo = 1.0 / (4.0 * t as f64 * std::f64::consts::LN_2);
        let hi = 2.0 / t as f64;
        bracket.record(lo <= f && f <= hi, f * t as f64, || format!("gamma0={g0} T={t}: F={f}"));
    }
    let mut report = CheckReport::default();
    let mut e = agree.entry("max |diff|");
    e.detail.push_str(&format!(", {exact} identical"));
    report.push(e);
    report.push(bracket.entry("max T·F"));
    Ok(report)
}

pub fn consistency(max_depth: usize) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let machines: Vec<(String, Box<dyn Fn(usize) -> Result<SellerMachine>>)> = vec![
        ("fast-search".into(), Box::new(|t| Ok(SellerMachine::fast_search(t)))),
        ("pfs-strict(r=1)".into(), Box::new(|t| SellerMachine::penalized(1, PenaltySemantics::Strict, t))),
        ("pfs-strict(r=2)".into(), Box::new(|t| SellerMachine::penalized(2, PenaltySemantics::Strict, t))),
        ("pfs-strict(r=3)".into(), Box::new(|t| SellerMachine::penalized(3, PenaltySemantics::Strict, t))),
        ("pfs-literal(r=2)".into(), Box::new(|t| SellerMachine::penalized(2, PenaltySemantics::Literal, t))),
        ("bisection".into(), Box::new(|t| Ok(SellerMachine::bisection(t)))),
    ];
    for (name, make) in machines {
        let mut nodes = 0usize;
        let mut bad = None;
        for depth in 1..=max_depth {
            let rep = check_consistent(&make(depth)?, depth)?;
            nodes += rep.nodes_checked;
            if !rep.consistent && bad.is_none() {
                bad = Some(format!("depth {depth}: {:?}", rep.violation));
            }
        }
        report.push(CheckEntry::new(
            format!("{name} consistent at depths 1..={max_depth}"),
            bad.is_none(),
            bad.unwrap_or_else(|| format!("{nodes} nodes checked")),
        ));
    }
    Ok(report)
}

/// Regret of `seller` against the exact best response, or the best constant
/// false valuation when the exact solver refuses. Returns the buyer used.
pub fn strategic_play(seller: &SellerMachine, config: &GameConfig) -> Result<(Transcript, &'static str)> {
    match DpBuyer::new(seller, config, DEFAULT_DP_CAP) {
        Ok(mut dp) => Ok((play_game(seller, &mut dp, config)?, "dp")),
        Err(Error::Intractable { .. }) => {
            let (declared, _) = best_false_valuation(seller, config, DEFAULT_GRID_STEP)?;
            Ok((play_game(seller, &mut FalseValuation::new(declared), config)?, "grid"))
        }
        Err(e) => Err(e),
    }
}

const DOMINANCE_HORIZONS: [usize; 7] = [64, 128, 256, 512, 1024, 2048, 4096];

/// Strict PFS regret against the strategic buyer stays under the
/// penalized-search bound.
pub fn pfs_bound_dominance(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("PFS regret <= (vr+1)K + (1+g)g^r T / (2(1-g)(1-g^r))");
    for _ in 0..cases {
        let gamma: f64 = rng.gen_range(0.05..0.95);
        let v: f64 = rng.gen_range(0.05..=1.0);
        let r: u32 = rng.gen_range(1..=8);
        let t = if rng.gen_bool(0.5) {
            DOMINANCE_HORIZONS[rng.gen_range(0..DOMINANCE_HORIZONS.len())]
        } else {
            rng.gen_range(16..=4096)
        };
        let seller = SellerMachine::penalized(r, PenaltySemantics::Strict, t)?;
        let config = GameConfig::new(t, gamma, v)?;
        let (transcript, buyer) = strategic_play(&seller, &config)?;
        let regret = strategic_regret(&transcript, &config)?;
        let bound = pfs_regret_bound(gamma, v, t, r);
        tally.record(regret <= bound, regret / bound, || {
            format!("gamma={gamma} v={v} r={r} T={t} ({buyer}): regret {regret} > {bound}")
        });
    }
    let mut report = CheckReport::default();
    report.push(tally.entry("max regret/bound"));
    Ok(report)
}

/// PFS with the optimal penalty for `γ₀` stays under the optimal-penalty
/// bound whenever `1/2 < γ < γ₀ < 1`.
pub fn optimal_penalty_bound_dominance(cases: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut tally = Tally::new("PFS_r* regret <= optimal-penalty bound");
    for _ in 0..cases {
        let g0: f64 = rng.gen_range(0.55..0.99);
        let gamma: f64 = rng.gen_range(0.5..g0).max(0.5 + 1e-6);
        let v: f64 = rng.gen_range(0.05..=1.0);
        let t = DOMINANCE_HORIZONS[rng.gen_range(0..DOMINANCE_HORIZONS.len())];
        let r = r_star(g0, t, RStarMethod::ClosedForm)?.r_star;
        let seller = SellerMachine::penalized(r, PenaltySemantics::Strict, t)?;
        let config = GameConfig::new(t, gamma, v)?;
        let (transcript, buyer) = strategic_play(&seller, &config)?;
        let regret = strategic_regret(&transcript, &config)?;
        let bound = optimal_penalty_regret_bound(g0, v, t);
        tally.record(regret <= bound, regret / bound, || {
            format!("gamma={gamma} gamma0={g0} v={v} r*={r} T={t} ({buyer}): regret {regret} > {bound}")
        });
    }
    let mut report = CheckReport::default();
    report.push(tally.entry("max regret/bound"));
    Ok(report)
}
