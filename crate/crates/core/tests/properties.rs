use proptest::prelude::*;

use pplab_core::buyers::{
    best_false_valuation, brute_force_best_response, optimal_surplus, DpBuyer, Truthful,
};
use pplab_core::harness::{emit_csv, read_csv, rounded, run_sweep, BuyerConfig, ExperimentConfig, Horizons};
use pplab_core::{
    acceptance_time, discounted_surplus, play_game, GameConfig, PenaltySemantics, SellerMachine,
};

const CAP: usize = 1 << 22;

/// Non-increasing drops starting from 1: a convex price sequence.
fn convex_sequence(len: usize, first_drop: f64, ratios: &[f64]) -> Vec<f64> {
    let mut prices = vec![1.0];
    let mut drop = first_drop;
    for k in 1..len {
        let next = (prices[k - 1] - drop).max(0.0);
        prices.push(next);
        drop *= ratios[k % ratios.len()];
    }
    prices
}

fn any_seller() -> impl Strategy<Value = (u8, f64, u32)> {
    (0u8..5, 0.2f64..0.95, 1u32..4)
}

fn build(kind: u8, beta: f64, r: u32, t: usize) -> SellerMachine {
    match kind {
        0 => SellerMachine::monotone_geometric(beta, t).unwrap(),
        1 => SellerMachine::fast_search(t),
        2 => SellerMachine::penalized(r, PenaltySemantics::Strict, t).unwrap(),
        3 => SellerMachine::penalized(r, PenaltySemantics::Literal, t).unwrap(),
        _ => SellerMachine::bisection(t),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Acceptance condition for convex monotone sellers against the exact
    /// best response.
    #[test]
    fn accepted_price_leaves_enough_margin(
        t in 2usize..80,
        gamma in 0.05f64..0.95,
        v in 0.05f64..1.0,
        first_drop in 0.01f64..0.3,
        ratios in prop::collection::vec(0.5f64..1.0, 1..6),
    ) {
        let prices = convex_sequence(t, first_drop, &ratios);
        let seller = SellerMachine::monotone_sequence(prices.clone(), t).unwrap();
        let config = GameConfig::new(t, gamma, v).unwrap();
        let mut buyer = DpBuyer::new(&seller, &config, CAP).unwrap();
        let tr = play_game(&seller, &mut buyer, &config).unwrap();
        if let Some(k) = acceptance_time(&tr) {
            if k < t {
                let c = (gamma - gamma.powi((t - k + 1) as i32)) / (1.0 - gamma);
                let p = prices[k - 1];
                let next = prices[k];
                prop_assert!(
                    v - p >= c * (p - next) - 1e-9,
                    "k={k} v={v} p={p} next={next} c={c}"
                );
            }
        }
    }

    #[test]
    fn best_response_ordering(
        (kind, beta, r) in any_seller(),
        t in 1usize..60,
        gamma in 0.05f64..0.95,
        v in 0.0f64..=1.0,
    ) {
        // Bisection never revisits a state, so its exact solve is exponential.
        let t = if kind == 4 { t.min(16) } else { t };
        let seller = build(kind, beta, r, t);
        let config = GameConfig::new(t, gamma, v).unwrap();
        let dp = optimal_surplus(&seller, &config, CAP).unwrap();
        let truthful = discounted_surplus(
            &play_game(&seller, &mut Truthful::new(v), &config).unwrap(),
            &config,
        )
        .unwrap();
        let (_, grid) = best_false_valuation(&seller, &config, 0.03).unwrap();
        prop_assert!(truthful >= -1e-12);
        prop_assert!(grid >= truthful - 1e-12);
        prop_assert!(dp >= grid - 1e-9, "dp {dp} < grid {grid}");
    }

    #[test]
    fn dp_transcript_realizes_its_value(
        (kind, beta, r) in any_seller(),
        t in 1usize..11,
        gamma in 0.05f64..0.95,
        v in 0.0f64..=1.0,
    ) {
        let seller = build(kind, beta, r, t);
        let config = GameConfig::new(t, gamma, v).unwrap();
        let mut buyer = DpBuyer::new(&seller, &config, CAP).unwrap();
        let played = discounted_surplus(&play_game(&seller, &mut buyer, &config).unwrap(), &config).unwrap();
        let (brute, _) = brute_force_best_response(&seller, &config).unwrap();
        prop_assert!((played - brute).abs() <= 1e-9, "played {played} brute {brute}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn csv_is_deterministic_and_round_trips(
        gamma in 0.3f64..0.95,
        v in 0.1f64..1.0,
        ts in prop::collection::vec(2usize..400, 1..4),
        threads in 1usize..4,
    ) {
        let mut config = ExperimentConfig::figure(gamma, v);
        config.horizons = Horizons::List(ts);
        config.buyer = BuyerConfig::Auto { cap: 200_000, step: 0.05 };
        config.threads = Some(threads);
        let rows = run_sweep(&config).unwrap();
        config.threads = Some(1);
        prop_assert_eq!(&rows, &run_sweep(&config).unwrap());

        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        emit_csv(&rows, &a).unwrap();
        let back = read_csv(&a).unwrap();
        prop_assert_eq!(&back, &rows.iter().map(rounded).collect::<Vec<_>>());
        emit_csv(&back, &b).unwrap();
        prop_assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

#[test]
fn documented_configs_load() {
    let docs = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs");
    for name in ["figure.json", "optimal-penalty.json"] {
        ExperimentConfig::load(&docs.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(docs.join("config.schema.json")).unwrap())
            .unwrap();
    let known = schema["properties"].as_object().unwrap();
    let preset = serde_json::to_value(ExperimentConfig::figure(0.85, 0.75)).unwrap();
    for key in preset.as_object().unwrap().keys() {
        assert!(known.contains_key(key), "schema lacks '{key}'");
    }
    assert_eq!(schema["required"].as_array().unwrap().len(), 5);
}
