use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pplab_core::analysis::{bound_report, r_star, BoundParams, RStarMethod};
use pplab_core::buyers::{
    best_false_valuation, make_buyer, BuyerSpec, FalseValuation, DEFAULT_DP_CAP, DEFAULT_GRID_STEP,
};
use pplab_core::harness::{
    auto_beta, ceil_log_r, emit_csv, emit_plot, run_sweep, write_csv, Axes, BetaPolicy,
    BuyerConfig, ExperimentConfig, Horizons, RPolicy, SellerConfig,
};
use pplab_core::sellers::{node_tree, price_tree};
use pplab_core::verify::{run_suite, Suite, SuiteOptions};
use pplab_core::{play_game, score, BuyerPolicy, Error, GameConfig, PenaltySemantics, PriceMachine};

#[derive(Parser)]
#[command(name = "pplab", version, about = "Posted-price auctions against strategic buyers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game and print the outcome.
    Simulate(SimulateArgs),
    /// Run a parameter sweep from a JSON config and write CSV/SVG.
    Sweep(SweepArgs),
    /// Print the closed-form bounds for one configuration.
    Bounds(BoundsArgs),
    /// Run a named verification suite (or `all`).
    Verify(VerifyArgs),
    /// Print a seller's decision tree as text or Graphviz.
    Tree(TreeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SellerKind {
    Monotone,
    FastSearch,
    Pfs,
    Bisection,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuyerKind {
    Truthful,
    Dp,
    Grid,
    /// Exact best response, falling back to the grid buyer when intractable.
    Auto,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    Strict,
    Literal,
}

impl From<SemanticsArg> for PenaltySemantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Strict => PenaltySemantics::Strict,
            SemanticsArg::Literal => PenaltySemantics::Literal,
        }
    }
}

fn parse_beta(s: &str) -> Result<BetaPolicy, String> {
    match s {
        "auto" => Ok(BetaPolicy::Auto),
        _ => s
            .parse()
            .map(|value| BetaPolicy::Fixed { value })
            .map_err(|_| format!("expected 'auto' or a number, got '{s}'")),
    }
}

fn parse_r(s: &str) -> Result<RPolicy, String> {
    match s {
        "logT" | "ceil-log-T" | "ceil-log-t" => Ok(RPolicy::CeilLogT),
        "auto" => Ok(RPolicy::Auto),
        _ => s
            .parse()
            .map(|value| RPolicy::Fixed { value })
            .map_err(|_| format!("expected 'logT', 'auto' or an integer, got '{s}'")),
    }
}

#[derive(Args)]
struct SellerArgs {
    #[arg(long, value_enum)]
    seller: SellerKind,
    /// Geometric ratio of the monotone seller: a number or `auto`.
    #[arg(long, value_parser = parse_beta, default_value = "auto")]
    beta: BetaPolicy,
    /// Penalty of pfs: an integer, `logT` (ceil ln T) or `auto` (needs --gamma0).
    #[arg(long, value_parser = parse_r, default_value = "logT")]
    r: RPolicy,
    #[arg(long, value_enum, default_value = "strict")]
    semantics: SemanticsArg,
}

impl SellerArgs {
    fn config(&self) -> SellerConfig {
        match self.seller {
            SellerKind::Monotone => SellerConfig::Monotone { beta: self.beta },
            SellerKind::FastSearch => SellerConfig::FastSearch,
            SellerKind::Pfs => SellerConfig::Pfs {
                r: self.r,
                semantics: Some(self.semantics.into()),
            },
            SellerKind::Bisection => SellerConfig::Bisection,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    seller: SellerArgs,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    v: f64,
    #[arg(long = "T")]
    horizon: usize,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    buyer: BuyerKind,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    grid_step: f64,
    #[arg(long, default_value_t = DEFAULT_DP_CAP)]
    dp_cap: usize,
    /// Also print every round.
    #[arg(long)]
    transcript: bool,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the monotone-vs-pfs figure preset instead of a file.
    #[arg(long, conflicts_with = "config")]
    figure: bool,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    v: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    /// Comma-separated horizons.
    #[arg(long = "T", value_delimiter = ',')]
    horizons: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    buyer: Option<BuyerKind>,
    #[arg(long)]
    threads: Option<usize>,
    /// CSV output path; `-` for stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// log-log, linear-linear, log-linear or linear-log.
    #[arg(long)]
    axes: Option<Axes>,
    /// Fill the wall_ms column.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long = "T")]
    horizon: usize,
    #[arg(long)]
    v: f64,
    #[arg(long, default_value_t = 1)]
    r: u32,
    #[arg(long)]
    gamma0: Option<f64>,
    /// Constant of the log log T lower bound.
    #[arg(long, default_value_t = 1.0)]
    kl_constant: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// dp-oracle, prop3, lemma3, lemma-numeric, rstar, consistency,
    /// bound-dominance, or all.
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random cases (suite default when omitted).
    #[arg(long)]
    cases: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeFormat {
    Text,
    Dot,
}

#[derive(Args)]
struct TreeArgs {
    #[command(flatten)]
    seller: SellerArgs,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Horizon the machine is built for (defaults to the depth).
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    /// Fold penalty rounds into decision nodes.
    #[arg(long)]
    nodes: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: TreeFormat,
}

/// A config shell holding just what seller resolution reads.
fn resolution_config(gamma: f64, gamma0: Option<f64>, seller: SellerConfig) -> ExperimentConfig {
    let mut c = ExperimentConfig::figure(gamma, 0.5);
    c.sellers = vec![seller];
    c.gamma0 = gamma0;
    c
}

fn simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let game = GameConfig::new(args.horizon, args.gamma, args.v)?;
    let seller_config = args.seller.config();
    let shell = resolution_config(args.gamma, args.gamma0, seller_config.clone());
    shell.validate()?;
    let seller = seller_config.resolve(&shell, args.horizon)?;
    let grid = |declared: &mut Option<f64>| -> anyhow::Result<Box<dyn BuyerPolicy<_>>> {
        let (d, _) = best_false_valuation(&seller.machine, &game, args.grid_step)?;
        *declared = Some(d);
        Ok(Box::new(FalseValuation::new(d)))
    };
    let mut declared = None;
    let mut buyer: Box<dyn BuyerPolicy<_>> = match args.buyer {
        BuyerKind::Truthful => make_buyer(&BuyerSpec::Truthful, &seller.machine, &game)?,
        BuyerKind::Brute => make_buyer(&BuyerSpec::BruteForce, &seller.machine, &game)?,
        BuyerKind::Grid => grid(&mut declared)?,
        BuyerKind::Dp | BuyerKind::Auto => {
            let spec = BuyerSpec::Optimal { cap: args.dp_cap };
            match make_buyer(&spec, &seller.machine, &game) {
                Err(Error::Intractable { .. }) if matches!(args.buyer, BuyerKind::Auto) => {
                    grid(&mut declared)?
                }
                other => other?,
            }
        }
    };
    let transcript = play_game(&seller.machine, &mut buyer, &game)?;
    let outcome = score(&transcript, &game)?;
    if args.json {
        let mut out = json!({
            "seller": seller.machine.label(),
            "buyer": buyer.name(),
            "T": args.horizon,
            "gamma": args.gamma,
            "v": args.v,
            "r": seller.r,
            "beta": seller.beta,
            "revenue": outcome.revenue,
            "regret": outcome.regret,
            "surplus": outcome.surplus,
            "kappa_star": outcome.kappa_star,
            "lie_count": outcome.lie_count,
            "best_false_valuation": declared,
        });
        if args.transcript {
            out["rounds"] = transcript
                .rounds()
                .iter()
                .map(|r| json!([r.t, r.price, r.accepted]))
                .collect();
        }
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!("seller        {}", seller.machine.label());
    match declared {
        Some(d) => println!("buyer         {} (declared v = {d})", buyer.name()),
        None => println!("buyer         {}", buyer.name()),
    }
    println!("T             {}", args.horizon);
    println!("gamma         {}", args.gamma);
    println!("v             {}", args.v);
    println!("revenue       {}", outcome.revenue);
    println!("regret        {}", outcome.regret);
    println!("surplus       {}", outcome.surplus);
    match outcome.kappa_star {
        Some(k) => println!("kappa*        {k}"),
        None => println!("kappa*        none"),
    }
    println!("lies          {}", outcome.lie_count);
    if args.transcript {
        for r in transcript.rounds() {
            println!("{:>6} {:<22} {}", r.t, r.price, if r.accepted { "accept" } else { "reject" });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    let mut config = match (&args.config, args.figure) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, true) => ExperimentConfig::figure(args.gamma.unwrap_or(0.85), args.v.unwrap_or(0.75)),
        (None, false) => bail!(Error::Config("pass --config FILE or --figure".into())),
    };
    if let Some(g) = args.gamma {
        config.gamma = g;
    }
    if let Some(v) = args.v {
        config.v = v;
    }
    if args.gamma0.is_some() {
        config.gamma0 = args.gamma0;
    }
    if let Some(ts) = args.horizons {
        config.horizons = Horizons::List(ts);
    }
    if let Some(b) = args.buyer {
        config.buyer = match b {
            BuyerKind::Truthful => BuyerConfig::Truthful,
            BuyerKind::Dp => BuyerConfig::Dp { cap: DEFAULT_DP_CAP },
            BuyerKind::Grid => BuyerConfig::Grid {
                step: DEFAULT_GRID_STEP,
            },
            BuyerKind::Auto => BuyerConfig::Auto {
                cap: DEFAULT_DP_CAP,
                step: DEFAULT_GRID_STEP,
            },
            BuyerKind::Brute => bail!(Error::Config("the sweep runner has no brute-force buyer".into())),
        };
    }
    if args.threads.is_some() {
        config.threads = args.threads;
    }
    if args.csv.is_some() {
        config.output.csv = args.csv;
    }
    if args.svg.is_some() {
        config.output.svg = args.svg;
    }
    if let Some(a) = args.axes {
        config.output.axes = a;
    }
    config.timing |= args.timing;
    config.validate()?;

    let rows = run_sweep(&config)?;
    match &config.output.csv {
        Some(p) if p.as_os_str() != "-" => emit_csv(&rows, p)?,
        _ => write_csv(&rows, std::io::stdout().lock(), std::path::Path::new("<stdout>"))?,
    }
    if let Some(p) = &config.output.svg {
        emit_plot(&rows, p, config.output.axes)?;
    }
    let skipped = rows.iter().filter(|r| r.is_skipped()).count();
    if skipped > 0 {
        eprintln!("{skipped} of {} rows skipped", rows.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn bounds(args: BoundsArgs) -> anyhow::Result<ExitCode> {
    let mut params = BoundParams::new(args.gamma, args.v, args.horizon, args.r);
    params.gamma0 = args.gamma0;
    params.kl_constant = args.kl_constant;
    let report = bound_report(params)?;
    let rstar = args
        .gamma0
        .map(|g0| r_star(g0, args.horizon, RStarMethod::ClosedForm))
        .transpose()?;
    if args.json {
        let out = json!({
            "gamma": args.gamma,
            "gamma0": args.gamma0,
            "v": args.v,
            "T": args.horizon,
            "r": args.r,
            "t_gamma": report.t_gamma,
            "c_gamma": report.c_gamma,
            "phases": report.phases,
            "bound_eq_reggamma": report.eq_reggamma_bound,
            "bound_thm1": report.thm1_bound,
            "thm1_applicable": report.thm1_applicable,
            "lower_prop1": report.prop1_lower,
            "lower_prop6": report.prop6_lower,
            "prop6_applicable": report.prop6_applicable,
            "lower_kau": report.kau_lower,
            "lower_kl": report.kl_lower,
            "lower_corollary": report.corollary_lower,
            "r_star": rstar.map(|r| r.r_star),
            "r_bar_star": rstar.map(|r| r.r_bar_star),
            "r_star_scan": rstar.map(|r| r.scan_argmin),
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("{report}");
        if let Some(r) = rstar {
            println!(
                "r* (from gamma0)        = {} (r_bar* = {:.4}, integer scan {})",
                r.r_star, r.r_bar_star, r.scan_argmin
            );
        }
        println!("auto beta               = {}", auto_beta(args.horizon, args.gamma));
        println!("ceil(ln T)              = {}", ceil_log_r(args.horizon));
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse()?]
    };
    let opts = SuiteOptions {
        seed: args.seed,
        cases: args.cases,
    };
    let mut ok = true;
    for suite in suites {
        let report = run_suite(suite, &opts)?;
        println!("== {suite}");
        print!("{report}");
        ok &= report.all_passed();
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn tree(args: TreeArgs) -> anyhow::Result<ExitCode> {
    let horizon = args.horizon.unwrap_or(args.depth);
    let seller_config = args.seller.config();
    let shell = resolution_config(args.gamma.unwrap_or(0.5), args.gamma0, seller_config.clone());
    shell.validate()?;
    let seller = seller_config.resolve(&shell, horizon)?;
    let tree = if args.nodes {
        node_tree(&seller.machine, args.depth)?
    } else {
        price_tree(&seller.machine, args.depth)?
    };
    match args.format {
        TreeFormat::Text => print!("{}", tree.to_text()),
        TreeFormat::Dot => print!("{}", tree.to_dot()),
    }
    Ok(ExitCode::SUCCESS)
}

/// Invalid arguments and configurations are usage errors (exit 2); other
/// failures such as I/O exit 1.
fn exit_code(err: &anyhow::Error) -> ExitCode {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Parameter(_) | Error::TooLarge { .. } | Error::Json { .. }) => {
            ExitCode::from(2)
        }
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Bounds(a) => bounds(a),
        Command::Verify(a) => verify(a),
        Command::Tree(a) => tree(a),
    };
    match result.context("pplab") {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {:#}", err);
            exit_code(&err)
        }
    }
}
