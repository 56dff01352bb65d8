//! Experiment configuration, parallel sweeps, and CSV/SVG output.

mod config;
mod csv_io;
mod plot;
mod sweep;

pub use config::{
    auto_beta, ceil_log_r, Axes, BetaPolicy, BuyerConfig, ExperimentConfig, Horizons,
    OutputConfig, RPolicy, ResolvedSeller, SellerConfig, CONFIG_VERSION,
};
pub use csv_io::{emit_csv, format12, read_csv, round12, rounded, write_csv, CSV_HEADER};
pub use plot::{emit_plot, render_svg};
pub use sweep::{run_sweep, seller_labels, worker_count, SweepRow, THREADS_ENV};
