//! Monte Carlo harness: scenarios, sweeps, elbow curves and timing.
//!
//! Realization `r` always draws from its own random stream, so results do
//! not depend on the number of worker threads.

mod bench;
mod config;
mod elbow;
pub mod report;
pub mod rng;
mod run;
pub mod stats;
mod sweep;

pub use bench::{bench_timing, BenchOptions, BenchReport, BenchRow};
pub use config::{ChannelConfig, PortsSetting, ResolvedScheme, ScenarioConfig, SchemeConfig, SchemeKind};
pub use elbow::{elbow_curve, ElbowCurve};
pub use run::{
    run_samples, run_scenario, solve_scheme, summarize, MetricsSummary, Scenario, ScenarioSamples, SchemeSamples,
    SchemeSummary, TimingStats,
};
pub use sweep::{parse_values, sweep, SweepAxis, SweepPoint, SweepTable};
