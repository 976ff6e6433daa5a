//! Experiment configs, the identification pipeline, reports and the commands behind
//! the `locsysid` binary.

mod commands;
mod config;
mod pipeline;
mod report;

pub use commands::{
    cmd_identify, cmd_repro_paper, cmd_simulate, cmd_sweep, full_checks, full_experiment, hidden_checks,
    hidden_experiment, write_atomic, write_sweep_csv, BandCheck, IdentifySummary, ReproSummary, RunStats, SweepRow,
    TrajectoryMeta, REPRO_DELTA_H, REPRO_MAX_ITERS,
};
pub use config::{ExperimentConfig, Method, Mode, NoiseOverride, PAPER_CHAIN};
pub use pipeline::{median, prepare, run, Comparison, Dataset, Outcome, FREQUENCY_RANK_RATIO};
pub use report::{validate_report, FrequencySummary, IdentifyReport, OrderSummary};
