//! Seeded, parallel Monte Carlo experiments and their persisted outputs.

mod config;
mod output;
mod run;

pub use config::{
    CorrelationSection, ExperimentConfig, PlacementSection, PropagationSection, ShadowingSection, ThresholdSection,
};
pub use output::{parse_records_csv, records_csv, summary_text, write_outputs};
pub use run::{expected_counts, replication_rng, run_experiment, ExperimentResult, Replication};
