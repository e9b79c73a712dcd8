//! Experiment driver: single instances, sweeps, and their JSON/CSV outputs.

pub mod config;
pub mod instance;
pub mod sweep;

pub use config::{ExperimentConfig, Family, LemmaConfig, PivotPolicy, SweepConfig, DEFAULT_EPS};
pub use instance::{run_instance, run_strata, to_json, write_instance_outputs, FieldInfo, Instance, InstanceReport};
pub use sweep::{plan_sweep, rows_to_csv, run_lemma_sweep, run_sweep, write_rows, LemmaRow, SummaryRow};
