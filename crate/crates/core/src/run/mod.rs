//! Run configuration, job orchestration and digest-stamped outputs.

pub mod config;
pub mod jobs;
pub mod output;

pub use config::{ConstantKind, CountertermMode, InitialState, RunConfig};
pub use jobs::{exit_status, plan, run_job, Job, JobOutput, Suite};
pub use output::{read_csv, write_outputs, Artifact, CsvTable, RunManifest, TestReport, DIGEST_COLUMN, MANIFEST_NAME};
