//! Configuration, initial data, report files and the run verbs.

pub mod config;
pub mod initial;
pub mod report;
pub mod run;

pub use config::{parse_config, RunConfig};
pub use initial::gen_initial_data;
pub use report::{config_hash, parse_report_json, parse_summary_csv, JsonReport, SummaryTable};
pub use run::{run, RunOptions, RunOutcome, Suite, Verb};
