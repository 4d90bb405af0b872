//! Config parsing, command dispatch and CSV persistence for the `mfhmc` binary.

mod config;
mod output;
mod run;

pub use config::{
    parse_config, parse_config_file, Cli, Command, KeyArgs, Problem, RunConfig, DEFAULT_HEAT_MODES, DEFAULT_MVN_DIM,
    KEYS, SEED_ENV,
};
pub use output::{
    parse_chain, read_chain, render_chain, render_report, write_chain, write_report, write_with, ChainTable,
    REPORT_HEADER,
};
pub use run::{execute, load_field, run_sample};
