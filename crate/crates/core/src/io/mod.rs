//! Config files, trace CSV and metrics documents.

mod config;
mod trace;

pub use config::{
    apply_overrides, config_to_string, load_config, load_scenario, parse_config, resolve_profile,
    Override,
};
pub use trace::{format_float, read_trace, write_metrics, write_trace, TraceRow, TRACE_HEADER};
