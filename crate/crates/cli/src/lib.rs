//! Config files, parameter sweeps and figure data for `uavcpn`.
//!
//! The binary is a thin wrapper over [`app::run`]; everything it does is
//! reachable from here so it can be scripted and tested.

pub mod app;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod quantity;
pub mod sweep;

pub use config::{parse_config, parse_config_with, Axis, AxisSpec, ConfigError, Output, RunConfig};
pub use error::{HarnessError, Result};
pub use figures::reproduce_figure;
pub use output::{Cell, Format, Table};
pub use sweep::run_sweep;
