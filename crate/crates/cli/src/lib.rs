//! Parameter sweeps over OOFSK error rates, driven by a TOML run manifest.
//!
//! A manifest names a scenario, a grid of `(M, L, v, SNR)` values and a
//! channel. [`evaluate`] turns it into one [`Row`] per grid point, filled by
//! the analytic formulas, the Monte Carlo engine or both; [`write_csv`] and
//! [`Report`] render the results.

mod error;
pub mod manifest;
pub mod output;
pub mod sweep;

pub use error::CliError;
pub use manifest::{Manifest, McSettings, Mode};
pub use output::{report_path, write_csv, Report, CSV_HEADER};
pub use sweep::{derive_seed, evaluate, GridPoint, Row};
