//! Run manifest: schema, parsing and validation.
//!
//! ```toml
//! mode = "compare"          # analytic | simulate | compare
//! scenario = "coherent"     # coherent | noncoherent
//!
//! [grid]
//! snr_db = [0, 5, 10, 15, 20]
//! v = [1, 0.8, 0.5, 0.2]
//! L = [2]
//! M = [4]
//!
//! [channel]
//! K = 0.125                 # Rician factor, >= 0
//! rho = 0.0                 # antenna correlation, 0 <= rho < 1
//!
//! [mc]
//! trials = 1000000
//! seed = 1
//!
//! [output]
//! path = "curves.csv"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use oofsk_core::{AntennaChannelSpec, Correlation, ModulationSpec, Scenario};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Simulate,
    Compare,
}

impl Mode {
    pub fn needs_analytic(self) -> bool {
        matches!(self, Mode::Analytic | Mode::Compare)
    }

    pub fn needs_simulation(self) -> bool {
        matches!(self, Mode::Simulate | Mode::Compare)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Analytic => "analytic",
            Mode::Simulate => "simulate",
            Mode::Compare => "compare",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ScenarioName {
    Coherent,
    Noncoherent,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub snr_db: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(rename = "L")]
    pub order: Vec<u32>,
    #[serde(rename = "M")]
    pub tones: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channel {
    #[serde(rename = "K")]
    pub rician_k: f64,
    #[serde(default)]
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    mode: Option<Mode>,
    scenario: ScenarioName,
    grid: Grid,
    channel: Channel,
    mc: Option<McSettings>,
    output: Option<Output>,
}

/// A parsed run manifest. Fields are public so callers (and command-line
/// overrides) can adjust them before [`Manifest::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub mode: Option<Mode>,
    pub scenario: Scenario,
    pub grid: Grid,
    pub channel: Channel,
    pub mc: Option<McSettings>,
    pub output: Option<PathBuf>,
}

impl FromStr for Manifest {
    type Err = String;

    /// Parse errors carry the line, column and offending key from `toml`.
    fn from_str(text: &str) -> Result<Self, String> {
        let raw: Raw = toml::from_str(text).map_err(|e| e.to_string().trim_end().to_owned())?;
        Ok(Manifest {
            mode: raw.mode,
            scenario: match raw.scenario {
                ScenarioName::Coherent => Scenario::Coherent,
                ScenarioName::Noncoherent => Scenario::Noncoherent,
            },
            grid: raw.grid,
            channel: raw.channel,
            mc: raw.mc,
            output: raw.output.map(|o| o.path),
        })
    }
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        text.parse().map_err(|message| CliError::Manifest {
            path: path.to_owned(),
            message,
        })
    }

    pub fn correlation(&self) -> Correlation {
        if self.channel.rho == 0.0 {
            Correlation::Independent
        } else {
            Correlation::Coefficient(self.channel.rho)
        }
    }

    /// Checks everything that can be checked without running the engines:
    /// non-empty grid, valid parameter values, and that the mode's
    /// requirements are met. Returns the mode to run.
    pub fn validate(&self) -> Result<Mode, String> {
        let mode = self
            .mode
            .ok_or("no mode given: set `mode` in the manifest or use a subcommand")?;
        let g = &self.grid;
        for (name, len) in [
            ("grid.snr_db", g.snr_db.len()),
            ("grid.v", g.v.len()),
            ("grid.L", g.order.len()),
            ("grid.M", g.tones.len()),
        ] {
            if len == 0 {
                return Err(format!("{name} is empty; the grid must have at least one point"));
            }
        }
        for &snr in &g.snr_db {
            if snr.is_nan() || snr == f64::INFINITY {
                return Err(format!("grid.snr_db: invalid value {snr}"));
            }
        }
        for &tones in &g.tones {
            for &duty in &g.v {
                ModulationSpec::new(tones, duty, 0.0).map_err(|e| format!("grid (M={tones}, v={duty}): {e}"))?;
            }
        }
        for &order in &g.order {
            AntennaChannelSpec::rician(order, self.channel.rician_k, self.correlation())
                .map_err(|e| format!("grid.L={order} with [channel]: {e}"))?;
        }
        if self.channel.rho != 0.0 && mode.needs_analytic() {
            return Err(format!(
                "channel.rho = {} is not supported in {mode} mode: closed-form error rates cover \
                 independent antennas only; use `simulate` for correlated channels",
                self.channel.rho
            ));
        }
        if mode.needs_simulation() {
            match &self.mc {
                None => return Err(format!("{mode} mode needs an [mc] section with `trials`")),
                Some(mc) if mc.trials == 0 => return Err("mc.trials must be positive".into()),
                Some(_) => {}
            }
        }
        Ok(mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
mode = "compare"
scenario = "noncoherent"

[grid]
snr_db = [0, 10]
v = [1, 0.5]
L = [2]
M = [4]

[channel]
K = 0.125

[mc]
trials = 1000
seed = 9

[output]
path = "out.csv"
"#;

    #[test]
    fn parses_full_manifest() {
        let m: Manifest = FULL.parse().unwrap();
        assert_eq!(m.mode, Some(Mode::Compare));
        assert_eq!(m.scenario, Scenario::Noncoherent);
        assert_eq!(m.grid.snr_db, vec![0.0, 10.0]);
        assert_eq!(m.grid.order, vec![2]);
        assert_eq!(m.channel.rho, 0.0);
        assert_eq!(m.mc.as_ref().unwrap().seed, 9);
        assert_eq!(m.output.as_deref(), Some(Path::new("out.csv")));
        assert_eq!(m.validate(), Ok(Mode::Compare));
    }

    #[test]
    fn unknown_key_names_line() {
        let text = FULL.replace("K = 0.125", "K = 0.125\nk_factor = 2");
        let err = text.parse::<Manifest>().unwrap_err();
        assert!(err.contains("k_factor"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn wrong_type_is_reported() {
        let err = FULL.replace("trials = 1000", "trials = \"many\"").parse::<Manifest>().unwrap_err();
        assert!(err.contains("trials"), "{err}");
    }

    #[test]
    fn empty_grid_is_refused() {
        let m: Manifest = FULL.replace("v = [1, 0.5]", "v = []").parse().unwrap();
        assert!(m.validate().unwrap_err().contains("grid.v"));
    }

    #[test]
    fn correlated_analytics_refused() {
        let mut m: Manifest = FULL.parse().unwrap();
        m.channel.rho = 0.25;
        assert!(m.validate().unwrap_err().contains("rho"));
        m.mode = Some(Mode::Simulate);
        assert_eq!(m.validate(), Ok(Mode::Simulate));
    }

    #[test]
    fn invalid_duty_is_refused() {
        let m: Manifest = FULL.replace("v = [1, 0.5]", "v = [1.5]").parse().unwrap();
        assert!(m.validate().is_err());
    }

    #[test]
    fn simulation_needs_trials() {
        let m: Manifest = FULL.replace("trials = 1000", "trials = 0").parse().unwrap();
        assert!(m.validate().is_err());
    }
}
