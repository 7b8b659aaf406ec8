//! Grid expansion and per-point evaluation.

use oofsk_core::{
    pe_average_coherent, pe_noncoherent, AntennaChannelSpec, ModulationSpec, MonteCarlo, Scenario,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::CliError;
use crate::manifest::{Manifest, Mode};

/// One point of the sweep, in grid order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: u64,
    pub scenario: Scenario,
    pub tones: u32,
    pub order: u32,
    pub rician_k: f64,
    pub rho: f64,
    pub duty: f64,
    pub snr_db: f64,
}

impl GridPoint {
    fn label(&self) -> String {
        format!(
            "{} M={} L={} K={} rho={} v={} snr_db={}",
            self.scenario, self.tones, self.order, self.rician_k, self.rho, self.duty, self.snr_db
        )
    }
}

/// Result for one grid point; `None` fields are not computed in this mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub point: GridPoint,
    pub p_analytic: Option<f64>,
    pub p_mc: Option<f64>,
    /// Half-width of the Wilson 95% interval around `p_mc`.
    pub mc_ci: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

/// Seed used for grid point `index`: the first output of ChaCha8 keyed by
/// the run seed on stream `index`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

/// Expands the grid with `M` outermost, then `L`, `v` and SNR innermost.
pub fn grid_points(manifest: &Manifest) -> Vec<GridPoint> {
    let g = &manifest.grid;
    let mut points = Vec::new();
    for &tones in &g.tones {
        for &order in &g.order {
            for &duty in &g.v {
                for &snr_db in &g.snr_db {
                    points.push(GridPoint {
                        index: points.len() as u64,
                        scenario: manifest.scenario,
                        tones,
                        order,
                        rician_k: manifest.channel.rician_k,
                        rho: manifest.channel.rho,
                        duty,
                        snr_db,
                    });
                }
            }
        }
    }
    points
}

/// Validates the manifest and evaluates every grid point. Points run in
/// parallel; rows come back in grid order.
pub fn evaluate(manifest: &Manifest) -> Result<Vec<Row>, CliError> {
    let mode = manifest.validate().map_err(CliError::Usage)?;
    grid_points(manifest)
        .par_iter()
        .map(|point| evaluate_point(manifest, mode, point))
        .collect()
}

fn evaluate_point(manifest: &Manifest, mode: Mode, point: &GridPoint) -> Result<Row, CliError> {
    let numerical = |source| CliError::Numerical {
        point: point.label(),
        source,
    };
    let spec = ModulationSpec::new(point.tones, point.duty, point.snr_db).map_err(numerical)?;
    let channel =
        AntennaChannelSpec::rician(point.order, point.rician_k, manifest.correlation()).map_err(numerical)?;
    let mut row = Row {
        point: *point,
        p_analytic: None,
        p_mc: None,
        mc_ci: None,
        trials: None,
        seed: None,
    };
    if mode.needs_analytic() {
        let p = match point.scenario {
            Scenario::Coherent => pe_average_coherent(&spec, &channel),
            Scenario::Noncoherent => pe_noncoherent(&spec, &channel),
        };
        row.p_analytic = Some(p.map_err(numerical)?);
    }
    if mode.needs_simulation() {
        let mc = manifest.mc.as_ref().expect("validated");
        let seed = derive_seed(mc.seed, point.index);
        let stats = MonteCarlo::new(mc.trials, seed)
            .run(&spec, &channel, point.scenario)
            .map_err(numerical)?;
        row.p_mc = Some(stats.p_hat());
        row.mc_ci = Some(stats.ci_halfwidth());
        row.trials = Some(stats.trials());
        row.seed = Some(seed);
    }
    Ok(row)
}
