//! CSV rendering and the analytic/Monte Carlo comparison report.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::sweep::Row;

pub const CSV_HEADER: &str = "scenario,M,L,K,rho,v,snr_db,p_e_analytic,p_e_mc,mc_ci,trials,seed";

/// Writes the header and one line per row. Floats use `{}` formatting, which
/// is the shortest representation that round-trips; missing values are
/// empty cells.
pub fn write_csv<W: Write>(rows: &[Row], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let p = &r.point;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p.scenario,
            p.tones,
            p.order,
            p.rician_k,
            p.rho,
            p.duty,
            p.snr_db,
            cell(r.p_analytic),
            cell(r.p_mc),
            cell(r.mc_ci),
            cell(r.trials),
            cell(r.seed),
        )?;
    }
    out.flush()
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Where `compare` writes its report: the CSV path with its extension
/// replaced by `report.txt`.
pub fn report_path(csv: &Path) -> PathBuf {
    csv.with_extension("report.txt")
}

/// Distance of the Monte Carlo estimate from the analytic value, in units of
/// the binomial standard deviation at the analytic value.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub row: Row,
    pub sigma: f64,
    pub z: f64,
}

impl Check {
    pub fn flagged(&self) -> bool {
        self.z.abs() > 3.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    /// Rows lacking either estimate are skipped.
    pub fn new(rows: &[Row]) -> Self {
        let checks = rows
            .iter()
            .filter_map(|r| {
                let (a, mc, n) = (r.p_analytic?, r.p_mc?, r.trials?);
                let sigma = (a * (1.0 - a) / n as f64).sqrt();
                let diff = mc - a;
                let z = if sigma > 0.0 {
                    diff / sigma
                } else if diff == 0.0 {
                    0.0
                } else {
                    f64::INFINITY.copysign(diff)
                };
                Some(Check { row: r.clone(), sigma, z })
            })
            .collect();
        Self { checks }
    }

    pub fn flagged(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.flagged())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let flagged = self.flagged().count();
        let _ = writeln!(
            s,
            "{} of {} points flagged (|analytic - mc| > 3 sigma)",
            flagged,
            self.checks.len()
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "scenario M L v snr_db  p_e_analytic  p_e_mc  sigma  z  status");
        for c in &self.checks {
            let p = &c.row.point;
            let _ = writeln!(
                s,
                "{} {} {} {} {}  {:.6e}  {:.6e}  {:.3e}  {:+.2}  {}",
                p.scenario,
                p.tones,
                p.order,
                p.duty,
                p.snr_db,
                c.row.p_analytic.unwrap_or(f64::NAN),
                c.row.p_mc.unwrap_or(f64::NAN),
                c.sigma,
                c.z,
                if c.flagged() { "FLAGGED" } else { "ok" },
            );
        }
        s
    }
}
