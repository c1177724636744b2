//! Drivers for the Burgers, Euler and convergence studies.
//!
//! Each driver returns a report with every number the matching CSV carries;
//! the quantum runs use the LCU pipeline and are checked against the
//! classical recursion on the fly.

mod bench;
mod burgers;
mod euler;
mod resources;
pub mod svg;

pub use bench::{bench_kappa, bench_woodbury, tridiagonal_for_kappa, KappaConfig, KappaPoint, KappaReport, WoodburyConfig, WoodburyReport};
pub use burgers::{
    burgers_shock, burgers_surface, ShockConfig, ShockReport, ShockTracePoint, SurfaceConfig, SurfaceReport, SurfaceStep,
};
pub use euler::{euler_demo, radial_symmetry_defect, EulerConfig, EulerReport, EulerStep};
pub use resources::{resources_report, ResourcesReport};

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numkit::{norm2, relative_error};

/// Largest tolerated relative gap between a quantum-emulated iterate and its
/// classical counterpart before a run is aborted.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// Least-squares line `y = slope·x + intercept` with Pearson correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub pearson: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Parameter(format!("fit needs two equal-length series of >= 2 points, got {} and {}", x.len(), y.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::Parameter("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let pearson = if syy == 0.0 { 0.0 } else { sxy / (sxx * syy).sqrt() };
    Ok(LinearFit { slope, intercept: my - slope * mx, pearson })
}

/// Relative gap `‖quantum − classical‖ / ‖classical‖`, or an oracle error
/// when it exceeds [`ORACLE_TOLERANCE`].
pub fn cross_check(quantum: &[f64], classical: &[f64], what: &str) -> Result<f64> {
    let gap = if norm2(classical) == 0.0 { norm2(quantum) } else { relative_error(quantum, classical) };
    if !(gap <= ORACLE_TOLERANCE) {
        return Err(Error::Oracle(format!("{what}: quantum and classical iterates differ by {gap:e}")));
    }
    Ok(gap)
}

pub(crate) fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

pub(crate) fn csv_writer(dir: &Path, name: &str) -> Result<(csv::Writer<BufWriter<File>>, PathBuf)> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((csv::Writer::from_writer(BufWriter::new(f)), path))
}

pub(crate) fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!((f.pearson - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn oracle_gate() {
        assert!(cross_check(&[1.0, 2.0], &[1.0, 2.0], "x").unwrap() == 0.0);
        assert!(matches!(cross_check(&[1.0, 2.1], &[1.0, 2.0], "x"), Err(Error::Oracle(_))));
    }
}
