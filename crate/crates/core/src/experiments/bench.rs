use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{cross_check, csv_writer, finish, fmt, linear_fit, svg, write_text, LinearFit};
use crate::blockenc::Backend;
use crate::error::{Error, Result};
use crate::iterate::{
    gauss_seidel_iterate, iterations_to_threshold, spectral_radius, split_jacobi, woodbury_gs_iterate, InitialGuess,
    Scheme, SplitSystem,
};
use crate::lcu::{self, LcuScheme};
use crate::numkit::{condition_number, tridiagonal, CsrMatrix};

/// Split of `tridiag(−1, d, −1) x = 1` with a direct reference.
fn tridiagonal_split(n: usize, d: f64) -> Result<(SplitSystem, f64)> {
    let dense = tridiagonal(n, -1.0, d, -1.0);
    let kappa = condition_number(&dense)?;
    let split = split_jacobi(&CsrMatrix::from_dense(&dense)?, &vec![1.0; n], &InitialGuess::Rhs)?.with_direct_reference()?;
    Ok((split, kappa))
}

/// Diagonal `d` for which `tridiag(−1, d, −1)` of size `n` has condition
/// number `kappa`, by bisection on the measured condition number.
pub fn tridiagonal_for_kappa(n: usize, kappa: f64) -> Result<f64> {
    if !(kappa > 1.0) {
        return Err(Error::Parameter(format!("target condition number must exceed 1, got {kappa}")));
    }
    let measure = |d: f64| condition_number(&tridiagonal(n, -1.0, d, -1.0));
    let (mut lo, mut hi) = (2.0 + 1e-9, 4.0);
    while measure(hi)? > kappa {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        // κ falls as d grows.
        match measure(mid) {
            Ok(k) if k > kappa => lo = mid,
            Ok(_) => hi = mid,
            Err(_) => lo = mid,
        }
        if hi - lo < 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaConfig {
    pub n: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub points: usize,
    pub threshold: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub k_max: usize,
}

impl Default for KappaConfig {
    fn default() -> Self {
        Self { n: 256, d_min: 2.02, d_max: 6.0, points: 40, threshold: 1e-6, kappa_min: 3.0, kappa_max: 70.0, k_max: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaPoint {
    pub d: f64,
    pub kappa: f64,
    pub spectral_radius: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct KappaReport {
    /// Sorted by increasing `κ`.
    pub points: Vec<KappaPoint>,
    /// Diagonals whose Jacobi iteration diverges or misses the threshold.
    pub excluded: Vec<f64>,
    pub fit: LinearFit,
}

impl KappaReport {
    pub fn write(&self, dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
        let (mut w, path) = csv_writer(dir, "kappa.csv")?;
        w.write_record(["kappa", "iterations_to_threshold", "d", "spectral_radius"])?;
        for p in &self.points {
            w.write_record([fmt(p.kappa), p.iterations.to_string(), fmt(p.d), fmt(p.spectral_radius)])?;
        }
        finish(w, &path)?;
        let (mut w, fit) = csv_writer(dir, "kappa_fit.csv")?;
        w.write_record(["slope", "intercept", "pearson_r"])?;
        w.write_record([fmt(self.fit.slope), fmt(self.fit.intercept), fmt(self.fit.pearson)])?;
        finish(w, &fit)?;
        let mut out = vec![path, fit];
        if plots {
            let series = vec![(
                "iterations".to_string(),
                self.points.iter().map(|p| (p.kappa, p.iterations as f64)).collect(),
            )];
            out.push(write_text(dir, "kappa.svg", &svg::line_chart("Iterations to threshold", "kappa", "k", &series, false))?);
        }
        Ok(out)
    }
}

/// Sweep `d` geometrically in `d − 2` over `[d_min, d_max]`, keep the
/// members with `κ` in range, count Jacobi iterations to the threshold.
pub fn bench_kappa(cfg: &KappaConfig) -> Result<KappaReport> {
    if !(cfg.d_min > 2.0 && cfg.d_max > cfg.d_min && cfg.points >= 2) {
        return Err(Error::Parameter("need 2 < d_min < d_max and at least two points".into()));
    }
    let ratio = (cfg.d_max - 2.0) / (cfg.d_min - 2.0);
    let ds: Vec<f64> = (0..cfg.points)
        .map(|i| 2.0 + (cfg.d_min - 2.0) * ratio.powf(i as f64 / (cfg.points - 1) as f64))
        .collect();
    let results: Vec<Result<Option<KappaPoint>>> = ds
        .par_iter()
        .map(|&d| {
            let (split, kappa) = tridiagonal_split(cfg.n, d)?;
            if kappa < cfg.kappa_min || kappa > cfg.kappa_max {
                return Ok(None);
            }
            let rho = spectral_radius(&split);
            if rho >= 1.0 {
                log::warn!("d = {d}: Jacobi spectral radius {rho} >= 1, excluded");
                return Ok(Some(KappaPoint { d, kappa, spectral_radius: rho, iterations: 0 }));
            }
            let iterations = iterations_to_threshold(&split, Scheme::Jacobi, cfg.threshold, cfg.k_max)?.unwrap_or(0);
            Ok(Some(KappaPoint { d, kappa, spectral_radius: rho, iterations }))
        })
        .collect();
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for r in results {
        match r? {
            Some(p) if p.iterations == 0 => excluded.push(p.d),
            Some(p) => points.push(p),
            None => {}
        }
    }
    points.sort_by(|a, b| a.kappa.total_cmp(&b.kappa));
    let fit = linear_fit(
        &points.iter().map(|p| p.kappa).collect::<Vec<_>>(),
        &points.iter().map(|p| p.iterations as f64).collect::<Vec<_>>(),
    )?;
    Ok(KappaReport { points, excluded, fit })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WoodburyConfig {
    pub n: usize,
    pub kappa: f64,
    pub levels: Vec<usize>,
    pub iterations: usize,
    /// Cross-check the final iterate of every curve through the LCU pipeline.
    pub quantum_check: bool,
}

impl Default for WoodburyConfig {
    fn default() -> Self {
        Self { n: 128, kappa: 24.0, levels: vec![5, 10, 15, 20], iterations: 80, quantum_check: true }
    }
}

#[derive(Debug, Clone)]
pub struct WoodburyReport {
    pub d: f64,
    pub kappa: f64,
    pub iterations: usize,
    /// `(L, fidelity errors for k = 1..=K)`, sorted by `L`.
    pub curves: Vec<(usize, Vec<f64>)>,
    /// Untruncated Gauss-Seidel.
    pub exact: Vec<f64>,
    /// `L = N − 1`.
    pub nilpotent: Vec<f64>,
    /// Largest entrywise gap between the `L = N − 1` and exact iterates.
    pub nilpotent_iterate_gap: f64,
    pub quantum_gaps: Vec<(usize, f64)>,
}

impl WoodburyReport {
    /// `error_{L_i}(k) ≥ error_{L_{i+1}}(k)` for every `k ≥ from`.
    pub fn ordered_from(&self, from: usize) -> bool {
        self.curves
            .windows(2)
            .all(|w| (from.max(1)..=self.iterations).all(|k| w[0].1[k - 1] >= w[1].1[k - 1]))
    }

    pub fn write(&self, dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
        let (mut w, path) = csv_writer(dir, "woodbury.csv")?;
        let mut header = vec!["k".to_string()];
        header.extend(self.curves.iter().map(|(l, _)| format!("L{l}")));
        header.push("gauss_seidel".into());
        w.write_record(&header)?;
        for k in 1..=self.iterations {
            let mut row = vec![k.to_string()];
            row.extend(self.curves.iter().map(|(_, c)| fmt(c[k - 1])));
            row.push(fmt(self.exact[k - 1]));
            w.write_record(&row)?;
        }
        finish(w, &path)?;
        let mut out = vec![path];
        if plots {
            let mut series: Vec<(String, Vec<(f64, f64)>)> = self
                .curves
                .iter()
                .map(|(l, c)| (format!("L = {l}"), c.iter().enumerate().map(|(i, e)| ((i + 1) as f64, *e)).collect()))
                .collect();
            series.push(("Gauss-Seidel".into(), self.exact.iter().enumerate().map(|(i, e)| ((i + 1) as f64, *e)).collect()));
            out.push(write_text(dir, "woodbury.svg", &svg::line_chart("Woodbury truncation", "k", "error", &series, true))?);
        }
        Ok(out)
    }
}

pub fn bench_woodbury(cfg: &WoodburyConfig) -> Result<WoodburyReport> {
    let d = tridiagonal_for_kappa(cfg.n, cfg.kappa)?;
    let (split, kappa) = tridiagonal_split(cfg.n, d)?;
    let k = cfg.iterations;
    let mut levels = cfg.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let curves: Vec<Result<(usize, Vec<f64>, Option<f64>)>> = levels
        .par_iter()
        .map(|&l| {
            let t = woodbury_gs_iterate(&split, k, l);
            let gap = if cfg.quantum_check {
                let q = lcu::solve(&split, LcuScheme::GaussSeidel { levels: l }, k, Backend::Emulation, false)?;
                Some(cross_check(&q.unnormalized(), t.last(), &format!("Woodbury L = {l}"))?)
            } else {
                None
            };
            Ok((l, t.fidelity_errors[1..].to_vec(), gap))
        })
        .collect();
    let mut out = Vec::with_capacity(levels.len());
    let mut quantum_gaps = Vec::new();
    for c in curves {
        let (l, e, gap) = c?;
        if let Some(g) = gap {
            quantum_gaps.push((l, g));
        }
        out.push((l, e));
    }
    let exact = gauss_seidel_iterate(&split, k);
    let nil = woodbury_gs_iterate(&split, k, cfg.n - 1);
    let gap = exact
        .iterates
        .iter()
        .zip(&nil.iterates)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0f64, f64::max);
    Ok(WoodburyReport {
        d,
        kappa,
        iterations: k,
        curves: out,
        exact: exact.fidelity_errors[1..].to_vec(),
        nilpotent: nil.fidelity_errors[1..].to_vec(),
        nilpotent_iterate_gap: gap,
        quantum_gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_hits_target() {
        let d = tridiagonal_for_kappa(32, 10.0).unwrap();
        let k = condition_number(&tridiagonal(32, -1.0, d, -1.0)).unwrap();
        assert!((k - 10.0).abs() < 1e-8);
    }

    #[test]
    fn diagonal_system_takes_one_iteration() {
        let a = CsrMatrix::from_diagonal(&[2.0, 3.0, 5.0]);
        let split = split_jacobi(&a, &[1.0, 2.0, 3.0], &InitialGuess::Zero).unwrap().with_direct_reference().unwrap();
        assert_eq!(iterations_to_threshold(&split, Scheme::Jacobi, 1e-6, 10).unwrap(), Some(1));
    }

    #[test]
    fn looser_threshold_never_needs_more() {
        let small = KappaConfig { n: 48, points: 8, ..Default::default() };
        let tight = bench_kappa(&small).unwrap();
        let loose = bench_kappa(&KappaConfig { threshold: 1e-3, ..small }).unwrap();
        assert_eq!(tight.points.len(), loose.points.len());
        for (t, l) in tight.points.iter().zip(&loose.points) {
            assert!(l.iterations < t.iterations);
        }
    }

    #[test]
    fn small_woodbury_ordering() {
        let r = bench_woodbury(&WoodburyConfig { n: 16, kappa: 8.0, levels: vec![1, 3, 5], iterations: 20, quantum_check: true })
            .unwrap();
        assert!(r.ordered_from(5));
        assert!(r.nilpotent_iterate_gap < 1e-12);
        assert!(r.quantum_gaps.iter().all(|(_, g)| *g < 1e-10));
    }
}
