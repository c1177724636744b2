use std::path::{Path, PathBuf};

use super::{cross_check, csv_writer, finish, fmt, linear_fit, svg, write_text, LinearFit};
use crate::blockenc::Backend;
use crate::error::Result;
use crate::iterate::{jacobi_iterate, spectral_radius, split_system, InitialGuess};
use crate::lcu::{self, LcuScheme};
use crate::numkit::{fidelity_error, norm2, relative_error};
use crate::pde::{burgers_step_system, BurgersProblem, TimeFunction};

/// One implicit step taken from a stationary viscous shock
/// `f(x) = −A tanh(A (x − x₀) / 2μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockConfig {
    pub viscosity: f64,
    pub length: f64,
    pub intervals: usize,
    pub dt: f64,
    pub amplitude: f64,
    pub iterations: usize,
    pub snapshots: Vec<usize>,
    pub backend: Backend,
}

impl Default for ShockConfig {
    fn default() -> Self {
        Self {
            viscosity: 0.05,
            length: 1.0,
            intervals: 128,
            dt: 0.003,
            amplitude: 1.0,
            iterations: 30,
            snapshots: vec![0, 1, 4, 10],
            backend: Backend::Emulation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockTracePoint {
    pub k: usize,
    pub fidelity_error: f64,
    pub euclidean_error: f64,
    pub success_probability: f64,
    /// Relative gap to the classical Jacobi iterate.
    pub oracle_gap: f64,
}

#[derive(Debug, Clone)]
pub struct ShockReport {
    pub nodes: Vec<f64>,
    /// Direct solution on the full grid.
    pub truth: Vec<f64>,
    /// `(k, full-grid iterate)`; `k = 0` is the initial guess.
    pub snapshots: Vec<(usize, Vec<f64>)>,
    /// `k = 1..=K`.
    pub trace: Vec<ShockTracePoint>,
    pub spectral_radius: f64,
    /// Fit of `ln(euclidean error)` against `k`.
    pub euclidean_fit: LinearFit,
    /// Fit of `ln(fidelity error)` against `k`; its slope tends to `2 ln ρ`.
    pub fidelity_fit: LinearFit,
}

impl ShockReport {
    /// `error(k+1) ≤ error(k)` for every `k ≥ from`.
    pub fn monotone_from(&self, from: usize) -> bool {
        self.trace
            .windows(2)
            .filter(|w| w[0].k >= from)
            .all(|w| w[1].fidelity_error <= w[0].fidelity_error && w[1].euclidean_error <= w[0].euclidean_error)
    }

    pub fn write(&self, dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
        let (mut w, iter_path) = csv_writer(dir, "shock_iterates.csv")?;
        let mut header = vec!["x".to_string(), "truth".to_string()];
        header.extend(self.snapshots.iter().map(|(k, _)| format!("k{k}")));
        w.write_record(&header)?;
        for (i, x) in self.nodes.iter().enumerate() {
            let mut row = vec![fmt(*x), fmt(self.truth[i])];
            row.extend(self.snapshots.iter().map(|(_, f)| fmt(f[i])));
            w.write_record(&row)?;
        }
        finish(w, &iter_path)?;

        let (mut w, trace_path) = csv_writer(dir, "shock_error.csv")?;
        w.write_record(["k", "fidelity_error", "euclidean_error", "success_probability"])?;
        for p in &self.trace {
            w.write_record([p.k.to_string(), fmt(p.fidelity_error), fmt(p.euclidean_error), fmt(p.success_probability)])?;
        }
        finish(w, &trace_path)?;
        let mut out = vec![iter_path, trace_path];
        if plots {
            let mut series = vec![("truth".to_string(), self.nodes.iter().copied().zip(self.truth.iter().copied()).collect())];
            for (k, f) in &self.snapshots {
                series.push((format!("k = {k}"), self.nodes.iter().copied().zip(f.iter().copied()).collect()));
            }
            out.push(write_text(dir, "shock_iterates.svg", &svg::line_chart("Burgers shock iterates", "x", "f", &series, false))?);
            let err = vec![(
                "1 - fidelity".to_string(),
                self.trace.iter().map(|p| (p.k as f64, p.fidelity_error)).collect(),
            )];
            out.push(write_text(dir, "shock_error.svg", &svg::line_chart("Error trace", "k", "error", &err, true))?);
        }
        Ok(out)
    }
}

pub fn burgers_shock(cfg: &ShockConfig) -> Result<ShockReport> {
    let (mu, a, centre) = (cfg.viscosity, cfg.amplitude, cfg.length / 2.0);
    let profile = move |x: f64| -a * (a * (x - centre) / (2.0 * mu)).tanh();
    let problem = BurgersProblem::new(
        mu,
        cfg.length,
        cfg.dt,
        cfg.intervals,
        1,
        profile,
        TimeFunction::Constant(profile(0.0)),
        TimeFunction::Constant(profile(cfg.length)),
    )?;
    let system = burgers_step_system(&problem, &problem.initial, 1)?;
    let split = split_system(&system, &InitialGuess::Zero)?.with_direct_reference()?;
    let reference = split.reference.clone().expect("reference was just attached");
    let classical = jacobi_iterate(&split, cfg.iterations);

    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut snapshots = Vec::new();
    if cfg.snapshots.contains(&0) {
        snapshots.push((0, problem.full_field(&split.x0, 1)));
    }
    for k in 1..=cfg.iterations {
        let r = lcu::solve(&split, LcuScheme::Jacobi, k, cfg.backend, false)?;
        let x = r.unnormalized();
        let gap = cross_check(&x, &classical.iterates[k], &format!("shock iterate k = {k}"))?;
        trace.push(ShockTracePoint {
            k,
            fidelity_error: fidelity_error(&reference, &x),
            euclidean_error: relative_error(&x, &reference),
            success_probability: r.success_probability,
            oracle_gap: gap,
        });
        if cfg.snapshots.contains(&k) {
            snapshots.push((k, problem.full_field(&x, 1)));
        }
    }
    let ks: Vec<f64> = trace.iter().map(|p| p.k as f64).collect();
    let ln = |v: f64| v.max(f64::MIN_POSITIVE).ln();
    let euclidean_fit = linear_fit(&ks, &trace.iter().map(|p| ln(p.euclidean_error)).collect::<Vec<_>>())?;
    let fidelity_fit = linear_fit(&ks, &trace.iter().map(|p| ln(p.fidelity_error)).collect::<Vec<_>>())?;
    Ok(ShockReport {
        nodes: problem.nodes(),
        truth: problem.full_field(&reference, 1),
        snapshots,
        trace,
        spectral_radius: spectral_radius(&split),
        euclidean_fit,
        fidelity_fit,
    })
}

/// Travelling sinusoid `f(x,0) = sin(2πx/Lx)` with `f(0,t) = −t`, `f(Lx,t) = t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceConfig {
    pub viscosity: f64,
    pub length: f64,
    pub final_time: f64,
    pub intervals: usize,
    pub steps: usize,
    pub k: usize,
    pub backend: Backend,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self { viscosity: 0.08, length: 1.0, final_time: 0.5, intervals: 128, steps: 150, k: 80, backend: Backend::Emulation }
    }
}

/// Per-step diagnostics, all errors measured against the direct solve of
/// the same step system.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceStep {
    pub m: usize,
    pub time: f64,
    pub spectral_radius: f64,
    /// `‖x₀ − x*‖₂` with `x₀` the previous field.
    pub initial_error: f64,
    /// `‖x_k − x*‖₂` for classical Jacobi.
    pub jacobi_error: f64,
    /// `max |x_k − x*|` for the quantum iterate.
    pub quantum_max_deviation: f64,
    /// `max |x_k − x*|` for classical Jacobi.
    pub jacobi_max_deviation: f64,
    pub oracle_gap: f64,
    pub success_probability: f64,
}

impl SurfaceStep {
    /// `ρ^k ‖x₀ − x*‖₂`.
    pub fn contraction_bound(&self, k: usize) -> f64 {
        self.spectral_radius.powi(k as i32) * self.initial_error
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceReport {
    pub k: usize,
    pub nodes: Vec<f64>,
    pub times: Vec<f64>,
    /// `M + 1` rows of `N + 1` values.
    pub surface: Vec<Vec<f64>>,
    pub steps: Vec<SurfaceStep>,
}

impl SurfaceReport {
    pub fn write(&self, dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
        let (mut w, surf) = csv_writer(dir, "burgers_surface.csv")?;
        let mut header = vec!["t".to_string()];
        header.extend(self.nodes.iter().map(|x| format!("x={x:.6}")));
        w.write_record(&header)?;
        for (t, row) in self.times.iter().zip(&self.surface) {
            let mut rec = vec![fmt(*t)];
            rec.extend(row.iter().map(|v| fmt(*v)));
            w.write_record(&rec)?;
        }
        finish(w, &surf)?;

        let (mut w, steps) = csv_writer(dir, "burgers_steps.csv")?;
        w.write_record([
            "m",
            "t",
            "spectral_radius",
            "initial_error",
            "jacobi_error",
            "contraction_bound",
            "quantum_max_deviation",
            "jacobi_max_deviation",
            "oracle_gap",
            "success_probability",
        ])?;
        for s in &self.steps {
            w.write_record([
                s.m.to_string(),
                fmt(s.time),
                fmt(s.spectral_radius),
                fmt(s.initial_error),
                fmt(s.jacobi_error),
                fmt(s.contraction_bound(self.k)),
                fmt(s.quantum_max_deviation),
                fmt(s.jacobi_max_deviation),
                fmt(s.oracle_gap),
                fmt(s.success_probability),
            ])?;
        }
        finish(w, &steps)?;
        let mut out = vec![surf, steps];
        if plots {
            out.push(write_text(dir, "burgers_surface.svg", &svg::heatmap("Burgers surface f(x, t)", &self.surface))?);
        }
        Ok(out)
    }
}

pub fn burgers_surface(cfg: &SurfaceConfig) -> Result<SurfaceReport> {
    let length = cfg.length;
    let problem = BurgersProblem::new(
        cfg.viscosity,
        length,
        cfg.final_time,
        cfg.intervals,
        cfg.steps,
        |x| (2.0 * std::f64::consts::PI * x / length).sin(),
        TimeFunction::Linear { intercept: 0.0, slope: -1.0 },
        TimeFunction::Linear { intercept: 0.0, slope: 1.0 },
    )?;
    let mut field = problem.initial.clone();
    let mut surface = vec![field.clone()];
    let mut steps = Vec::with_capacity(cfg.steps);
    for m in 1..=cfg.steps {
        let system = burgers_step_system(&problem, &field, m)?;
        let previous = field[1..field.len() - 1].to_vec();
        let split = split_system(&system, &InitialGuess::Given(previous.clone()))?.with_direct_reference()?;
        let direct = split.reference.clone().expect("reference was just attached");
        let classical = jacobi_iterate(&split, cfg.k);
        let jacobi = classical.last();
        let quantum = lcu::solve(&split, LcuScheme::Jacobi, cfg.k, cfg.backend, false)?;
        let x = quantum.unnormalized();
        let gap = cross_check(&x, jacobi, &format!("Burgers step {m}"))?;
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>();
        let max_abs = |v: Vec<f64>| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        steps.push(SurfaceStep {
            m,
            time: problem.time(m),
            spectral_radius: spectral_radius(&split),
            initial_error: norm2(&diff(&previous, &direct)),
            jacobi_error: norm2(&diff(jacobi, &direct)),
            quantum_max_deviation: max_abs(diff(&x, &direct)),
            jacobi_max_deviation: max_abs(diff(jacobi, &direct)),
            oracle_gap: gap,
            success_probability: quantum.success_probability,
        });
        field = problem.full_field(&x, m);
        surface.push(field.clone());
    }
    Ok(SurfaceReport {
        k: cfg.k,
        nodes: problem.nodes(),
        times: (0..=cfg.steps).map(|m| problem.time(m)).collect(),
        surface,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shock_ordering_and_initial_guess() {
        let cfg = ShockConfig { intervals: 32, iterations: 12, ..Default::default() };
        let r = burgers_shock(&cfg).unwrap();
        let err = |k: usize| r.trace[k - 1].fidelity_error;
        assert!(err(10) < err(4) && err(4) < err(1));
        let (k0, f0) = &r.snapshots[0];
        assert_eq!(*k0, 0);
        // Zero interior, boundary values from the profile.
        assert!(f0[1..f0.len() - 1].iter().all(|&v| v == 0.0));
        assert!(r.trace.iter().all(|p| p.oracle_gap < 1e-10));
    }

    #[test]
    fn surface_boundaries_and_bound() {
        let cfg = SurfaceConfig { intervals: 16, steps: 6, k: 20, ..Default::default() };
        let r = burgers_surface(&cfg).unwrap();
        assert_eq!(r.surface.len(), 7);
        for (m, row) in r.surface.iter().enumerate() {
            assert_eq!(row.len(), 17);
            let t = m as f64 * (cfg.final_time / cfg.steps as f64);
            if m > 0 {
                assert_eq!(row[0], -t);
                assert_eq!(row[16], t);
            }
        }
        for s in &r.steps {
            assert!(s.quantum_max_deviation <= s.jacobi_max_deviation * (1.0 + 1e-6) + 1e-14);
            assert!(s.oracle_gap < 1e-10);
        }
    }
}
