use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::{cross_check, csv_writer, finish, fmt, svg, write_text};
use crate::blockenc::Backend;
use crate::error::Result;
use crate::iterate::{jacobi_iterate, split_jacobi, InitialGuess};
use crate::lcu::{assemble_lcu_program, build_jacobi_expansion, execute};
use crate::pde::{euler_operator, Euler2DProblem, EulerBoundary, EulerFields};

/// Point source `p(x, y, 0) = cos(2πωr) e^{−r²}` in a fluid at rest.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerConfig {
    pub rho_bar: f64,
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub steps: usize,
    pub final_time: f64,
    pub omega: f64,
    pub k: usize,
    pub boundary: EulerBoundary,
    pub backend: Backend,
    /// Start from a zero pressure field instead of the point source.
    pub zero_initial: bool,
}

impl Default for EulerConfig {
    fn default() -> Self {
        Self {
            rho_bar: 1.0,
            nx: 128,
            ny: 128,
            x_range: (-2.0, 2.0),
            y_range: (-2.0, 2.0),
            steps: 60,
            final_time: 1.0,
            omega: 2.0,
            k: 12,
            boundary: EulerBoundary::ZeroGradient,
            backend: Backend::Emulation,
            zero_initial: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerStep {
    pub m: usize,
    pub time: f64,
    pub energy: f64,
    pub oracle_gap: f64,
    pub success_probability: f64,
}

#[derive(Debug, Clone)]
pub struct EulerReport {
    pub problem: Euler2DProblem,
    /// Final pressure, `ny` rows of `nx`.
    pub pressure: Vec<Vec<f64>>,
    pub initial_energy: f64,
    pub steps: Vec<EulerStep>,
    pub symmetry_defect: f64,
}

impl EulerReport {
    pub fn energy_non_increasing(&self) -> bool {
        let mut prev = self.initial_energy;
        self.steps.iter().all(|s| {
            let ok = s.energy <= prev;
            prev = s.energy;
            ok
        })
    }

    pub fn max_oracle_gap(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.oracle_gap))
    }

    pub fn write(&self, dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
        let (mut w, field) = csv_writer(dir, "euler_pressure.csv")?;
        w.write_record(["x", "y", "p"])?;
        for (j, row) in self.pressure.iter().enumerate() {
            for (i, p) in row.iter().enumerate() {
                let (x, y) = self.problem.coords(i, j);
                w.write_record([fmt(x), fmt(y), fmt(*p)])?;
            }
        }
        finish(w, &field)?;
        let (mut w, steps) = csv_writer(dir, "euler_steps.csv")?;
        w.write_record(["m", "t", "energy", "oracle_gap", "success_probability"])?;
        w.write_record(["0".into(), fmt(0.0), fmt(self.initial_energy), String::new(), String::new()])?;
        for s in &self.steps {
            w.write_record([s.m.to_string(), fmt(s.time), fmt(s.energy), fmt(s.oracle_gap), fmt(s.success_probability)])?;
        }
        finish(w, &steps)?;
        let mut out = vec![field, steps];
        if plots {
            out.push(write_text(dir, "euler_pressure.svg", &svg::heatmap("Pressure p(x, y)", &self.pressure))?);
        }
        Ok(out)
    }
}

/// Spread of values at equal distance from the origin, relative to the
/// field maximum. Only nodes inside the largest origin-centred disk that
/// fits the domain take part; radii are matched exactly on the lattice.
pub fn radial_symmetry_defect(problem: &Euler2DProblem, pressure: &[Vec<f64>]) -> f64 {
    let (dx, dy) = (problem.dx(), problem.dy());
    let reach = [problem.x_range.0, problem.x_range.1, problem.y_range.0, problem.y_range.1]
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let mut groups: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    let mut peak = 0.0f64;
    for (j, row) in pressure.iter().enumerate() {
        for (i, &p) in row.iter().enumerate() {
            peak = peak.max(p.abs());
            let (x, y) = problem.coords(i, j);
            let r2 = x * x + y * y;
            if r2 > reach * reach * (1.0 + 1e-12) {
                continue;
            }
            // Twice the offset in grid units is an integer on symmetric grids.
            let key = ((2.0 * x / dx).powi(2) + (2.0 * y / dy).powi(2)).round() as i64;
            let e = groups.entry(key).or_insert((p, p));
            e.0 = e.0.min(p);
            e.1 = e.1.max(p);
        }
    }
    if peak == 0.0 {
        return 0.0;
    }
    groups.values().fold(0.0f64, |m, (lo, hi)| m.max(hi - lo)) / peak
}

pub fn euler_demo(cfg: &EulerConfig) -> Result<EulerReport> {
    let omega = cfg.omega;
    let zero = cfg.zero_initial;
    let problem = Euler2DProblem::new(
        cfg.rho_bar,
        cfg.nx,
        cfg.ny,
        cfg.x_range,
        cfg.y_range,
        cfg.steps,
        cfg.final_time,
        move |x, y| {
            if zero {
                return 0.0;
            }
            let r = (x * x + y * y).sqrt();
            (2.0 * std::f64::consts::PI * omega * r).cos() * (-r * r).exp()
        },
        cfg.boundary,
    )?;
    let nodes = problem.nodes();
    let a = euler_operator(&problem)?;
    let mut state = problem.initial_state();
    let initial_energy = EulerFields::split(&state, nodes).energy(cfg.rho_bar);
    let mut expansion = None;
    let mut steps = Vec::with_capacity(cfg.steps);
    for m in 1..=cfg.steps {
        let step = if state.iter().all(|&v| v == 0.0) {
            // The zero state is a fixed point and has no quantum state to prepare.
            EulerStep { m, time: 0.0, energy: 0.0, oracle_gap: 0.0, success_probability: 1.0 }
        } else {
            let split = split_jacobi(&a, &state, &InitialGuess::Rhs)?;
            let classical = jacobi_iterate(&split, cfg.k);
            // The operator is fixed, so its norms are computed once.
            let e = match &expansion {
                None => build_jacobi_expansion(&split, cfg.k)?,
                Some(prev) => crate::lcu::LcuExpansion::with_vectors(prev, &state, &state)?,
            };
            let r = execute(&assemble_lcu_program(&e, cfg.backend)?)?;
            expansion = Some(e);
            let x = r.unnormalized();
            let gap = cross_check(&x, classical.last(), &format!("Euler step {m}"))?;
            state = x;
            EulerStep { m, time: 0.0, energy: 0.0, oracle_gap: gap, success_probability: r.success_probability }
        };
        steps.push(EulerStep {
            time: m as f64 * problem.dt(),
            energy: EulerFields::split(&state, nodes).energy(cfg.rho_bar),
            ..step
        });
    }
    let pressure: Vec<Vec<f64>> = state[..nodes].chunks(cfg.nx).map(|r| r.to_vec()).collect();
    let symmetry_defect = radial_symmetry_defect(&problem, &pressure);
    Ok(EulerReport { problem, pressure, initial_energy, steps, symmetry_defect })
}
