//! Viscous Burgers equation `f_t + f f_x = μ f_xx` on `[0, Lx]`.
//!
//! Backward-time centred-space with the convective velocity lagged at the
//! previous timestep. With `r = μΔt/Δx²` and `c_i = Δt f_i^{m-1} / (2Δx)`,
//! interior row `i` reads
//!
//! ```text
//! -(r + c_i) f_{i-1} + (1 + 2r) f_i + (c_i - r) f_{i+1} = f_i^{m-1}
//! ```
//!
//! and the Dirichlet values at `x = 0` and `x = Lx` move to the right-hand side.

use super::LinearSystem;
use crate::error::{Error, Result};
use crate::numkit::CsrMatrix;

/// Boundary value as a function of time: `intercept + slope · t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeFunction {
    Constant(f64),
    Linear { intercept: f64, slope: f64 },
}

impl TimeFunction {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            TimeFunction::Constant(v) => v,
            TimeFunction::Linear { intercept, slope } => intercept + slope * t,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BurgersProblem {
    pub viscosity: f64,
    pub length: f64,
    pub final_time: f64,
    /// Spatial intervals `N`; the grid has `N + 1` nodes.
    pub intervals: usize,
    /// Temporal intervals `M`.
    pub steps: usize,
    /// Initial field sampled at the `N + 1` nodes, ends replaced by the
    /// boundary data at `t = 0`.
    pub initial: Vec<f64>,
    pub left: TimeFunction,
    pub right: TimeFunction,
}

impl BurgersProblem {
    pub fn new(
        viscosity: f64,
        length: f64,
        final_time: f64,
        intervals: usize,
        steps: usize,
        initial: impl Fn(f64) -> f64,
        left: TimeFunction,
        right: TimeFunction,
    ) -> Result<Self> {
        if !(viscosity >= 0.0 && viscosity.is_finite()) {
            return Err(Error::Parameter(format!("viscosity must be >= 0, got {viscosity}")));
        }
        if !(length > 0.0 && final_time > 0.0) {
            return Err(Error::Parameter("domain length and final time must be positive".into()));
        }
        if intervals < 2 || steps < 1 {
            return Err(Error::Parameter(format!(
                "need N >= 2 and M >= 1, got N = {intervals}, M = {steps}"
            )));
        }
        let dx = length / intervals as f64;
        let mut initial: Vec<f64> = (0..=intervals).map(|i| initial(i as f64 * dx)).collect();
        // Boundary nodes always carry the Dirichlet data, including at t = 0.
        initial[0] = left.at(0.0);
        initial[intervals] = right.at(0.0);
        Ok(Self {
            viscosity,
            length,
            final_time,
            intervals,
            steps,
            initial,
            left,
            right,
        })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.intervals as f64
    }

    pub fn dt(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.dt()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.intervals).map(|i| i as f64 * self.dx()).collect()
    }

    pub fn interior_dim(&self) -> usize {
        self.intervals - 1
    }

    /// Full field at step `m` from interior values plus boundary data.
    pub fn full_field(&self, interior: &[f64], m: usize) -> Vec<f64> {
        let t = self.time(m);
        let mut f = Vec::with_capacity(self.intervals + 1);
        f.push(self.left.at(t));
        f.extend_from_slice(interior);
        f.push(self.right.at(t));
        f
    }
}

/// Per-timestep system for step `m` (`1 <= m <= M`) over the `N - 1` interior nodes.
pub fn burgers_step_system(
    problem: &BurgersProblem,
    prev_field: &[f64],
    m: usize,
) -> Result<LinearSystem> {
    let n = problem.intervals;
    if prev_field.len() != n + 1 {
        return Err(Error::Dimension(format!(
            "previous field needs {} entries, got {}",
            n + 1,
            prev_field.len()
        )));
    }
    if m == 0 || m > problem.steps {
        return Err(Error::Parameter(format!(
            "timestep index {m} outside 1..={}",
            problem.steps
        )));
    }
    let (dx, dt) = (problem.dx(), problem.dt());
    let r = problem.viscosity * dt / (dx * dx);
    let t = problem.time(m);
    let (f_left, f_right) = (problem.left.at(t), problem.right.at(t));
    let dim = n - 1;

    let mut triplets = Vec::with_capacity(3 * dim);
    let mut rhs = Vec::with_capacity(dim);
    for row in 0..dim {
        let node = row + 1;
        let c = dt * prev_field[node] / (2.0 * dx);
        let lower = -(r + c);
        let upper = c - r;
        triplets.push((row, row, 1.0 + 2.0 * r));
        let mut b = prev_field[node];
        if row > 0 {
            triplets.push((row, row - 1, lower));
        } else {
            b -= lower * f_left;
        }
        if row + 1 < dim {
            triplets.push((row, row + 1, upper));
        } else {
            b -= upper * f_right;
        }
        rhs.push(b);
    }
    let a = CsrMatrix::from_triplets(dim, &triplets)?;
    LinearSystem::new(a, rhs)
}
