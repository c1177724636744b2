//! Two-dimensional linearised Euler equations for a quiescent fluid:
//!
//! ```text
//! p_t + ρ̄ (u_x + v_y) = 0,   u_t + p_x / ρ̄ = 0,   v_t + p_y / ρ̄ = 0
//! ```
//!
//! Implicit backward-time centred-space over the stacked state `(p, u, v)`,
//! node index `j * nx + i`. Every row keeps a unit diagonal; the coupling
//! between fields sits entirely off the diagonal.

use super::LinearSystem;
use crate::error::{Error, Result};
use crate::numkit::{CsrMatrix, Structure};

/// Closure used where the centred stencil reaches past the grid edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerBoundary {
    /// Ghost value copies the edge node (first-order zero-gradient
    /// extrapolation); approximately non-reflective for outgoing waves.
    ZeroGradient,
    /// Ghost value is zero.
    ZeroGhost,
}

#[derive(Debug, Clone)]
pub struct Euler2DProblem {
    pub rho_bar: f64,
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub steps: usize,
    pub final_time: f64,
    /// Initial pressure sampled on the grid (`ny` rows of `nx`).
    pub initial_pressure: Vec<f64>,
    pub boundary: EulerBoundary,
}

impl Euler2DProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rho_bar: f64,
        nx: usize,
        ny: usize,
        x_range: (f64, f64),
        y_range: (f64, f64),
        steps: usize,
        final_time: f64,
        init_pressure: impl Fn(f64, f64) -> f64,
        boundary: EulerBoundary,
    ) -> Result<Self> {
        if !(rho_bar > 0.0 && rho_bar.is_finite()) {
            return Err(Error::Parameter(format!("mean density must be positive, got {rho_bar}")));
        }
        if nx < 4 || ny < 4 {
            return Err(Error::Parameter(format!("need at least 4x4 nodes, got {nx}x{ny}")));
        }
        if steps == 0 || !(final_time > 0.0) {
            return Err(Error::Parameter("need M >= 1 and T > 0".into()));
        }
        if !(x_range.1 > x_range.0 && y_range.1 > y_range.0) {
            return Err(Error::Parameter("empty spatial range".into()));
        }
        let mut p = Self {
            rho_bar,
            nx,
            ny,
            x_range,
            y_range,
            steps,
            final_time,
            initial_pressure: Vec::new(),
            boundary,
        };
        let mut init = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = p.coords(i, j);
                init.push(init_pressure(x, y));
            }
        }
        p.initial_pressure = init;
        Ok(p)
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / (self.ny - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x_range.0 + i as f64 * self.dx(),
            self.y_range.0 + j as f64 * self.dy(),
        )
    }

    pub fn nodes(&self) -> usize {
        self.nx * self.ny
    }

    pub fn state_dim(&self) -> usize {
        3 * self.nodes()
    }

    /// Stacked `(p, u, v)` with the initial pressure and a fluid at rest.
    pub fn initial_state(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.state_dim()];
        s[..self.nodes()].copy_from_slice(&self.initial_pressure);
        s
    }
}

/// Views into a stacked state vector.
pub struct EulerFields<'a> {
    pub p: &'a [f64],
    pub u: &'a [f64],
    pub v: &'a [f64],
}

impl<'a> EulerFields<'a> {
    pub fn split(state: &'a [f64], nodes: usize) -> Self {
        Self {
            p: &state[..nodes],
            u: &state[nodes..2 * nodes],
            v: &state[2 * nodes..3 * nodes],
        }
    }

    /// `Σ p² + ρ̄² (u² + v²)`, conserved by the continuous equations.
    pub fn energy(&self, rho_bar: f64) -> f64 {
        let sq = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>();
        sq(self.p) + rho_bar * rho_bar * (sq(self.u) + sq(self.v))
    }
}

/// Implicit step operator; independent of the timestep index because the
/// equations are linear with constant coefficients.
pub fn euler_operator(problem: &Euler2DProblem) -> Result<CsrMatrix> {
    let (nx, ny) = (problem.nx, problem.ny);
    let nodes = nx * ny;
    let dt = problem.dt();
    let rho = problem.rho_bar;
    let cx = dt / (2.0 * problem.dx());
    let cy = dt / (2.0 * problem.dy());
    let node = |i: usize, j: usize| j * nx + i;
    let (p_off, u_off, v_off) = (0, nodes, 2 * nodes);

    // Centred first difference along one axis; returns (node, weight) pairs
    // after applying the boundary closure.
    let stencil = |i: usize, j: usize, along_x: bool| -> Vec<(usize, f64)> {
        let (pos, len) = if along_x { (i, nx) } else { (j, ny) };
        let at = |k: usize| if along_x { node(k, j) } else { node(i, k) };
        let mut out = Vec::with_capacity(2);
        // + neighbour
        if pos + 1 < len {
            out.push((at(pos + 1), 1.0));
        } else if problem.boundary == EulerBoundary::ZeroGradient {
            out.push((at(pos), 1.0));
        }
        // - neighbour
        if pos > 0 {
            out.push((at(pos - 1), -1.0));
        } else if problem.boundary == EulerBoundary::ZeroGradient {
            out.push((at(pos), -1.0));
        }
        out
    };

    let mut trip = Vec::with_capacity(nodes * 11);
    for j in 0..ny {
        for i in 0..nx {
            let n = node(i, j);
            trip.push((p_off + n, p_off + n, 1.0));
            trip.push((u_off + n, u_off + n, 1.0));
            trip.push((v_off + n, v_off + n, 1.0));
            for (m, w) in stencil(i, j, true) {
                trip.push((p_off + n, u_off + m, rho * cx * w));
                trip.push((u_off + n, p_off + m, cx * w / rho));
            }
            for (m, w) in stencil(i, j, false) {
                trip.push((p_off + n, v_off + m, rho * cy * w));
                trip.push((v_off + n, p_off + m, cy * w / rho));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(3 * nodes, &trip)?.with_structure(Structure::Block { blocks: 3 }))
}

/// System for step `m`; the right-hand side is the previous stacked state.
pub fn euler_step_system(
    problem: &Euler2DProblem,
    prev_state: &[f64],
    m: usize,
) -> Result<LinearSystem> {
    if prev_state.len() != problem.state_dim() {
        return Err(Error::Dimension(format!(
            "stacked state needs {} entries, got {}",
            problem.state_dim(),
            prev_state.len()
        )));
    }
    if m == 0 || m > problem.steps {
        return Err(Error::Parameter(format!("timestep index {m} outside 1..={}", problem.steps)));
    }
    LinearSystem::new(euler_operator(problem)?, prev_state.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::LinearOperator;

    fn small(boundary: EulerBoundary, p0: impl Fn(f64, f64) -> f64) -> Euler2DProblem {
        Euler2DProblem::new(1.0, 8, 8, (-2.0, 2.0), (-2.0, 2.0), 5, 0.5, p0, boundary).unwrap()
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let p = small(EulerBoundary::ZeroGradient, |_, _| 0.0);
        let sys = euler_step_system(&p, &vec![0.0; p.state_dim()], 1).unwrap();
        let x = sys.solve_direct().unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_pressure_is_stationary_with_zero_gradient_closure() {
        let p = small(EulerBoundary::ZeroGradient, |_, _| 0.7);
        let state = p.initial_state();
        let a = euler_operator(&p).unwrap();
        let ax = a.apply(&state);
        for (lhs, rhs) in ax.iter().zip(&state) {
            assert!((lhs - rhs).abs() < 1e-15);
        }
        let sys = euler_step_system(&p, &state, 1).unwrap();
        let x = sys.solve_direct().unwrap();
        assert!(x[..p.nodes()].iter().all(|v| (v - 0.7).abs() < 1e-12));
        assert!(x[p.nodes()..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn unit_diagonal_and_skew_interior_coupling() {
        let p = small(EulerBoundary::ZeroGhost, |_, _| 0.0);
        let a = euler_operator(&p).unwrap();
        assert!(a.diagonal().iter().all(|&d| d == 1.0));
        // With zero ghosts the off-diagonal part is exactly skew-symmetric for ρ̄ = 1.
        let r = a.off_diagonal().to_dense();
        assert!(r.try_add(&r.transpose()).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn real_in_real_out() {
        let p = small(EulerBoundary::ZeroGradient, |x, y| (x * y).sin());
        let a = euler_operator(&p).unwrap();
        assert!(a.apply(&p.initial_state()).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn validation() {
        assert!(Euler2DProblem::new(0.0, 8, 8, (0.0, 1.0), (0.0, 1.0), 1, 1.0, |_, _| 0.0, EulerBoundary::ZeroGradient).is_err());
        assert!(Euler2DProblem::new(1.0, 3, 8, (0.0, 1.0), (0.0, 1.0), 1, 1.0, |_, _| 0.0, EulerBoundary::ZeroGradient).is_err());
        let p = small(EulerBoundary::ZeroGradient, |_, _| 0.0);
        assert!(euler_step_system(&p, &[0.0; 3], 1).is_err());
    }
}
