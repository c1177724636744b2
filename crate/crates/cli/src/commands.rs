use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;
use qiter::blockenc::Backend;
use qiter::experiments::{
    bench_kappa, bench_woodbury, burgers_shock, burgers_surface, cross_check, euler_demo, resources_report,
    EulerConfig, KappaConfig, ShockConfig, SurfaceConfig, WoodburyConfig,
};
use qiter::iterate::{iterate, split_system, InitialGuess, Scheme};
use qiter::lcu::{self, LcuScheme};
use qiter::numkit::mmio::read_matrix_market;
use qiter::numkit::{fidelity_error, tridiagonal, CsrMatrix, DenseMatrix, LinearOperator};
use qiter::pde::{check_diagonal_dominance, EulerBoundary, LinearSystem, SystemMatrix};

use crate::config::{Command, Params};

fn backend(p: &Params) -> Result<Backend> {
    Ok(p.backend.as_deref().unwrap_or("emulation").parse()?)
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

/// Matrix and right-hand side named by the configuration.
fn load_system(p: &Params) -> Result<(CsrMatrix, Vec<f64>)> {
    if let Some(path) = &p.system {
        if p.builtin.is_some() || p.diag.is_some() || p.n.is_some() {
            bail!("'system' cannot be combined with 'builtin', 'n' or 'diag'");
        }
        let a = read_matrix_market(path)?.to_csr()?;
        let b = match &p.rhs {
            Some(r) => read_matrix_market(r)?.to_vector()?,
            None => vec![1.0; a.dim()],
        };
        return Ok((a, b));
    }
    if p.rhs.is_some() {
        bail!("'rhs' needs a Matrix Market 'system'");
    }
    match p.builtin.as_deref().unwrap_or("demo") {
        "demo" => {
            if p.n.is_some() || p.diag.is_some() {
                bail!("the 2x2 demo system takes no 'n' or 'diag'");
            }
            let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]])?;
            Ok((CsrMatrix::from_dense(&a)?, vec![3.0, 3.0]))
        }
        "tridiag" => {
            let n = p.n.unwrap_or(8);
            let d = p.diag.unwrap_or(2.0);
            Ok((CsrMatrix::from_dense(&tridiagonal(n, -1.0, d, -1.0))?, vec![1.0; n]))
        }
        other => bail!("unknown builtin system '{other}' (demo | tridiag)"),
    }
}

fn initial_guess(p: &Params) -> Result<InitialGuess> {
    let x0 = p.x0.as_deref().unwrap_or("rhs");
    if p.seed.is_some() && x0 != "random" {
        bail!("'seed' only applies with x0 = \"random\"");
    }
    Ok(match x0 {
        "rhs" => InitialGuess::Rhs,
        "zero" => InitialGuess::Zero,
        "random" => InitialGuess::Random(p.seed.unwrap_or(0)),
        other => bail!("unknown x0 '{other}' (rhs | zero | random)"),
    })
}

pub fn solve(p: &Params) -> Result<()> {
    let backend = backend(p)?;
    let mut scheme: LcuScheme = p.scheme.as_deref().unwrap_or("jacobi").parse()?;
    let k = p.k.unwrap_or(3);
    let x0 = initial_guess(p)?;
    let (a, b) = load_system(p)?;
    let n = a.dim();
    let levels = match p.levels.as_deref() {
        None => None,
        Some([l]) => Some(*l),
        Some(_) => bail!("solve takes a single 'levels' value"),
    };
    if let LcuScheme::GaussSeidel { levels: l } = &mut scheme {
        *l = levels.unwrap_or(n.saturating_sub(1));
    } else if levels.is_some() {
        bail!("'levels' only applies to the gauss-seidel scheme");
    }

    let matrix = SystemMatrix::Sparse(a);
    let dominance = check_diagonal_dominance(&matrix)?;
    let dominance_line = format!(
        "diagonal dominance: {} (worst row {}, off-diagonal/diagonal ratio {:.6}, zero diagonal rows {:?})",
        if dominance.dominant { "yes" } else { "no" },
        dominance.worst_row,
        dominance.worst_row_ratio,
        dominance.zero_diagonal_rows
    );
    if !dominance.dominant && !p.force.unwrap_or(false) {
        bail!("refusing a system that is not diagonally dominant; convergence is not guaranteed.\n{dominance_line}\npass --force to run anyway");
    }

    let mut system = LinearSystem::new(matrix, b)?;
    match system.solve_direct() {
        Ok(x) => system = system.with_reference(x),
        Err(e) => log::warn!("no direct reference solution: {e}"),
    }
    let split = split_system(&system, &x0)?;
    let result = lcu::solve(&split, scheme, k, backend, p.trace.unwrap_or(false))?;

    let classical_scheme = match scheme {
        LcuScheme::GaussSeidel { levels } => Scheme::Woodbury { levels },
        _ => Scheme::Jacobi,
    };
    let classical = iterate(&split, classical_scheme, k);
    let x = result.unnormalized();
    let gap = cross_check(&x, classical.last(), "solve")?;
    let fidelity = split.reference.as_ref().map(|r| fidelity_error(r, &x));

    let dir = p.out_dir(Command::Solve);
    prepare_out(&dir)?;
    let sol_path = dir.join("solution.csv");
    let mut w = csv_file(&sol_path)?;
    w.write_record(["i", "normalized", "unnormalized"])?;
    for (i, (u, v)) in result.solution.iter().zip(&x).enumerate() {
        w.write_record([i.to_string(), format!("{u:.12e}"), format!("{v:.12e}")])?;
    }
    w.flush()?;
    let trace_path = dir.join("trace.csv");
    lcu::save_results_csv(&result.error_trace, &trace_path)?;

    let mut report = String::new();
    report.push_str(&format!("scheme: {scheme}\nbackend: {}\nN: {n}\nk: {k}\n", backend_name(backend)));
    report.push_str(&format!("success_probability: {:.12e}\n", result.success_probability));
    match fidelity {
        Some(f) => report.push_str(&format!("fidelity_error: {f:.12e}\n")),
        None => report.push_str("fidelity_error: n/a\n"),
    }
    report.push_str(&format!("classical_gap: {gap:.3e}\n"));
    report.push_str(&format!("width: {}\nterms: {}\n", result.resources.width, result.resources.term_count));
    match result.resources.gate_count {
        Some(g) => report.push_str(&format!("gate_count: {g}\n")),
        None => report.push_str("gate_count: n/a (emulation)\n"),
    }
    report.push_str(&dominance_line);
    report.push('\n');
    let report_path = dir.join("report.txt");
    fs::write(&report_path, &report).with_context(|| format!("writing {}", report_path.display()))?;
    print!("{report}");
    report_written(&[sol_path, trace_path, report_path]);
    Ok(())
}

fn csv_file(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Gate => "gate",
        Backend::Emulation => "emulation",
    }
}

pub fn burgers_shock_cmd(p: &Params) -> Result<()> {
    let d = ShockConfig::default();
    let cfg = ShockConfig {
        viscosity: p.viscosity.unwrap_or(d.viscosity),
        length: p.length.unwrap_or(d.length),
        intervals: p.intervals.unwrap_or(d.intervals),
        dt: p.dt.unwrap_or(d.dt),
        amplitude: p.amplitude.unwrap_or(d.amplitude),
        iterations: p.iterations.unwrap_or(d.iterations),
        snapshots: p.snapshots.clone().unwrap_or(d.snapshots),
        backend: backend(p)?,
    };
    if let Some(s) = cfg.snapshots.iter().find(|&&s| s > cfg.iterations) {
        bail!("snapshot k = {s} exceeds iterations = {}", cfg.iterations);
    }
    let dir = p.out_dir(Command::BurgersShock);
    prepare_out(&dir)?;
    let r = burgers_shock(&cfg)?;
    info!("spectral radius {:.6}", r.spectral_radius);
    println!(
        "rho(D^-1 R) = {:.6}, ln rho = {:.6}, log-error slope = {:.6} (fidelity slope {:.6})",
        r.spectral_radius,
        r.spectral_radius.ln(),
        r.euclidean_fit.slope,
        r.fidelity_fit.slope
    );
    report_written(&r.write(&dir, p.plots.unwrap_or(false))?);
    Ok(())
}

pub fn burgers_surface_cmd(p: &Params) -> Result<()> {
    let d = SurfaceConfig::default();
    let cfg = SurfaceConfig {
        viscosity: p.viscosity.unwrap_or(d.viscosity),
        length: p.length.unwrap_or(d.length),
        final_time: p.final_time.unwrap_or(d.final_time),
        intervals: p.intervals.unwrap_or(d.intervals),
        steps: p.steps.unwrap_or(d.steps),
        k: p.k.unwrap_or(d.k),
        backend: backend(p)?,
    };
    let dir = p.out_dir(Command::BurgersSurface);
    prepare_out(&dir)?;
    let r = burgers_surface(&cfg)?;
    let worst = r.steps.iter().fold(0.0f64, |m, s| m.max(s.quantum_max_deviation));
    println!("{} steps, max deviation from direct solve {worst:.3e}", r.steps.len());
    report_written(&r.write(&dir, p.plots.unwrap_or(false))?);
    Ok(())
}

pub fn euler_cmd(p: &Params) -> Result<()> {
    let d = EulerConfig::default();
    let boundary = match p.boundary.as_deref() {
        None | Some("zero-gradient") => EulerBoundary::ZeroGradient,
        Some("zero-ghost") => EulerBoundary::ZeroGhost,
        Some(other) => bail!("unknown boundary '{other}' (zero-gradient | zero-ghost)"),
    };
    let cfg = EulerConfig {
        rho_bar: p.rho_bar.unwrap_or(d.rho_bar),
        nx: p.nx.unwrap_or(d.nx),
        ny: p.ny.unwrap_or(d.ny),
        x_range: (p.x_min.unwrap_or(d.x_range.0), p.x_max.unwrap_or(d.x_range.1)),
        y_range: (p.y_min.unwrap_or(d.y_range.0), p.y_max.unwrap_or(d.y_range.1)),
        steps: p.steps.unwrap_or(d.steps),
        final_time: p.final_time.unwrap_or(d.final_time),
        omega: p.omega.unwrap_or(d.omega),
        k: p.k.unwrap_or(d.k),
        boundary,
        backend: backend(p)?,
        zero_initial: p.zero_initial.unwrap_or(d.zero_initial),
    };
    let dir = p.out_dir(Command::Euler);
    prepare_out(&dir)?;
    let r = euler_demo(&cfg)?;
    println!(
        "radial symmetry defect {:.4}, energy non-increasing: {}, max classical gap {:.3e}",
        r.symmetry_defect,
        r.energy_non_increasing(),
        r.max_oracle_gap()
    );
    report_written(&r.write(&dir, p.plots.unwrap_or(false))?);
    Ok(())
}

pub fn kappa_cmd(p: &Params) -> Result<()> {
    let d = KappaConfig::default();
    let cfg = KappaConfig {
        n: p.n.unwrap_or(d.n),
        d_min: p.d_min.unwrap_or(d.d_min),
        d_max: p.d_max.unwrap_or(d.d_max),
        points: p.points.unwrap_or(d.points),
        threshold: p.threshold.unwrap_or(d.threshold),
        kappa_min: p.kappa_min.unwrap_or(d.kappa_min),
        kappa_max: p.kappa_max.unwrap_or(d.kappa_max),
        k_max: p.k_max.unwrap_or(d.k_max),
    };
    let dir = p.out_dir(Command::Kappa);
    prepare_out(&dir)?;
    let r = bench_kappa(&cfg)?;
    if !r.excluded.is_empty() {
        println!("excluded {} diagonals (divergent or threshold not reached)", r.excluded.len());
    }
    println!(
        "{} points, iterations = {:.4} * kappa + {:.4}, Pearson r = {:.5}",
        r.points.len(),
        r.fit.slope,
        r.fit.intercept,
        r.fit.pearson
    );
    report_written(&r.write(&dir, p.plots.unwrap_or(false))?);
    Ok(())
}

pub fn woodbury_cmd(p: &Params) -> Result<()> {
    let d = WoodburyConfig::default();
    let cfg = WoodburyConfig {
        n: p.n.unwrap_or(d.n),
        kappa: p.kappa.unwrap_or(d.kappa),
        levels: p.levels.clone().unwrap_or(d.levels),
        iterations: p.iterations.unwrap_or(d.iterations),
        quantum_check: p.quantum_check.unwrap_or(d.quantum_check),
    };
    if cfg.levels.is_empty() {
        bail!("'levels' must list at least one truncation order");
    }
    let dir = p.out_dir(Command::Woodbury);
    prepare_out(&dir)?;
    let r = bench_woodbury(&cfg)?;
    println!(
        "d = {:.6}, kappa = {:.4}, curves ordered for k >= 5: {}, L = N-1 gap to Gauss-Seidel {:.3e}",
        r.d,
        r.kappa,
        r.ordered_from(5),
        r.nilpotent_iterate_gap
    );
    report_written(&r.write(&dir, p.plots.unwrap_or(false))?);
    Ok(())
}

pub fn resources_cmd(p: &Params) -> Result<()> {
    let r = resources_report(p.n.unwrap_or(8), p.k.unwrap_or(3))?;
    std::io::stdout().write_all(r.render().as_bytes())?;
    Ok(())
}
