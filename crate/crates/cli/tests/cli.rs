use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qiter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qiter")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = qiter(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn err(args: &[&str]) -> String {
    let out = qiter(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

/// `(normalized, unnormalized)` columns of `solution.csv`.
fn solution(dir: &Path) -> (Vec<f64>, Vec<f64>) {
    let text = fs::read_to_string(dir.join("solution.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect()).collect();
    (rows.iter().map(|r| r[0]).collect(), rows.iter().map(|r| r[1]).collect())
}

fn report_value(dir: &Path, key: &str) -> f64 {
    let text = fs::read_to_string(dir.join("report.txt")).unwrap();
    let line = text.lines().find(|l| l.starts_with(&format!("{key}:"))).unwrap();
    line.split(':').nth(1).unwrap().trim().parse().unwrap()
}

fn write_tridiag(path: &Path, n: usize, d: f64) {
    let mut s = format!("%%MatrixMarket matrix coordinate real general\n{n} {n} {}\n", 3 * n - 2);
    for i in 1..=n {
        s.push_str(&format!("{i} {i} {d}\n"));
        if i > 1 {
            s.push_str(&format!("{i} {} -1\n", i - 1));
            s.push_str(&format!("{} {i} -1\n", i - 1));
        }
    }
    fs::write(path, s).unwrap();
}

/// Plain Jacobi on `tridiag(−1, d, −1) x = 1` from `x0 = b`.
fn jacobi_tridiag(n: usize, d: f64, k: usize) -> Vec<f64> {
    let mut x = vec![1.0; n];
    for _ in 0..k {
        x = (0..n)
            .map(|i| {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                (1.0 + left + right) / d
            })
            .collect();
    }
    x
}

fn fidelity_error(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    1.0 - dot * dot / (na * nb)
}

#[test]
fn demo_system_third_iterate() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("s");
    for backend in ["emulation", "gate"] {
        ok(&["solve", "--builtin", "demo", "--k", "3", "--x0", "zero", "--backend", backend, "--out", out.to_str().unwrap()]);
        let (unit, raw) = solution(&out);
        assert!((raw[0] - 1.125).abs() < 1e-9 && (raw[1] - 1.125).abs() < 1e-9, "{raw:?}");
        let h = 0.5f64.sqrt();
        assert!((unit[0] - h).abs() < 1e-9 && (unit[1] - h).abs() < 1e-9);
    }
}

#[test]
fn zero_iterations_return_normalized_rhs() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("s");
    ok(&["solve", "--builtin", "tridiag", "--n", "4", "--diag", "3", "--k", "0", "--out", out.to_str().unwrap()]);
    let (unit, _) = solution(&out);
    for u in unit {
        assert!((u - 0.5).abs() < 1e-12);
    }
}

#[test]
fn matrix_market_tridiagonal() {
    let t = tempfile::tempdir().unwrap();
    let mtx = t.path().join("a.mtx");
    write_tridiag(&mtx, 8, 2.0);
    let out = t.path().join("j");
    ok(&["solve", "--system", mtx.to_str().unwrap(), "--k", "20", "--trace", "--out", out.to_str().unwrap()]);

    // Direct solution of tridiag(−1, 2, −1) x = 1 is x_i = i (N + 1 − i) / 2.
    let truth: Vec<f64> = (1..=8).map(|i| (i * (9 - i)) as f64 / 2.0).collect();
    let expected = fidelity_error(&truth, &jacobi_tridiag(8, 2.0, 20));
    let got = report_value(&out, "fidelity_error");
    assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    let rho = (std::f64::consts::PI / 9.0).cos();
    let e0: f64 = truth.iter().map(|x| (x - 1.0).powi(2)).sum::<f64>().sqrt();
    let nt: f64 = truth.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(got <= (rho.powi(20) * e0 / nt).powi(2));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 21);

    let gs = t.path().join("gs");
    ok(&["solve", "--system", mtx.to_str().unwrap(), "--k", "20", "--scheme", "gauss-seidel", "--L", "7", "--out", gs.to_str().unwrap()]);
    assert!(report_value(&gs, "fidelity_error") < 1e-4);
}

#[test]
fn non_dominant_system_needs_force() {
    let t = tempfile::tempdir().unwrap();
    let mtx = t.path().join("a.mtx");
    fs::write(&mtx, "%%MatrixMarket matrix array real general\n2 2\n1\n0.5\n3\n1\n").unwrap();
    let out = t.path().join("s");
    let msg = err(&["solve", "--system", mtx.to_str().unwrap(), "--k", "1", "--out", out.to_str().unwrap()]);
    assert!(msg.contains("not diagonally dominant") && msg.contains("worst row 0"), "{msg}");
    assert!(!out.exists());
    ok(&["solve", "--system", mtx.to_str().unwrap(), "--k", "1", "--force", "--out", out.to_str().unwrap()]);
    assert!(out.join("solution.csv").exists());
}

#[test]
fn config_keys_are_checked() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("c.toml");
    fs::write(&cfg, "experiment = \"solve\"\nk = 2\nbogus = 1\n").unwrap();
    assert!(err(&["solve", "--config", cfg.to_str().unwrap()]).contains("unknown key 'bogus'"));
    fs::write(&cfg, "experiment = \"solve\"\nk = 2\n").unwrap();
    assert!(err(&["demo", "euler", "--config", cfg.to_str().unwrap()]).contains("experiment"));
    assert!(err(&["demo", "burgers-shock", "--k", "3"]).contains("does not apply"));
    assert!(err(&["solve", "--scheme", "jacobi", "--L", "2"]).contains("gauss-seidel"));
}

#[test]
fn shock_demo_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    ok(&["demo", "burgers-shock", "--out", a.to_str().unwrap()]);
    ok(&["demo", "burgers-shock", "--out", b.to_str().unwrap()]);
    for f in ["shock_iterates.csv", "shock_error.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let trace = fs::read_to_string(a.join("shock_error.csv")).unwrap();
    assert!(trace.starts_with("k,fidelity_error,euclidean_error"));
}

#[test]
fn woodbury_bench_small() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("w");
    let stdout = ok(&["bench", "woodbury", "--n", "32", "--L", "5,10", "--out", out.to_str().unwrap()]);
    assert!(stdout.contains("ordered for k >= 5: true"), "{stdout}");
    let csv = fs::read_to_string(out.join("woodbury.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 80);
}

#[test]
fn resources_report_widths() {
    let s = ok(&["resources", "--n", "8", "--k", "3"]);
    assert!(s.contains("width (multiplication) = 11"), "{s}");
    assert!(s.contains("width (q-form)         = 9"), "{s}");
}
