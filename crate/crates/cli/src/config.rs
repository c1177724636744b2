//! Flat key-value experiment configuration.
//!
//! A run's parameters come from an optional TOML file with command-line
//! flags layered on top. Every key must belong to the command being run.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    BurgersShock,
    BurgersSurface,
    Euler,
    Kappa,
    Woodbury,
    Resources,
}

impl Command {
    #[cfg(test)]
    const ALL: [Command; 7] = [
        Command::Solve,
        Command::BurgersShock,
        Command::BurgersSurface,
        Command::Euler,
        Command::Kappa,
        Command::Woodbury,
        Command::Resources,
    ];

    /// Value of the `experiment` key naming this command.
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::BurgersShock => "burgers-shock",
            Command::BurgersSurface => "burgers-surface",
            Command::Euler => "euler",
            Command::Kappa => "kappa",
            Command::Woodbury => "woodbury",
            Command::Resources => "resources",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Solve => &[
                "scheme", "backend", "k", "levels", "seed", "force", "system", "rhs", "builtin", "n", "diag", "x0",
                "trace", "out",
            ],
            Command::BurgersShock => &[
                "backend", "viscosity", "length", "intervals", "dt", "amplitude", "iterations", "snapshots", "out",
                "plots",
            ],
            Command::BurgersSurface => {
                &["backend", "viscosity", "length", "final_time", "intervals", "steps", "k", "out", "plots"]
            }
            Command::Euler => &[
                "backend", "rho_bar", "nx", "ny", "x_min", "x_max", "y_min", "y_max", "steps", "final_time", "omega",
                "k", "boundary", "zero_initial", "out", "plots",
            ],
            Command::Kappa => &[
                "n", "d_min", "d_max", "points", "threshold", "kappa_min", "kappa_max", "k_max", "out", "plots",
            ],
            Command::Woodbury => &["n", "kappa", "levels", "iterations", "quantum_check", "out", "plots"],
            Command::Resources => &["n", "k"],
        }
    }
}

/// Every recognised key. Which ones a run may set depends on its command.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub scheme: Option<String>,
    pub backend: Option<String>,
    pub k: Option<usize>,
    pub levels: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub force: Option<bool>,
    pub out: Option<PathBuf>,
    pub plots: Option<bool>,
    pub system: Option<PathBuf>,
    pub rhs: Option<PathBuf>,
    pub builtin: Option<String>,
    pub n: Option<usize>,
    pub diag: Option<f64>,
    pub x0: Option<String>,
    pub trace: Option<bool>,
    pub viscosity: Option<f64>,
    pub length: Option<f64>,
    pub intervals: Option<usize>,
    pub dt: Option<f64>,
    pub amplitude: Option<f64>,
    pub iterations: Option<usize>,
    pub snapshots: Option<Vec<usize>>,
    pub final_time: Option<f64>,
    pub steps: Option<usize>,
    pub rho_bar: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub omega: Option<f64>,
    pub boundary: Option<String>,
    pub zero_initial: Option<bool>,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub points: Option<usize>,
    pub threshold: Option<f64>,
    pub kappa_min: Option<f64>,
    pub kappa_max: Option<f64>,
    pub k_max: Option<usize>,
    pub kappa: Option<f64>,
    pub quantum_check: Option<bool>,
}

/// Values given on the command line; `None` leaves the file value alone.
#[derive(Debug, Default)]
pub struct Overrides {
    pub entries: Vec<(&'static str, Value)>,
}

impl Overrides {
    pub fn set(&mut self, key: &'static str, value: impl Into<Value>) {
        self.entries.push((key, value.into()));
    }

    pub fn set_opt<T: Into<Value>>(&mut self, key: &'static str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }
}

pub fn load_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    text.parse::<Table>().with_context(|| format!("parsing config {}", path.display()))
}

/// Merge file and flags, reject keys foreign to `command`, and type-check.
pub fn resolve(command: Command, file: Option<Table>, overrides: Overrides) -> Result<Params> {
    let mut table = file.unwrap_or_default();
    if let Some(v) = table.get("experiment") {
        match v.as_str() {
            Some(name) if name == command.name() => {}
            _ => bail!("config is for experiment {v}, but the command is '{}'", command.name()),
        }
    }
    for (key, value) in overrides.entries {
        table.insert(key.to_string(), value);
    }
    table.remove("experiment");
    for key in table.keys() {
        if !command.keys().contains(&key.as_str()) {
            let known = Params::KEYS.contains(&key.as_str());
            if known {
                bail!("key '{key}' does not apply to '{}'", command.name());
            }
            bail!("unknown key '{key}'");
        }
    }
    let params: Params = Value::Table(table).try_into().context("invalid configuration")?;
    Ok(params)
}

impl Params {
    const KEYS: &'static [&'static str] = &[
        "scheme", "backend", "k", "levels", "seed", "force", "out", "plots", "system", "rhs", "builtin", "n", "diag",
        "x0", "trace", "viscosity", "length", "intervals", "dt", "amplitude", "iterations", "snapshots", "final_time",
        "steps", "rho_bar", "nx", "ny", "x_min", "x_max", "y_min", "y_max", "omega", "boundary", "zero_initial",
        "d_min", "d_max", "points", "threshold", "kappa_min", "kappa_max", "k_max", "kappa", "quantum_check",
    ];

    pub fn out_dir(&self, command: Command) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("results").join(command.name()))
    }
}
