//! `sweep`: a run configuration plus a `[sweep]` table listing the points.
//!
//! ```text
//! [sweep]
//! gammas = [0.05, 0.1, 0.2]
//! masses = [1.0]         # optional, defaults to the template's initial mass
//! gnorms = [1.0]         # optional, defaults to params.g
//! tail_fraction = 0.5    # optional, defaults to analysis.tail_fraction
//! ```
//!
//! Points run concurrently; rows are written in grid order (mass, g, gamma).

use rayon::prelude::*;
use serde::Deserialize;

use chemotaxis_core::config::RunConfig;

use crate::commands::analyze;
use crate::output::{num, write_rows};
use crate::{CliError, CliResult, Context};

pub const SWEEP_HEADER: [&str; 10] =
    ["mass", "gnorm", "gamma", "K", "converged", "rate", "final_E_n", "final_l2", "steps", "error"];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepTable {
    gammas: Vec<f64>,
    masses: Option<Vec<f64>>,
    gnorms: Option<Vec<f64>>,
    tail_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub template: RunConfig,
    pub gammas: Vec<f64>,
    pub masses: Vec<f64>,
    pub gnorms: Vec<f64>,
    pub tail_fraction: f64,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(format!("configuration error: {}", msg.into()))
}

impl SweepSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| invalid(e.to_string()))?;
        let sweep = table.remove("sweep").ok_or_else(|| invalid("missing [sweep] section"))?;
        let sweep = SweepTable::deserialize(sweep).map_err(|e| invalid(format!("[sweep]: {e}")))?;
        let template = RunConfig::deserialize(toml::Value::Table(table)).map_err(|e| invalid(e.to_string()))?;
        template.validate()?;

        let mesh = template.mesh()?;
        let masses = match sweep.masses {
            Some(m) => m,
            None => vec![mesh.integrate(&template.initial_density(&mesh))],
        };
        let spec = SweepSpec {
            gammas: sweep.gammas,
            masses,
            gnorms: sweep.gnorms.unwrap_or_else(|| vec![template.params.g]),
            tail_fraction: sweep.tail_fraction.unwrap_or(template.analysis.tail_fraction),
            template,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        for (key, list) in [("gammas", &self.gammas), ("masses", &self.masses), ("gnorms", &self.gnorms)] {
            if list.is_empty() {
                return Err(invalid(format!("sweep.{key} must not be empty")));
            }
        }
        if self.gammas.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(invalid("sweep.gammas entries must be >= 0"));
        }
        for (key, list) in [("masses", &self.masses), ("gnorms", &self.gnorms)] {
            if list.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(invalid(format!("sweep.{key} entries must be > 0")));
            }
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(invalid("sweep.tail_fraction must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for &m in &self.masses {
            for &g in &self.gnorms {
                for &gamma in &self.gammas {
                    out.push((m, g, gamma));
                }
            }
        }
        out
    }

    /// The template specialised to one point: uniform `g`, rescaled initial mass.
    pub fn config_for(&self, mass: f64, gnorm: f64, gamma: f64) -> RunConfig {
        let mut cfg = self.template.clone();
        cfg.params.gamma = gamma;
        cfg.params.g = gnorm;
        cfg.params.g_left = None;
        cfg.params.g_right = None;
        cfg.params.g_bottom = None;
        cfg.params.g_top = None;
        cfg.init.mass = Some(mass);
        cfg.analysis.tail_fraction = self.tail_fraction;
        cfg.analysis.stationary = true;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mass: f64,
    pub gnorm: f64,
    pub gamma: f64,
    pub k: Option<f64>,
    pub converged: Option<bool>,
    pub rate: Option<f64>,
    pub final_e_n: Option<f64>,
    pub steps: Option<usize>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(mass: f64, gnorm: f64, gamma: f64, error: String) -> Self {
        SweepRow {
            mass,
            gnorm,
            gamma,
            k: None,
            converged: None,
            rate: None,
            final_e_n: None,
            steps: None,
            error: Some(error),
        }
    }

    fn cells(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        vec![
            num(self.mass),
            num(self.gnorm),
            num(self.gamma),
            opt(self.k),
            self.converged.map(|c| c.to_string()).unwrap_or_default(),
            opt(self.rate),
            opt(self.final_e_n),
            opt(self.final_e_n.map(f64::sqrt)),
            self.steps.map(|s| s.to_string()).unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

pub fn run_point(spec: &SweepSpec, ctx: &Context, (mass, gnorm, gamma): (f64, f64, f64)) -> SweepRow {
    let cfg = spec.config_for(mass, gnorm, gamma);
    match analyze(&cfg, ctx) {
        Ok(a) => {
            let error = if a.convergence.is_none() { Some("fewer than 10 output records".to_string()) } else { None };
            SweepRow {
                mass,
                gnorm,
                gamma,
                k: Some(a.k),
                converged: a.convergence.map(|c| c.converged),
                rate: a.convergence.map(|c| c.rate),
                final_e_n: a.energy.as_ref().and_then(|e| e.last()).map(|r| r.e_n),
                steps: Some(a.out.monitor.steps),
                error,
            }
        }
        Err(e) => SweepRow::failed(mass, gnorm, gamma, e.to_string()),
    }
}

pub fn run_rows(spec: &SweepSpec, ctx: &Context) -> Vec<SweepRow> {
    spec.points().into_par_iter().map(|p| run_point(spec, ctx, p)).collect()
}

pub fn run(spec: &SweepSpec, ctx: &Context) -> CliResult<()> {
    let dir = ctx.prepare()?.to_path_buf();
    let rows = run_rows(spec, ctx);
    write_rows(&dir.join("sweep.csv"), &SWEEP_HEADER, rows.iter().map(SweepRow::cells))?;
    for r in &rows {
        match &r.error {
            None => ctx.say(format!(
                "m {} g {} gamma {}: K {}, converged {}, rate {}",
                num(r.mass),
                num(r.gnorm),
                num(r.gamma),
                r.k.map(num).unwrap_or_default(),
                r.converged.unwrap_or(false),
                r.rate.map(num).unwrap_or_default()
            )),
            Some(e) => ctx.say(format!("m {} g {} gamma {}: {e}", num(r.mass), num(r.gnorm), num(r.gamma))),
        }
    }
    ctx.say(format!("wrote {}", dir.join("sweep.csv").display()));
    Ok(())
}
