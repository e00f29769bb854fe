//! Run configuration: a sectioned `key = value` file (TOML syntax).
//!
//! ```text
//! [domain]
//! kind = "interval"          # or "rectangle"
//! lengths = [1.0]
//! cells = [64]
//!
//! [params]
//! gamma = 0.1
//! chi = 1.0                  # optional
//! g = 1.0                    # constant transfer rate, optional
//! g_left = 0.0               # per-side overrides, optional
//!
//! [time]
//! t_end = 50.0
//! ```
//!
//! The `[init]`, `[solver]`, `[analysis]` and `[output]` sections are optional; every
//! key they hold has a default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{trace_window, TraceSettings};
use crate::error::{Error, Result};
use crate::grid::{BoundaryData, CellField, DomainKind, Mesh, MeshSpec, Side};
use crate::steady::SteadySettings;
use crate::transport::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainName {
    Interval,
    Rectangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainName,
    pub lengths: Vec<f64>,
    pub cells: Vec<usize>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub gamma: f64,
    #[serde(default = "one")]
    pub chi: f64,
    #[serde(default = "one")]
    pub g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_right: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_bottom: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_top: Option<f64>,
}

impl ParamsConfig {
    pub fn g_for(&self, side: Side) -> f64 {
        let over = match side {
            Side::Left => self.g_left,
            Side::Right => self.g_right,
            Side::Bottom => self.g_bottom,
            Side::Top => self.g_top,
        };
        over.unwrap_or(self.g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Constant,
    GaussianBump,
    TwoBumps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    #[serde(default = "InitConfig::default_profile")]
    pub profile: Profile,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "InitConfig::default_baseline")]
    pub baseline: f64,
    /// Standard deviation of each bump; defaults to a tenth of the first side length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center2: Option<Vec<f64>>,
    /// Rescales the profile to this total mass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

impl InitConfig {
    fn default_profile() -> Profile {
        Profile::GaussianBump
    }

    fn default_baseline() -> f64 {
        0.5
    }
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            profile: Self::default_profile(),
            amplitude: 1.0,
            baseline: Self::default_baseline(),
            width: None,
            center: None,
            center2: None,
            mass: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_cap: Option<f64>,
    /// Defaults to `t_end / 100`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_every: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub elliptic_tol: f64,
    pub mass_tol: f64,
    pub newton_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { elliptic_tol: 1e-12, mass_tol: 1e-10, newton_cap: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub trace_lambda: f64,
    pub trace_q: f64,
    pub trace_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_trace: Option<f64>,
    /// Solve for the stationary state and attach energy diagnostics.
    pub stationary: bool,
    pub tail_fraction: f64,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            trace_lambda: 1.0 / 3.0,
            trace_q: 2.0,
            trace_samples: 200,
            c_trace: None,
            stationary: true,
            tail_fraction: 0.5,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: String,
    /// Any of `"csv"` (time series and snapshots) and `"json"` (time series as JSON).
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: "out".into(), formats: vec!["csv".into()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub params: ParamsConfig,
    #[serde(default)]
    pub init: InitConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    /// Parses and validates configuration text.
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| invalid(e.to_string().trim_end().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let mesh = self.mesh()?;
        let dim = mesh.dim();
        let p = &self.params;
        if !(p.gamma >= 0.0) || !p.gamma.is_finite() {
            return Err(invalid("params.gamma must be >= 0"));
        }
        if !(p.chi > 0.0) || !p.chi.is_finite() {
            return Err(invalid("params.chi must be > 0"));
        }
        for (key, v) in [
            ("g", Some(p.g)),
            ("g_left", p.g_left),
            ("g_right", p.g_right),
            ("g_bottom", p.g_bottom),
            ("g_top", p.g_top),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(invalid(format!("params.{key} must be >= 0, got {v}")));
                }
            }
        }
        if dim == 1 && (p.g_bottom.is_some() || p.g_top.is_some()) {
            return Err(invalid("params.g_bottom/g_top only apply to rectangles"));
        }

        let init = &self.init;
        if !(init.baseline > 0.0) || !init.baseline.is_finite() {
            return Err(invalid(format!("init.baseline must be > 0 (initial density n0 > 0), got {}", init.baseline)));
        }
        if !(init.amplitude >= 0.0) || !init.amplitude.is_finite() {
            return Err(invalid("init.amplitude must be >= 0"));
        }
        if let Some(w) = init.width {
            if !(w > 0.0) {
                return Err(invalid("init.width must be > 0"));
            }
        }
        for (key, c) in [("center", &init.center), ("center2", &init.center2)] {
            if let Some(c) = c {
                if c.len() != dim {
                    return Err(invalid(format!("init.{key} needs {dim} coordinate(s)")));
                }
            }
        }
        if let Some(m) = init.mass {
            if !(m > 0.0) || !m.is_finite() {
                return Err(invalid("init.mass must be > 0"));
            }
        }

        let t = &self.time;
        if !(t.t_end >= 0.0) || !t.t_end.is_finite() {
            return Err(invalid("time.t_end must be >= 0"));
        }
        if let Some(dt) = t.dt_cap {
            if !(dt > 0.0) {
                return Err(invalid("time.dt_cap must be > 0"));
            }
        }
        if let Some(every) = t.output_every {
            if !(every > 0.0) {
                return Err(invalid("time.output_every must be > 0"));
            }
        }

        let s = &self.solver;
        if !(s.elliptic_tol > 0.0) || !(s.mass_tol > 0.0) {
            return Err(invalid("solver tolerances must be > 0"));
        }
        if s.newton_cap == 0 {
            return Err(invalid("solver.newton_cap must be >= 1"));
        }

        let a = &self.analysis;
        if !(a.trace_q > 0.0 && a.trace_q <= 2.0) {
            return Err(invalid("analysis.trace_q must lie in (0, 2]"));
        }
        let upper: f64 = trace_window(dim, a.trace_q);
        if !(a.trace_lambda > 0.0 && a.trace_lambda < upper) {
            return Err(invalid(format!("analysis.trace_lambda must lie in (0, {upper})")));
        }
        if a.trace_samples == 0 {
            return Err(invalid("analysis.trace_samples must be >= 1"));
        }
        if let Some(c) = a.c_trace {
            if !(c > 0.0) {
                return Err(invalid("analysis.c_trace must be > 0"));
            }
        }
        if !(a.tail_fraction > 0.0 && a.tail_fraction <= 1.0) {
            return Err(invalid("analysis.tail_fraction must lie in (0, 1]"));
        }
        for f in &self.output.formats {
            if f != "csv" && f != "json" {
                return Err(invalid(format!("unknown output format {f:?}")));
            }
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<Mesh<f64>> {
        let kind = match self.domain.kind {
            DomainName::Interval => DomainKind::Interval,
            DomainName::Rectangle => DomainKind::Rectangle,
        };
        Mesh::build(&MeshSpec { kind, lengths: self.domain.lengths.clone(), cells: self.domain.cells.clone() })
    }

    pub fn boundary(&self, mesh: &Mesh<f64>) -> Result<BoundaryData<f64>> {
        BoundaryData::per_side(mesh, self.params.gamma, |side| self.params.g_for(side))
    }

    pub fn initial_density(&self, mesh: &Mesh<f64>) -> CellField<f64> {
        let init = &self.init;
        let lengths = mesh.lengths();
        let width = init.width.unwrap_or(0.1 * lengths[0]);
        let mid: Vec<f64> = lengths.iter().map(|l| 0.5 * l).collect();
        let bump = |x: &[f64], center: &[f64]| {
            let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            init.amplitude * (-r2 / (2.0 * width * width)).exp()
        };
        let n0 = match init.profile {
            Profile::Constant => mesh.field(init.baseline + init.amplitude),
            Profile::GaussianBump => {
                let center = init.center.clone().unwrap_or(mid);
                mesh.sample(|x| init.baseline + bump(x, &center))
            }
            Profile::TwoBumps => {
                let mut first = mid.clone();
                first[0] = 0.25 * lengths[0];
                let mut second = mid;
                second[0] = 0.75 * lengths[0];
                let first = init.center.clone().unwrap_or(first);
                let second = init.center2.clone().unwrap_or(second);
                mesh.sample(|x| init.baseline + bump(x, &first) + bump(x, &second))
            }
        };
        match init.mass {
            Some(m) => {
                let scale = m / mesh.integrate(&n0);
                n0.map(|v| v * scale)
            }
            None => n0,
        }
    }

    pub fn output_every(&self) -> f64 {
        self.time.output_every.unwrap_or(if self.time.t_end > 0.0 { self.time.t_end / 100.0 } else { 1.0 })
    }

    pub fn problem(&self) -> Result<Problem<f64>> {
        let mesh = self.mesh()?;
        let bc = self.boundary(&mesh)?;
        let n0 = self.initial_density(&mesh);
        Ok(Problem {
            mesh,
            bc,
            chi: self.params.chi,
            n0,
            t_end: self.time.t_end,
            output_every: self.output_every(),
            dt_cap: self.time.dt_cap,
            elliptic_tol: self.solver.elliptic_tol,
        })
    }

    pub fn steady_settings(&self) -> SteadySettings<f64> {
        SteadySettings {
            elliptic_tol: self.solver.elliptic_tol,
            mass_tol: self.solver.mass_tol,
            newton_cap: self.solver.newton_cap,
            ..SteadySettings::default()
        }
    }

    pub fn trace_settings(&self) -> TraceSettings<f64> {
        TraceSettings {
            q: self.analysis.trace_q,
            lambda: self.analysis.trace_lambda,
            samples: self.analysis.trace_samples,
            seed: self.analysis.seed,
        }
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::parse(&text)
}
