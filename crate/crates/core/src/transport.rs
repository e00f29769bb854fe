//! Explicit finite-volume transport of the cell density, `n_t = ∇·(∇n − χ n ∇c)`.
//!
//! Face fluxes use the exponentially fitted (Scharfetter–Gummel) upwind form
//!
//! ```text
//! F = (B(−x) n_lower − B(x) n_upper) / h,   x = χ (c_upper − c_lower),   B(x) = x / (eˣ − 1)
//! ```
//!
//! which tends to first-order donor-cell upwinding for strong drift and to central
//! diffusion for weak drift. A face carries zero flux exactly when
//! `n_upper / n_lower = e^{x}`, so densities of the form `α e^{χ c}` are discrete
//! equilibria. Boundary faces carry no flux at all, which is the discrete form of
//! `∂ν n = n ∂ν c`.

use crate::error::{Error, Result};
use crate::grid::{BoundaryData, CellField, Mesh};
use crate::scalar::Real;
use crate::signal::{solve_signal_with, RobinLaplacian, SignalSolution};

pub const CFL_SAFETY: f64 = 0.9;

/// `x / (eˣ − 1)`, continuous at zero.
pub fn bernoulli<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-2) {
        let x2 = x * x;
        T::one() - x * T::lit(0.5) + x2 / T::lit(12.0) - x2 * x2 / T::lit(720.0)
    } else {
        x / x.exp_m1()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportState<T> {
    pub t: T,
    pub n: CellField<T>,
    pub mass: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T> {
    pub dt: T,
    pub mass: T,
    pub min_n: T,
    pub max_n: T,
    pub max_drift: T,
}

/// Drift velocity `χ ∇c` on every interior face.
pub fn drift<T: Real>(mesh: &Mesh<T>, c: &CellField<T>, chi: T) -> Vec<T> {
    mesh.face_gradient(c).into_iter().map(|g| chi * g).collect()
}

/// Largest explicit step for which every update is a nonnegative combination of old
/// cell values.
pub fn stable_dt<T: Real>(mesh: &Mesh<T>, drift: &[T]) -> T {
    let umax = drift.iter().fold(T::zero(), |m, &u| m.max(u.abs()));
    let two = T::lit(2.0);
    let denom: T = mesh.spacing().iter().map(|&h| two / (h * h) + two * umax / h).sum();
    T::lit(CFL_SAFETY) / denom
}

/// One explicit Euler step of the density with the signal held fixed.
pub fn advance<T: Real>(
    mesh: &Mesh<T>,
    state: &TransportState<T>,
    signal: &SignalSolution<T>,
    dt: T,
    chi: T,
) -> Result<(TransportState<T>, StepReport<T>)> {
    mesh.check(&state.n)?;
    mesh.check(&signal.c)?;
    if !state.n.is_finite() || !signal.c.is_finite() || !dt.is_finite() || !chi.is_finite() {
        return Err(Error::Numerical("non-finite input to transport step".into()));
    }
    let u = drift(mesh, &signal.c, chi);
    let limit = stable_dt(mesh, &u);
    if dt > limit {
        return Err(Error::Stability { dt: dt.as_f64(), limit: limit.as_f64() });
    }
    if dt < T::zero() {
        return Err(Error::Domain("negative time step".into()));
    }

    let n = &state.n.values;
    let scale = dt / mesh.cell_volume();
    let mut next = n.clone();
    for (face, &ui) in mesh.interior_faces().iter().zip(&u) {
        let x = ui * face.spacing;
        let flux = (bernoulli(-x) * n[face.lower] - bernoulli(x) * n[face.upper]) / face.spacing;
        let moved = scale * face.measure * flux;
        next[face.lower] = next[face.lower] - moved;
        next[face.upper] = next[face.upper] + moved;
    }
    let n = mesh.field_from_vec(next)?;
    if !n.is_finite() {
        return Err(Error::Numerical("transport step produced non-finite density".into()));
    }
    let mass = mesh.integrate(&n);
    let report = StepReport {
        dt,
        mass,
        min_n: n.min(),
        max_n: n.max(),
        max_drift: u.iter().fold(T::zero(), |m, &v| m.max(v.abs())),
    };
    Ok((TransportState { t: state.t + dt, n, mass }, report))
}

/// Everything a coupled run needs, already discretized.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub mesh: Mesh<T>,
    pub bc: BoundaryData<T>,
    pub chi: T,
    pub n0: CellField<T>,
    pub t_end: T,
    pub output_every: T,
    pub dt_cap: Option<T>,
    pub elliptic_tol: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record<T> {
    pub state: TransportState<T>,
    pub signal: SignalSolution<T>,
    /// Report of the step that produced this state; `dt = 0` for the initial record.
    pub report: StepReport<T>,
}

/// Extremes observed over every step of a run, not only at output times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMonitor<T> {
    pub steps: usize,
    pub min_n: T,
    pub max_n: T,
    pub min_c: T,
    pub max_c: T,
    pub max_residual: T,
    pub max_relative_mass_error: T,
    /// Suprema of (max n, max c, max |∇c|) over the first tenth of the run.
    pub early_sup: [T; 3],
    /// The same suprema over the whole run.
    pub sup: [T; 3],
}

impl<T: Real> RunMonitor<T> {
    fn new() -> Self {
        RunMonitor {
            steps: 0,
            min_n: T::infinity(),
            max_n: T::neg_infinity(),
            min_c: T::infinity(),
            max_c: T::neg_infinity(),
            max_residual: T::zero(),
            max_relative_mass_error: T::zero(),
            early_sup: [T::zero(); 3],
            sup: [T::zero(); 3],
        }
    }

    fn observe(
        &mut self,
        mesh: &Mesh<T>,
        state: &TransportState<T>,
        signal: &SignalSolution<T>,
        mass0: T,
        early: bool,
    ) {
        let max_grad = mesh.face_gradient(&signal.c).into_iter().fold(T::zero(), |m, g| m.max(g.abs()));
        self.min_n = self.min_n.min(state.n.min());
        self.max_n = self.max_n.max(state.n.max());
        self.min_c = self.min_c.min(signal.min());
        self.max_c = self.max_c.max(signal.max());
        self.max_residual = self.max_residual.max(signal.residual);
        let drift = ((state.mass - mass0) / mass0).abs();
        self.max_relative_mass_error = self.max_relative_mass_error.max(drift);
        let sample = [state.n.max(), signal.max(), max_grad];
        for ((sup, early_sup), value) in self.sup.iter_mut().zip(&mut self.early_sup).zip(sample) {
            *sup = sup.max(value);
            if early {
                *early_sup = early_sup.max(value);
            }
        }
    }

    /// No monitored quantity exceeded `factor` times its early supremum.
    pub fn bounded_by(&self, factor: T) -> bool {
        self.sup.iter().zip(&self.early_sup).all(|(&s, &e)| s <= factor * e)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub records: Vec<Record<T>>,
    pub monitor: RunMonitor<T>,
}

/// Couples the transport step with a fresh signal solve after every step and records
/// the state at multiples of `output_every` and at `t_end`.
pub fn simulate<T: Real>(problem: &Problem<T>) -> Result<RunOutput<T>> {
    let Problem { mesh, bc, chi, n0, t_end, output_every, dt_cap, elliptic_tol } = problem;
    let (chi, t_end, output_every, tol) = (*chi, *t_end, *output_every, *elliptic_tol);
    mesh.check(n0)?;
    if !(n0.min() > T::zero()) || !n0.is_finite() {
        return Err(Error::Domain("initial density must be positive and finite".into()));
    }
    if !(chi > T::zero()) {
        return Err(Error::Config("chi must be positive".into()));
    }
    if !(t_end >= T::zero()) || !(output_every > T::zero()) {
        return Err(Error::Config("t_end must be >= 0 and output_every > 0".into()));
    }
    if let Some(cap) = dt_cap {
        if !(*cap > T::zero()) {
            return Err(Error::Config("dt_cap must be positive".into()));
        }
    }

    let op = RobinLaplacian::new(mesh, bc)?;
    let mass0 = mesh.integrate(n0);
    let mut state = TransportState { t: T::zero(), n: n0.clone(), mass: mass0 };
    let mut signal = solve_signal_with(&op, mesh, &state.n, bc, tol, None)?;
    let early_until = t_end * T::lit(0.1);
    let mut monitor = RunMonitor::new();
    monitor.observe(mesh, &state, &signal, mass0, true);
    let initial = StepReport {
        dt: T::zero(),
        mass: mass0,
        min_n: state.n.min(),
        max_n: state.n.max(),
        max_drift: drift(mesh, &signal.c, chi).into_iter().fold(T::zero(), |m, v| m.max(v.abs())),
    };
    let mut records = vec![Record { state: state.clone(), signal: signal.clone(), report: initial }];

    let mut k = 1usize;
    while state.t < t_end {
        let target = (T::from_count(k) * output_every).min(t_end);
        let limit = stable_dt(mesh, &drift(mesh, &signal.c, chi));
        let mut dt = dt_cap.map_or(limit, |cap| cap.min(limit));
        let remaining = target - state.t;
        let hit = dt >= remaining;
        if hit {
            dt = remaining;
        }
        let (mut next, report) = advance(mesh, &state, &signal, dt, chi)?;
        if hit {
            next.t = target;
        }
        signal = solve_signal_with(&op, mesh, &next.n, bc, tol, Some(&signal.c.values))?;
        state = next;
        monitor.steps += 1;
        monitor.observe(mesh, &state, &signal, mass0, state.t <= early_until);
        if hit {
            records.push(Record { state: state.clone(), signal: signal.clone(), report });
            k += 1;
        }
    }
    Ok(RunOutput { records, monitor })
}
