//! Energy and convergence diagnostics comparing a run against its stationary state.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{CellField, Mesh};
use crate::scalar::Real;
use crate::steady::StationaryState;
use crate::transport::{simulate, Problem, Record};

/// Inputs of the convergence threshold `K(m, g, γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KInputs<T> {
    pub mass: T,
    /// ‖g‖_∞
    pub gnorm: T,
    pub gamma: T,
    pub lambda1: T,
    pub c_trace: T,
    pub volume: T,
}

/// `λ₁/2 − γ (C ‖g‖ max{γ²‖g‖², 1} + m γ e^{2γ} / (2|Ω|))`
pub fn k_of<T: Real>(k: &KInputs<T>) -> T {
    let half = T::lit(0.5);
    let boundary = k.c_trace * k.gnorm * (k.gamma * k.gamma * k.gnorm * k.gnorm).max(T::one());
    let reaction = k.mass * k.gamma * (T::lit(2.0) * k.gamma).exp() / (T::lit(2.0) * k.volume);
    k.lambda1 * half - k.gamma * (boundary + reaction)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Tests `∫|∇(c − c∞)|² + ½∫n∞(c − c∞)² ≤ (γ²/2) ∫(n − n∞)²/n∞`.
pub fn check_energy_inequality<T: Real>(
    mesh: &Mesh<T>,
    n: &CellField<T>,
    c: &CellField<T>,
    stationary: &StationaryState<T>,
    gamma: T,
) -> Result<InequalityCheck<T>> {
    for f in [n, c, &stationary.n, &stationary.c] {
        mesh.check(f)?;
    }
    let half = T::lit(0.5);
    let dc = c.zip_map(&stationary.c, |a, b| a - b)?;
    let weighted = dc.zip_map(&stationary.n, |d, ni| ni * d * d)?;
    let lhs = mesh.gradient_energy(&dc) + half * mesh.integrate(&weighted);
    let ratio = n.zip_map(&stationary.n, |a, b| (a - b) * (a - b) / b)?;
    let rhs = gamma * gamma * half * mesh.integrate(&ratio);
    let holds = lhs <= rhs * (T::one() + T::lit(1e-8)) + T::lit(1e-14);
    Ok(InequalityCheck { lhs, rhs, holds })
}

/// Right-hand side weakened with `inf n∞ ≥ m / (e^γ |Ω|)`:
/// `γ² e^γ |Ω| / (2m) ∫(n − n∞)²`.
pub fn weakened_energy_rhs<T: Real>(
    mesh: &Mesh<T>,
    n: &CellField<T>,
    stationary: &StationaryState<T>,
    gamma: T,
    mass: T,
) -> Result<T> {
    let sq = n.zip_map(&stationary.n, |a, b| (a - b) * (a - b))?;
    Ok(gamma * gamma * gamma.exp() * mesh.volume() / (T::lit(2.0) * mass) * mesh.integrate(&sq))
}

/// Per-output-time comparison of a run against its stationary state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport<T> {
    pub t: T,
    /// ∫(n − n∞)²
    pub e_n: T,
    /// ∫|∇(c − c∞)|²
    pub e_grad_c: T,
    /// ∫(c − c∞)²
    pub e_c: T,
    pub lhs36: T,
    pub rhs36: T,
    pub holds36: bool,
    /// Trapezoid rule for ∫₀ᵗ E_n.
    pub cum_e_n: T,
    pub mass: T,
    pub min_n: T,
    pub max_n: T,
    pub min_c: T,
    pub max_c: T,
}

pub fn energy_reports<T: Real>(
    mesh: &Mesh<T>,
    records: &[Record<T>],
    stationary: &StationaryState<T>,
    gamma: T,
) -> Result<Vec<EnergyReport<T>>> {
    let mut out: Vec<EnergyReport<T>> = Vec::with_capacity(records.len());
    for rec in records {
        let n = &rec.state.n;
        let c = &rec.signal.c;
        let dn = n.zip_map(&stationary.n, |a, b| a - b)?;
        let dc = c.zip_map(&stationary.c, |a, b| a - b)?;
        let e_n = mesh.integrate(&dn.map(|v| v * v));
        let check = check_energy_inequality(mesh, n, c, stationary, gamma)?;
        let cum_e_n = match out.last() {
            Some(prev) => prev.cum_e_n + (rec.state.t - prev.t) * (prev.e_n + e_n) * T::lit(0.5),
            None => T::zero(),
        };
        out.push(EnergyReport {
            t: rec.state.t,
            e_n,
            e_grad_c: mesh.gradient_energy(&dc),
            e_c: mesh.integrate(&dc.map(|v| v * v)),
            lhs36: check.lhs,
            rhs36: check.rhs,
            holds36: check.holds,
            cum_e_n,
            mass: rec.state.mass,
            min_n: n.min(),
            max_n: n.max(),
            min_c: rec.signal.min(),
            max_c: rec.signal.max(),
        });
    }
    Ok(out)
}

/// `K ∫₀ᵀ E_n ≤ E_n(0)`; vacuous when `K ≤ 0`.
pub fn check_34<T: Real>(reports: &[EnergyReport<T>], k: T) -> InequalityCheck<T> {
    let (Some(first), Some(last)) = (reports.first(), reports.last()) else {
        return InequalityCheck { lhs: T::zero(), rhs: T::zero(), holds: true };
    };
    let lhs = k * last.cum_e_n;
    let rhs = first.e_n;
    let holds = k <= T::zero() || lhs <= rhs * (T::one() + T::lit(1e-6));
    InequalityCheck { lhs, rhs, holds }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence<T> {
    pub converged: bool,
    /// Least-squares slope of `ln E_n` over the tail points above [`ENERGY_FLOOR`].
    pub rate: T,
}

/// Absolute floor below which `E_n` counts as converged.
pub const ENERGY_FLOOR: f64 = 1e-14;

/// Decides whether `E_n(t)` has settled: nonincreasing over the tail (up to
/// [`ENERGY_FLOOR`]) and reduced below `1e-12 E_n(0) + ENERGY_FLOOR` at the end.
pub fn detect_convergence<T: Real>(times: &[T], e_n: &[T], tail_fraction: T) -> Result<Convergence<T>> {
    if times.len() != e_n.len() {
        return Err(Error::Domain("times and energies differ in length".into()));
    }
    if e_n.len() < 10 {
        return Err(Error::Domain(format!("need at least 10 records, got {}", e_n.len())));
    }
    if !(tail_fraction > T::zero() && tail_fraction <= T::one()) {
        return Err(Error::Domain("tail fraction must lie in (0, 1]".into()));
    }
    let len = e_n.len();
    let tail_len = (tail_fraction * T::from_count(len)).ceil().to_usize().unwrap_or(len).clamp(2, len);
    let start = len - tail_len;
    let floor = T::lit(ENERGY_FLOOR);
    let nonincreasing = e_n[start..].windows(2).all(|w| w[1] <= w[0] + floor);
    let settled = e_n[len - 1] <= T::lit(1e-12) * e_n[0] + floor;

    // Points at the roundoff floor carry no rate information. If the whole tail has
    // settled, fit the part of the run that is still above the floor instead.
    let above = |from: usize| -> Vec<(T, T)> {
        times[from..].iter().zip(&e_n[from..]).filter(|(_, &e)| e > floor).map(|(&t, &e)| (t, e.ln())).collect()
    };
    let mut points = above(start);
    if points.len() < 2 {
        points = above(0);
    }
    let rate = if points.len() < 2 {
        T::zero()
    } else {
        let k = T::from_count(points.len());
        let tm = points.iter().map(|p| p.0).sum::<T>() / k;
        let ym = points.iter().map(|p| p.1).sum::<T>() / k;
        let sxy: T = points.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
        let sxx: T = points.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
        if sxx > T::zero() {
            sxy / sxx
        } else {
            T::zero()
        }
    };
    Ok(Convergence { converged: nonincreasing && settled, rate })
}

/// Upper end of the admissible interpolation exponents, `q / (2N + 2q − Nq)`.
pub fn trace_window<T: Real>(dim: usize, q: T) -> T {
    let n = T::from_count(dim);
    let two = T::lit(2.0);
    q / (two * n + two * q - n * q)
}

/// `‖φ‖_{L²(∂Ω)} / (‖∇φ‖^{1−λ} ‖φ‖_q^λ + ‖φ‖_q)` in quadrature norms.
pub fn trace_ratio<T: Real>(mesh: &Mesh<T>, phi: &CellField<T>, q: T, lambda: T) -> T {
    let trace = mesh.boundary_trace(phi);
    let boundary = mesh.boundary_integrate(&trace.iter().map(|&v| v * v).collect::<Vec<_>>()).sqrt();
    let grad = mesh.gradient_energy(phi).sqrt();
    let lq = mesh.integrate(&phi.map(|v| v.abs().powf(q))).powf(T::one() / q);
    let denom = grad.powf(T::one() - lambda) * lq.powf(lambda) + lq;
    if denom > T::zero() {
        boundary / denom
    } else {
        T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSettings<T> {
    pub q: T,
    pub lambda: T,
    pub samples: usize,
    pub seed: u64,
}

impl<T: Real> Default for TraceSettings<T> {
    fn default() -> Self {
        TraceSettings { q: T::lit(2.0), lambda: T::one() / T::lit(3.0), samples: 200, seed: 42 }
    }
}

const TRACE_MODES: usize = 20;
const TRACE_TERMS: usize = 5;

fn check_trace_exponents<T: Real>(mesh: &Mesh<T>, q: T, lambda: T) -> Result<()> {
    if !(q > T::zero() && q <= T::lit(2.0)) {
        return Err(Error::Domain(format!("q must lie in (0, 2], got {q}")));
    }
    let upper = trace_window(mesh.dim(), q);
    if !(lambda > T::zero() && lambda < upper) {
        return Err(Error::Domain(format!("lambda = {lambda} outside the admissible window (0, {upper})")));
    }
    Ok(())
}

/// Random combination of `TRACE_TERMS` distinct modes with standard normal weights.
fn random_combination<T: Real>(mesh: &Mesh<T>, modes: &[(T, CellField<T>)], rng: &mut ChaCha8Rng) -> CellField<T> {
    let terms = TRACE_TERMS.min(modes.len());
    let mut field = mesh.field(T::zero());
    for idx in sample(rng, modes.len(), terms) {
        let w: f64 = rng.sample(StandardNormal);
        let w = T::lit(w);
        for (v, &m) in field.values.iter_mut().zip(&modes[idx].1.values) {
            *v = *v + w * m;
        }
    }
    field
}

/// Lower estimate of the interpolation constant `C` in
/// `‖φ‖_{L²(∂Ω)} ≤ C ‖∇φ‖^{1−λ} ‖φ‖_q^λ + C ‖φ‖_q`, maximizing the ratio over the
/// lowest discrete Neumann modes and random combinations of them.
pub fn estimate_trace_constant<T: Real>(mesh: &Mesh<T>, settings: &TraceSettings<T>) -> Result<T> {
    check_trace_exponents(mesh, settings.q, settings.lambda)?;
    if settings.samples == 0 {
        return Err(Error::Domain("need at least one random sample".into()));
    }
    let modes = mesh.neumann_modes(TRACE_MODES.min(mesh.cell_count()));
    let mut best =
        modes.iter().map(|(_, phi)| trace_ratio(mesh, phi, settings.q, settings.lambda)).fold(T::zero(), T::max);
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    for _ in 0..settings.samples {
        let phi = random_combination(mesh, &modes, &mut rng);
        best = best.max(trace_ratio(mesh, &phi, settings.q, settings.lambda));
    }
    Ok(best)
}

/// Largest `ratio / Ĉ` over `count` fresh random fields from the same family.
pub fn validate_trace_constant<T: Real>(
    mesh: &Mesh<T>,
    c_hat: T,
    q: T,
    lambda: T,
    count: usize,
    seed: u64,
) -> Result<T> {
    check_trace_exponents(mesh, q, lambda)?;
    let modes = mesh.neumann_modes(TRACE_MODES.min(mesh.cell_count()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let worst = (0..count)
        .map(|_| trace_ratio(mesh, &random_combination(mesh, &modes, &mut rng), q, lambda))
        .fold(T::zero(), T::max);
    Ok(worst / c_hat)
}

/// Largest `λ₁ ∫φ² / ∫|∇φ|²` over random zero-mean fields: rough cellwise noise and
/// smooth combinations of low modes.
pub fn poincare_check<T: Real>(mesh: &Mesh<T>, samples: usize, seed: u64) -> T {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = mesh.neumann_modes(TRACE_MODES.min(mesh.cell_count()));
    let lambda1 = mesh.neumann_lambda1();
    let mut worst = T::zero();
    for k in 0..samples {
        let mut phi = if k % 2 == 0 {
            random_combination(mesh, &modes[1..], &mut rng)
        } else {
            let values = (0..mesh.cell_count()).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect();
            mesh.field_from_vec(values).expect("sized to mesh")
        };
        let mean = mesh.integrate(&phi) / mesh.volume();
        phi = phi.map(|v| v - mean);
        let grad = mesh.gradient_energy(&phi);
        if grad > T::zero() {
            worst = worst.max(lambda1 * mesh.integrate(&phi.map(|v| v * v)) / grad);
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiCheck<T> {
    /// max |n_A − n_B| / max n_A over all output times.
    pub density_deviation: T,
    /// max |c_A − χ c_B| / max c_A over all output times.
    pub signal_deviation: T,
    pub passed: bool,
}

/// Sensitivity rescaling: run A with sensitivity 1 and saturation γ, run B with
/// sensitivity χ and saturation γ/χ. The drift `χ ∇c_B = ∇c_A`, so the densities must
/// coincide and `c_A = χ c_B`.
pub fn chi_check<T: Real>(problem: &Problem<T>, chi: T) -> Result<ChiCheck<T>> {
    if !(chi > T::zero()) {
        return Err(Error::Domain("chi must be positive".into()));
    }
    let base = Problem { chi: T::one(), ..problem.clone() };
    let scaled = Problem { chi, bc: problem.bc.with_gamma(problem.bc.gamma / chi), ..problem.clone() };
    let a = simulate(&base)?;
    let b = simulate(&scaled)?;
    if a.records.len() != b.records.len() {
        return Ok(ChiCheck { density_deviation: T::infinity(), signal_deviation: T::infinity(), passed: false });
    }
    let tol = T::lit(1e-12);
    let mut dn_worst = T::zero();
    let mut dc_worst = T::zero();
    let mut passed = true;
    for (ra, rb) in a.records.iter().zip(&b.records) {
        let dn = ra.state.n.values.iter().zip(&rb.state.n.values).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()));
        let dc = ra
            .signal
            .c
            .values
            .iter()
            .zip(&rb.signal.c.values)
            .fold(T::zero(), |m, (&x, &y)| m.max((x - chi * y).abs()));
        let n_scale = ra.state.n.max();
        let c_scale = ra.signal.c.max();
        let dn_rel = dn / n_scale;
        let dc_rel = if c_scale > T::zero() { dc / c_scale } else { dc };
        dn_worst = dn_worst.max(dn_rel);
        dc_worst = dc_worst.max(dc_rel);
        passed &= dn <= tol * n_scale && dc <= tol * c_scale.max(T::min_positive_value());
    }
    Ok(ChiCheck { density_deviation: dn_worst, signal_deviation: dc_worst, passed })
}
