//! Stationary states at prescribed mass.
//!
//! Zero flux for the density forces `n∞ = α e^{c∞}`, so the stationary system reduces
//! to the semilinear problem `Δc = α e^c c` with the Robin condition, plus the scalar
//! mass constraint `α ∫ e^{c(α)} = m`. Since `0 ≤ c ≤ γ`, the multiplier is confined to
//! `[m / (e^γ |Ω|), m / |Ω|]`, and the two endpoints give masses on either side of `m`.

use crate::error::{Error, Result};
use crate::grid::{BoundaryData, CellField, Mesh};
use crate::scalar::Real;
use crate::signal::RobinLaplacian;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadySettings<T> {
    pub elliptic_tol: T,
    /// Relative tolerance on the mass constraint.
    pub mass_tol: T,
    pub newton_cap: usize,
    pub outer_cap: usize,
    /// Relaxation of the multiplier update `α ← α + ω (m / ∫e^c − α)`.
    pub relaxation: T,
}

impl<T: Real> Default for SteadySettings<T> {
    fn default() -> Self {
        SteadySettings {
            elliptic_tol: T::lit(1e-12),
            mass_tol: T::lit(1e-10),
            newton_cap: 30,
            outer_cap: 200,
            relaxation: T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemilinearSolution<T> {
    pub c: CellField<T>,
    pub residual: T,
    pub iterations: usize,
}

/// Newton iteration for `−L_h c + |K| α e^c c = b` starting from `c ≡ γ/2`, with a
/// halving line search on the max-norm residual.
pub fn solve_semilinear<T: Real>(
    mesh: &Mesh<T>,
    alpha: T,
    bc: &BoundaryData<T>,
    tol: T,
    newton_cap: usize,
) -> Result<SemilinearSolution<T>> {
    let op = RobinLaplacian::new(mesh, bc)?;
    solve_semilinear_with(&op, mesh, alpha, bc, tol, newton_cap, None)
}

fn semilinear_residual<T: Real>(op: &RobinLaplacian<T>, alpha: T, c: &[T]) -> Vec<T> {
    let vol = op.cell_volume();
    op.apply(c).iter().zip(c).zip(op.source()).map(|((&lc, &ci), &b)| lc + vol * alpha * ci.exp() * ci - b).collect()
}

fn max_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

pub(crate) fn solve_semilinear_with<T: Real>(
    op: &RobinLaplacian<T>,
    mesh: &Mesh<T>,
    alpha: T,
    bc: &BoundaryData<T>,
    tol: T,
    newton_cap: usize,
    guess: Option<&[T]>,
) -> Result<SemilinearSolution<T>> {
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(Error::Domain(format!("multiplier must be >= 0, got {alpha}")));
    }
    if !(tol > T::zero()) {
        return Err(Error::Config("solver tolerance must be positive".into()));
    }
    if alpha == T::zero() && bc.g.iter().all(|&g| g == T::zero()) {
        return Err(Error::Degenerate("alpha = 0 and g ≡ 0 leave the signal undetermined".into()));
    }
    let half = T::lit(0.5);
    let mut c = guess.map_or_else(|| vec![bc.gamma * half; mesh.cell_count()], <[T]>::to_vec);
    let mut f = semilinear_residual(op, alpha, &c);
    let mut norm = max_norm(&f);
    let mut iterations = 0;

    while norm > tol {
        if iterations == newton_cap {
            return Err(Error::NotConverged { what: "Newton iteration", residual: norm.as_f64() });
        }
        iterations += 1;
        let weights: Vec<T> = c.iter().map(|&ci| alpha * ci.exp() * (T::one() + ci)).collect();
        let jac = op.with_reaction(&weights);
        let rhs: Vec<T> = f.iter().map(|&v| -v).collect();
        let lin_tol = (norm * T::lit(1e-2)).min(norm * norm).max(tol * T::lit(0.1));
        let step = jac.solve(&rhs, None, lin_tol)?;

        let mut scale = T::one();
        loop {
            let trial: Vec<T> = c.iter().zip(&step).map(|(&ci, &di)| ci + scale * di).collect();
            let ft = semilinear_residual(op, alpha, &trial);
            let nt = max_norm(&ft);
            if nt < norm || nt <= tol {
                c = trial;
                f = ft;
                norm = nt;
                break;
            }
            scale = scale * half;
            if scale < T::lit(1e-9) {
                return Err(Error::NotConverged { what: "Newton line search", residual: norm.as_f64() });
            }
        }
    }

    let slack = T::epsilon() * T::lit(1e4) * (T::one() + bc.gamma);
    let field = mesh.field_from_vec(c)?;
    if field.min() < -slack || field.max() > bc.gamma + slack {
        return Err(Error::Numerical(format!("semilinear solution left [0, γ]: [{}, {}]", field.min(), field.max())));
    }
    Ok(SemilinearSolution { c: field, residual: norm, iterations })
}

/// `α ∫ e^{c(α)}`.
pub fn mass_of_alpha<T: Real>(
    mesh: &Mesh<T>,
    alpha: T,
    bc: &BoundaryData<T>,
    settings: &SteadySettings<T>,
) -> Result<T> {
    let sol = solve_semilinear(mesh, alpha, bc, settings.elliptic_tol, settings.newton_cap)?;
    Ok(alpha * mesh.integrate(&sol.c.map(T::exp)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryState<T> {
    pub alpha: T,
    pub c: CellField<T>,
    pub n: CellField<T>,
    /// `|∫ n∞ − m|`
    pub mass_residual: T,
    pub elliptic_residual: T,
    pub outer_iterations: usize,
    pub used_bisection: bool,
}

impl<T: Real> StationaryState<T> {
    pub fn is_nonconstant(&self) -> bool {
        self.n.max() > self.n.min()
    }
}

/// Bracket `[m / (e^γ |Ω|), m / |Ω|]` containing every admissible multiplier.
pub fn alpha_bracket<T: Real>(mesh: &Mesh<T>, mass: T, gamma: T) -> (T, T) {
    let hi = mass / mesh.volume();
    (hi / gamma.exp(), hi)
}

/// Finds the stationary state with `∫ n∞ = mass`.
pub fn solve_stationary<T: Real>(
    mesh: &Mesh<T>,
    mass: T,
    bc: &BoundaryData<T>,
    settings: &SteadySettings<T>,
) -> Result<StationaryState<T>> {
    if !(mass > T::zero()) || !mass.is_finite() {
        return Err(Error::Domain(format!("mass must be positive, got {mass}")));
    }
    if !(bc.min_g() > T::zero()) {
        return Err(Error::Domain("stationary states need g > 0 on every boundary face".into()));
    }
    let op = RobinLaplacian::new(mesh, bc)?;
    let (bracket_lo, bracket_hi) = alpha_bracket(mesh, mass, bc.gamma);
    let target = settings.mass_tol * mass;

    let mut guess: Option<Vec<T>> = None;
    let mut evaluate = |alpha: T| -> Result<(T, SemilinearSolution<T>)> {
        let sol =
            solve_semilinear_with(&op, mesh, alpha, bc, settings.elliptic_tol, settings.newton_cap, guess.as_deref())?;
        guess = Some(sol.c.values.clone());
        let integral = mesh.integrate(&sol.c.map(T::exp));
        Ok((integral, sol))
    };
    let finish = |alpha: T, sol: SemilinearSolution<T>, outer: usize, bisected: bool| -> Result<StationaryState<T>> {
        let n = sol.c.map(|c| alpha * c.exp());
        let mass_residual = (mesh.integrate(&n) - mass).abs();
        Ok(StationaryState {
            alpha,
            c: sol.c,
            n,
            mass_residual,
            elliptic_residual: sol.residual,
            outer_iterations: outer,
            used_bisection: bisected,
        })
    };

    let (mut lo, mut hi) = (bracket_lo, bracket_hi);
    let mut alpha = mass / (mesh.volume() * (bc.gamma * T::lit(0.5)).exp());
    let mut best = T::infinity();
    let mut stalls = 0;
    let mut outer = 0;

    while outer < settings.outer_cap {
        outer += 1;
        let (integral, sol) = evaluate(alpha)?;
        let defect = alpha * integral - mass;
        if defect.abs() <= target {
            return finish(alpha, sol, outer, false);
        }
        if defect < T::zero() {
            lo = lo.max(alpha);
        } else {
            hi = hi.min(alpha);
        }
        if defect.abs() < best {
            best = defect.abs();
            stalls = 0;
        } else {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        }
        alpha = alpha + settings.relaxation * (mass / integral - alpha);
    }

    // Bisection on the analytic bracket, narrowed by whatever the fixed point learned.
    let (low_integral, _) = evaluate(bracket_lo)?;
    let (high_integral, _) = evaluate(bracket_hi)?;
    if bracket_lo * low_integral > mass + target || bracket_hi * high_integral < mass - target {
        return Err(Error::Internal(format!(
            "multiplier bracket [{bracket_lo}, {bracket_hi}] does not enclose mass {mass}"
        )));
    }
    while outer < settings.outer_cap {
        outer += 1;
        let mid = (lo + hi) * T::lit(0.5);
        let (integral, sol) = evaluate(mid)?;
        let defect = mid * integral - mass;
        if defect.abs() <= target || hi - lo <= T::epsilon() * hi {
            if defect.abs() <= target {
                return finish(mid, sol, outer, true);
            }
            break;
        }
        if defect < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NotConverged { what: "stationary mass iteration", residual: best.as_f64() })
}
