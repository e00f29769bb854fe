//! The elliptic signal problem `0 = Δc − n c` with `∂ν c = (γ − c) g`.
//!
//! The Robin closure eliminates a ghost value `c_g` mirrored across each boundary face:
//! `(c_g − c_c)/h = (γ − (c_c + c_g)/2) g`. The outward flux becomes `β (γ − c_c)` with
//! `β = g / (1 + h g / 2)`, which keeps the assembled matrix symmetric and the
//! closure second-order accurate. Rows of the discrete system are cell balances:
//!
//! ```text
//! Σ_interior m/h (c_j − c_i) + Σ_boundary m β (γ − c_i) − |K_i| n_i c_i = 0
//! ```
//!
//! Residuals are measured on these balances in max norm.

use crate::error::{Error, Result};
use crate::grid::{BoundaryData, CellField, Mesh};
use crate::linalg::SymmetricOperator;
use crate::scalar::Real;

pub const DEFAULT_TOL: f64 = 1e-12;

/// The diffusion part of the signal operator with its Robin closure.
#[derive(Debug, Clone)]
pub struct RobinLaplacian<T> {
    base: SymmetricOperator<T>,
    /// `β` per boundary face.
    robin: Vec<T>,
    /// `Σ m β γ` per cell.
    source: Vec<T>,
    cell_volume: T,
}

impl<T: Real> RobinLaplacian<T> {
    pub fn new(mesh: &Mesh<T>, bc: &BoundaryData<T>) -> Result<Self> {
        bc.validate(mesh)?;
        let half = T::lit(0.5);
        let mut diag = vec![T::zero(); mesh.cell_count()];
        let mut source = vec![T::zero(); mesh.cell_count()];
        let mut couplings = Vec::with_capacity(mesh.interior_faces().len());
        for face in mesh.interior_faces() {
            let w = face.measure / face.spacing;
            diag[face.lower] = diag[face.lower] + w;
            diag[face.upper] = diag[face.upper] + w;
            couplings.push((face.lower, face.upper, -w));
        }
        let robin: Vec<T> = mesh
            .boundary_faces()
            .iter()
            .zip(&bc.g)
            .map(|(face, &g)| g / (T::one() + half * face.spacing * g))
            .collect();
        for (face, &beta) in mesh.boundary_faces().iter().zip(&robin) {
            diag[face.cell] = diag[face.cell] + face.measure * beta;
            source[face.cell] = source[face.cell] + face.measure * beta * bc.gamma;
        }
        Ok(RobinLaplacian {
            base: SymmetricOperator::new(diag, couplings),
            robin,
            source,
            cell_volume: mesh.cell_volume(),
        })
    }

    pub fn source(&self) -> &[T] {
        &self.source
    }

    /// Matrix of `c ↦ −L_h c + |K| w c`.
    pub fn with_reaction(&self, weights: &[T]) -> SymmetricOperator<T> {
        let diag = self.base.diag.iter().zip(weights).map(|(&d, &w)| d + self.cell_volume * w).collect();
        SymmetricOperator::new(diag, self.base.couplings.clone())
    }

    /// `−L_h c` (diffusion with Robin closure, without source).
    pub fn apply(&self, c: &[T]) -> Vec<T> {
        self.base.apply(c)
    }

    pub fn cell_volume(&self) -> T {
        self.cell_volume
    }

    /// Face values `(c_c + c_g)/2` implied by the ghost elimination.
    pub fn boundary_values(&self, mesh: &Mesh<T>, bc: &BoundaryData<T>, c: &[T]) -> Vec<T> {
        let half = T::lit(0.5);
        mesh.boundary_faces()
            .iter()
            .zip(&bc.g)
            .map(|(face, &g)| {
                let hg = half * face.spacing * g;
                (c[face.cell] + hg * bc.gamma) / (T::one() + hg)
            })
            .collect()
    }

    pub fn robin_coefficients(&self) -> &[T] {
        &self.robin
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSolution<T> {
    pub c: CellField<T>,
    /// One value per boundary face, in mesh order.
    pub boundary: Vec<T>,
    pub residual: T,
}

impl<T: Real> SignalSolution<T> {
    /// Minimum over cells and boundary faces.
    pub fn min(&self) -> T {
        self.boundary.iter().copied().fold(self.c.min(), T::min)
    }

    /// Maximum over cells and boundary faces.
    pub fn max(&self) -> T {
        self.boundary.iter().copied().fold(self.c.max(), T::max)
    }
}

fn check_density<T: Real>(mesh: &Mesh<T>, n: &CellField<T>) -> Result<()> {
    mesh.check(n)?;
    if !n.is_finite() {
        return Err(Error::Numerical("density contains non-finite values".into()));
    }
    if n.values.iter().any(|&v| v < T::zero()) {
        return Err(Error::Domain("density must be nonnegative".into()));
    }
    Ok(())
}

/// Solves the signal problem for a given density.
pub fn solve_signal<T: Real>(
    mesh: &Mesh<T>,
    n: &CellField<T>,
    bc: &BoundaryData<T>,
    tol: T,
) -> Result<SignalSolution<T>> {
    let op = RobinLaplacian::new(mesh, bc)?;
    solve_signal_with(&op, mesh, n, bc, tol, None)
}

/// As [`solve_signal`], reusing an assembled operator and an optional initial guess.
pub fn solve_signal_with<T: Real>(
    op: &RobinLaplacian<T>,
    mesh: &Mesh<T>,
    n: &CellField<T>,
    bc: &BoundaryData<T>,
    tol: T,
    guess: Option<&[T]>,
) -> Result<SignalSolution<T>> {
    check_density(mesh, n)?;
    if !(tol > T::zero()) {
        return Err(Error::Config("solver tolerance must be positive".into()));
    }
    if n.values.iter().all(|&v| v == T::zero()) && bc.g.iter().all(|&g| g == T::zero()) {
        return Err(Error::Degenerate("n ≡ 0 and g ≡ 0 leave the signal undetermined".into()));
    }
    let matrix = op.with_reaction(&n.values);
    let c = matrix.solve(op.source(), guess, tol)?;
    let residual = matrix.residual_norm(&c, op.source());
    let boundary = op.boundary_values(mesh, bc, &c);
    Ok(SignalSolution { c: mesh.field_from_vec(c)?, boundary, residual })
}

/// Max-norm residual of the cell balances for a candidate signal.
pub fn signal_residual<T: Real>(mesh: &Mesh<T>, c: &CellField<T>, n: &CellField<T>, bc: &BoundaryData<T>) -> Result<T> {
    mesh.check(c)?;
    mesh.check(n)?;
    let op = RobinLaplacian::new(mesh, bc)?;
    Ok(op.with_reaction(&n.values).residual_norm(&c.values, op.source()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_gives_saturation() {
        let mesh = Mesh::<f64>::interval(1.0, 16).unwrap();
        let bc = BoundaryData::uniform(&mesh, 0.7, 1.3).unwrap();
        let sol = solve_signal(&mesh, &mesh.field(0.0), &bc, 1e-12).unwrap();
        for &c in sol.c.values.iter().chain(&sol.boundary) {
            assert!((c - 0.7).abs() < 1e-14);
        }
        assert!(signal_residual(&mesh, &mesh.field(0.7), &mesh.field(0.0), &bc).unwrap() < 1e-14);
    }

    #[test]
    fn insulated_boundary_gives_zero() {
        let mesh = Mesh::<f64>::rectangle(1.0, 1.0, 6, 6).unwrap();
        let bc = BoundaryData::uniform(&mesh, 0.7, 0.0).unwrap();
        let sol = solve_signal(&mesh, &mesh.field(1.0), &bc, 1e-12).unwrap();
        assert!(sol.c.values.iter().all(|&c| c.abs() < 1e-14));
    }

    #[test]
    fn singular_problem_rejected() {
        let mesh = Mesh::<f64>::interval(1.0, 8).unwrap();
        let bc = BoundaryData::uniform(&mesh, 0.7, 0.0).unwrap();
        assert!(matches!(solve_signal(&mesh, &mesh.field(0.0), &bc, 1e-12), Err(Error::Degenerate(_))));
    }

    #[test]
    fn negative_density_rejected() {
        let mesh = Mesh::<f64>::interval(1.0, 4).unwrap();
        let bc = BoundaryData::uniform(&mesh, 1.0, 1.0).unwrap();
        let n = mesh.field_from_vec(vec![1.0, -0.1, 1.0, 1.0]).unwrap();
        assert!(matches!(solve_signal(&mesh, &n, &bc, 1e-12), Err(Error::Domain(_))));
    }

    #[test]
    fn perturbation_shows_in_residual() {
        let mesh = Mesh::<f64>::interval(1.0, 4).unwrap();
        let bc = BoundaryData::uniform(&mesh, 1.0, 1.0).unwrap();
        let n = mesh.field(4.0);
        let sol = solve_signal(&mesh, &n, &bc, 1e-12).unwrap();
        assert!(sol.residual <= 1e-12);
        let mut bumped = sol.c.clone();
        bumped.values[1] += 1.0;
        assert!(signal_residual(&mesh, &bumped, &n, &bc).unwrap() >= 4.0);
    }

    #[test]
    fn single_precision_solve() {
        let mesh = Mesh::<f32>::rectangle(1.0, 1.0, 8, 8).unwrap();
        let bc = BoundaryData::uniform(&mesh, 1.0, 1.0).unwrap();
        let sol = solve_signal(&mesh, &mesh.field(2.0), &bc, 1e-5).unwrap();
        assert!(sol.min() > 0.0 && sol.max() < 1.0);
    }
}
