//! Tensor-product cell-centered meshes on intervals and axis-aligned rectangles.
//!
//! Cells are uniform. In two dimensions the cell `(i, j)` has flat index `i + nx * j`.
//! On an interval every boundary face has unit measure, so boundary integrals reduce
//! to the sum over the two endpoints.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Interval,
    Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        }
    }
}

/// Face shared by two cells; `lower` precedes `upper` along `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorFace<T> {
    pub lower: usize,
    pub upper: usize,
    pub axis: usize,
    pub measure: T,
    /// Distance between the two cell centers.
    pub spacing: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace<T> {
    pub cell: usize,
    pub axis: usize,
    /// Sign of the outward normal along `axis`.
    pub outward: i8,
    pub side: Side,
    pub measure: T,
    /// Cell spacing normal to the face.
    pub spacing: T,
}

/// Domain kind, side lengths and cell counts; the input of [`Mesh::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec<T> {
    pub kind: DomainKind,
    pub lengths: Vec<T>,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    kind: DomainKind,
    cells: [usize; 2],
    lengths: [T; 2],
    spacing: [T; 2],
    cell_volume: T,
    interior: Vec<InteriorFace<T>>,
    boundary: Vec<BoundaryFace<T>>,
    volume: T,
    boundary_measure: T,
}

impl<T: Real> Mesh<T> {
    pub fn build(spec: &MeshSpec<T>) -> Result<Self> {
        let dim = match spec.kind {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        };
        if spec.lengths.len() != dim || spec.cells.len() != dim {
            return Err(Error::Config(format!(
                "{:?} needs {dim} length(s) and {dim} cell count(s), got {} and {}",
                spec.kind,
                spec.lengths.len(),
                spec.cells.len()
            )));
        }
        for (&l, &n) in spec.lengths.iter().zip(&spec.cells) {
            if !(l > T::zero()) || !l.is_finite() {
                return Err(Error::Config(format!("side length must be positive, got {l}")));
            }
            if n < 2 {
                return Err(Error::Config(format!("need at least 2 cells per axis, got {n}")));
            }
        }
        Ok(match spec.kind {
            DomainKind::Interval => Self::assemble(spec.kind, [spec.cells[0], 1], [spec.lengths[0], T::one()]),
            DomainKind::Rectangle => {
                Self::assemble(spec.kind, [spec.cells[0], spec.cells[1]], [spec.lengths[0], spec.lengths[1]])
            }
        })
    }

    pub fn interval(length: T, cells: usize) -> Result<Self> {
        Self::build(&MeshSpec { kind: DomainKind::Interval, lengths: vec![length], cells: vec![cells] })
    }

    pub fn rectangle(lx: T, ly: T, nx: usize, ny: usize) -> Result<Self> {
        Self::build(&MeshSpec { kind: DomainKind::Rectangle, lengths: vec![lx, ly], cells: vec![nx, ny] })
    }

    fn assemble(kind: DomainKind, cells: [usize; 2], lengths: [T; 2]) -> Self {
        let [nx, ny] = cells;
        let hx = lengths[0] / T::from_count(nx);
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        let (spacing, cell_volume, volume, boundary_measure);

        match kind {
            DomainKind::Interval => {
                spacing = [hx, T::one()];
                cell_volume = hx;
                volume = lengths[0];
                for i in 0..nx - 1 {
                    interior.push(InteriorFace { lower: i, upper: i + 1, axis: 0, measure: T::one(), spacing: hx });
                }
                boundary.push(BoundaryFace {
                    cell: 0,
                    axis: 0,
                    outward: -1,
                    side: Side::Left,
                    measure: T::one(),
                    spacing: hx,
                });
                boundary.push(BoundaryFace {
                    cell: nx - 1,
                    axis: 0,
                    outward: 1,
                    side: Side::Right,
                    measure: T::one(),
                    spacing: hx,
                });
                boundary_measure = T::lit(2.0);
            }
            DomainKind::Rectangle => {
                let hy = lengths[1] / T::from_count(ny);
                spacing = [hx, hy];
                cell_volume = hx * hy;
                volume = lengths[0] * lengths[1];
                boundary_measure = T::lit(2.0) * (lengths[0] + lengths[1]);
                for j in 0..ny {
                    for i in 0..nx - 1 {
                        let k = i + nx * j;
                        interior.push(InteriorFace { lower: k, upper: k + 1, axis: 0, measure: hy, spacing: hx });
                    }
                }
                for j in 0..ny - 1 {
                    for i in 0..nx {
                        let k = i + nx * j;
                        interior.push(InteriorFace { lower: k, upper: k + nx, axis: 1, measure: hx, spacing: hy });
                    }
                }
                for j in 0..ny {
                    boundary.push(BoundaryFace {
                        cell: nx * j,
                        axis: 0,
                        outward: -1,
                        side: Side::Left,
                        measure: hy,
                        spacing: hx,
                    });
                }
                for j in 0..ny {
                    boundary.push(BoundaryFace {
                        cell: nx - 1 + nx * j,
                        axis: 0,
                        outward: 1,
                        side: Side::Right,
                        measure: hy,
                        spacing: hx,
                    });
                }
                for i in 0..nx {
                    boundary.push(BoundaryFace {
                        cell: i,
                        axis: 1,
                        outward: -1,
                        side: Side::Bottom,
                        measure: hx,
                        spacing: hy,
                    });
                }
                for i in 0..nx {
                    boundary.push(BoundaryFace {
                        cell: i + nx * (ny - 1),
                        axis: 1,
                        outward: 1,
                        side: Side::Top,
                        measure: hx,
                        spacing: hy,
                    });
                }
            }
        }

        Mesh { kind, cells, lengths, spacing, cell_volume, interior, boundary, volume, boundary_measure }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval => 1,
            DomainKind::Rectangle => 2,
        }
    }

    /// Cell counts per axis; the second entry is 1 on an interval.
    pub fn dims(&self) -> [usize; 2] {
        self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths[..self.dim()]
    }

    pub fn spacing(&self) -> &[T] {
        &self.spacing[..self.dim()]
    }

    pub fn cell_volume(&self) -> T {
        self.cell_volume
    }

    /// |Ω|
    pub fn volume(&self) -> T {
        self.volume
    }

    /// |∂Ω| (counting measure on an interval).
    pub fn boundary_measure(&self) -> T {
        self.boundary_measure
    }

    pub fn interior_faces(&self) -> &[InteriorFace<T>] {
        &self.interior
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace<T>] {
        &self.boundary
    }

    pub fn cell_center(&self, cell: usize) -> Vec<T> {
        let half = T::lit(0.5);
        let i = cell % self.cells[0];
        let x = (T::from_count(i) + half) * self.spacing[0];
        match self.kind {
            DomainKind::Interval => vec![x],
            DomainKind::Rectangle => {
                let j = cell / self.cells[0];
                vec![x, (T::from_count(j) + half) * self.spacing[1]]
            }
        }
    }

    pub fn field(&self, value: T) -> CellField<T> {
        CellField { dims: self.cells, values: vec![value; self.cell_count()] }
    }

    /// Samples `f` at the cell centers.
    pub fn sample(&self, f: impl Fn(&[T]) -> T) -> CellField<T> {
        let values = (0..self.cell_count()).map(|k| f(&self.cell_center(k))).collect();
        CellField { dims: self.cells, values }
    }

    pub fn field_from_vec(&self, values: Vec<T>) -> Result<CellField<T>> {
        if values.len() != self.cell_count() {
            return Err(Error::MeshMismatch);
        }
        Ok(CellField { dims: self.cells, values })
    }

    pub fn check(&self, f: &CellField<T>) -> Result<()> {
        if f.dims != self.cells || f.values.len() != self.cell_count() {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    /// Discrete ∫_Ω f.
    pub fn integrate(&self, f: &CellField<T>) -> T {
        f.values.iter().map(|&v| v * self.cell_volume).sum()
    }

    /// Discrete ∫_∂Ω of a trace given per boundary face.
    pub fn boundary_integrate(&self, trace: &[T]) -> T {
        assert_eq!(trace.len(), self.boundary.len(), "one trace value per boundary face");
        trace.iter().zip(&self.boundary).map(|(&v, face)| v * face.measure).sum()
    }

    /// Boundary trace of a cell field, taken as the adjacent cell value.
    pub fn boundary_trace(&self, f: &CellField<T>) -> Vec<T> {
        self.boundary.iter().map(|face| f.values[face.cell]).collect()
    }

    /// Smallest positive eigenvalue of −Δ with homogeneous Neumann conditions on the
    /// continuum domain.
    pub fn neumann_lambda1(&self) -> T {
        let pi = T::PI();
        match self.kind {
            DomainKind::Interval => (pi / self.lengths[0]).powi(2),
            DomainKind::Rectangle => {
                let lx = (pi / self.lengths[0]).powi(2);
                let ly = (pi / self.lengths[1]).powi(2);
                lx.min(ly)
            }
        }
    }

    /// Centered difference across every interior face, in face order.
    pub fn face_gradient(&self, f: &CellField<T>) -> Vec<T> {
        self.interior.iter().map(|face| (f.values[face.upper] - f.values[face.lower]) / face.spacing).collect()
    }

    /// Discrete ∫_Ω |∇f|², each face owning the volume `measure * spacing`.
    pub fn gradient_energy(&self, f: &CellField<T>) -> T {
        self.interior
            .iter()
            .map(|face| {
                let d = f.values[face.upper] - f.values[face.lower];
                face.measure * d * d / face.spacing
            })
            .sum()
    }

    /// Per-volume discrete Laplacian with zero flux through the boundary.
    pub fn apply_neumann_laplacian(&self, f: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); f.len()];
        for face in &self.interior {
            let flux = face.measure * (f[face.upper] - f[face.lower]) / face.spacing;
            out[face.lower] = out[face.lower] + flux;
            out[face.upper] = out[face.upper] - flux;
        }
        for v in &mut out {
            *v = *v / self.cell_volume;
        }
        out
    }

    /// Eigenpairs of the discrete Neumann Laplacian sorted by eigenvalue, starting with
    /// the constant mode. Each eigenvector is a tensor product of cosines sampled at the
    /// cell centers.
    pub fn neumann_modes(&self, count: usize) -> Vec<(T, CellField<T>)> {
        let [nx, ny] = self.cells;
        let discrete = |k: usize, h: T, l: T| {
            let s = (T::PI() * T::from_count(k) * h / (T::lit(2.0) * l)).sin();
            T::lit(4.0) * s * s / (h * h)
        };
        let mut index: Vec<(T, usize, usize)> = Vec::with_capacity(nx * ny);
        for l in 0..ny {
            for k in 0..nx {
                let mut mu = discrete(k, self.spacing[0], self.lengths[0]);
                if self.kind == DomainKind::Rectangle {
                    mu = mu + discrete(l, self.spacing[1], self.lengths[1]);
                }
                index.push((mu, k, l));
            }
        }
        index.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        index
            .into_iter()
            .take(count)
            .map(|(mu, k, l)| {
                let kx = T::PI() * T::from_count(k) / self.lengths[0];
                let ky = T::PI() * T::from_count(l) / self.lengths[1];
                let field = self.sample(|x| {
                    let mut v = (kx * x[0]).cos();
                    if x.len() > 1 {
                        v = v * (ky * x[1]).cos();
                    }
                    v
                });
                (mu, field)
            })
            .collect()
    }
}

/// One value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField<T> {
    dims: [usize; 2],
    pub values: Vec<T>,
}

impl<T: Real> CellField<T> {
    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        CellField { dims: self.dims, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::MeshMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(CellField { dims: self.dims, values })
    }
}

/// Robin data on the boundary: saturation γ and one transfer rate g per boundary face.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData<T> {
    pub gamma: T,
    pub g: Vec<T>,
}

impl<T: Real> BoundaryData<T> {
    pub fn uniform(mesh: &Mesh<T>, gamma: T, g: T) -> Result<Self> {
        Self::per_side(mesh, gamma, |_| g)
    }

    pub fn per_side(mesh: &Mesh<T>, gamma: T, g: impl Fn(Side) -> T) -> Result<Self> {
        let data = BoundaryData { gamma, g: mesh.boundary_faces().iter().map(|f| g(f.side)).collect() };
        data.validate(mesh)?;
        Ok(data)
    }

    pub fn validate(&self, mesh: &Mesh<T>) -> Result<()> {
        if self.g.len() != mesh.boundary_faces().len() {
            return Err(Error::MeshMismatch);
        }
        if !(self.gamma >= T::zero()) || !self.gamma.is_finite() {
            return Err(Error::Config(format!("saturation gamma must be >= 0, got {}", self.gamma)));
        }
        if let Some(bad) = self.g.iter().find(|&&g| !(g >= T::zero()) || !g.is_finite()) {
            return Err(Error::Config(format!("transfer rate g must be >= 0, got {bad}")));
        }
        Ok(())
    }

    pub fn min_g(&self) -> T {
        self.g.iter().copied().fold(T::infinity(), T::min)
    }

    /// ‖g‖_∞ over the boundary faces.
    pub fn max_g(&self) -> T {
        self.g.iter().copied().fold(T::zero(), T::max)
    }

    pub fn with_gamma(&self, gamma: T) -> Self {
        BoundaryData { gamma, g: self.g.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_basics() {
        let mesh = Mesh::<f64>::interval(1.0, 4).unwrap();
        assert_eq!(mesh.spacing(), &[0.25]);
        assert_eq!(mesh.volume(), 1.0);
        assert_eq!(mesh.boundary_measure(), 2.0);
        assert_eq!(mesh.boundary_faces().len(), 2);
        assert_eq!(mesh.interior_faces().len(), 3);
    }

    #[test]
    fn rectangle_basics() {
        let mesh = Mesh::<f64>::rectangle(2.0, 1.0, 4, 2).unwrap();
        assert_eq!(mesh.cell_volume(), 0.25);
        assert_eq!(mesh.volume(), 2.0);
        assert_eq!(mesh.boundary_measure(), 6.0);
        let faces: f64 = mesh.boundary_faces().iter().map(|f| f.measure).sum();
        assert_relative_eq!(faces, 6.0);
        assert_eq!(mesh.interior_faces().len(), 3 * 2 + 4);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(Mesh::<f64>::interval(1.0, 1), Err(Error::Config(_))));
        assert!(matches!(Mesh::<f64>::interval(0.0, 8), Err(Error::Config(_))));
        assert!(matches!(Mesh::<f64>::rectangle(1.0, -1.0, 4, 4), Err(Error::Config(_))));
        let spec = MeshSpec { kind: DomainKind::Rectangle, lengths: vec![1.0], cells: vec![4, 4] };
        assert!(Mesh::<f64>::build(&spec).is_err());
    }

    #[test]
    fn quadrature() {
        let rect = Mesh::<f64>::rectangle(2.0, 1.0, 4, 2).unwrap();
        assert_relative_eq!(rect.integrate(&rect.field(3.0)), 6.0);
        assert_eq!(rect.integrate(&rect.field(0.0)), 0.0);

        let unit = Mesh::<f64>::interval(1.0, 8).unwrap();
        let half = unit.sample(|x| if x[0] < 0.5 { 1.0 } else { 0.0 });
        assert_relative_eq!(unit.integrate(&half), 0.5);

        assert_eq!(unit.boundary_integrate(&[1.0, 1.0]), 2.0);
        assert_eq!(unit.boundary_integrate(&[0.0, 0.0]), 0.0);
        assert_relative_eq!(rect.boundary_integrate(&vec![1.0; rect.boundary_faces().len()]), 6.0);
    }

    #[test]
    fn lambda1_values() {
        let unit = Mesh::<f64>::interval(1.0, 8).unwrap();
        assert_relative_eq!(unit.neumann_lambda1(), 9.869_604_401_089_358, max_relative = 1e-15);
        let pi = Mesh::<f64>::interval(std::f64::consts::PI, 8).unwrap();
        assert_relative_eq!(pi.neumann_lambda1(), 1.0, max_relative = 1e-15);
        let rect = Mesh::<f64>::rectangle(2.0, 1.0, 8, 4).unwrap();
        assert_relative_eq!(rect.neumann_lambda1(), 2.467_401_100_272_339_5, max_relative = 1e-15);
    }

    #[test]
    fn face_gradient_examples() {
        let mesh = Mesh::<f64>::interval(1.0, 4).unwrap();
        let linear = mesh.sample(|x| 2.0 * x[0]);
        for g in mesh.face_gradient(&linear) {
            assert_relative_eq!(g, 2.0, max_relative = 1e-14);
        }
        assert!(mesh.face_gradient(&mesh.field(5.0)).iter().all(|&g| g == 0.0));
        let square = mesh.sample(|x| x[0] * x[0]);
        assert_relative_eq!(mesh.face_gradient(&square)[0], 0.5, max_relative = 1e-14);
    }

    #[test]
    fn cosine_modes_are_discrete_eigenvectors() {
        for mesh in [Mesh::<f64>::interval(1.0, 16).unwrap(), Mesh::<f64>::rectangle(2.0, 1.0, 8, 6).unwrap()] {
            let modes = mesh.neumann_modes(12);
            assert_eq!(modes[0].0, 0.0);
            for (mu, phi) in &modes {
                let lap = mesh.apply_neumann_laplacian(&phi.values);
                for (l, v) in lap.iter().zip(&phi.values) {
                    assert!((l + mu * v).abs() < 1e-10 * (1.0 + mu), "{l} vs {}", -mu * v);
                }
            }
            assert!(modes.windows(2).all(|w| w[0].0 <= w[1].0));
        }
    }

    #[test]
    fn boundary_data_validation() {
        let mesh = Mesh::<f64>::rectangle(1.0, 1.0, 3, 3).unwrap();
        let bc = BoundaryData::per_side(&mesh, 0.5, |s| if s == Side::Top { 2.0 } else { 1.0 }).unwrap();
        assert_eq!(bc.max_g(), 2.0);
        assert_eq!(bc.min_g(), 1.0);
        assert!(BoundaryData::uniform(&mesh, -0.1, 1.0).is_err());
        assert!(BoundaryData::uniform(&mesh, 0.1, -1.0).is_err());
    }

    #[test]
    fn mismatched_fields_rejected() {
        let a = Mesh::<f64>::interval(1.0, 4).unwrap();
        let b = Mesh::<f64>::interval(1.0, 5).unwrap();
        assert_eq!(a.check(&b.field(1.0)), Err(Error::MeshMismatch));
        assert!(a.field(1.0).zip_map(&b.field(1.0), |x, y| x + y).is_err());
    }
}
