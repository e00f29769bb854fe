use chemotaxis_core::grid::{DomainKind, Mesh, MeshSpec};
use proptest::prelude::*;

/// Inverse iteration on the mean-free subspace, with a plain CG inner solve.
fn discrete_lambda1(mesh: &Mesh<f64>) -> f64 {
    let n = mesh.cell_count();
    let vol = mesh.cell_volume();
    let neg_lap = |x: &[f64]| mesh.apply_neumann_laplacian(x).into_iter().map(|v| -v * vol).collect::<Vec<_>>();
    let project = |x: &mut Vec<f64>| {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut v: Vec<f64> = (0..n).map(|k| ((k * 7919) % 13) as f64 - 6.0 + 0.1 * k as f64).collect();
    project(&mut v);
    let mut estimate = 0.0;
    for _ in 0..200 {
        let b: Vec<f64> = v.iter().map(|x| x * vol).collect();
        let mut x = vec![0.0; n];
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        for _ in 0..10 * n {
            let ap = neg_lap(&p);
            let alpha = rr / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let next = dot(&r, &r);
            if next.sqrt() < 1e-15 {
                break;
            }
            p = r.iter().zip(&p).map(|(ri, pi)| ri + next / rr * pi).collect();
            rr = next;
        }
        project(&mut x);
        let norm = dot(&x, &x).sqrt();
        v = x.iter().map(|xi| xi / norm).collect();
        let lv = neg_lap(&v);
        estimate = dot(&v, &lv) / (vol * dot(&v, &v));
    }
    estimate
}

#[test]
fn lambda1_second_order_agreement() {
    let mut errors = Vec::new();
    for cells in [16, 32, 64] {
        let mesh = Mesh::<f64>::interval(1.0, cells).unwrap();
        errors.push((discrete_lambda1(&mesh) - mesh.neumann_lambda1()).abs());
    }
    assert!(errors[2] < errors[1] && errors[1] < errors[0], "{errors:?}");
    for w in errors.windows(2) {
        assert!(w[1] / w[0] <= 0.3, "{errors:?}");
    }
    let rect = Mesh::<f64>::rectangle(2.0, 1.0, 16, 8).unwrap();
    let rel = (discrete_lambda1(&rect) - rect.neumann_lambda1()).abs() / rect.neumann_lambda1();
    assert!(rel < 1e-2, "{rel}");
}

proptest! {
    #[test]
    fn mesh_invariants(lx in 0.1f64..5.0, ly in 0.1f64..5.0, nx in 2usize..12, ny in 2usize..12, rect in any::<bool>()) {
        let spec = if rect {
            MeshSpec { kind: DomainKind::Rectangle, lengths: vec![lx, ly], cells: vec![nx, ny] }
        } else {
            MeshSpec { kind: DomainKind::Interval, lengths: vec![lx], cells: vec![nx] }
        };
        let mesh = Mesh::build(&spec).unwrap();
        let cells = mesh.cell_count() as f64 * mesh.cell_volume();
        prop_assert!((cells - mesh.volume()).abs() <= 1e-12 * mesh.volume());
        let faces: f64 = mesh.boundary_faces().iter().map(|f| f.measure).sum();
        prop_assert!((faces - mesh.boundary_measure()).abs() <= 1e-12 * mesh.boundary_measure());
        prop_assert!(mesh.boundary_faces().iter().all(|f| f.cell < mesh.cell_count()));
        prop_assert!(mesh.interior_faces().iter().all(|f| f.lower < f.upper && f.upper < mesh.cell_count()));
        // every cell has 2·dim faces
        let mut count = vec![0usize; mesh.cell_count()];
        for f in mesh.interior_faces() { count[f.lower] += 1; count[f.upper] += 1; }
        for f in mesh.boundary_faces() { count[f.cell] += 1; }
        prop_assert!(count.iter().all(|&k| k == 2 * mesh.dim()));
    }

    #[test]
    fn face_gradient_exact_for_affine(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let mesh = Mesh::<f64>::rectangle(1.5, 0.7, 6, 5).unwrap();
        let f = mesh.sample(|x| a + b * x[0] + c * x[1]);
        for (face, g) in mesh.interior_faces().iter().zip(mesh.face_gradient(&f)) {
            let expect = if face.axis == 0 { b } else { c };
            prop_assert!((g - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_exact_for_cellwise_constants(values in proptest::collection::vec(-5.0f64..5.0, 12)) {
        let mesh = Mesh::<f64>::rectangle(2.0, 3.0, 4, 3).unwrap();
        let f = mesh.field_from_vec(values.clone()).unwrap();
        let expect: f64 = values.iter().sum::<f64>() * 0.5;
        prop_assert!((mesh.integrate(&f) - expect).abs() < 1e-12);
    }
}
