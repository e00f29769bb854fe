use chemotaxis_core::grid::{BoundaryData, Mesh};
use chemotaxis_core::signal::solve_signal;
use chemotaxis_core::steady::{solve_stationary, SteadySettings};
use chemotaxis_core::transport::{simulate, Problem};
use chemotaxis_core::{BoundaryData32, Mesh32};

#[test]
fn single_precision_pipeline() {
    let mesh: Mesh32 = Mesh::interval(1.0, 32).unwrap();
    let bc: BoundaryData32 = BoundaryData::uniform(&mesh, 0.5, 1.0).unwrap();
    let n0 = mesh.sample(|x| 1.0 + 0.5 * (3.0 * x[0]).cos());
    let sig = solve_signal(&mesh, &n0, &bc, 1e-5).unwrap();
    assert!(sig.min() >= 0.0 && sig.max() <= 0.5 + 1e-6);

    let p = Problem {
        mesh: mesh.clone(),
        bc: bc.clone(),
        chi: 1.0f32,
        n0,
        t_end: 0.05,
        output_every: 0.05,
        dt_cap: None,
        elliptic_tol: 1e-5,
    };
    let out = simulate(&p).unwrap();
    assert!(out.monitor.min_n > 0.0);
    assert!(out.monitor.max_relative_mass_error < 1e-5);

    let settings = SteadySettings { elliptic_tol: 1e-5f32, mass_tol: 1e-5, ..SteadySettings::default() };
    let st = solve_stationary(&mesh, 1.0, &bc, &settings).unwrap();
    let reference = solve_stationary(
        &Mesh::<f64>::interval(1.0, 32).unwrap(),
        1.0,
        &BoundaryData::uniform(&Mesh::<f64>::interval(1.0, 32).unwrap(), 0.5, 1.0).unwrap(),
        &SteadySettings::default(),
    )
    .unwrap();
    assert!((st.alpha as f64 - reference.alpha).abs() < 1e-4);
}
