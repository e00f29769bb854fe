use chemotaxis_core::analysis::{
    check_energy_inequality, chi_check, detect_convergence, estimate_trace_constant, k_of, poincare_check, trace_ratio,
    validate_trace_constant, weakened_energy_rhs, KInputs, TraceSettings,
};
use chemotaxis_core::grid::{BoundaryData, Mesh};
use chemotaxis_core::signal::solve_signal;
use chemotaxis_core::steady::{solve_stationary, SteadySettings};
use chemotaxis_core::transport::Problem;
use proptest::prelude::*;

fn inputs(gamma: f64, mass: f64, gnorm: f64) -> KInputs<f64> {
    KInputs { mass, gnorm, gamma, lambda1: std::f64::consts::PI.powi(2), c_trace: 2f64.sqrt(), volume: 1.0 }
}

#[test]
fn poincare_constant_is_sharp_on_random_fields() {
    for mesh in [Mesh::<f64>::interval(1.0, 64).unwrap(), Mesh::<f64>::rectangle(2.0, 1.0, 16, 8).unwrap()] {
        let worst = poincare_check(&mesh, 100, 7);
        assert!(worst <= 1.05, "{worst}");
        assert!(worst > 0.0);
    }
}

#[test]
fn energy_inequality_for_perturbed_densities() {
    let mesh = Mesh::<f64>::interval(1.0, 48).unwrap();
    let gamma = 0.8;
    let bc = BoundaryData::uniform(&mesh, gamma, 1.0).unwrap();
    let st = solve_stationary(&mesh, 1.0, &bc, &SteadySettings::default()).unwrap();
    for k in 1..6 {
        let n = mesh.sample(|x| (k as f64 * 3.0 * x[0]).sin() * 0.3 + 1.0);
        let c = solve_signal(&mesh, &n, &bc, 1e-12).unwrap().c;
        let check = check_energy_inequality(&mesh, &n, &c, &st, gamma).unwrap();
        assert!(check.holds, "{check:?}");
        let weak = weakened_energy_rhs(&mesh, &n, &st, gamma, 1.0).unwrap();
        assert!(weak >= check.rhs);
    }
    // at the stationary state both sides vanish
    let check = check_energy_inequality(&mesh, &st.n, &st.c, &st, gamma).unwrap();
    assert!(check.holds && check.lhs < 1e-20 && check.rhs == 0.0);
}

#[test]
fn chi_rescaling_is_exact() {
    let mesh = Mesh::<f64>::interval(1.0, 32).unwrap();
    let bc = BoundaryData::uniform(&mesh, 0.6, 1.0).unwrap();
    let n0 = mesh.sample(|x| 0.5 + (-(x[0] - 0.4f64).powi(2) / 0.02).exp());
    let problem = Problem { mesh, bc, chi: 1.0, n0, t_end: 0.1, output_every: 0.02, dt_cap: None, elliptic_tol: 1e-12 };
    for chi in [0.5, 1.0, 2.0] {
        let check = chi_check(&problem, chi).unwrap();
        assert!(check.passed, "chi {chi}: {check:?}");
    }
    assert!(chi_check(&problem, 0.0).is_err());
}

#[test]
fn trace_constant_generalizes() {
    let settings = TraceSettings::default();
    let interval = Mesh::<f64>::interval(1.0, 64).unwrap();
    let c_hat = estimate_trace_constant(&interval, &settings).unwrap();
    assert!(c_hat >= 2f64.sqrt() * (1.0 - 1e-12));
    let fresh = validate_trace_constant(&interval, c_hat, 2.0, 1.0 / 3.0, 1000, 9001).unwrap();
    assert!(fresh <= 1.05, "{fresh}");
    // constants: |∂Ω|^{1/2} / |Ω|^{1/2}
    let one = interval.field(1.0);
    assert!((trace_ratio(&interval, &one, 2.0, 1.0 / 3.0) - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn convergence_rate_of_exponential_decay() {
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.02).collect();
    let e: Vec<f64> = times.iter().map(|t| 0.3 * (-19.7392 * t).exp()).collect();
    let conv = detect_convergence(&times, &e, 0.5).unwrap();
    assert!((conv.rate + 19.7392).abs() < 1e-9);
    assert!(!conv.converged);
    let long: Vec<f64> = times.iter().map(|t| t * 10.0).collect();
    let e: Vec<f64> = long.iter().map(|t| 0.3 * (-19.7392 * t).exp()).collect();
    let settled = detect_convergence(&long, &e, 0.5).unwrap();
    assert!(settled.converged);
    // the tail sits below the floor, so the rate comes from the decaying part
    assert!((settled.rate + 19.7392).abs() < 1e-9);
}

proptest! {
    #[test]
    fn k_strictly_decreasing_in_gamma(g1 in 0.0f64..3.0, dg in 1e-3f64..1.0, mass in 0.1f64..10.0, gnorm in 0.1f64..10.0) {
        let a = k_of(&inputs(g1, mass, gnorm));
        let b = k_of(&inputs(g1 + dg, mass, gnorm));
        prop_assert!(b < a);
    }

    #[test]
    fn k_at_zero_gamma_is_half_lambda(mass in 0.1f64..10.0, gnorm in 0.0f64..10.0) {
        let k = k_of(&inputs(0.0, mass, gnorm));
        prop_assert!((k - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-14);
    }
}
