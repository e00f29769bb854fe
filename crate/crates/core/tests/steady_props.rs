use chemotaxis_core::grid::{BoundaryData, Mesh};
use chemotaxis_core::signal::{signal_residual, solve_signal};
use chemotaxis_core::steady::{alpha_bracket, mass_of_alpha, solve_semilinear, solve_stationary, SteadySettings};
use proptest::prelude::*;

/// max n∞ − min n∞ for γ = 0.5, g ≡ 1, m = 1 on the 64-cell unit interval, recorded on
/// the first verified run.
const NONCONSTANCY_SPREAD: f64 = 3.746_110_989_884_399e-2;

#[test]
fn semilinear_solution_is_a_signal_fixed_point() {
    let mesh = Mesh::<f64>::rectangle(1.0, 1.0, 10, 10).unwrap();
    let bc = BoundaryData::uniform(&mesh, 1.5, 2.0).unwrap();
    let tol = 1e-12;
    for alpha in [0.1, 1.0, 4.0] {
        let sol = solve_semilinear(&mesh, alpha, &bc, tol, 30).unwrap();
        let n = sol.c.map(|c| alpha * c.exp());
        let linear = solve_signal(&mesh, &n, &bc, tol).unwrap();
        let gap = sol.c.values.iter().zip(&linear.c.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 10.0 * tol, "alpha {alpha}: {gap}");
    }
}

#[test]
fn stationary_state_structure() {
    let mesh = Mesh::<f64>::interval(1.0, 64).unwrap();
    let bc = BoundaryData::uniform(&mesh, 0.5, 1.0).unwrap();
    let st = solve_stationary(&mesh, 1.0, &bc, &SteadySettings::default()).unwrap();
    let (lo, hi) = alpha_bracket(&mesh, 1.0, 0.5);
    assert!(lo <= st.alpha && st.alpha <= hi);
    for (n, c) in st.n.values.iter().zip(&st.c.values) {
        assert!(((n / c.exp()) - st.alpha).abs() <= 1e-12 * st.alpha);
        assert!(*n >= st.alpha);
        assert!((0.0..=0.5).contains(c));
    }
    assert!(signal_residual(&mesh, &st.c, &st.n, &bc).unwrap() <= 1e-12);
    assert!(st.mass_residual <= 1e-10);
    assert!(st.is_nonconstant());
    let spread = st.n.max() - st.n.min();
    assert!(spread > 1e-3);
    assert!((spread - NONCONSTANCY_SPREAD).abs() <= 1e-9 * NONCONSTANCY_SPREAD, "{spread:e}");
}

#[test]
fn per_side_rates_on_rectangle() {
    // no exchange through the bottom side, as at a water–ground interface
    let mesh = Mesh::<f64>::rectangle(2.0, 1.0, 16, 8).unwrap();
    let bc = BoundaryData::per_side(&mesh, 1.0, |s| if s.name() == "bottom" { 0.0 } else { 1.0 }).unwrap();
    let mut settings = SteadySettings::default();
    assert!(solve_stationary(&mesh, 1.0, &bc, &settings).is_err());
    let bc = BoundaryData::per_side(&mesh, 1.0, |s| if s.name() == "bottom" { 0.05 } else { 1.0 }).unwrap();
    settings.mass_tol = 1e-11;
    let st = solve_stationary(&mesh, 2.0, &bc, &settings).unwrap();
    assert!(st.mass_residual <= 2e-11);
    // the top row sees more oxygen than the bottom row
    let top: f64 = st.c.values[16 * 7..].iter().sum();
    let bottom: f64 = st.c.values[..16].iter().sum();
    assert!(top > bottom);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_of_alpha_bounds(alpha in 0.01f64..5.0, gamma in 0.0f64..2.0) {
        let mesh = Mesh::<f64>::interval(1.5, 24).unwrap();
        let bc = BoundaryData::uniform(&mesh, gamma, 1.0).unwrap();
        let m = mass_of_alpha(&mesh, alpha, &bc, &SteadySettings::default()).unwrap();
        prop_assert!(alpha * 1.5 <= m * (1.0 + 1e-12));
        prop_assert!(m <= alpha * gamma.exp() * 1.5 * (1.0 + 1e-12));
    }

    #[test]
    fn stationary_alpha_in_bracket(mass in 0.1f64..5.0, gamma in 0.0f64..2.0, g in 0.1f64..5.0) {
        let mesh = Mesh::<f64>::rectangle(1.0, 0.5, 8, 6).unwrap();
        let bc = BoundaryData::uniform(&mesh, gamma, g).unwrap();
        let st = solve_stationary(&mesh, mass, &bc, &SteadySettings::default()).unwrap();
        let (lo, hi) = alpha_bracket(&mesh, mass, gamma);
        prop_assert!(lo * (1.0 - 1e-12) <= st.alpha && st.alpha <= hi * (1.0 + 1e-12));
        prop_assert!(st.mass_residual <= 1e-10 * mass);
        prop_assert!(st.c.max() <= gamma + 1e-12);
    }
}
