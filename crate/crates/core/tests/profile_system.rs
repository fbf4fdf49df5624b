use cwlab_core::diagnostics::{profile_decay_record, run_profile_to};
use cwlab_core::grid::{DiffMode, Grid, Norm};
use cwlab_core::params::{PhysParams, ProfileParams, RawParams};
use cwlab_core::profile::{
    advance_profile, build_profile, monotonicity_breaks, profile_dt, profile_residual,
    ProfileResidual,
};

fn defaults() -> (PhysParams<f64>, ProfileParams<f64>) {
    (
        PhysParams::build(RawParams::default()).unwrap(),
        ProfileParams::default(),
    )
}

/// Residuals of the final step that lands on `t = 1`.
fn residual_at_one(n: usize) -> ProfileResidual<f64> {
    let (p, prof) = defaults();
    let g = Grid::new(100.0, n).unwrap();
    let dt = profile_dt(&p, &g, 0.4).unwrap();
    let prev = run_profile_to(&g, &p, &prof, 1.0 - dt, 0.4).unwrap();
    let next = advance_profile(&prev, 1.0 - prev.t(), &p, &g).unwrap();
    profile_residual(&prev, &next, &p, &g).unwrap()
}

#[test]
fn mass_row_is_the_rescaled_theta_row() {
    let (p, _) = defaults();
    let k = p.r() / p.p_plus();
    for n in [200, 400, 800] {
        let r = residual_at_one(n);
        assert!((r.mass - k * r.theta).abs() <= 1e-10, "n = {n}: {r:?}");
    }
}

#[test]
fn residuals_shrink_under_refinement() {
    let coarse = residual_at_one(400);
    let fine = residual_at_one(800);
    for (c, f) in [
        (coarse.mass, fine.mass),
        (coarse.momentum, fine.momentum),
        (coarse.energy, fine.energy),
    ] {
        assert!(f < c, "{coarse:?} -> {fine:?}");
    }
}

#[test]
fn pointwise_theta_residual_is_first_order_away_from_the_boundary() {
    // the upwind drift leaves s·dx/2·Θ_xx as the leading residual term
    let (p, prof) = defaults();
    let probe = |n: usize| {
        let g = Grid::new(100.0, n).unwrap();
        let dt = profile_dt(&p, &g, 0.4).unwrap();
        let prev = run_profile_to(&g, &p, &prof, 1.0 - dt, 0.4).unwrap();
        let next = advance_profile(&prev, 1.0 - prev.t(), &p, &g).unwrap();
        let h = next.t() - prev.t();
        let mid = next.theta().zip_map(prev.theta(), |a, b| 0.5 * (a + b));
        let mid = cwlab_core::profile::ProfileState::from_theta(&g, &p, 1.0, mid).unwrap();
        let th_x = g.diff_first(mid.theta(), DiffMode::Central).unwrap();
        let ln_x_x = g.diff_first(mid.ln_x(), DiffMode::Central).unwrap();
        let i = (4.0 / g.dx()).round() as usize;
        (next.theta()[i] - prev.theta()[i]) / h - p.s() * th_x[i] - p.a() * ln_x_x[i]
    };
    let r1 = probe(400);
    let r2 = probe(800);
    let order = (r1 / r2).abs().log2();
    assert!((0.9..=1.1).contains(&order), "order {order}");
}

#[test]
fn maximum_principle_and_monotonicity_over_a_run() {
    let (p, prof) = defaults();
    let g = Grid::new(100.0, 1000).unwrap();
    let dt = profile_dt(&p, &g, 0.4).unwrap();
    let mut st = build_profile(&g, &p, &prof).unwrap();
    for _ in 0..2000 {
        st = advance_profile(&st, dt, &p, &g).unwrap();
        assert!(st.theta().min() >= 1.0 - 1e-12);
        assert!(st.theta().max() <= 3.0 + 1e-12);
        assert_eq!(st.theta()[0], 1.0);
        assert_eq!(monotonicity_breaks(st.theta()), 0);
        assert!(st.pressure_defect(&p) <= 1e-14);
    }
    let vx = g.diff_first(st.v(), DiffMode::Central).unwrap();
    let thx = g.diff_first(st.theta(), DiffMode::Central).unwrap();
    assert!(vx.sup_abs() <= p.r() / p.p_plus() * thx.sup_abs() * (1.0 + 1e-12));
}

// ∫₀^∞ (Θ₀'/Θ₀)² dx and ∫₀^∞ Θ₀'² dx for the default data, by adaptive
// high-precision quadrature of the closed form
const LN_X_SQ_T0: f64 = 0.365_941_209_440_234_35;
const THETA_X_SQ_T0: f64 = 0.722_657_233_776_445_2;

#[test]
fn decay_record_at_t0_converges_to_the_analytic_oracle() {
    let (p, prof) = defaults();
    let record = |n: usize| {
        let g = Grid::new(400.0, n).unwrap();
        let st = build_profile(&g, &p, &prof).unwrap();
        profile_decay_record(&st, st.theta(), &g).unwrap()
    };
    let a = record(16_000);
    let b = record(32_000);
    let err_a = a.ln_x_sq - LN_X_SQ_T0;
    let err_b = b.ln_x_sq - LN_X_SQ_T0;
    let order = (err_a / err_b).log2();
    assert!((1.8..=2.2).contains(&order), "order {order}");
    let extrapolated = (4.0 * b.ln_x_sq - a.ln_x_sq) / 3.0;
    assert!(
        (extrapolated - LN_X_SQ_T0).abs() <= 2e-5,
        "{} {:?}",
        extrapolated - LN_X_SQ_T0,
        b
    );
    assert!((b.theta_x_sq - THETA_X_SQ_T0).abs() <= 1e-4);
    assert_eq!(b.theta_minus_theta2_sq, 0.0);
    // Θ₀'(0) = 1 and (ln Θ₀)_xx(0) = −2; the one-sided stencil at x = 0 is
    // second order, the copied second derivative only first order
    let dx = 400.0 / 32_000.0;
    assert!(
        (b.bdry_ln_x_sq - 1.0).abs() <= 5.0 * dx * dx,
        "{}",
        b.bdry_ln_x_sq
    );
    // the boundary node copies the three-point stencil at node 1
    let ln = |x: f64| cwlab_core::profile::theta0_eval(x, &p, &prof).ln();
    let stencil = (ln(2.0 * dx) - 2.0 * ln(dx) + ln(0.0)) / (dx * dx);
    assert!((b.bdry_ln_xx_sq - stencil * stencil).abs() <= 1e-9);
    // and that stencil is (ln Θ₀)_xx(dx) up to O(dx²), with (ln Θ₀)_xxx(0) = 27/4
    assert!((stencil + 2.0 - 6.75 * dx).abs() <= 20.0 * dx * dx);
}

#[test]
fn quadrature_of_the_oracle_on_the_grid() {
    // trapezoid of the exact integrand, independent of the difference stencils
    let (p, prof) = defaults();
    let g = Grid::new(400.0, 40_000).unwrap();
    let f = g.sample(|x| {
        let d = cwlab_core::profile::theta0_derivative(x, &p, &prof);
        d / cwlab_core::profile::theta0_eval(x, &p, &prof)
    });
    let q = g.norm(&f, Norm::L2Sq).unwrap();
    assert!((q - LN_X_SQ_T0).abs() <= 5e-5);
    // Euler-Maclaurin end correction; the integrand has slope 2·1·(−2) at x = 0
    // and is flat at x = L
    let corrected = q - g.dx().powi(2) / 12.0 * (0.0 - (-4.0));
    assert!(
        (corrected - LN_X_SQ_T0).abs() <= 1e-8,
        "{}",
        corrected - LN_X_SQ_T0
    );
}
