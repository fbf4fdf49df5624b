//! Explicit finite-difference solver for the inflow problem of the full
//! compressible Navier-Stokes system in shifted Lagrangian coordinates:
//!
//! ```text
//! v_t − s v_x − u_x = 0
//! u_t − s u_x + (Rθ/v)_x = μ(u_x/v)_x
//! c_v(θ_t − s θ_x) + (Rθ/v) u_x = κ(θ_x/v)_x + μ u_x²/v
//! (v, u, θ)(0, t) = (v₋, u_b, θ₋)
//! ```
//!
//! The perturbation `(φ, ψ, ζ)` is obtained afterwards as the difference from
//! the profile at the same time.

use crate::error::{Error, Result};
use crate::grid::{DiffMode, Field, Grid};
use crate::params::PhysParams;
use crate::profile::ProfileState;
use crate::scalar::{lit, Scalar};

/// Fluid unknowns at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState<T> {
    pub t: T,
    pub v: Field<T>,
    pub u: Field<T>,
    pub theta: Field<T>,
}

/// Deviation `(v − V, u − U, θ − Θ)` from the profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation<T> {
    pub phi: Field<T>,
    pub psi: Field<T>,
    pub zeta: Field<T>,
}

/// Amplitudes and shape of the initial perturbation bump
/// `b(y) = (y/w)·e^{1 − y/w}`, `y = x − x_c` (zero for `x < x_c`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbSpec<T> {
    pub amp_phi: T,
    pub amp_psi: T,
    pub amp_zeta: T,
    pub width: T,
    pub center: T,
}

impl<T: Scalar> Default for PerturbSpec<T> {
    fn default() -> Self {
        Self {
            amp_phi: lit(0.05),
            amp_psi: lit(0.05),
            amp_zeta: lit(0.05),
            width: lit(5.0),
            center: T::zero(),
        }
    }
}

impl<T: Scalar> PerturbSpec<T> {
    pub fn zero() -> Self {
        Self {
            amp_phi: T::zero(),
            amp_psi: T::zero(),
            amp_zeta: T::zero(),
            ..Self::default()
        }
    }

    fn bump(&self, x: T) -> T {
        let y = x - self.center;
        if y <= T::zero() {
            return T::zero();
        }
        let r = y / self.width;
        r * (T::one() - r).exp()
    }
}

/// Time derivatives of `(v, u, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendencies<T> {
    pub v: Field<T>,
    pub u: Field<T>,
    pub theta: Field<T>,
}

/// Profile plus the perturbation described by `spec`. The velocity carries an
/// extra tail `(u_b − U(0, 0))·e^{−x/w}` so that `u(0) = u_b`.
pub fn initialize_state<T: Scalar>(
    grid: &Grid<T>,
    profile0: &ProfileState<T>,
    spec: &PerturbSpec<T>,
    params: &PhysParams<T>,
) -> Result<FluidState<T>> {
    if !(spec.width > T::zero()) {
        return Err(Error::InvalidProfileParameter {
            name: "width",
            reason: format!("must be > 0, got {}", spec.width),
        });
    }
    if spec.center < T::zero() {
        return Err(Error::InvalidProfileParameter {
            name: "center",
            reason: format!("must be >= 0, got {}", spec.center),
        });
    }
    grid.check(profile0.theta())?;
    let compat = params.u_b() - profile0.u()[0];
    let bump = grid.sample(|x| spec.bump(x));
    let tail = grid.sample(|x| (-x / spec.width).exp());
    let v = profile0.v().add(&bump.scale(spec.amp_phi));
    let u = profile0
        .u()
        .add(&bump.scale(spec.amp_psi))
        .add(&tail.scale(compat));
    let theta = profile0.theta().add(&bump.scale(spec.amp_zeta));
    let mut state = FluidState {
        t: profile0.t(),
        v,
        u,
        theta,
    };
    // only the inflow data is imposed here; the far end is left equal to the
    // profile so a zero perturbation is exactly zero
    state.v.values_mut()[0] = params.v_minus();
    state.u.values_mut()[0] = params.u_b();
    state.theta.values_mut()[0] = params.theta_minus();
    state.check_positive()?;
    Ok(state)
}

impl<T: Scalar> FluidState<T> {
    fn check_positive(&self) -> Result<()> {
        let t = self.t.to_f64().unwrap_or(f64::NAN);
        if let Some(node) = self.v.first_nonpositive() {
            return Err(Error::PositivityLoss {
                field: "v",
                node,
                t,
            });
        }
        if let Some(node) = self.theta.first_nonpositive() {
            return Err(Error::PositivityLoss {
                field: "theta",
                node,
                t,
            });
        }
        if let Some(node) = self.u.values().iter().position(|u| !u.is_finite()) {
            return Err(Error::PositivityLoss {
                field: "u",
                node,
                t,
            });
        }
        Ok(())
    }

    pub fn pressure(&self, params: &PhysParams<T>) -> Field<T> {
        self.theta.div(&self.v).scale(params.r())
    }
}

fn apply_bc<T: Scalar>(state: &mut FluidState<T>, params: &PhysParams<T>) {
    let n = state.v.len() - 1;
    for (field, left) in [
        (&mut state.v, params.v_minus()),
        (&mut state.u, params.u_b()),
        (&mut state.theta, params.theta_minus()),
    ] {
        let values = field.values_mut();
        values[0] = left;
        values[n] = values[n - 1];
    }
}

/// `(q_x / v)_x` in flux-difference form with arithmetic-mean interface `v`.
fn flux_difference<T: Scalar>(q: &[T], v: &[T], dx: T, out: &mut [T]) {
    let n = q.len() - 1;
    let half = lit::<T>(0.5);
    let flux = |i: usize| (q[i + 1] - q[i]) / (dx * half * (v[i] + v[i + 1]));
    let mut left = flux(0);
    for (i, slot) in out.iter_mut().enumerate().take(n).skip(1) {
        let right = flux(i);
        *slot = (right - left) / dx;
        left = right;
    }
}

/// Semi-discrete right-hand side; boundary nodes carry zero tendency.
pub fn compute_rhs<T: Scalar>(
    state: &FluidState<T>,
    params: &PhysParams<T>,
    grid: &Grid<T>,
) -> Result<Tendencies<T>> {
    grid.check(&state.v)?;
    grid.check(&state.u)?;
    grid.check(&state.theta)?;
    state.check_positive()?;
    let n = grid.cells();
    let dx = grid.dx();
    let two = lit::<T>(2.0);
    let s = params.s();
    let mu = params.mu();
    let kappa = params.kappa();
    let r = params.r();
    let heat_factor = (params.gamma() - T::one()) / r;
    let (v, u, th) = (state.v.values(), state.u.values(), state.theta.values());

    let mut visc = vec![T::zero(); n + 1];
    let mut cond = vec![T::zero(); n + 1];
    flux_difference(u, v, dx, &mut visc);
    flux_difference(th, v, dx, &mut cond);

    let mut dv = vec![T::zero(); n + 1];
    let mut du = vec![T::zero(); n + 1];
    let mut dth = vec![T::zero(); n + 1];
    for i in 1..n {
        let u_x = (u[i + 1] - u[i - 1]) / (two * dx);
        let p = r * th[i] / v[i];
        let p_x = (r * th[i + 1] / v[i + 1] - r * th[i - 1] / v[i - 1]) / (two * dx);
        dv[i] = s * (v[i] - v[i - 1]) / dx + u_x;
        du[i] = s * (u[i] - u[i - 1]) / dx - p_x + mu * visc[i];
        dth[i] = s * (th[i] - th[i - 1]) / dx
            + heat_factor * (-p * u_x + kappa * cond[i] + mu * u_x * u_x / v[i]);
    }
    Ok(Tendencies {
        v: Field::from_vec(dv),
        u: Field::from_vec(du),
        theta: Field::from_vec(dth),
    })
}

/// Time step from the advective and diffusive limits, scaled by `safety`.
pub fn cfl_dt<T: Scalar>(
    state: &FluidState<T>,
    params: &PhysParams<T>,
    grid: &Grid<T>,
    safety: T,
) -> Result<T> {
    if !(safety > T::zero() && safety <= T::one()) {
        return Err(Error::InvalidTimeStep(format!(
            "safety must lie in (0, 1], got {safety}"
        )));
    }
    let dx = grid.dx();
    let speed = params.s().abs()
        + state
            .u
            .values()
            .iter()
            .fold(T::zero(), |m, &u| m.max((u - params.u_b()).abs()));
    let v_min = state.v.min();
    if !(v_min > T::zero()) {
        return Err(Error::PositivityLoss {
            field: "v",
            node: state.v.first_nonpositive().unwrap_or(0),
            t: state.t.to_f64().unwrap_or(f64::NAN),
        });
    }
    let nu = (params.mu() / v_min)
        .max(params.kappa() * (params.gamma() - T::one()) / (params.r() * v_min))
        .max(params.a() / params.theta_min());
    let advective = dx / speed;
    let diffusive = dx * dx / (lit::<T>(2.0) * nu);
    Ok(safety * advective.min(diffusive))
}

/// One explicit midpoint step; boundary values are re-imposed after each stage.
pub fn advance<T: Scalar>(
    state: &FluidState<T>,
    dt: T,
    params: &PhysParams<T>,
    grid: &Grid<T>,
) -> Result<FluidState<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(format!("dt must be > 0, got {dt}")));
    }
    let half = lit::<T>(0.5);
    let stage = |base: &FluidState<T>, k: &Tendencies<T>, h: T, t: T| {
        let mut next = FluidState {
            t,
            v: base.v.add(&k.v.scale(h)),
            u: base.u.add(&k.u.scale(h)),
            theta: base.theta.add(&k.theta.scale(h)),
        };
        apply_bc(&mut next, params);
        next.check_positive().map(|_| next)
    };
    let k1 = compute_rhs(state, params, grid)?;
    let mid = stage(state, &k1, half * dt, state.t + half * dt)?;
    let k2 = compute_rhs(&mid, params, grid)?;
    stage(state, &k2, dt, state.t + dt)
}

/// `(v − V, u − U, θ − Θ)` at matching times.
pub fn extract_perturbation<T: Scalar>(
    state: &FluidState<T>,
    profile: &ProfileState<T>,
) -> Result<Perturbation<T>> {
    let scale = state.t.abs().max(T::one());
    if (state.t - profile.t()).abs() > lit::<T>(1e-9) * scale {
        return Err(Error::StateMismatch(format!(
            "fluid at t = {} but profile at t = {}",
            state.t,
            profile.t()
        )));
    }
    if state.v.len() != profile.v().len() {
        return Err(Error::StateMismatch(
            "states live on different grids".into(),
        ));
    }
    Ok(Perturbation {
        phi: state.v.sub(profile.v()),
        psi: state.u.sub(profile.u()),
        zeta: state.theta.sub(profile.theta()),
    })
}

impl<T: Scalar> Perturbation<T> {
    /// `max(sup|φ|, sup|ψ|, sup|ζ|)`
    pub fn sup(&self) -> T {
        self.phi
            .sup_abs()
            .max(self.psi.sup_abs())
            .max(self.zeta.sup_abs())
    }

    pub fn derivatives(&self, grid: &Grid<T>) -> Result<Perturbation<T>> {
        Ok(Perturbation {
            phi: grid.diff_first(&self.phi, DiffMode::Central)?,
            psi: grid.diff_first(&self.psi, DiffMode::Central)?,
            zeta: grid.diff_first(&self.zeta, DiffMode::Central)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ProfileParams, RawParams};
    use crate::profile::build_profile;

    fn flat() -> PhysParams<f64> {
        PhysParams::build(RawParams {
            theta_plus: 1.0,
            ..RawParams::default()
        })
        .unwrap()
    }

    #[test]
    fn constant_state_has_zero_tendency() {
        let p = flat();
        let g = Grid::<f64>::new(10.0, 100).unwrap();
        let st = FluidState {
            t: 0.0,
            v: g.constant(1.0),
            u: g.constant(1.0),
            theta: g.constant(1.0),
        };
        let k = compute_rhs(&st, &p, &g).unwrap();
        assert_eq!(k.v.sup_abs(), 0.0);
        assert_eq!(k.u.sup_abs(), 0.0);
        assert_eq!(k.theta.sup_abs(), 0.0);
    }

    #[test]
    fn cfl_matches_hand_arithmetic() {
        let p = PhysParams::build(RawParams::default()).unwrap();
        let g = Grid::<f64>::new(10.0, 200).unwrap();
        let st = FluidState {
            t: 0.0,
            v: g.constant(1.0),
            u: g.constant(1.0),
            theta: g.constant(1.0),
        };
        let dt = cfl_dt(&st, &p, &g, 0.4).unwrap();
        assert!((dt - 7.5e-4).abs() < 1e-15, "{dt}");
        let coarse = Grid::<f64>::new(10.0, 100).unwrap();
        let dt2 = cfl_dt(&st, &p, &coarse, 0.4).unwrap();
        // advective bound 0.04 is not active yet, so the step quadruples
        assert!((dt2 / dt - 4.0).abs() < 1e-12);
        assert!(cfl_dt(&st, &p, &g, 0.0).is_err());
        assert!(cfl_dt(&st, &p, &g, 1.5).is_err());
    }

    #[test]
    fn initial_perturbation_vanishes_at_boundary() {
        let p = PhysParams::build(RawParams::default()).unwrap();
        let g = Grid::<f64>::new(100.0, 1000).unwrap();
        let prof = build_profile(&g, &p, &ProfileParams::default()).unwrap();
        let spec = PerturbSpec {
            center: 2.0,
            ..PerturbSpec::default()
        };
        let st = initialize_state(&g, &prof, &spec, &p).unwrap();
        let pert = extract_perturbation(&st, &prof).unwrap();
        assert_eq!(pert.phi[0], 0.0);
        assert_eq!(pert.zeta[0], 0.0);
        assert_eq!(st.u[0], p.u_b());
        // ψ(0) = u_b − U(0) = −c·(ln Θ)_x(0), opposite in sign to θ₊ − θ₋
        assert!(pert.psi[0] < 0.0);
        assert!((pert.psi[0] + p.velocity_coefficient() * prof.ln_x()[0]).abs() < 1e-14);
        // peak of the bump sits at x_c + w
        let peak = (0..g.len())
            .max_by(|&a, &b| pert.zeta[a].total_cmp(&pert.zeta[b]))
            .unwrap();
        assert!((g.x(peak) - 7.0).abs() < 1e-9);
        assert!((pert.zeta[peak] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn oversized_perturbation_is_rejected() {
        let p = PhysParams::build(RawParams::default()).unwrap();
        let g = Grid::<f64>::new(100.0, 1000).unwrap();
        let prof = build_profile(&g, &p, &ProfileParams::default()).unwrap();
        let spec = PerturbSpec {
            amp_phi: -50.0,
            ..PerturbSpec::default()
        };
        let err = initialize_state(&g, &prof, &spec, &p).unwrap_err();
        assert!(matches!(err, Error::PositivityLoss { field: "v", .. }));
    }

    #[test]
    fn mismatched_times_rejected() {
        let p = PhysParams::build(RawParams::default()).unwrap();
        let g = Grid::<f64>::new(100.0, 1000).unwrap();
        let prof = build_profile(&g, &p, &ProfileParams::default()).unwrap();
        let mut st = initialize_state(&g, &prof, &PerturbSpec::zero(), &p).unwrap();
        st.t = 1.0;
        assert!(matches!(
            extract_perturbation(&st, &prof),
            Err(Error::StateMismatch(_))
        ));
    }

    #[test]
    fn viscous_heating_is_nonnegative() {
        let p = PhysParams::<f64>::build(RawParams::default()).unwrap();
        let g = Grid::<f64>::new(10.0, 100).unwrap();
        let st = FluidState {
            t: 0.0,
            v: g.constant(1.0),
            u: g.sample(|x| (x * 2.0).sin()),
            theta: g.constant(1.0),
        };
        // isolate μu_x²/v: same state with μ = 0 differs only by the heating term
        let inviscid = PhysParams::build(RawParams {
            mu: 1e-300,
            ..p.raw()
        })
        .unwrap();
        let with = compute_rhs(&st, &p, &g).unwrap();
        let without = compute_rhs(&st, &inviscid, &g).unwrap();
        for i in 1..g.cells() {
            assert!(with.theta[i] - without.theta[i] >= -1e-15);
        }
    }
}
