//! The viscous contact-wave profile `(V, U, Θ)`.
//!
//! `Θ` solves the drift/nonlinear-diffusion problem
//!
//! ```text
//! Θ_t − sΘ_x = a (ln Θ)_xx,   Θ(0, t) = θ₋,   Θ(x, 0) = Θ₀(x) → θ₊,
//! ```
//!
//! and the remaining components are slaved to it: `V = RΘ/p₊` keeps the
//! pressure constant and `U = κ(γ−1)/(γR)·(ln Θ)_x + u_b`. The triple solves
//! the Navier-Stokes system up to the sources `F` (momentum) and `G` (energy).

use crate::error::{Error, Result};
use crate::grid::{DiffMode, Field, Grid, Norm};
use crate::params::{PhysParams, ProfileParams};
use crate::scalar::{lit, Scalar};

/// Initial temperature `θ₊ − (θ₊ − θ₋)·exp{1 − (1 + αx)^δ₀}`.
pub fn theta0_eval<T: Scalar>(x: T, params: &PhysParams<T>, prof: &ProfileParams<T>) -> T {
    let stretched = (T::one() + prof.alpha() * x).powf(prof.delta0());
    params.theta_plus() - params.theta_jump() * (T::one() - stretched).exp()
}

/// Closed-form `Θ₀'(x) = (θ₊−θ₋)·αδ₀(1+αx)^{δ₀−1}·exp{1 − (1+αx)^δ₀}`.
pub fn theta0_derivative<T: Scalar>(x: T, params: &PhysParams<T>, prof: &ProfileParams<T>) -> T {
    let base = T::one() + prof.alpha() * x;
    let d = prof.delta0();
    params.theta_jump()
        * prof.alpha()
        * d
        * base.powf(d - T::one())
        * (T::one() - base.powf(d)).exp()
}

/// Profile snapshot at time `t`, with cached derivatives of `ln Θ` and the
/// source terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileState<T> {
    t: T,
    theta: Field<T>,
    v: Field<T>,
    u: Field<T>,
    ln_x: Field<T>,
    ln_xx: Field<T>,
    ln_xxx: Field<T>,
    f: Field<T>,
    g: Field<T>,
    f_discrepancy: T,
}

/// Output of [`sources_fg`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sources<T> {
    /// Momentum source from the definitional form with `(ln Θ)_xt` eliminated.
    pub f: Field<T>,
    /// Momentum source from the closed-form coefficient.
    pub f_closed_form: Field<T>,
    pub g: Field<T>,
    /// L² norm of `f − f_closed_form`.
    pub f_discrepancy: T,
}

/// L² residual norms of the profile system over interior nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileResidual<T> {
    /// `V_t − sV_x − U_x`
    pub mass: T,
    /// `U_t − sU_x + P_x − μ(U_x/V)_x − F`
    pub momentum: T,
    /// `c_v(Θ_t − sΘ_x) + P U_x − κ(Θ_x/V)_x − μU_x²/V − G`
    pub energy: T,
    /// `Θ_t − sΘ_x − a((ln Θ)_x)_x` with the same stencils as the other rows.
    pub theta: T,
}

impl<T: Scalar> ProfileState<T> {
    /// Derives `V`, `U`, the `ln Θ` derivatives and the sources from `Θ`.
    pub fn from_theta(
        grid: &Grid<T>,
        params: &PhysParams<T>,
        t: T,
        theta: Field<T>,
    ) -> Result<Self> {
        grid.check(&theta)?;
        if let Some(node) = theta.first_nonpositive() {
            return Err(Error::PositivityLoss {
                field: "Theta",
                node,
                t: t.to_f64().unwrap_or(f64::NAN),
            });
        }
        let volume_factor = params.r() / params.p_plus();
        let mut v = theta.scale(volume_factor);
        // Θ(0) = θ₋ so V(0) = v₋; pin it rather than trust the rounding of R/p₊·θ₋
        if theta[0] == params.theta_minus() {
            v.values_mut()[0] = params.v_minus();
        }
        let ln = theta.map(T::ln);
        let ln_x = grid.diff_first(&ln, DiffMode::Central)?;
        let ln_xx = grid.diff_second(&ln)?;
        let ln_xxx = grid.diff_first(&ln_xx, DiffMode::Central)?;
        let c = params.velocity_coefficient();
        let u = ln_x.map(|d| c * d + params.u_b());
        let sources = compute_sources(grid, params, &theta, &v, &u, &ln_xx)?;
        Ok(Self {
            t,
            theta,
            v,
            u,
            ln_x,
            ln_xx,
            ln_xxx,
            f: sources.f,
            g: sources.g,
            f_discrepancy: sources.f_discrepancy,
        })
    }

    pub fn t(&self) -> T {
        self.t
    }
    pub fn theta(&self) -> &Field<T> {
        &self.theta
    }
    pub fn v(&self) -> &Field<T> {
        &self.v
    }
    pub fn u(&self) -> &Field<T> {
        &self.u
    }
    /// `(ln Θ)_x`
    pub fn ln_x(&self) -> &Field<T> {
        &self.ln_x
    }
    /// `(ln Θ)_xx`
    pub fn ln_xx(&self) -> &Field<T> {
        &self.ln_xx
    }
    /// `∂³_x ln Θ`
    pub fn ln_xxx(&self) -> &Field<T> {
        &self.ln_xxx
    }
    pub fn f(&self) -> &Field<T> {
        &self.f
    }
    pub fn g(&self) -> &Field<T> {
        &self.g
    }
    pub fn f_discrepancy(&self) -> T {
        self.f_discrepancy
    }

    /// `max_i |R Θ_i / V_i − p₊|`
    pub fn pressure_defect(&self, params: &PhysParams<T>) -> T {
        self.theta
            .values()
            .iter()
            .zip(self.v.values())
            .fold(T::zero(), |m, (&th, &v)| {
                m.max((params.r() * th / v - params.p_plus()).abs())
            })
    }
}

/// Samples `Θ₀` on the grid and derives the rest of the profile at `t = 0`.
pub fn build_profile<T: Scalar>(
    grid: &Grid<T>,
    params: &PhysParams<T>,
    prof: &ProfileParams<T>,
) -> Result<ProfileState<T>> {
    let mut theta = grid.sample(|x| theta0_eval(x, params, prof));
    theta.values_mut()[0] = params.theta_minus();
    ProfileState::from_theta(grid, params, T::zero(), theta)
}

/// Largest stable step of the explicit profile scheme, scaled by `safety`.
pub fn profile_dt<T: Scalar>(params: &PhysParams<T>, grid: &Grid<T>, safety: T) -> Result<T> {
    if !(safety > T::zero() && safety <= T::one()) {
        return Err(Error::InvalidTimeStep(format!(
            "safety must lie in (0, 1], got {safety}"
        )));
    }
    let dx = grid.dx();
    let advective = dx / params.s().abs();
    let diffusive = dx * dx / (lit::<T>(2.0) * params.a() / params.theta_min());
    Ok(safety * advective.min(diffusive))
}

/// `sΘ_x + a(ln Θ)_xx` with upwind drift; zero at the boundary nodes.
fn theta_tendency<T: Scalar>(grid: &Grid<T>, params: &PhysParams<T>, theta: &[T]) -> Vec<T> {
    let n = grid.cells();
    let dx = grid.dx();
    let dx2 = dx * dx;
    let two = lit::<T>(2.0);
    let s = params.s();
    let a = params.a();
    let ln: Vec<T> = theta.iter().map(|v| v.ln()).collect();
    let mut out = vec![T::zero(); n + 1];
    for i in 1..n {
        let drift = s * (theta[i] - theta[i - 1]) / dx;
        let diffusion = a * (ln[i + 1] - two * ln[i] + ln[i - 1]) / dx2;
        out[i] = drift + diffusion;
    }
    out
}

fn apply_profile_bc<T: Scalar>(params: &PhysParams<T>, theta: &mut [T]) {
    let n = theta.len() - 1;
    theta[0] = params.theta_minus();
    theta[n] = theta[n - 1];
}

fn check_positive<T: Scalar>(theta: &[T], t: T) -> Result<()> {
    match theta.iter().position(|&v| !(v > T::zero())) {
        Some(node) => Err(Error::PositivityLoss {
            field: "Theta",
            node,
            t: t.to_f64().unwrap_or(f64::NAN),
        }),
        None => Ok(()),
    }
}

/// One explicit midpoint step of the profile equation.
pub fn advance_profile<T: Scalar>(
    state: &ProfileState<T>,
    dt: T,
    params: &PhysParams<T>,
    grid: &Grid<T>,
) -> Result<ProfileState<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(format!("dt must be > 0, got {dt}")));
    }
    let half = lit::<T>(0.5);
    let theta = state.theta.values();
    let k1 = theta_tendency(grid, params, theta);
    let mut mid: Vec<T> = theta
        .iter()
        .zip(&k1)
        .map(|(&v, &k)| v + half * dt * k)
        .collect();
    apply_profile_bc(params, &mut mid);
    check_positive(&mid, state.t + half * dt)?;
    let k2 = theta_tendency(grid, params, &mid);
    let mut next: Vec<T> = theta.iter().zip(&k2).map(|(&v, &k)| v + dt * k).collect();
    apply_profile_bc(params, &mut next);
    check_positive(&next, state.t + dt)?;
    ProfileState::from_theta(grid, params, state.t + dt, Field::from_vec(next))
}

/// Warning-level check that the layer has not reached the truncation
/// boundary: `max |Θ − θ₊|` over the last tenth of the domain must stay below
/// `1e−3·|θ₊ − θ₋|`.
pub fn check_layer<T: Scalar>(
    state: &ProfileState<T>,
    params: &PhysParams<T>,
    grid: &Grid<T>,
) -> Result<()> {
    let start = grid.len() - (grid.len() / 10).max(1);
    let deviation = state.theta.values()[start..]
        .iter()
        .fold(T::zero(), |m, &v| m.max((v - params.theta_plus()).abs()));
    let limit = lit::<T>(1e-3) * params.theta_jump().abs();
    if deviation > limit {
        return Err(Error::LayerNearBoundary {
            deviation: deviation.to_f64().unwrap_or(f64::NAN),
            limit: limit.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Number of strict sign changes in the forward differences of `f`.
pub fn monotonicity_breaks<T: Scalar>(f: &Field<T>) -> usize {
    let v = f.values();
    let mut last = T::zero();
    let mut breaks = 0;
    for w in v.windows(2) {
        let d = w[1] - w[0];
        if d == T::zero() {
            continue;
        }
        if last != T::zero() && (d > T::zero()) != (last > T::zero()) {
            breaks += 1;
        }
        last = d;
    }
    breaks
}

fn compute_sources<T: Scalar>(
    grid: &Grid<T>,
    params: &PhysParams<T>,
    theta: &Field<T>,
    v: &Field<T>,
    u: &Field<T>,
    ln_xx: &Field<T>,
) -> Result<Sources<T>> {
    let mu = params.mu();
    let u_x = grid.diff_first(u, DiffMode::Central)?;
    let g = u_x.zip_map(v, |ux, v| -mu * ux * ux / v);

    let over_theta = grid.diff_first(&ln_xx.div(theta), DiffMode::Central)?;
    let over_v = grid.diff_first(&ln_xx.div(v), DiffMode::Central)?;
    let c = params.velocity_coefficient();
    let a = params.a();
    // (ln Θ)_xt − s(ln Θ)_xx = a((ln Θ)_xx/Θ)_x along solutions of the profile equation
    let f = over_theta.zip_map(&over_v, |ot, ov| c * (a * ot - mu * ov));

    let closed = (params.kappa() * a * (params.gamma() - T::one())
        - mu * params.p_plus() * params.gamma())
        / (params.r() * params.gamma());
    let f_closed_form = over_theta.scale(closed);
    let f_discrepancy = grid.norm(&f.sub(&f_closed_form), Norm::L2Sq)?.sqrt();
    Ok(Sources {
        f,
        f_closed_form,
        g,
        f_discrepancy,
    })
}

/// Recomputes `F` (both forms) and `G` from the state's caches.
pub fn sources_fg<T: Scalar>(
    state: &ProfileState<T>,
    params: &PhysParams<T>,
    grid: &Grid<T>,
) -> Result<Sources<T>> {
    compute_sources(grid, params, &state.theta, &state.v, &state.u, &state.ln_xx)
}

/// Interior mask used by residual norms: nodes `2..=n−2`.
fn interior_l2<T: Scalar>(grid: &Grid<T>, f: &Field<T>) -> Result<T> {
    let n = grid.cells();
    let masked = Field::from_vec(
        f.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| if i >= 2 && i + 2 <= n { v } else { T::zero() })
            .collect(),
    );
    Ok(grid.norm(&masked, Norm::L2Sq)?.sqrt())
}

/// Discrete residuals of the profile system between two consecutive states,
/// with time differences `(next − prev)/dt` and central spatial stencils at
/// the state built from the averaged temperature.
pub fn profile_residual<T: Scalar>(
    prev: &ProfileState<T>,
    next: &ProfileState<T>,
    params: &PhysParams<T>,
    grid: &Grid<T>,
) -> Result<ProfileResidual<T>> {
    let dt = next.t - prev.t;
    if !(dt > T::zero()) {
        return Err(Error::StateMismatch(format!(
            "next.t − prev.t must be positive, got {dt}"
        )));
    }
    if prev.theta.len() != next.theta.len() {
        return Err(Error::StateMismatch(
            "states live on different grids".into(),
        ));
    }
    grid.check(&prev.theta)?;
    let half = lit::<T>(0.5);
    let theta_mid = prev.theta.zip_map(&next.theta, |a, b| half * (a + b));
    let mid = ProfileState::from_theta(grid, params, prev.t + half * dt, theta_mid)?;

    let d = |f: &Field<T>| grid.diff_first(f, DiffMode::Central);
    let rate = |a: &Field<T>, b: &Field<T>| b.sub(a).scale(dt.recip());
    let s = params.s();
    let mu = params.mu();

    let theta_t = rate(&prev.theta, &next.theta);
    let v_t = rate(&prev.v, &next.v);
    let u_t = rate(&prev.u, &next.u);
    let theta_x = d(&mid.theta)?;
    let v_x = d(&mid.v)?;
    let u_x = d(&mid.u)?;
    let ln_x_x = d(&mid.ln_x)?;

    let theta_res = theta_t
        .sub(&theta_x.scale(s))
        .sub(&ln_x_x.scale(params.a()));
    let mass = v_t.sub(&v_x.scale(s)).sub(&u_x);

    let pressure = mid.theta.div(&mid.v).scale(params.r());
    let p_x = d(&pressure)?;
    let visc = d(&u_x.div(&mid.v))?.scale(mu);
    let momentum = u_t
        .sub(&d(&mid.u)?.scale(s))
        .add(&p_x)
        .sub(&visc)
        .sub(&mid.f);

    let heat = d(&theta_x.div(&mid.v))?.scale(params.kappa());
    let heating = u_x.zip_map(&mid.v, |ux, v| mu * ux * ux / v);
    let energy = theta_t
        .sub(&theta_x.scale(s))
        .scale(params.c_v())
        .add(&pressure.mul(&u_x))
        .sub(&heat)
        .sub(&heating)
        .sub(&mid.g);

    Ok(ProfileResidual {
        mass: interior_l2(grid, &mass)?,
        momentum: interior_l2(grid, &momentum)?,
        energy: interior_l2(grid, &energy)?,
        theta: interior_l2(grid, &theta_res)?,
    })
}
