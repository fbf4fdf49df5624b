//! Linear-drift heat reference `θ₂` and its correction term `K`.
//!
//! `θ₂` is the solution of `θ_t − sθ_x = aθ_xx − 2sK` built from the odd
//! reflection of `Θ₀ − θ₋` about `x = 0`; it pins `θ₂(0, t) = θ₋` and serves as
//! a diagnostic reference for the nonlinear profile. Both integrals are
//! evaluated by the trapezoid rule on the Gaussian kernel support.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Norm};
use crate::params::{PhysParams, ProfileParams};
use crate::profile::{theta0_derivative, theta0_eval};
use crate::scalar::{count, lit, Scalar};

/// Truncation and resolution of the kernel quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuadSpec<T> {
    /// Radius of the integration window in units of `√(4at)`.
    pub half_width_sigmas: T,
    /// Trapezoid nodes per kernel integral.
    pub sub_nodes: usize,
}

impl<T: Scalar> Default for KernelQuadSpec<T> {
    fn default() -> Self {
        Self {
            half_width_sigmas: lit(10.0),
            sub_nodes: 2001,
        }
    }
}

impl<T: Scalar> KernelQuadSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width_sigmas >= lit(6.0)) {
            return Err(Error::InvalidQuadSpec(format!(
                "half_width_sigmas must be >= 6, got {}",
                self.half_width_sigmas
            )));
        }
        if self.sub_nodes < 101 || self.sub_nodes.is_multiple_of(2) {
            return Err(Error::InvalidQuadSpec(format!(
                "sub_nodes must be odd and >= 101, got {}",
                self.sub_nodes
            )));
        }
        Ok(())
    }
}

/// Trapezoid rule for `∫₀^∞ w(h) G(h − centre) dh`, `G` the heat kernel of
/// width `σ = √(4at)`, over the window `centre ± Wσ` clipped to `h ≥ 0`.
/// The nodes are placed relative to the centre so the result varies smoothly
/// with it.
fn kernel_integral<T: Scalar, W: Fn(T) -> T>(
    centre: T,
    sigma: T,
    spec: &KernelQuadSpec<T>,
    weight: W,
) -> T {
    let reach = spec.half_width_sigmas * sigma;
    let hi = centre + reach;
    if hi <= T::zero() {
        return T::zero();
    }
    let lo = (centre - reach).max(T::zero());
    let m = spec.sub_nodes - 1;
    let h = (hi - lo) / count(m);
    let norm = (T::PI() * sigma * sigma).sqrt().recip();
    let half = lit::<T>(0.5);
    let mut total = T::zero();
    for j in 0..=m {
        let z = if j == m { hi } else { lo + count::<T>(j) * h };
        let xi = (z - centre) / sigma;
        let term = weight(z) * (-xi * xi).exp();
        total = total + if j == 0 || j == m { half * term } else { term };
    }
    total * h * norm
}

/// `(θ₂(x, t), K(x, t))`.
pub fn eval_theta2_and_k<T: Scalar>(
    x: T,
    t: T,
    params: &PhysParams<T>,
    prof: &ProfileParams<T>,
    spec: &KernelQuadSpec<T>,
) -> Result<(T, T)> {
    if !(t > T::zero()) {
        return Err(Error::NonPositiveTime(t.to_f64().unwrap_or(f64::NAN)));
    }
    spec.validate()?;
    let sigma = (lit::<T>(4.0) * params.a() * t).sqrt();
    let shift = params.s() * t;
    let tm = params.theta_minus();
    let data = |h: T| theta0_eval(h, params, prof) - tm;
    let direct = kernel_integral(shift + x, sigma, spec, data);
    let image = kernel_integral(shift - x, sigma, spec, data);
    let k = kernel_integral(shift - x, sigma, spec, |z| {
        theta0_derivative(z, params, prof)
    });
    Ok((tm + (direct - image), k))
}

/// `θ₂` and `K` sampled at every grid node.
pub fn theta2_field<T: Scalar>(
    grid: &Grid<T>,
    t: T,
    params: &PhysParams<T>,
    prof: &ProfileParams<T>,
    spec: &KernelQuadSpec<T>,
) -> Result<(Field<T>, Field<T>)> {
    let pairs: Vec<(T, T)> = (0..grid.len())
        .into_par_iter()
        .map(|i| eval_theta2_and_k(grid.x(i), t, params, prof, spec))
        .collect::<Result<_>>()?;
    let (theta2, k) = pairs.into_iter().unzip();
    Ok((Field::from_vec(theta2), Field::from_vec(k)))
}

/// L² norm of `θ₂_t − sθ₂_x − aθ₂_xx + 2sK` at time `t`, using central
/// differences in time (step `dt`) and space over interior nodes.
pub fn theta2_residual<T: Scalar>(
    grid: &Grid<T>,
    t: T,
    dt: T,
    params: &PhysParams<T>,
    prof: &ProfileParams<T>,
    spec: &KernelQuadSpec<T>,
) -> Result<T> {
    if !(dt > T::zero()) {
        return Err(Error::NonPositiveTime(dt.to_f64().unwrap_or(f64::NAN)));
    }
    if !(t > dt) {
        return Err(Error::NonPositiveTime(
            (t - dt).to_f64().unwrap_or(f64::NAN),
        ));
    }
    let (before, _) = theta2_field(grid, t - dt, params, prof, spec)?;
    let (now, k) = theta2_field(grid, t, params, prof, spec)?;
    let (after, _) = theta2_field(grid, t + dt, params, prof, spec)?;
    let n = grid.cells();
    let dx = grid.dx();
    let two = lit::<T>(2.0);
    let s = params.s();
    let a = params.a();
    let mut res = vec![T::zero(); n + 1];
    for i in 1..n {
        let th_t = (after[i] - before[i]) / (two * dt);
        let th_x = (now[i + 1] - now[i - 1]) / (two * dx);
        let th_xx = (now[i + 1] - two * now[i] + now[i - 1]) / (dx * dx);
        res[i] = th_t - s * th_x - a * th_xx + two * s * k[i];
    }
    Ok(grid.norm(&Field::from_vec(res), Norm::L2Sq)?.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RawParams;

    fn defaults() -> (PhysParams<f64>, ProfileParams<f64>, KernelQuadSpec<f64>) {
        (
            PhysParams::build(RawParams::default()).unwrap(),
            ProfileParams::default(),
            KernelQuadSpec::default(),
        )
    }

    #[test]
    fn boundary_value_is_exact() {
        let (p, prof, spec) = defaults();
        for t in [0.1, 1.0, 10.0] {
            let (th, _) = eval_theta2_and_k(0.0, t, &p, &prof, &spec).unwrap();
            assert!((th - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn flat_data_gives_constant() {
        let p = PhysParams::build(RawParams {
            theta_plus: 1.0,
            ..RawParams::default()
        })
        .unwrap();
        let (_, prof, spec) = defaults();
        for &(x, t) in &[(0.0, 1.0), (3.0, 0.5), (50.0, 20.0)] {
            let (th, k) = eval_theta2_and_k(x, t, &p, &prof, &spec).unwrap();
            assert_eq!(th, 1.0);
            assert_eq!(k, 0.0);
        }
    }

    #[test]
    fn short_time_limit_recovers_initial_data() {
        let (p, prof, spec) = defaults();
        let (th, _) = eval_theta2_and_k(1.0, 1e-4, &p, &prof, &spec).unwrap();
        assert!((th - theta0_eval(1.0, &p, &prof)).abs() <= 1e-3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (p, prof, spec) = defaults();
        assert_eq!(
            eval_theta2_and_k(1.0, 0.0, &p, &prof, &spec).unwrap_err(),
            Error::NonPositiveTime(0.0)
        );
        let bad = KernelQuadSpec {
            half_width_sigmas: 10.0,
            sub_nodes: 100,
        };
        assert!(eval_theta2_and_k(1.0, 1.0, &p, &prof, &bad).is_err());
        let g = Grid::new(10.0, 20).unwrap();
        assert!(theta2_residual(&g, 0.1, 0.2, &p, &prof, &spec).is_err());
    }

    #[test]
    fn range_and_sign_of_k() {
        let (p, prof, spec) = defaults();
        for &t in &[0.05, 1.0, 10.0] {
            for i in 0..60 {
                let x = 0.5 * i as f64;
                let (th, k) = eval_theta2_and_k(x, t, &p, &prof, &spec).unwrap();
                assert!(
                    (-1.0 - 1e-12..=3.0 + 1e-12).contains(&th),
                    "θ₂({x},{t}) = {th}"
                );
                assert!(k >= 0.0);
            }
        }
    }
}
