//! Measured quantities: decay norms of the profile, power-law fits, the
//! relative-entropy energy and its dissipation, the weighted Poincaré ratio,
//! oscillation, the vanishing-conductivity study and the `Θ₀` battery.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{DiffMode, Field, Grid, Norm};
use crate::ns_solver::{FluidState, Perturbation};
use crate::params::{KappaCoupling, PhysParams, ProfileParams};
use crate::profile::{
    advance_profile, build_profile, profile_dt, theta0_derivative, theta0_eval, ProfileState,
};
use crate::scalar::{count, lit, Scalar};

/// Relative entropy weight `Φ(z) = z − ln z − 1`.
pub fn entropy_phi<T: Scalar>(z: T) -> Result<T> {
    if !(z > T::zero()) {
        return Err(Error::NonPositiveArgument(z.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(z - z.ln() - T::one())
}

/// Squared norms of the profile derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRecord<T> {
    pub t: T,
    /// `‖(ln Θ)_x‖²`
    pub ln_x_sq: T,
    /// `‖(ln Θ)_xx‖²`
    pub ln_xx_sq: T,
    /// `‖∂³_x ln Θ‖²`
    pub ln_xxx_sq: T,
    /// `(ln Θ)_x(0, t)²`
    pub bdry_ln_x_sq: T,
    /// `(ln Θ)_xx(0, t)²`
    pub bdry_ln_xx_sq: T,
    /// `∫ Θ_x² dx`
    pub theta_x_sq: T,
    /// `‖Θ − θ₂‖²`
    pub theta_minus_theta2_sq: T,
}

pub fn profile_decay_record<T: Scalar>(
    profile: &ProfileState<T>,
    theta2: &Field<T>,
    grid: &Grid<T>,
) -> Result<DecayRecord<T>> {
    grid.check(theta2)?;
    let theta_x = grid.diff_first(profile.theta(), DiffMode::Central)?;
    Ok(DecayRecord {
        t: profile.t(),
        ln_x_sq: grid.norm(profile.ln_x(), Norm::L2Sq)?,
        ln_xx_sq: grid.norm(profile.ln_xx(), Norm::L2Sq)?,
        ln_xxx_sq: grid.norm(profile.ln_xxx(), Norm::L2Sq)?,
        bdry_ln_x_sq: profile.ln_x()[0].powi(2),
        bdry_ln_xx_sq: profile.ln_xx()[0].powi(2),
        theta_x_sq: grid.norm(&theta_x, Norm::L2Sq)?,
        theta_minus_theta2_sq: grid.norm(&profile.theta().sub(theta2), Norm::L2Sq)?,
    })
}

/// Power law `value ≈ amplitude·(1 + t)^exponent` fitted on `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    pub exponent: T,
    pub amplitude: T,
    pub t0: T,
    pub t1: T,
    /// Coefficient of determination of the log-log fit.
    pub goodness: T,
    pub samples: usize,
}

/// Least-squares line through `(ln(1 + t), ln value)` for samples in the window.
pub fn fit_power_law<T: Scalar>(series: &[(T, T)], window: (T, T)) -> Result<DecayFit<T>> {
    let (t0, t1) = window;
    if !(t0 >= T::one() && t1 > t0) {
        return Err(Error::InvalidWindow {
            t0: t0.to_f64().unwrap_or(f64::NAN),
            t1: t1.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &(t, value)) in series.iter().enumerate() {
        if t < t0 || t > t1 {
            continue;
        }
        if !(value > T::zero()) {
            return Err(Error::NonPositiveValue(i));
        }
        xs.push((T::one() + t).ln());
        ys.push(value.ln());
    }
    const NEEDED: usize = 8;
    if xs.len() < NEEDED {
        return Err(Error::InsufficientSamples {
            needed: NEEDED,
            got: xs.len(),
        });
    }
    let m = count::<T>(xs.len());
    let mean_x = xs.iter().copied().sum::<T>() / m;
    let mean_y = ys.iter().copied().sum::<T>() / m;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(&ys) {
        sxx = sxx + (x - mean_x) * (x - mean_x);
        sxy = sxy + (x - mean_x) * (y - mean_y);
        syy = syy + (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum::<T>();
    // a constant series is fitted exactly even though its variance vanishes
    let tiny = m * (lit::<T>(64.0) * T::epsilon() * mean_y.abs().max(T::one())).powi(2);
    let goodness = if syy <= tiny {
        T::one()
    } else {
        (T::one() - sse / syy).max(T::zero()).min(T::one())
    };
    Ok(DecayFit {
        exponent: slope,
        amplitude: intercept.exp(),
        t0,
        t1,
        goodness,
        samples: xs.len(),
    })
}

/// Energy functional and dissipation at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample<T> {
    pub t: T,
    /// `∫ ψ²/2 + RΘ·Φ(v/V) + c_vΘ·Φ(θ/Θ)`
    pub e: T,
    /// Same functional with `Rθ` in place of `RΘ` in the volume term.
    pub e_variant: T,
    /// `∫ μΘψ_x²/(vθ) + κΘζ_x²/(vθ²)`
    pub d: T,
    /// `‖(φ, ψ, ζ)‖_{H¹}`
    pub n: T,
}

/// Energy sample together with the accumulated dissipation `∫₀^t D dτ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord<T> {
    pub sample: EnergySample<T>,
    pub cumulative_d: T,
}

pub fn energy_and_dissipation<T: Scalar>(
    pert: &Perturbation<T>,
    fluid: &FluidState<T>,
    profile: &ProfileState<T>,
    params: &PhysParams<T>,
    grid: &Grid<T>,
) -> Result<EnergySample<T>> {
    for (name, f) in [
        ("v", &fluid.v),
        ("theta", &fluid.theta),
        ("V", profile.v()),
        ("Theta", profile.theta()),
    ] {
        grid.check(f)?;
        if let Some(node) = f.first_nonpositive() {
            return Err(Error::PositivityLoss {
                field: name,
                node,
                t: fluid.t.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let half = lit::<T>(0.5);
    let r = params.r();
    let cv = params.c_v();
    let deriv = pert.derivatives(grid)?;
    let len = grid.len();
    let mut energy = Vec::with_capacity(len);
    let mut energy_variant = Vec::with_capacity(len);
    let mut dissipation = Vec::with_capacity(len);
    for i in 0..len {
        let (v, th) = (fluid.v[i], fluid.theta[i]);
        let (vv, tt) = (profile.v()[i], profile.theta()[i]);
        let phi_v = entropy_phi(v / vv)?;
        let phi_t = entropy_phi(th / tt)?;
        let kinetic = half * pert.psi[i] * pert.psi[i];
        energy.push(kinetic + r * tt * phi_v + cv * tt * phi_t);
        energy_variant.push(kinetic + r * th * phi_v + cv * tt * phi_t);
        let psi_x = deriv.psi[i];
        let zeta_x = deriv.zeta[i];
        dissipation.push(
            params.mu() * tt * psi_x * psi_x / (v * th)
                + params.kappa() * tt * zeta_x * zeta_x / (v * th * th),
        );
    }
    let l2 = |f: &Field<T>| grid.norm(f, Norm::L2Sq);
    let n_sq = l2(&pert.phi)?
        + l2(&pert.psi)?
        + l2(&pert.zeta)?
        + l2(&deriv.phi)?
        + l2(&deriv.psi)?
        + l2(&deriv.zeta)?;
    Ok(EnergySample {
        t: fluid.t,
        e: grid.trapezoid(energy),
        e_variant: grid.trapezoid(energy_variant),
        d: grid.trapezoid(dissipation),
        n: n_sq.sqrt(),
    })
}

/// Running time integral of the dissipation (trapezoid rule in time).
#[derive(Debug, Clone, Default)]
pub struct EnergyLog<T> {
    records: Vec<EnergyRecord<T>>,
}

impl<T: Scalar> EnergyLog<T> {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, sample: EnergySample<T>) -> EnergyRecord<T> {
        let cumulative_d = match self.records.last() {
            Some(prev) => {
                prev.cumulative_d
                    + lit::<T>(0.5) * (sample.t - prev.sample.t) * (sample.d + prev.sample.d)
            }
            None => T::zero(),
        };
        let rec = EnergyRecord {
            sample,
            cumulative_d,
        };
        self.records.push(rec);
        rec
    }

    pub fn records(&self) -> &[EnergyRecord<T>] {
        &self.records
    }
}

/// Numerator `∫Θ_x²(φ² + ζ²)` and denominator `‖φ_x‖² + ‖ζ_x‖²` of the
/// weighted Poincaré ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareSample<T> {
    pub numerator: T,
    pub denominator: T,
}

impl<T: Scalar> PoincareSample<T> {
    /// `None` when the denominator vanishes.
    pub fn ratio(&self) -> Option<T> {
        (self.denominator > T::zero()).then(|| self.numerator / self.denominator)
    }
}

pub fn poincare_sample<T: Scalar>(
    pert: &Perturbation<T>,
    profile: &ProfileState<T>,
    grid: &Grid<T>,
) -> Result<PoincareSample<T>> {
    let theta_x = grid.diff_first(profile.theta(), DiffMode::Central)?;
    let weight = theta_x.mul(&theta_x);
    let numerator = grid.norm(&pert.phi, Norm::WeightedL2Sq(&weight))?
        + grid.norm(&pert.zeta, Norm::WeightedL2Sq(&weight))?;
    let phi_x = grid.diff_first(&pert.phi, DiffMode::Central)?;
    let zeta_x = grid.diff_first(&pert.zeta, DiffMode::Central)?;
    let denominator = grid.norm(&phi_x, Norm::L2Sq)? + grid.norm(&zeta_x, Norm::L2Sq)?;
    Ok(PoincareSample {
        numerator,
        denominator,
    })
}

/// Instantaneous ratio; `None` stands for the absent 0/0 value.
pub fn poincare_ratio<T: Scalar>(
    pert: &Perturbation<T>,
    profile: &ProfileState<T>,
    grid: &Grid<T>,
) -> Result<Option<T>> {
    Ok(poincare_sample(pert, profile, grid)?.ratio())
}

/// `sup θ − inf θ`
pub fn oscillation<T: Scalar>(theta: &Field<T>) -> T {
    if theta.is_empty() {
        return T::zero();
    }
    theta.max() - theta.min()
}

/// `max_f (sup|f|² − 2‖f‖‖f_x‖)` over the three perturbation components; the
/// interpolation inequality makes this nonpositive up to discretisation error.
pub fn interpolation_defect<T: Scalar>(pert: &Perturbation<T>, grid: &Grid<T>) -> Result<T> {
    let mut worst = T::neg_infinity();
    for f in [&pert.phi, &pert.psi, &pert.zeta] {
        let fx = grid.diff_first(f, DiffMode::Central)?;
        let l2 = grid.norm(f, Norm::L2Sq)?.sqrt();
        let l2x = grid.norm(&fx, Norm::L2Sq)?.sqrt();
        let sup = f.sup_abs();
        worst = worst.max(sup * sup - lit::<T>(2.0) * l2 * l2x);
    }
    Ok(worst)
}

/// One row of the vanishing-conductivity study.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaRow<T> {
    pub kappa: T,
    pub alpha: T,
    pub theta_l1: T,
    pub theta_l2: T,
    pub v_l1: T,
    /// `(p, ‖U − Ū‖_{L^p})`
    pub u_lp: Vec<(T, T)>,
}

/// Runs the profile up to `horizon` with a fixed step and returns the final state.
pub fn run_profile_to<T: Scalar>(
    grid: &Grid<T>,
    params: &PhysParams<T>,
    prof: &ProfileParams<T>,
    horizon: T,
    safety: T,
) -> Result<ProfileState<T>> {
    let dt = profile_dt(params, grid, safety)?;
    let mut state = build_profile(grid, params, prof)?;
    while state.t() < horizon {
        let step = dt.min(horizon - state.t());
        if step <= horizon * lit::<T>(1e-14) {
            break;
        }
        state = advance_profile(&state, step, params, grid)?;
    }
    Ok(state)
}

/// Distance of the profile from the travelling Riemann step at `t = horizon`
/// for each conductivity, with `alpha` tied to `kappa` by `coupling`.
/// Rows are returned in input order.
#[allow(clippy::too_many_arguments)]
pub fn kappa_limit_study<T: Scalar>(
    kappas: &[T],
    coupling: KappaCoupling<T>,
    horizon: T,
    p_list: &[T],
    base: &PhysParams<T>,
    prof: &ProfileParams<T>,
    grid: &Grid<T>,
    safety: T,
) -> Result<Vec<KappaRow<T>>> {
    let front = -base.s() * horizon;
    if front > lit::<T>(0.9) * grid.length() {
        return Err(Error::InvalidGrid(format!(
            "contact front at {front} leaves the inner 90% of the domain"
        )));
    }
    kappas
        .par_iter()
        .map(|&kappa| {
            let params = base.with_kappa(kappa)?;
            let alpha = coupling.alpha_for(kappa);
            let prof = prof.with_alpha(alpha)?;
            let state = run_profile_to(grid, &params, &prof, horizon, safety)?;
            let step = |minus: T, plus: T| grid.sample(|x| if x < front { minus } else { plus });
            let theta_bar = step(params.theta_minus(), params.theta_plus());
            let v_bar = step(params.v_minus(), params.v_plus());
            let u_bar = grid.constant(params.u_b());
            let dtheta = state.theta().sub(&theta_bar);
            let du = state.u().sub(&u_bar);
            let u_lp = p_list
                .iter()
                .map(|&p| grid.norm(&du, Norm::Lp(p)).map(|v| (p, v)))
                .collect::<Result<Vec<_>>>()?;
            Ok(KappaRow {
                kappa,
                alpha,
                theta_l1: grid.norm(&dtheta, Norm::L1)?,
                theta_l2: grid.norm(&dtheta, Norm::L2Sq)?.sqrt(),
                v_l1: grid.norm(&state.v().sub(&v_bar), Norm::L1)?,
                u_lp,
            })
        })
        .collect()
}

/// Scaled integrals of `Θ₀'` for one `(alpha, delta0)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepEntry<T> {
    pub alpha: T,
    pub delta0: T,
    /// `‖Θ₀'‖² / (αδ₀)`
    pub grad_sq_ratio: T,
    /// `∫ Θ₀'²(1 + αx) / (αδ₀)`
    pub weighted_ratio: T,
}

/// Results of the `Θ₀` property battery.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta0Report<T> {
    /// `‖Θ₀'‖_{L¹}` by exact cell integration plus the tail beyond `L`.
    pub grad_l1: T,
    /// Trapezoid value of `∫₀^L |Θ₀'|`, for comparison.
    pub grad_l1_trapezoid: T,
    /// `|grad_l1 − |θ₊ − θ₋||`
    pub grad_l1_defect: T,
    /// Smallest nodal value of `Θ₀'`.
    pub min_derivative: T,
    /// Largest relative excess of `Θ₀'` over the closed envelope with
    /// constant `(θ₊ − θ₋)e` (nonpositive when the envelope holds).
    pub envelope_excess: T,
    /// `‖Θ₀ − θ₊‖_{L¹(0, L)}`
    pub tail_l1: T,
    pub sweep: Vec<SweepEntry<T>>,
    pub grad_sq_span: T,
    pub weighted_span: T,
}

fn span<T: Scalar>(values: impl Iterator<Item = T> + Clone) -> T {
    let max = values.clone().fold(T::neg_infinity(), T::max);
    let min = values.fold(T::infinity(), T::min);
    max / min
}

pub fn theta0_checks<T: Scalar>(
    params: &PhysParams<T>,
    prof: &ProfileParams<T>,
    grid: &Grid<T>,
) -> Result<Theta0Report<T>> {
    let theta0 = grid.sample(|x| theta0_eval(x, params, prof));
    let deriv = grid.sample(|x| theta0_derivative(x, params, prof));
    // |Θ₀'| integrates exactly to |ΔΘ₀| on each cell since Θ₀ is monotone
    let cells: T = theta0
        .values()
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .sum();
    let grad_l1 = cells + (params.theta_plus() - theta0[grid.cells()]).abs();
    let grad_l1_trapezoid = grid.norm(&deriv, Norm::L1)?;

    let e = T::one().exp();
    let constant = params.theta_jump().abs() * e;
    let mut envelope_excess = T::neg_infinity();
    for (x, d) in grid.nodes().zip(deriv.values()) {
        let base = T::one() + prof.alpha() * x;
        let envelope = constant
            * prof.alpha()
            * prof.delta0()
            * base.powf(prof.delta0() - T::one())
            * (-base.powf(prof.delta0())).exp();
        if envelope > T::zero() {
            envelope_excess = envelope_excess.max((d.abs() - envelope) / envelope);
        }
    }

    let tail_l1 = grid.norm(&theta0.map(|v| v - params.theta_plus()), Norm::L1)?;

    let mut sweep = Vec::new();
    for &alpha in &[0.5, 1.0, 2.0] {
        for &delta0 in &[0.25, 0.5] {
            let (alpha, delta0) = (lit::<T>(alpha), lit::<T>(delta0));
            let p = ProfileParams::new(alpha, delta0)?;
            let d = grid.sample(|x| theta0_derivative(x, params, &p));
            let weight = grid.sample(|x| T::one() + alpha * x);
            let scale = alpha * delta0;
            sweep.push(SweepEntry {
                alpha,
                delta0,
                grad_sq_ratio: grid.norm(&d, Norm::L2Sq)? / scale,
                weighted_ratio: grid.norm(&d, Norm::WeightedL2Sq(&weight))? / scale,
            });
        }
    }
    let grad_sq_span = span(sweep.iter().map(|s| s.grad_sq_ratio));
    let weighted_span = span(sweep.iter().map(|s| s.weighted_ratio));

    Ok(Theta0Report {
        grad_l1,
        grad_l1_trapezoid,
        grad_l1_defect: (grad_l1 - params.theta_jump().abs()).abs(),
        min_derivative: deriv.min(),
        envelope_excess,
        tail_l1,
        sweep,
        grad_sq_span,
        weighted_span,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RawParams;

    #[test]
    fn entropy_weight_values() {
        assert_eq!(entropy_phi(1.0).unwrap(), 0.0);
        assert!(
            (entropy_phi(std::f64::consts::E).unwrap() - (std::f64::consts::E - 2.0)).abs() < 1e-15
        );
        assert!(entropy_phi(0.0).is_err());
        assert!(entropy_phi(-1.0).is_err());
    }

    #[test]
    fn entropy_weight_quadratic_lower_bound() {
        // Φ(z) = ∫₁^z (s − 1)/s ds ≥ (z − 1)²/(2 max(1, z)²), checked by dense sampling
        for &z in &[0.5, 2.0, 4.0] {
            let lower = (z - 1.0f64).powi(2) / (2.0 * (1.0f64.max(z)).powi(2));
            assert!(entropy_phi(z).unwrap() >= lower);
        }
        let mut z = 0.01;
        while z < 20.0 {
            let lower = (z - 1.0f64).powi(2) / (2.0 * (1.0f64.max(z)).powi(2));
            assert!(entropy_phi(z).unwrap() >= lower - 1e-15, "z = {z}");
            z += 0.01;
        }
    }

    #[test]
    fn fits_synthetic_power_laws() {
        let series = |c: f64, p: f64| -> Vec<(f64, f64)> {
            (0..=100)
                .map(|k| {
                    let t = 2.0 * k as f64;
                    (t, c * (1.0 + t).powf(p))
                })
                .collect()
        };
        let fit = fit_power_law(&series(1.0, -0.5), (20.0, 200.0)).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-6);
        let fit = fit_power_law(&series(3.0, -1.5), (20.0, 200.0)).unwrap();
        assert!((fit.exponent + 1.5).abs() < 1e-6);
        assert!((fit.amplitude - 3.0).abs() < 1e-6);
        assert!(fit.goodness > 0.999_999);
        let fit = fit_power_law(&series(2.0, 0.0), (20.0, 200.0)).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
        assert_eq!(fit.goodness, 1.0);
    }

    #[test]
    fn fit_preconditions() {
        let few: Vec<(f64, f64)> = (0..5).map(|k| (20.0 + k as f64, 1.0)).collect();
        assert_eq!(
            fit_power_law(&few, (20.0, 200.0)).unwrap_err(),
            Error::InsufficientSamples { needed: 8, got: 5 }
        );
        let mut bad: Vec<(f64, f64)> = (0..10).map(|k| (20.0 + k as f64, 1.0)).collect();
        bad[3].1 = 0.0;
        assert_eq!(
            fit_power_law(&bad, (20.0, 200.0)).unwrap_err(),
            Error::NonPositiveValue(3)
        );
        assert!(fit_power_law(&bad, (0.5, 200.0)).is_err());
    }

    #[test]
    fn oscillation_of_constant() {
        let g = Grid::<f64>::new(1.0, 10).unwrap();
        assert_eq!(oscillation(&g.constant(4.0)), 0.0);
    }

    #[test]
    fn poincare_absent_for_zero_perturbation() {
        let g = Grid::<f64>::new(10.0, 100).unwrap();
        let p = PhysParams::build(RawParams::default()).unwrap();
        let prof = build_profile(&g, &p, &ProfileParams::default()).unwrap();
        let zero = Perturbation {
            phi: g.zeros(),
            psi: g.zeros(),
            zeta: g.zeros(),
        };
        assert_eq!(poincare_ratio(&zero, &prof, &g).unwrap(), None);
    }

    #[test]
    fn kinetic_only_energy() {
        let g = Grid::<f64>::new(200.0, 2000).unwrap();
        let p = PhysParams::build(RawParams {
            theta_plus: 1.0,
            ..RawParams::default()
        })
        .unwrap();
        let prof = build_profile(&g, &p, &ProfileParams::default()).unwrap();
        let c = 0.1;
        let fluid = FluidState {
            t: 0.0,
            v: prof.v().clone(),
            u: prof.u().map(|u| u + c),
            theta: prof.theta().clone(),
        };
        let pert = crate::ns_solver::extract_perturbation(&fluid, &prof).unwrap();
        let e = energy_and_dissipation(&pert, &fluid, &prof, &p, &g).unwrap();
        assert!((e.e - c * c * 200.0 / 2.0).abs() < 1e-12);
        assert!(e.d.abs() < 1e-20);
    }

    #[test]
    fn cumulative_dissipation_is_trapezoid() {
        let mut log = EnergyLog::new();
        let s = |t: f64, d: f64| EnergySample {
            t,
            e: 0.0,
            e_variant: 0.0,
            d,
            n: 0.0,
        };
        log.push(s(0.0, 1.0));
        log.push(s(1.0, 3.0));
        let r = log.push(s(3.0, 3.0));
        assert_eq!(r.cumulative_d, 2.0 + 6.0);
    }
}
