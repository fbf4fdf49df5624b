//! Scenario drivers: each one fills tables, checks and metrics of a report.

use std::time::Instant;

use cwlab_core::diagnostics::{
    energy_and_dissipation, fit_power_law, interpolation_defect, kappa_limit_study, oscillation,
    poincare_sample, profile_decay_record, run_profile_to, theta0_checks, EnergyLog,
};
use cwlab_core::grid::{Field, Grid, Norm};
use cwlab_core::heat_reference::{
    eval_theta2_and_k, theta2_field, theta2_residual, KernelQuadSpec,
};
use cwlab_core::ns_solver::{advance, cfl_dt, extract_perturbation, initialize_state, FluidState};
use cwlab_core::params::{PhysParams, ProfileParams};
use cwlab_core::profile::{
    advance_profile, build_profile, monotonicity_breaks, profile_dt, profile_residual,
};
use cwlab_core::Result;

use crate::config::{RunConfig, Scenario};
use crate::output::{Check, RunReport, Table};

/// Report plus the tables collected so far; tables survive a solver error.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub report: RunReport,
    pub tables: Vec<Table>,
}

impl Outcome {
    fn table(&mut self, file: &str, header: &[&str]) -> usize {
        self.tables.push(Table::new(file, header));
        self.tables.len() - 1
    }

    fn check(&mut self, c: Check) {
        self.report.checks.push(c);
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.report.metrics.push((name.to_string(), value));
    }
}

pub fn run_scenario(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let params = cfg.params();
    let mut out = Outcome::default();
    out.report.scenario = cfg.scenario.name().to_string();
    out.report.derived = vec![
        ("s".into(), params.s()),
        ("a".into(), params.a()),
        ("p_plus".into(), params.p_plus()),
        ("v_plus".into(), params.v_plus()),
        ("c_v".into(), params.c_v()),
        ("velocity_coefficient".into(), params.velocity_coefficient()),
        ("dx".into(), cfg.length / cfg.cells as f64),
    ];
    let result = match cfg.scenario {
        Scenario::ProfileDecay => profile_decay(cfg, &mut out),
        Scenario::Stability => stability(cfg, &mut out),
        Scenario::KappaLimit => kappa_limit(cfg, &mut out),
        Scenario::VerifyProfile => verify_profile(cfg, &mut out),
        Scenario::Theta0Checks => theta0(cfg, &mut out),
    };
    if let Err(e) = result {
        log::error!("{} stopped: {e}", cfg.scenario);
        out.report.error = Some(e.to_string());
    }
    out.report.wall_clock_seconds = start.elapsed().as_secs_f64();
    out
}

/// `0, Δ, 2Δ, …` up to the horizon, which is always included.
pub fn sample_times(horizon: f64, interval: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    let mut k = 1usize;
    loop {
        let t = k as f64 * interval;
        if t >= horizon * (1.0 - 1e-12) {
            break;
        }
        times.push(t);
        k += 1;
    }
    times.push(horizon);
    times
}

fn lands_on(t: f64, target: f64) -> bool {
    (target - t).abs() <= 1e-12 * target.abs().max(1.0)
}

fn profile_decay(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let p = cfg.params();
    let prof = cfg.profile_params();
    let grid = Grid::new(cfg.length, cfg.cells)?;
    let spec = KernelQuadSpec::default();
    let dt = profile_dt(&p, &grid, cfg.cfl_safety)?;
    let mut st = build_profile(&grid, &p, &prof)?;
    out.metric("f_discrepancy_t0", st.f_discrepancy());

    let decay = out.table(
        "decay.csv",
        &[
            "t",
            "ln_x_sq",
            "ln_xx_sq",
            "ln_xxx_sq",
            "bdry_ln_x_sq",
            "bdry_ln_xx_sq",
            "theta_x_sq",
            "theta_minus_theta2_sq",
        ],
    );
    let mut series: [Vec<(f64, f64)>; 5] = Default::default();
    let mut breaks = 0usize;
    let mut range_excess = f64::NEG_INFINITY;
    let mut record_min = f64::INFINITY;
    for ts in sample_times(cfg.horizon, cfg.sample_interval) {
        while !lands_on(st.t(), ts) {
            st = advance_profile(&st, dt.min(ts - st.t()), &p, &grid)?;
            breaks += monotonicity_breaks(st.theta());
            range_excess = range_excess
                .max(p.theta_min() - st.theta().min())
                .max(st.theta().max() - p.theta_max());
        }
        let theta2 = if ts == 0.0 {
            st.theta().clone()
        } else {
            theta2_field(&grid, st.t(), &p, &prof, &spec)?.0
        };
        let rec = profile_decay_record(&st, &theta2, &grid)?;
        let row = [
            ts,
            rec.ln_x_sq,
            rec.ln_xx_sq,
            rec.ln_xxx_sq,
            rec.bdry_ln_x_sq,
            rec.bdry_ln_xx_sq,
            rec.theta_x_sq,
            rec.theta_minus_theta2_sq,
        ];
        out.tables[decay].push_nums(&row);
        record_min = row[1..].iter().copied().fold(record_min, f64::min);
        for (s, v) in series.iter_mut().zip([
            rec.ln_x_sq,
            rec.ln_xx_sq,
            rec.ln_xxx_sq,
            rec.theta_minus_theta2_sq,
            rec.bdry_ln_x_sq,
        ]) {
            s.push((ts, v));
        }
        log::debug!("profile t = {ts}: ‖(ln Θ)_x‖² = {}", rec.ln_x_sq);
    }
    breaks += monotonicity_breaks(st.theta());

    let profile = out.table("profile.csv", &["x", "Theta", "V", "U", "F", "G"]);
    for (i, x) in grid.nodes().enumerate() {
        out.tables[profile].push_nums(&[
            x,
            st.theta()[i],
            st.v()[i],
            st.u()[i],
            st.f()[i],
            st.g()[i],
        ]);
    }

    let window = (cfg.fit_t0, cfg.fit_t1.min(cfg.horizon));
    let fits = out.table(
        "fits.csv",
        &[
            "quantity",
            "exponent",
            "amplitude",
            "goodness",
            "t0",
            "t1",
            "samples",
            "bound",
        ],
    );
    let specs = [
        ("ln_x_sq", -0.45),
        ("ln_xx_sq", -1.2),
        ("ln_xxx_sq", -2.0),
        ("theta_minus_theta2_sq", 0.6),
    ];
    for ((name, bound), s) in specs.iter().zip(&series) {
        let fit = fit_power_law(s, window)?;
        out.tables[fits].push(vec![
            name.to_string(),
            format!("{:?}", fit.exponent),
            format!("{:?}", fit.amplitude),
            format!("{:?}", fit.goodness),
            format!("{:?}", fit.t0),
            format!("{:?}", fit.t1),
            fit.samples.to_string(),
            format!("{bound:?}"),
        ]);
        out.check(Check::at_most(
            &format!("exponent_{name}"),
            fit.exponent,
            *bound,
        ));
        out.check(Check::at_least(
            &format!("goodness_{name}"),
            fit.goodness,
            0.95,
        ));
    }
    // the boundary flux is time-integrable when its power law decays faster than 1/t
    let bdry = fit_power_law(&series[4], window)?;
    out.check(Check::below("exponent_bdry_ln_x_sq", bdry.exponent, -1.0));
    let flux_integral: f64 = series[4]
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[1].1 + w[0].1))
        .sum();
    out.metric("bdry_ln_x_sq_time_integral", flux_integral);

    out.check(Check::at_most("monotonicity_breaks", breaks as f64, 0.0));
    out.check(Check::at_most(
        "maximum_principle_excess",
        range_excess.max(0.0),
        1e-12,
    ));
    out.check(Check::at_least("decay_records_min", record_min, 0.0));
    let start = grid.len() - (grid.len() / 10).max(1);
    let deviation = st.theta().values()[start..]
        .iter()
        .fold(0.0f64, |m, &v| m.max((v - p.theta_plus()).abs()));
    out.check(Check::at_most(
        "layer_far_deviation",
        deviation,
        1e-3 * p.theta_jump().abs(),
    ));
    out.metric("f_discrepancy_final", st.f_discrepancy());
    Ok(())
}

/// Largest perturbation magnitude away from the inflow node.
fn sup_interior(fluid: &FluidState<f64>, pr: &cwlab_core::ProfileState) -> Result<f64> {
    let pert = extract_perturbation(fluid, pr)?;
    let tail = |f: &Field<f64>| f.values()[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(tail(&pert.phi).max(tail(&pert.psi)).max(tail(&pert.zeta)))
}

/// Time integrals of the Poincaré numerator and denominator.
struct CoupledRun {
    numerator: f64,
    denominator: f64,
}

impl CoupledRun {
    fn ratio(&self) -> Option<f64> {
        (self.denominator > 0.0).then(|| self.numerator / self.denominator)
    }
}

/// Co-evolves fluid and profile to the horizon. With `record` the energy log,
/// snapshot and stability checks go into `out`.
fn coupled_run(
    cfg: &RunConfig,
    prof: &ProfileParams<f64>,
    out: &mut Outcome,
    record: bool,
) -> Result<CoupledRun> {
    let p = cfg.params();
    let grid = Grid::new(cfg.length, cfg.cells)?;
    let profile_step = profile_dt(&p, &grid, cfg.cfl_safety)?;
    let mut pr = build_profile(&grid, &p, prof)?;
    let mut fl = initialize_state(&grid, &pr, &cfg.perturb, &p)?;

    let energy = record.then(|| {
        out.table(
            "energy.csv",
            &[
                "t",
                "E",
                "E_variant",
                "D",
                "cumulative_D",
                "E_plus_cumulative_D",
                "N",
                "sup",
                "sup_interior",
                "psi0",
                "osc",
                "poincare_num_integral",
                "poincare_den_integral",
            ],
        )
    });

    let mut log = EnergyLog::new();
    let pert = extract_perturbation(&fl, &pr)?;
    let mut poincare = poincare_sample(&pert, &pr, &grid)?;
    let (mut num, mut den) = (0.0, 0.0);
    let e0 = energy_and_dissipation(&pert, &fl, &pr, &p, &grid)?;
    log.push(e0);
    let sup0 = sup_interior(&fl, &pr)?;
    let mut max_budget = e0.e;
    let mut osc_margin = f64::INFINITY;
    let mut defect = f64::NEG_INFINITY;
    let mut min_positive = f64::INFINITY;
    let mut sup_series = Vec::new();
    if record {
        out.metric("E0", e0.e);
        out.metric("sup_initial_full", pert.sup());
        out.metric("sup_initial_interior", sup0);
        let bump = cfg
            .perturb
            .amp_phi
            .abs()
            .max(cfg.perturb.amp_psi.abs())
            .max(cfg.perturb.amp_zeta.abs());
        out.metric("sup_initial_bump", bump);
        let l2 = |f: &Field<f64>| grid.norm(f, Norm::L2Sq);
        let eta0 = (l2(&pert.phi)? + l2(&pert.psi)? + l2(&pert.zeta)?).sqrt();
        out.metric("eta0_l2", eta0);
        out.metric("N0", e0.n);
    }

    for ts in sample_times(cfg.horizon, cfg.sample_interval) {
        while !lands_on(fl.t, ts) {
            let dt = cfl_dt(&fl, &p, &grid, cfg.cfl_safety)?
                .min(profile_step)
                .min(ts - fl.t);
            fl = advance(&fl, dt, &p, &grid)?;
            pr = advance_profile(&pr, dt, &p, &grid)?;
            let pert = extract_perturbation(&fl, &pr)?;
            let next = poincare_sample(&pert, &pr, &grid)?;
            num += 0.5 * dt * (poincare.numerator + next.numerator);
            den += 0.5 * dt * (poincare.denominator + next.denominator);
            poincare = next;
            if record {
                let rec = log.push(energy_and_dissipation(&pert, &fl, &pr, &p, &grid)?);
                max_budget = max_budget.max(rec.sample.e + rec.cumulative_d);
            }
        }
        if let Some(idx) = energy {
            let pert = extract_perturbation(&fl, &pr)?;
            let rec = *log.records().last().expect("log starts with t = 0");
            let sup_in = sup_interior(&fl, &pr)?;
            let osc = oscillation(&fl.theta);
            let zeta_sup = pert.zeta.sup_abs();
            osc_margin = osc_margin.min(osc - (p.theta_jump().abs() - zeta_sup));
            defect = defect.max(interpolation_defect(&pert, &grid)?);
            min_positive = min_positive.min(fl.v.min()).min(fl.theta.min());
            sup_series.push((ts, sup_in));
            out.tables[idx].push_nums(&[
                ts,
                rec.sample.e,
                rec.sample.e_variant,
                rec.sample.d,
                rec.cumulative_d,
                rec.sample.e + rec.cumulative_d,
                rec.sample.n,
                pert.sup(),
                sup_in,
                pert.psi[0],
                osc,
                num,
                den,
            ]);
            log::debug!("stability t = {ts}: E = {}, sup = {sup_in}", rec.sample.e);
        }
    }

    if record {
        let pert = extract_perturbation(&fl, &pr)?;
        let snap = out.table("fluid.csv", &["x", "v", "u", "theta", "phi", "psi", "zeta"]);
        for (i, x) in grid.nodes().enumerate() {
            out.tables[snap].push_nums(&[
                x,
                fl.v[i],
                fl.u[i],
                fl.theta[i],
                pert.phi[i],
                pert.psi[i],
                pert.zeta[i],
            ]);
        }
        out.check(Check::above("positivity_min", min_positive, 0.0));
        let sup_t = sup_series.last().map_or(0.0, |s| s.1);
        // with no perturbation at all there is nothing to decay
        let ratio = if sup0 > 0.0 { sup_t / sup0 } else { 0.0 };
        out.check(Check::at_most("sup_interior_ratio", ratio, 0.5));
        out.check(Check::at_most(
            "energy_budget_max",
            max_budget,
            2.0 * (e0.e + 0.1),
        ));
        out.check(Check::at_least("oscillation_margin", osc_margin, -1e-12));
        let trend: Vec<(f64, f64)> = sup_series
            .iter()
            .filter(|(t, s)| *t > 0.0 && *s > 0.0)
            .map(|&(t, s)| (t, s.ln()))
            .collect();
        out.check(Check::at_most(
            "sup_interior_trend_slope",
            ls_slope(&trend),
            0.0,
        ));
        out.metric("interpolation_defect_max", defect);
        out.metric("f_discrepancy_final", pr.f_discrepancy());
    }
    Ok(CoupledRun {
        numerator: num,
        denominator: den,
    })
}

/// Least-squares slope; zero for fewer than two points.
fn ls_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn stability(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let prof = cfg.profile_params();
    let poincare = out.table(
        "poincare.csv",
        &[
            "delta0",
            "numerator_integral",
            "denominator_integral",
            "ratio",
        ],
    );
    let base = coupled_run(cfg, &prof, out, true)?;
    let push = |out: &mut Outcome, delta0: f64, run: &CoupledRun| {
        out.tables[poincare].push_nums(&[
            delta0,
            run.numerator,
            run.denominator,
            run.ratio().unwrap_or(f64::NAN),
        ]);
    };
    push(out, cfg.delta0, &base);
    // an identically zero perturbation has no ratio at all, which is not a failure
    match base.ratio() {
        Some(r) => out.check(Check::below("poincare_ratio_finite", r, f64::INFINITY)),
        None => log::warn!("Poincaré ratio is 0/0; no finiteness check"),
    }

    let half = prof.with_delta0(0.5 * cfg.delta0)?;
    let halved = coupled_run(cfg, &half, out, false)?;
    push(out, 0.5 * cfg.delta0, &halved);
    match (base.ratio(), halved.ratio()) {
        (Some(r), Some(h)) => {
            out.metric("poincare_ratio", r);
            out.metric("poincare_ratio_half_delta0", h);
            out.check(Check::below("poincare_ratio_change_on_halving", h - r, 0.0));
        }
        _ => log::warn!("Poincaré ratio undefined; skipping the δ₀ comparison"),
    }
    Ok(())
}

fn kappa_limit(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let p = cfg.params();
    let prof = cfg.profile_params();
    let grid = Grid::new(cfg.length, cfg.cells)?;
    let rows = kappa_limit_study(
        &cfg.kappa_list,
        cfg.coupling,
        cfg.horizon,
        &cfg.p_list,
        &p,
        &prof,
        &grid,
        cfg.cfl_safety,
    )?;
    let u_cols: Vec<String> = cfg.p_list.iter().map(|q| format!("u_l{q}")).collect();
    let mut header = vec!["kappa", "alpha", "theta_l1", "theta_l2", "v_l1"];
    header.extend(u_cols.iter().map(String::as_str));
    let idx = out.table("kappa.csv", &header);
    for r in &rows {
        let mut row = vec![r.kappa, r.alpha, r.theta_l1, r.theta_l2, r.v_l1];
        row.extend(r.u_lp.iter().map(|&(_, v)| v));
        out.tables[idx].push_nums(&row);
    }
    let increases = rows
        .windows(2)
        .filter(|w| !(w[1].theta_l1 < w[0].theta_l1))
        .count();
    out.check(Check::at_most(
        "kappa_theta_l1_non_decreases",
        increases as f64,
        0.0,
    ));
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        out.check(Check::below(
            "kappa_theta_l1_final_over_first",
            last.theta_l1 / first.theta_l1,
            0.5,
        ));
    }
    Ok(())
}

const RESIDUAL_GRIDS: [usize; 3] = [200, 400, 800];
const THETA2_GRIDS: [usize; 3] = [100, 200, 400];

fn verify_profile(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let p = cfg.params();
    let prof = cfg.profile_params();
    let idx = out.table("verify.csv", &["study", "n", "quantity", "value"]);
    let row = |out: &mut Outcome, study: &str, n: usize, q: &str, v: f64| {
        out.tables[idx].push(vec![
            study.into(),
            n.to_string(),
            q.into(),
            format!("{v:?}"),
        ]);
    };

    // residuals of the last step that lands on the horizon
    let mut residuals = Vec::new();
    let mut mass_identity = 0.0f64;
    let k = p.r() / p.p_plus();
    for n in RESIDUAL_GRIDS {
        let g = Grid::new(cfg.length, n)?;
        let dt = profile_dt(&p, &g, cfg.cfl_safety)?;
        let prev = run_profile_to(&g, &p, &prof, cfg.horizon - dt, cfg.cfl_safety)?;
        let next = advance_profile(&prev, cfg.horizon - prev.t(), &p, &g)?;
        let r = profile_residual(&prev, &next, &p, &g)?;
        for (q, v) in [
            ("mass", r.mass),
            ("momentum", r.momentum),
            ("energy", r.energy),
            ("theta", r.theta),
        ] {
            row(out, "profile_residual", n, q, v);
        }
        mass_identity = mass_identity.max((r.mass - k * r.theta).abs());
        residuals.push(r);
    }
    let (c, f) = (residuals[0], residuals[2]);
    for (q, a, b) in [
        ("mass", c.mass, f.mass),
        ("momentum", c.momentum, f.momentum),
        ("energy", c.energy, f.energy),
    ] {
        out.check(Check::at_least(
            &format!("residual_order_{q}"),
            (a / b).log2() / 2.0,
            1.0,
        ));
    }
    out.check(Check::at_most("mass_identity_defect", mass_identity, 1e-10));

    let spec = KernelQuadSpec::default();
    let mut boundary = 0.0f64;
    for t in [0.1, 1.0, 10.0] {
        let (v, _) = eval_theta2_and_k(0.0, t, &p, &prof, &spec)?;
        boundary = boundary.max((v - p.theta_minus()).abs());
    }
    out.check(Check::at_most("theta2_boundary_defect", boundary, 1e-10));
    let mut res = Vec::new();
    for n in THETA2_GRIDS {
        let g = Grid::new(20.0, n)?;
        let r = theta2_residual(&g, 1.0, g.dx(), &p, &prof, &spec)?;
        row(out, "theta2_residual", n, "l2", r);
        res.push(r);
    }
    let order = res
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min);
    out.check(Check::at_least("theta2_residual_order", order, 1.5));
    let g = Grid::new(40.0, 400)?;
    let r = theta2_residual(&g, 1.0, g.dx(), &p, &prof, &spec)?;
    row(out, "theta2_residual_dx0.1", 400, "l2", r);
    out.check(Check::at_most("theta2_residual_dx0.1", r, 1e-3));
    Ok(())
}

fn theta0(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let p: PhysParams<f64> = cfg.params();
    let grid = Grid::new(cfg.length, cfg.cells)?;
    let rep = theta0_checks(&p, &cfg.profile_params(), &grid)?;
    let idx = out.table(
        "theta0.csv",
        &["alpha", "delta0", "grad_sq_ratio", "weighted_ratio"],
    );
    for e in &rep.sweep {
        out.tables[idx].push_nums(&[e.alpha, e.delta0, e.grad_sq_ratio, e.weighted_ratio]);
    }
    out.metric("grad_l1", rep.grad_l1);
    out.metric("grad_l1_trapezoid", rep.grad_l1_trapezoid);
    out.metric("tail_l1", rep.tail_l1);
    out.check(Check::at_most("grad_l1_defect", rep.grad_l1_defect, 1e-8));
    out.check(Check::above("min_derivative", rep.min_derivative, 0.0));
    out.check(Check::at_most(
        "envelope_excess",
        rep.envelope_excess,
        1e-12,
    ));
    out.check(Check::below("tail_l1_finite", rep.tail_l1, f64::INFINITY));
    out.check(Check::below("grad_sq_span", rep.grad_sq_span, 10.0));
    out.check(Check::below("weighted_span", rep.weighted_span, 10.0));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_times_include_the_horizon() {
        assert_eq!(sample_times(5.0, 2.0), vec![0.0, 2.0, 4.0, 5.0]);
        assert_eq!(sample_times(4.0, 2.0), vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        assert!((ls_slope(&pts) + 0.5).abs() < 1e-14);
        assert_eq!(ls_slope(&pts[..1]), 0.0);
    }
}
