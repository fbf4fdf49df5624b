//! The numerics are generic; make sure a short f32 run behaves.

use cwlab_core::diagnostics::{energy_and_dissipation, profile_decay_record};
use cwlab_core::grid::Grid;
use cwlab_core::ns_solver::{advance, cfl_dt, extract_perturbation, initialize_state, PerturbSpec};
use cwlab_core::params::{PhysParams, ProfileParams, RawParams};
use cwlab_core::profile::{advance_profile, build_profile, profile_dt};

#[test]
fn short_coupled_run_in_f32() {
    let p = PhysParams::<f32>::build(RawParams::default()).unwrap();
    let prof = ProfileParams::<f32>::default();
    let g = Grid::<f32>::new(50.0, 250).unwrap();
    let mut pr = build_profile(&g, &p, &prof).unwrap();
    let mut fl = initialize_state(&g, &pr, &PerturbSpec::default(), &p).unwrap();
    for _ in 0..200 {
        let dt = cfl_dt(&fl, &p, &g, 0.4)
            .unwrap()
            .min(profile_dt(&p, &g, 0.4).unwrap());
        fl = advance(&fl, dt, &p, &g).unwrap();
        pr = advance_profile(&pr, dt, &p, &g).unwrap();
    }
    assert!(pr.theta().min() >= 1.0 - 1e-5 && pr.theta().max() <= 3.0 + 1e-5);
    let pert = extract_perturbation(&fl, &pr).unwrap();
    let e = energy_and_dissipation(&pert, &fl, &pr, &p, &g).unwrap();
    assert!(e.e.is_finite() && e.e >= 0.0);
    let rec = profile_decay_record(&pr, pr.theta(), &g).unwrap();
    assert!(rec.ln_x_sq > 0.0 && rec.ln_x_sq.is_finite());
    assert!(pert.sup() < 1.0);
}
