use damlab::acceptance::GAD_THRESHOLDS;
use damlab::liouville::{gad_liouvillian, GadParams};
use damlab::metrology::default_x_grid;
use damlab::pointer::{
    evolve_joint, ideal_dam_state, ideal_pm_state, pointer_distribution, GadMeasurement, GaussianApparatus,
    MomentumGrid,
};
use damlab::qubit;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn evolution_keeps_hermiticity_trace_and_normalization(
        theta in 0.05f64..0.95, gamma in 1.0f64..40.0, log_gt in -4.0f64..3.0, sigma in 0.1f64..0.4,
    ) {
        let t = 10f64.powf(log_gt) / gamma;
        let app = GaussianApparatus::new(sigma).unwrap();
        let grid = MomentumGrid::for_apparatus(&app);
        let l = gad_liouvillian(&GadParams::new(theta, gamma).unwrap());
        let s = evolve_joint(&l, &qubit::projector(0), &app, t, &grid).unwrap();
        prop_assert!(s.hermiticity_defect() <= 1e-12);
        prop_assert!((s.total_trace() - 1.0).abs() <= 1e-8);
        let d = pointer_distribution(&s, &default_x_grid(theta, sigma).unwrap()).unwrap();
        prop_assert!((d.normalization() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn ideal_states_give_normalized_readings(theta in 0.05f64..0.95, sigma in 0.05f64..0.5) {
        let app = GaussianApparatus::new(sigma).unwrap();
        let grid = MomentumGrid::for_apparatus(&app);
        let rho = GadParams::new(theta, 1.0).unwrap().steady_state();
        let x = default_x_grid(theta, sigma).unwrap();
        let pm = ideal_pm_state(&rho, &qubit::projector(0), &app, &grid).unwrap();
        let dam = ideal_dam_state(&rho, theta, &app, &grid);
        for s in [&pm, &dam] {
            let d = pointer_distribution(s, &x).unwrap();
            prop_assert!((d.normalization() - 1.0).abs() <= 1e-6);
        }
    }
}

#[test]
fn doubling_momentum_nodes_leaves_measures_unchanged() {
    let coarse = GadMeasurement::new(0.5, 0.2).unwrap();
    let fine = coarse.clone().with_nodes(2 * MomentumGrid::DEFAULT_NODES - 1).unwrap();
    for (g, pm_inv, dam_t) in GAD_THRESHOLDS {
        for t in [1.0 / pm_inv, dam_t] {
            let (a, b) = (coarse.deviations(g, t).unwrap(), fine.deviations(g, t).unwrap());
            assert!((a.0 - b.0).abs() < 1e-3 && (a.1 - b.1).abs() < 1e-3, "γ={g} T={t}: {a:?} vs {b:?}");
        }
    }
}

#[test]
fn adiabatic_measure_decreases_with_coupling_time() {
    let m = GadMeasurement::new(0.5, 0.2).unwrap();
    for (g, _, _) in GAD_THRESHOLDS {
        let ts: Vec<f64> = (0..13).map(|k| 10f64.powf(-4.0 + 0.5 * k as f64)).collect();
        let devs: Vec<f64> = ts.iter().map(|&t| m.dam_deviation(g, t).unwrap()).collect();
        for w in devs.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "γ={g}: {devs:?}");
        }
    }
}
