use rtp_core::attack::{AttackSpec, AttackStart};
use rtp_core::controller::{ControllerConfig, PriceBounds};
use rtp_core::models::{calibrate_demand_scale, LinearSupply};
use rtp_core::sim::{
    classify, run, trajectory_mean_h, Baseline, DemandSide, MeanHWindow, Outcome, SimConfig,
};

fn region(eta: f64, attack: AttackSpec, horizon: usize) -> SimConfig {
    let supply = LinearSupply::new(152.0, 4503.0).unwrap();
    let w = calibrate_demand_scale(&supply, 2000.0, 20.0, -0.8).unwrap();
    SimConfig {
        period_hours: 0.5,
        horizon,
        supply,
        demand: DemandSide::Aggregate(w),
        baseline: Baseline::Constant(2000.0),
        controller: ControllerConfig::adaptive(eta, PriceBounds::new(1.0, 200.0).unwrap()).unwrap(),
        attack,
        initial_price: 21.0,
        seed: 0,
        feeder_rating: None,
    }
}

fn auto() -> AttackStart {
    AttackStart::AfterConvergence {
        margin: 0,
        fallback: None,
    }
}

#[test]
fn deadbeat_gain_settles_in_two_periods() {
    let t = run(&region(0.5, AttackSpec::none(), 10)).unwrap();
    let r = &t.records[2];
    assert!(r.error.abs() < 1e-6 * r.supply_scheduled);
    assert!((r.lambda - 20.0).abs() < 2e-5);
    assert_eq!(classify(&t), Outcome::Converged);
}

#[test]
fn high_gain_overshoots_with_alternating_sign() {
    let t = run(&region(0.8, AttackSpec::none(), 60)).unwrap();
    let dev: Vec<f64> = t.records.iter().take(8).map(|r| r.lambda - 20.0).collect();
    assert!(dev[1] < 0.0);
    for w in dev[1..].windows(2) {
        assert!(w[0] * w[1] < 0.0, "{dev:?}");
        assert!(w[1].abs() < w[0].abs());
    }
    assert_eq!(classify(&t), Outcome::Converged);
}

#[test]
fn scaling_running_example() {
    let low = AttackSpec::scaling(1.0, 0.57, AttackStart::Period(0)).unwrap();
    let high = AttackSpec::scaling(1.0, 0.59, AttackStart::Period(0)).unwrap();
    let t57 = run(&region(0.8, low.clone(), 96)).unwrap();
    let t59 = run(&region(0.8, high.clone(), 96)).unwrap();
    let h57 = trajectory_mean_h(&t57, MeanHWindow::WholeRun).unwrap();
    let h59 = trajectory_mean_h(&t59, MeanHWindow::WholeRun).unwrap();
    println!("mean h: {h57} {h59}");
    assert!((h57 - 0.850).abs() < 0.005);
    assert!((h59 - 0.862).abs() < 0.005);
    let long57 = classify(&run(&region(0.8, low, 4000)).unwrap());
    let long59 = classify(&run(&region(0.8, high, 4000)).unwrap());
    println!("{long57:?} {long59:?}");
    assert!(!long57.is_convergent());
    assert!(long59.is_convergent());
}

#[test]
fn delay_running_example() {
    let t12 = run(&region(
        0.2,
        AttackSpec::delay(1.0, 12, auto()).unwrap(),
        96,
    ))
    .unwrap();
    let t11 = run(&region(
        0.2,
        AttackSpec::delay(1.0, 11, auto()).unwrap(),
        96,
    ))
    .unwrap();
    let h12 = trajectory_mean_h(&t12, MeanHWindow::WholeRun).unwrap();
    let h11 = trajectory_mean_h(&t11, MeanHWindow::WholeRun).unwrap();
    println!("launch {:?} mean h: {h12} {h11}", t12.attack_start);
    assert!((h12 - 1.455390).abs() < 5e-4);
    assert!((h11 - 1.455335).abs() < 5e-4);
    let long12 = classify(
        &run(&region(
            0.2,
            AttackSpec::delay(1.0, 12, auto()).unwrap(),
            4000,
        ))
        .unwrap(),
    );
    let long11 = classify(
        &run(&region(
            0.2,
            AttackSpec::delay(1.0, 11, auto()).unwrap(),
            4000,
        ))
        .unwrap(),
    );
    println!("{long12:?} {long11:?}");
    assert!(!long12.is_convergent());
    assert!(long11.is_convergent());
}
