//! Orbit-level checks: convergence order, mode consistency, face closure,
//! conservation, and the qualitative behavior of both examples.

use polyham::dynamics::max_state_difference;
use polyham::fixtures::{example1, example2};
use polyham::game::FaceIndexSet;
use polyham::matrix::max_abs_diff;
use polyham::sampling::{random_interior_point, rng};
use polyham::*;

fn f64s(v: &[Rational]) -> Vec<f64> {
    v.iter().map(Scalar::to_f64).collect()
}

fn end_state(g: &PolymatrixGame<f64>, x0: &PrismPoint, t: f64, cfg: &IntegratorConfig) -> Vec<f64> {
    integrate(g, x0, (0.0, t), cfg).unwrap().final_state().to_vec()
}

#[test]
fn rk4_step_halving_is_fourth_order() {
    let ex = example1();
    let g = ex.game.to_f64();
    let x0 = PrismPoint::new(&ex.signature, vec![0.6, 0.4, 0.5, 0.5, 0.6, 0.4]).unwrap();
    let reference = end_state(&g, &x0, 5.0, &IntegratorConfig::default().with_tolerances(1e-13, 1e-15));
    let err = |h: f64| max_abs_diff(&end_state(&g, &x0, 5.0, &IntegratorConfig::rk4(h)), &reference);
    let (e1, e2) = (err(0.1), err(0.05));
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "errors {e1:e} {e2:e}, ratio {ratio}");
}

#[test]
fn chart_and_prism_modes_agree() {
    let mut r = rng(4);
    for ex in [example1(), example2()] {
        let g = ex.game.to_f64();
        for _ in 0..3 {
            let x0 = random_interior_point(&mut r, &ex.signature, 0.1);
            for t in [5.0, 20.0] {
                let chart = end_state(&g, &x0, t, &IntegratorConfig::default().with_mode(CoordinateMode::Chart));
                let prism = end_state(&g, &x0, t, &IntegratorConfig::default().with_mode(CoordinateMode::Prism));
                assert!(max_abs_diff(&chart, &prism) <= 1e-6, "{chart:?} vs {prism:?}");
            }
        }
    }
}

#[test]
fn faces_are_invariant_and_match_restriction() {
    let ex = example2();
    let g = ex.game.to_f64();
    // face {x1, x3} x {y1, y2}: drop strategy 1 of the first group
    let face = FaceIndexSet::new(&ex.signature, &[0, 2, 3, 4]).unwrap();
    let x0 = PrismPoint::new(&ex.signature, vec![0.3, 0.0, 0.7, 0.45, 0.55]).unwrap();
    let cfg = IntegratorConfig::default().with_mode(CoordinateMode::Prism);
    let traj = integrate(&g, &x0, (0.0, 20.0), &cfg).unwrap();
    assert!(traj.states.iter().all(|x| x[1] == 0.0));
    let sub = restrict(&ex.game, &face).unwrap().to_f64();
    let y0 = PrismPoint::new(face.restricted_signature(), face.project(x0.coords())).unwrap();
    let sub_end = end_state(&sub, &y0, 20.0, &IntegratorConfig::default());
    assert!(max_abs_diff(&face.project(traj.final_state()), &sub_end) <= 1e-7);
}

#[test]
fn first_example_conserves_h_and_leaf() {
    let ex = example1();
    let (g, d) = make_conservative(&ex.skew_model, &ex.signature, &ex.qtilde).unwrap();
    let spec = d.hamiltonian(&ex.signature);
    let data = PoissonData::new(&ex.signature, &ex.skew_model).unwrap();
    let mut r = rng(9);
    for mode in [CoordinateMode::Chart, CoordinateMode::Prism] {
        let x0 = random_interior_point(&mut r, &ex.signature, 0.3);
        let traj = integrate(&g.to_f64(), &x0, (0.0, 100.0), &IntegratorConfig::default().with_mode(mode)).unwrap();
        let rep = monitor_report(&traj, Some(&spec), Some(&data)).unwrap();
        assert!(rep.hamiltonian_drift.unwrap() <= 1e-8, "{mode:?}: {rep:?}");
        assert!(rep.max_leaf_drift() <= 1e-8, "{mode:?}: {rep:?}");
        assert!(rep.block_sum_deviation <= 1e-9);
    }
}

#[test]
fn first_example_orbits_close() {
    let ex = example1();
    let x0 = PrismPoint::new(&ex.signature, vec![0.6, 0.4, 0.5, 0.5, 0.6, 0.4]).unwrap();
    let traj = integrate(&ex.game.to_f64(), &x0, (0.0, 500.0), &IntegratorConfig::default()).unwrap();
    assert!(recurrence_check(&traj, x0.coords()) <= 1e-2);
}

#[test]
fn second_example_flows_to_sink() {
    let ex = example2();
    let g = ex.game.to_f64();
    let data = PoissonData::new(&ex.signature, &ex.skew_model).unwrap();
    let sink = [0.0, 0.0, 1.0, 1.0, 0.0];
    let mut r = rng(12);
    let starts: Vec<_> = (0..6).map(|_| random_interior_point(&mut r, &ex.signature, 0.1)).collect();
    for (x0, traj) in starts.iter().zip(integrate_batch(&g, &starts, (0.0, 200.0), &IntegratorConfig::default())) {
        let traj = traj.unwrap();
        assert!(max_abs_diff(traj.final_state(), &sink) <= 1e-3);
        let rep = monitor_report(&traj, None, Some(&data)).unwrap();
        assert!(rep.max_leaf_drift() <= 1e-8, "{rep:?}");
        // no return: the orbit leaves and never comes back
        assert!(recurrence_check(&traj, x0.coords()) > 1e-2);
    }
}

#[test]
fn second_example_heteroclinic_cycle_vertices() {
    let ex = example2();
    let kinds = classify_vertices(&ex.game);
    assert_eq!(kinds.len(), 6);
    let repellers = kinds.iter().filter(|v| v.kind == VertexKind::Repeller).count();
    let sinks = kinds.iter().filter(|v| v.kind == VertexKind::Sink).count();
    assert_eq!((repellers, sinks), (1, 1));
    // x1 and x2 earn the same against y1, so the edge between those two
    // vertices consists of equilibria and both have a zero rate
    let kind_of = |s: &[usize]| kinds.iter().find(|v| v.support == s).unwrap().kind;
    assert_eq!(kind_of(&[0, 3]), VertexKind::Degenerate);
    assert_eq!(kind_of(&[1, 3]), VertexKind::Degenerate);
    assert_eq!(kind_of(&[1, 4]), VertexKind::Saddle);
    assert_eq!(kind_of(&[2, 4]), VertexKind::Saddle);
}

#[test]
fn equilibrium_monitor_drift_is_zero() {
    let ex = example1();
    let (g, d) = make_conservative(&ex.skew_model, &ex.signature, &ex.qtilde).unwrap();
    let x0 = PrismPoint::new(&ex.signature, f64s(&ex.equilibrium)).unwrap();
    let traj = integrate(&g.to_f64(), &x0, (0.0, 10.0), &IntegratorConfig::default()).unwrap();
    let data = PoissonData::new(&ex.signature, &ex.skew_model).unwrap();
    let rep = monitor_report(&traj, Some(&d.hamiltonian(&ex.signature)), Some(&data)).unwrap();
    assert!(rep.hamiltonian_drift.unwrap() <= 1e-12);
    assert!(rep.max_leaf_drift() <= 1e-12);
}

#[test]
fn monitors_refuse_boundary_samples() {
    let ex = example1();
    let (g, d) = make_conservative(&ex.skew_model, &ex.signature, &ex.qtilde).unwrap();
    let x0 = PrismPoint::new(&ex.signature, vec![1.0, 0.0, 0.5, 0.5, 0.5, 0.5]).unwrap();
    let traj = integrate(&g.to_f64(), &x0, (0.0, 1.0), &IntegratorConfig::default()).unwrap();
    assert_eq!(traj.stats.mode, CoordinateMode::Prism);
    assert_eq!(
        monitor_report(&traj, Some(&d.hamiltonian(&ex.signature)), None),
        Err(Error::BoundarySample { index: 0 })
    );
    // block sums alone are fine
    let rep = monitor_report(&traj, None, None).unwrap();
    assert!(rep.block_sum_deviation <= 1e-12);
}

#[test]
fn sample_stride_thins_output() {
    let ex = example1();
    let g = ex.game.to_f64();
    let x0 = PrismPoint::center(&ex.signature);
    let full = integrate(&g, &x0, (0.0, 10.0), &IntegratorConfig::default()).unwrap();
    let cfg = IntegratorConfig {
        sample_stride: 10,
        ..IntegratorConfig::default()
    };
    let thin = integrate(&g, &x0, (0.0, 10.0), &cfg).unwrap();
    assert_eq!(thin.stats.steps, full.stats.steps);
    assert!(thin.len() < full.len() / 5);
    assert_eq!(thin.times.last(), Some(&10.0));
    assert!(max_state_difference(&[thin.final_state().to_vec()], &[full.final_state().to_vec()]) == 0.0);
}

#[test]
fn attached_monitors_have_sample_length() {
    let ex = example2();
    let mut traj = integrate(&ex.game.to_f64(), &PrismPoint::center(&ex.signature), (0.0, 3.0), &IntegratorConfig::default()).unwrap();
    let data = PoissonData::new(&ex.signature, &ex.skew_model).unwrap();
    let (_, d) = make_conservative(&ex.skew_model, &ex.signature, &ex.qtilde).unwrap();
    traj.attach_monitors(Some(&d.hamiltonian(&ex.signature)), Some(&data)).unwrap();
    assert_eq!(traj.hamiltonian.as_ref().unwrap().len(), traj.len());
    assert_eq!(traj.leaf_invariants.as_ref().unwrap().len(), traj.len());
}
