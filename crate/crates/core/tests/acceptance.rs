//! Acceptance suite: one PASS/FAIL line per criterion, with runtime budgets.
//! Runs as a plain binary (`harness = false`) so the lines always print.

mod common;

use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use proptest::test_runner::{TestError, TestRunner};
use rayon::prelude::*;

use polyham::conservative::hamiltonian_identity_residual;
use polyham::fixtures::{example1, example2, example2_repeller, example2_sink, ExampleGame};
use polyham::matrix::{max_abs_diff, Matrix};
use polyham::poisson::{proportional, JACOBI_FD_STEP};
use polyham::sampling::{
    random_chart_point, random_conservative, random_cube_point, random_interior_point, random_rational,
    random_skew, rng,
};
use polyham::scalar::{int, rat, rat_vec};
use polyham::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn model(ex: &ExampleGame) -> PolymatrixGame<Rational> {
    PolymatrixGame::new(ex.signature.clone(), ex.skew_model.clone()).unwrap()
}

fn criterion_1() -> Outcome {
    let ex = example1();
    let (g, d) = make_conservative(&ex.skew_model, &ex.signature, &ex.qtilde).map_err(|e| e.to_string())?;
    ensure!(g.payoff() == ex.game.payoff(), "A differs from the reference matrix");
    ensure!(d.lambda == rat_vec(&[(5, 2), (9, 4), (2, 1)]), "λ = {:?}", d.lambda);
    let q = ex.signature.model_coordinates(&d.equilibrium.q);
    ensure!(q == rat_vec(&[(7, 10), (5, 9), (1, 2)]), "q = {:?}", q);
    Ok("A exact, λ = (5/2, 9/4, 2), q = (7/10, 5/9, 1/2)".into())
}

fn criterion_2() -> Outcome {
    let ex = example1();
    let b = reduced_structure(&ex.signature, &ex.skew_model);
    let expected = Matrix::from_rows(vec![
        rat_vec(&[(0, 1), (1, 1), (-1, 2)]),
        rat_vec(&[(-1, 1), (0, 1), (-3, 2)]),
        rat_vec(&[(1, 2), (3, 2), (0, 1)]),
    ])
    .unwrap();
    ensure!(b == expected, "B = {:?}", b);
    let data = PoissonData::new(&ex.signature, &ex.skew_model).map_err(|e| e.to_string())?;
    ensure!(data.kernel.len() == 1, "kernel dimension {}", data.kernel.len());
    ensure!(
        proportional(&data.kernel[0], &rat_vec(&[(-3, 2), (1, 2), (1, 1)])),
        "kernel {:?}",
        data.kernel[0]
    );
    Ok("B exact, ker B = span(-3/2, 1/2, 1)".into())
}

fn criterion_3() -> Outcome {
    let ex = example2();
    let (g, d) = make_conservative(&ex.skew_model, &ex.signature, &ex.qtilde).map_err(|e| e.to_string())?;
    ensure!(g.payoff() == ex.game.payoff(), "A differs from the reference matrix");
    let reference = PoissonData::with_incidence(&ex.signature, &ex.skew_model, ex.reference_incidence.clone())
        .map_err(|e| e.to_string())?;
    let expected = Matrix::from_rows(vec![
        rat_vec(&[(0, 1), (1, 1), (-1, 2)]),
        rat_vec(&[(-1, 1), (0, 1), (-1, 1)]),
        rat_vec(&[(1, 2), (1, 1), (0, 1)]),
    ])
    .unwrap();
    ensure!(reference.reduced == expected, "B = {:?}", reference.reduced);
    ensure!(
        reference.kernel.len() == 1 && proportional(&reference.kernel[0], &rat_vec(&[(-1, 1), (1, 2), (1, 1)])),
        "kernel {:?}",
        reference.kernel
    );
    let q = ex.signature.model_coordinates(&d.equilibrium.q);
    ensure!(q == vec![rat(-9, 2), int(8), int(0)], "q = {:?}", q);
    ensure!(!d.equilibrium.is_interior(), "equilibrium not flagged exterior");
    ensure!(d.equilibrium.meets_prism() == Some(false), "line of equilibria meets the prism");
    let fe = formal_equilibria(&g).map_err(|e| e.to_string())?;
    ensure!(fe.directions.len() == 1, "solution set dimension {}", fe.directions.len());
    let dir = ex.signature.model_coordinates(&fe.directions[0]);
    ensure!(proportional(&dir, &rat_vec(&[(-5, 2), (5, 1), (-1, 1)])), "direction {:?}", dir);
    Ok("A, B exact; ker ∝ (-1, 1/2, 1); q = (-9/2, 8, 0) exterior; line ∝ (-5/2, 5, -1)".into())
}

fn criterion_4() -> Outcome {
    let mut games: Vec<PolymatrixGame<Rational>> = vec![model(&example1()), model(&example2())];
    let mut r = rng(4);
    let sigs = [vec![2, 2, 2], vec![3, 3], vec![2, 4], vec![3, 2, 1], vec![6]];
    for k in 0..20 {
        let sig = Signature::new(sigs[k % sigs.len()].clone()).unwrap();
        games.push(PolymatrixGame::new(sig, random_skew(&mut r, 6)).unwrap());
    }
    let results: Vec<Result<(f64, f64), String>> = games
        .par_iter()
        .enumerate()
        .map(|(k, g)| {
            let mut r = rng(1000 + k as u64);
            let n = g.n();
            let gf = g.to_f64();
            let (mut fd_worst, mut map_worst) = (0.0f64, 0.0f64);
            for _ in 0..100 {
                let x: Vec<Rational> = (0..n).map(|_| random_rational(&mut r, 2, 6)).collect();
                let res = jacobi_residual_exact(g, &x).map_err(|e| e.to_string())?;
                if !res.is_zero() {
                    return Err(format!("game {k}: exact Jacobi residual {res}"));
                }
                let xf = random_cube_point(&mut r, n, 2.0);
                fd_worst = fd_worst.max(jacobi_residual_fd(&gf, &xf, JACOBI_FD_STEP).map_err(|e| e.to_string())?);
                let u = random_chart_point(&mut r, g.signature(), 3.0);
                map_worst = map_worst.max(check_poisson_map(&gf, &u).map_err(|e| e.to_string())?);
            }
            Ok((fd_worst, map_worst))
        })
        .collect();
    let mut fd = 0.0f64;
    let mut map = 0.0f64;
    for res in results {
        let (a, b) = res?;
        fd = fd.max(a);
        map = map.max(b);
    }
    ensure!(fd <= 1e-6, "finite-difference Jacobi residual {fd:e}");
    ensure!(map <= 1e-12, "Poisson-map residual {map:e}");
    Ok(format!("22 models x 100 points: exact = 0, fd ≤ {fd:.1e}, map ≤ {map:.1e}"))
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    let mut r = rng(5);
    for ex in [example1(), example2()] {
        let (g, d) = make_conservative(&ex.skew_model, &ex.signature, &ex.qtilde).map_err(|e| e.to_string())?;
        let spec = d.hamiltonian(&ex.signature);
        let m = d.skew_game(&ex.signature).to_f64();
        let gf = g.to_f64();
        for _ in 0..100 {
            let x = random_interior_point(&mut r, &ex.signature, 0.05);
            worst = worst.max(hamiltonian_identity_residual(&gf, &m, &spec, x.coords()).map_err(|e| e.to_string())?);
        }
    }
    ensure!(worst <= 1e-11, "residual {worst:e}");
    Ok(format!("max ‖X_A - π_A0 ∇H‖ = {worst:.1e}"))
}

fn criterion_6() -> Outcome {
    let ex = example1();
    let (g, d) = make_conservative(&ex.skew_model, &ex.signature, &ex.qtilde).map_err(|e| e.to_string())?;
    let x0 = PrismPoint::new(&ex.signature, vec![0.6, 0.4, 0.5, 0.5, 0.6, 0.4]).unwrap();
    let traj = integrate(&g.to_f64(), &x0, (0.0, 100.0), &IntegratorConfig::default()).map_err(|e| e.to_string())?;
    let data = PoissonData::new(&ex.signature, &ex.skew_model).unwrap();
    let rep = monitor_report(&traj, Some(&d.hamiltonian(&ex.signature)), Some(&data)).map_err(|e| e.to_string())?;
    let dh = rep.hamiltonian_drift.unwrap();
    ensure!(dh <= 1e-8, "ex1 |ΔH| = {dh:e}");
    ensure!(rep.max_leaf_drift() <= 1e-8, "ex1 leaf drift {:e}", rep.max_leaf_drift());

    let ex = example2();
    let x0 = random_interior_point(&mut rng(6), &ex.signature, 0.1);
    let traj = integrate(&ex.game.to_f64(), &x0, (0.0, 200.0), &IntegratorConfig::default()).map_err(|e| e.to_string())?;
    let data = PoissonData::new(&ex.signature, &ex.skew_model).unwrap();
    let rep2 = monitor_report(&traj, None, Some(&data)).map_err(|e| e.to_string())?;
    ensure!(rep2.max_leaf_drift() <= 1e-8, "ex2 leaf drift {:e}", rep2.max_leaf_drift());
    let dist = max_abs_diff(traj.final_state(), &[0.0, 0.0, 1.0, 1.0, 0.0]);
    ensure!(dist <= 1e-3, "ex2 ‖x(200) - s‖ = {dist:e}");
    Ok(format!(
        "ex1 |ΔH| = {dh:.1e}, leaf {:.1e}; ex2 leaf {:.1e}, ‖x(200) - s‖ = {dist:.1e}",
        rep.max_leaf_drift(),
        rep2.max_leaf_drift()
    ))
}

fn criterion_7() -> Outcome {
    let ex = example1();
    let x0 = PrismPoint::new(&ex.signature, vec![0.6, 0.4, 0.5, 0.5, 0.6, 0.4]).unwrap();
    let traj = integrate(&ex.game.to_f64(), &x0, (0.0, 500.0), &IntegratorConfig::default()).map_err(|e| e.to_string())?;
    let ret = recurrence_check(&traj, x0.coords());
    ensure!(ret <= 1e-2, "ex1 return distance {ret:e}");
    let ex = example2();
    let r = linearize_at_vertex(&ex.game, &example2_repeller()).map_err(|e| e.to_string())?;
    ensure!(r.rates.iter().all(|(_, v)| v.is_positive()), "rates at r: {:?}", r.rates);
    let s = linearize_at_vertex(&ex.game, &example2_sink()).map_err(|e| e.to_string())?;
    ensure!(s.rates.iter().all(|(_, v)| v.is_negative()), "rates at s: {:?}", s.rates);
    let show = |l: &VertexLinearization| l.rates.iter().map(|(_, v)| format_rational(v)).collect::<Vec<_>>().join(", ");
    Ok(format!("ex1 return {ret:.1e}; rates at r ({}), at s ({})", show(&r), show(&s)))
}

fn criterion_8() -> Outcome {
    for ex in [example1(), example2()] {
        let det = detect_conservative(&ex.game);
        let d = det.decomposition().ok_or_else(|| format!("{} not detected: {det:?}", ex.name))?;
        ensure!(verify_conservative(&ex.game, d).holds(), "{} decomposition fails verification", ex.name);
        ensure!(proportional(&d.lambda, &ex.scaling), "{} λ = {:?}", ex.name, d.lambda);
    }
    let mut r = rng(8);
    let sigs = [vec![2, 2, 2], vec![3, 2], vec![2, 3, 2], vec![4, 2], vec![3, 3]];
    for k in 0..20 {
        let sig = Signature::new(sigs[k % sigs.len()].clone()).unwrap();
        let (g, d) = random_conservative(&mut r, &sig);
        // perturb by a random equivalence so detection has to find adjusters
        let n = sig.total();
        let c: Vec<Rational> = (0..sig.groups() * n).map(|_| random_rational(&mut r, 3, 2)).collect();
        let shift = Matrix::from_fn(n, n, |i, j| c[sig.group_of(i) * n + j].clone());
        let g = PolymatrixGame::new(sig.clone(), g.payoff().add(&shift)).unwrap();
        let det = detect_conservative(&g);
        let found = det.decomposition().ok_or_else(|| format!("random game {k} not detected"))?;
        ensure!(verify_conservative(&g, found).holds(), "random game {k}: verification fails");
        ensure!(proportional(&found.lambda, &d.lambda), "random game {k}: λ not gauge-equivalent");
    }
    let sig = Signature::new(vec![2, 2]).unwrap();
    let mut a = Matrix::zeros(4, 4);
    a[(0, 0)] = int(1);
    let det = detect_conservative(&PolymatrixGame::new(sig, a).unwrap());
    ensure!(matches!(det, Detection::NotConservative(_)), "counterexample detected as conservative");
    Ok("examples + 20 random games recovered up to gauge; (2,2) counterexample rejected".into())
}

fn run_property<S, F>(name: &str, seed: u64, strategy: S, prop: F) -> Result<String, String>
where
    S: proptest::strategy::Strategy,
    F: Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
{
    let mut runner = TestRunner::new(common::config(seed));
    match runner.run(&strategy, prop) {
        Ok(()) => Ok(format!("{name} {}", common::CASES)),
        Err(TestError::Fail(reason, _)) => Err(format!("{name}: {reason}")),
        Err(TestError::Abort(reason)) => Err(format!("{name} aborted: {reason}")),
    }
}

fn criterion_9() -> Outcome {
    let parts = [
        run_property("equivalence", 0x5eed_0001, common::equivalence_input(), common::prop_equivalence)?,
        run_property("tangency", 0x5eed_0002, common::game_and_point(), common::prop_tangency)?,
        run_property("faces", 0x5eed_0003, common::face_input(), common::prop_face_inheritance)?,
        run_property("chart", 0x5eed_0004, common::chart_input(), common::prop_chart_consistency)?,
        run_property("gradients", 0x5eed_0005, common::gradient_input(), common::prop_gradients)?,
    ];
    Ok(format!("cases: {}", parts.join(", ")))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("Ex1 reconstruction", Duration::from_secs(1), criterion_1),
        ("Ex1 reduced structure", Duration::from_secs(1), criterion_2),
        ("Ex2 reconstruction", Duration::from_secs(1), criterion_3),
        ("Poisson verification", Duration::from_secs(30), criterion_4),
        ("Hamiltonian identity", Duration::from_secs(5), criterion_5),
        ("Conservation", Duration::from_secs(30), criterion_6),
        ("Qualitative dynamics", Duration::from_secs(60), criterion_7),
        ("Detection", Duration::from_secs(10), criterion_8),
        ("Property suites", Duration::from_secs(120), criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > *budget => Err(format!("took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {}. {name} ({elapsed:.2?}): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name} ({elapsed:.2?}): {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
