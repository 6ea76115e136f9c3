//! Strategies and property bodies shared by the proptest suites and the
//! acceptance harness.
#![allow(dead_code)]

use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError};

use polyham::conservative::HamiltonianSpec;
use polyham::field::chart_field_matrix_form;
use polyham::game::{block_sums, FaceIndexSet};
use polyham::matrix::max_abs_diff;
use polyham::poisson::{jacobian_phi, PoissonData};
use polyham::scalar::rat;
use polyham::*;

pub const CASES: u32 = 100;

/// 100 cases, fixed seed, no persistence files.
pub fn config(seed: u64) -> Config {
    Config {
        cases: CASES,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

pub fn parts() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=3).prop_filter("need a nontrivial group", |p| p.iter().any(|&k| k > 1))
}

pub fn game() -> impl Strategy<Value = PolymatrixGame<Rational>> {
    parts().prop_flat_map(|parts| {
        let n: usize = parts.iter().sum();
        prop::collection::vec(small_rational(), n * n).prop_map(move |entries| {
            let sig = Signature::new(parts.clone()).unwrap();
            PolymatrixGame::new(sig, Matrix::from_row_slice(n, n, &entries)).unwrap()
        })
    })
}

pub fn skew_game() -> impl Strategy<Value = PolymatrixGame<Rational>> {
    game().prop_map(|g| {
        let a = g.payoff();
        let skew = a.sub(&a.transpose());
        PolymatrixGame::new(g.signature().clone(), skew).unwrap()
    })
}

/// Exact point of the prism with positive weights `1..=9` per group.
pub fn prism_point(parts: &[usize]) -> impl Strategy<Value = Vec<Rational>> {
    let blocks: Vec<_> = parts
        .iter()
        .map(|&k| prop::collection::vec(1i64..=9, k))
        .collect();
    blocks.prop_map(|ws| {
        ws.iter()
            .flat_map(|w| {
                let s: i64 = w.iter().sum();
                w.iter().map(move |&v| rat(v, s)).collect::<Vec<_>>()
            })
            .collect()
    })
}

pub fn game_and_point() -> impl Strategy<Value = (PolymatrixGame<Rational>, Vec<Rational>)> {
    game().prop_flat_map(|g| {
        let p = prism_point(g.signature().parts());
        (Just(g), p)
    })
}

/// Block-row-constant adjuster: `p x n` values expanded so block `(α, β)`
/// is `𝟙 cᵀ`.
pub fn adjuster(parts: &[usize]) -> impl Strategy<Value = Matrix<Rational>> {
    let parts = parts.to_vec();
    let p = parts.len();
    let n: usize = parts.iter().sum();
    prop::collection::vec(small_rational(), p * n).prop_map(move |c| {
        let sig = Signature::new(parts.clone()).unwrap();
        Matrix::from_fn(n, n, |i, j| c[sig.group_of(i) * n + j].clone())
    })
}

pub fn equivalence_input(
) -> impl Strategy<Value = (PolymatrixGame<Rational>, Matrix<Rational>, Matrix<Rational>, Vec<Rational>)> {
    game().prop_flat_map(|g| {
        let parts = g.signature().parts().to_vec();
        (Just(g), adjuster(&parts), adjuster(&parts), prism_point(&parts))
    })
}

fn shifted(g: &PolymatrixGame<Rational>, c: &Matrix<Rational>) -> PolymatrixGame<Rational> {
    PolymatrixGame::new(g.signature().clone(), g.payoff().add(c)).unwrap()
}

/// Equivalence is an equivalence relation, is detected by canonical forms,
/// and equivalent games have the same field on the prism.
pub fn prop_equivalence(
    (g, c1, c2, x): (PolymatrixGame<Rational>, Matrix<Rational>, Matrix<Rational>, Vec<Rational>),
) -> Result<(), TestCaseError> {
    let g1 = shifted(&g, &c1);
    let g2 = shifted(&g1, &c2);
    prop_assert!(games_equivalent(&g, &g).unwrap());
    prop_assert!(games_equivalent(&g, &g1).unwrap());
    prop_assert!(games_equivalent(&g1, &g).unwrap());
    prop_assert!(games_equivalent(&g1, &g2).unwrap());
    prop_assert!(games_equivalent(&g, &g2).unwrap());
    prop_assert_eq!(canonical_form(&g), canonical_form(&g2));
    let canon = PolymatrixGame::new(g.signature().clone(), canonical_form(&g)).unwrap();
    prop_assert_eq!(canonical_form(&canon), canonical_form(&g));
    prop_assert_eq!(vector_field(&g, &x).unwrap(), vector_field(&g2, &x).unwrap());
    // a single-entry perturbation in a group with two rows breaks equivalence
    let sig = g.signature();
    if let Some(alpha) = (0..sig.groups()).find(|&a| sig.parts()[a] > 1) {
        let mut a = g.payoff().clone();
        let i = sig.block(alpha).start;
        a[(i, 0)] += Rational::from_integer(1.into());
        let bumped = PolymatrixGame::new(sig.clone(), a).unwrap();
        prop_assert!(!games_equivalent(&g, &bumped).unwrap());
    }
    Ok(())
}

/// `X_A(x)` has zero block sums on the prism, exactly.
pub fn prop_tangency((g, x): (PolymatrixGame<Rational>, Vec<Rational>)) -> Result<(), TestCaseError> {
    let v = vector_field(&g, &x).unwrap();
    prop_assert!(block_sums(g.signature(), &v).iter().all(Zero::is_zero));
    // float path agrees
    let vf = vector_field(&g.to_f64(), &x.iter().map(Scalar::to_f64).collect::<Vec<_>>()).unwrap();
    let exact: Vec<f64> = v.iter().map(Scalar::to_f64).collect();
    prop_assert!(max_abs_diff(&vf, &exact) <= 1e-12);
    Ok(())
}

pub fn face_input() -> impl Strategy<Value = (PolymatrixGame<Rational>, Vec<Rational>, Vec<bool>)> {
    game_and_point().prop_flat_map(|(g, x)| {
        let n = g.n();
        (Just(g), Just(x), prop::collection::vec(any::<bool>(), n))
    })
}

/// Points on a face stay on it (the field vanishes off the face) and the
/// field there equals the restricted game's field.
pub fn prop_face_inheritance(
    (g, x, mask): (PolymatrixGame<Rational>, Vec<Rational>, Vec<bool>),
) -> Result<(), TestCaseError> {
    let sig = g.signature();
    let mut keep = mask;
    for b in sig.blocks() {
        if !keep[b.clone()].iter().any(|k| *k) {
            keep[b.start] = true;
        }
    }
    let indices: Vec<usize> = (0..sig.total()).filter(|&i| keep[i]).collect();
    let face = FaceIndexSet::new(sig, &indices).unwrap();
    // move x onto the face and renormalize
    let mut y: Vec<Rational> = (0..sig.total())
        .map(|i| if keep[i] { x[i].clone() } else { Rational::zero() })
        .collect();
    for b in sig.blocks() {
        let s = y[b.clone()].iter().fold(Rational::zero(), |acc, v| acc + v);
        for v in &mut y[b] {
            *v = &*v / &s;
        }
    }
    let v = vector_field(&g, &y).unwrap();
    for i in 0..sig.total() {
        if !keep[i] {
            prop_assert!(v[i].is_zero());
        }
    }
    let sub = restrict(&g, &face).unwrap();
    prop_assert_eq!(face.project(&v), vector_field(&sub, &face.project(&y)).unwrap());
    Ok(())
}

pub fn chart_input() -> impl Strategy<Value = (PolymatrixGame<Rational>, Vec<f64>)> {
    game().prop_flat_map(|g| {
        let m = g.signature().reduced_dim();
        (Just(g), prop::collection::vec(-3.0f64..3.0, m))
    })
}

/// The chart field pushes forward to the prism field, `φ⁻¹ ∘ φ = id`, and
/// the blockwise chart field matches the matrix form.
pub fn prop_chart_consistency((g, u): (PolymatrixGame<Rational>, Vec<f64>)) -> Result<(), TestCaseError> {
    let gf = g.to_f64();
    let sig = gf.signature();
    let x = phi(sig, &u).unwrap();
    prop_assert!(block_sums(sig, &x).iter().all(|s| (s - 1.0).abs() <= 1e-14));
    prop_assert!(x.iter().all(|v| *v > 0.0));
    let back = phi_inverse(sig, &x).unwrap();
    prop_assert!(max_abs_diff(&back, &u) <= 1e-12);
    let du = chart_field(&gf, &u).unwrap();
    prop_assert!(max_abs_diff(&du, &chart_field_matrix_form(&gf, &u).unwrap()) <= 1e-12);
    let pushed = jacobian_phi(sig, &u).unwrap().mul_vec(&du);
    let field = vector_field(&gf, &x).unwrap();
    let scale = 1.0 + gf.payoff().max_abs();
    prop_assert!(max_abs_diff(&pushed, &field) <= 1e-13 * scale, "{:?} vs {:?}", pushed, field);
    Ok(())
}

pub fn gradient_input() -> impl Strategy<Value = (PolymatrixGame<Rational>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    skew_game().prop_flat_map(|g| {
        let n = g.n();
        let p = g.signature().groups();
        let m = g.signature().reduced_dim();
        (
            Just(g),
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(prop_oneof![-3.0f64..-0.5, 0.5f64..3.0], p),
            prop::collection::vec(0.1f64..1.0, n),
            prop::collection::vec(-2.0f64..2.0, m),
        )
    })
}

fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|l| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[l] += h;
            xm[l] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
        .collect()
}

/// Analytic gradients agree with central differences: `∇H`, the Casimir
/// gradients, and `dφ`.
pub fn prop_gradients(
    (g, q, lambda, w, u): (PolymatrixGame<Rational>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>),
) -> Result<(), TestCaseError> {
    let sig = g.signature().clone();
    let h = 1e-6;
    // strictly positive point, not necessarily on the prism: H is defined on ℝⁿ₊
    let spec = HamiltonianSpec::new(sig.clone(), q, lambda);
    let grad = spec.gradient(&w).unwrap();
    let fd = central_difference(|y| spec.value(y).unwrap(), &w, h);
    for (a, b) in grad.iter().zip(&fd) {
        prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "∇H {} vs {}", a, b);
    }
    let data = PoissonData::new(&sig, g.payoff()).unwrap();
    for k in 0..data.kernel.len() {
        let cg = data.casimir_gradient(k, &w).unwrap();
        let fd = central_difference(|y| data.leaf_invariant(y).unwrap()[k], &w, h);
        for (a, b) in cg.iter().zip(&fd) {
            prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "Casimir {} vs {}", a, b);
        }
    }
    let jac = jacobian_phi(&sig, &u).unwrap();
    for c in 0..sig.reduced_dim() {
        let col: Vec<f64> = (0..sig.total())
            .map(|i| {
                let mut up = u.clone();
                let mut um = u.clone();
                up[c] += 1e-5;
                um[c] -= 1e-5;
                (phi(&sig, &up).unwrap()[i] - phi(&sig, &um).unwrap()[i]) / 2e-5
            })
            .collect();
        prop_assert!(max_abs_diff(&col, &jac.column(c)) <= 1e-6);
    }
    Ok(())
}
