//! Seeded random inputs for sweeps and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_traits::Zero;

use crate::conservative::{make_conservative, ConservativeDecomposition};
use crate::game::{PolymatrixGame, PrismPoint, Signature};
use crate::linsolve::nullspace;
use crate::matrix::Matrix;
use crate::poisson::incidence_matrix;
use crate::scalar::{int, rat, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational in `[-bound, bound]` with denominator in `1..=max_den`.
pub fn random_rational<R: Rng>(rng: &mut R, bound: i64, max_den: i64) -> Rational {
    let den = rng.random_range(1..=max_den);
    let num = rng.random_range(-bound * den..=bound * den);
    rat(num, den)
}

/// Skew-symmetric `n x n` matrix with small rational entries.
pub fn random_skew<R: Rng>(rng: &mut R, n: usize) -> Matrix<Rational> {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = random_rational(rng, 2, 4);
            m[(j, i)] = -v.clone();
            m[(i, j)] = v;
        }
    }
    m
}

/// Dense matrix with small rational entries.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix<Rational> {
    Matrix::from_fn(rows, cols, |_, _| random_rational(rng, 2, 4))
}

/// Interior point with every coordinate at least `floor / n_α` in its group.
pub fn random_interior_point<R: Rng>(rng: &mut R, sig: &Signature, floor: f64) -> PrismPoint<f64> {
    let mut x = Vec::with_capacity(sig.total());
    for &k in sig.parts() {
        let w: Vec<f64> = (0..k).map(|_| floor + rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        x.extend(w.iter().map(|v| v / s));
    }
    PrismPoint::new(sig, x).expect("normalized blocks lie on the prism")
}

/// Exact interior point with small-denominator coordinates.
pub fn random_rational_interior_point<R: Rng>(rng: &mut R, sig: &Signature) -> Vec<Rational> {
    let mut x = Vec::with_capacity(sig.total());
    for &k in sig.parts() {
        let w: Vec<i64> = (0..k).map(|_| rng.random_range(1..=9)).collect();
        let s: i64 = w.iter().sum();
        x.extend(w.iter().map(|&v| rat(v, s)));
    }
    x
}

/// Chart point with coordinates uniform in `[-spread, spread]`.
pub fn random_chart_point<R: Rng>(rng: &mut R, sig: &Signature, spread: f64) -> Vec<f64> {
    (0..sig.reduced_dim())
        .map(|_| rng.random_range(-spread..=spread))
        .collect()
}

/// Uniform point of the cube `[-r, r]^n`, for checks valid off the prism.
pub fn random_cube_point<R: Rng>(rng: &mut R, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..=r)).collect()
}

/// Random conservative game `A0 D` with `A0` skew and `q̃` drawn from the
/// solutions of `E A0 q̃ = 0`, retrying until every block sum is nonzero.
pub fn random_conservative<R: Rng>(
    rng: &mut R,
    sig: &Signature,
) -> (PolymatrixGame<Rational>, ConservativeDecomposition) {
    loop {
        let a0 = random_skew(rng, sig.total());
        let basis = nullspace(&incidence_matrix::<Rational>(sig).mul(&a0));
        let mut qt = vec![Rational::zero(); sig.total()];
        for b in &basis {
            let c = int(rng.random_range(-3..=3));
            for (q, v) in qt.iter_mut().zip(b) {
                *q += &c * v;
            }
        }
        if let Ok(out) = make_conservative(&a0, sig, &qt) {
            return out;
        }
    }
}
