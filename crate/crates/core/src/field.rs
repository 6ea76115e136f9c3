//! Replicator vector fields on the prism and in chart coordinates.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::game::{PolymatrixGame, Signature};
use crate::matrix::Matrix;
use crate::poisson::{incidence_matrix, phi};
use crate::scalar::Scalar;

/// Group averages `Σ_β (x^α)ᵀ A^{αβ} x^β`, one per group, given `ax = A x`.
fn group_averages<T: Scalar>(sig: &Signature, x: &[T], ax: &[T]) -> Vec<T> {
    sig.blocks()
        .map(|b| b.fold(T::zero(), |acc, i| acc + x[i].clone() * ax[i].clone()))
        .collect()
}

/// Polymatrix replicator field `X_A(x)`:
/// `ẋ_i = x_i ((A x)_i - Σ_β (x^α)ᵀ A^{αβ} x^β)` for `i ∈ α`.
///
/// Any vector of the right length is accepted; tangency to the prism only
/// holds when `x` lies on it.
pub fn vector_field<T: Scalar>(game: &PolymatrixGame<T>, x: &[T]) -> Result<Vec<T>> {
    let sig = game.signature();
    sig.require_len(x.len(), "state")?;
    let ax = game.payoff().mul_vec(x);
    let avg = group_averages(sig, x, &ax);
    Ok((0..x.len())
        .map(|i| x[i].clone() * (ax[i].clone() - avg[sig.group_of(i)].clone()))
        .collect())
}

/// Allocation-free variant of [`vector_field`] for the integrator hot loop.
pub(crate) fn vector_field_into(sig: &Signature, a: &Matrix<f64>, x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = a.row(i);
        *o = (0..n).map(|j| row[j] * x[j]).sum();
    }
    for b in sig.blocks() {
        let avg: f64 = b.clone().map(|i| x[i] * out[i]).sum();
        for i in b {
            out[i] = x[i] * (out[i] - avg);
        }
    }
}

/// Relative fitness `(A x)_i - Σ_β (x^α)ᵀ A^{αβ} x^β` of every strategy.
pub fn relative_fitness<T: Scalar>(game: &PolymatrixGame<T>, x: &[T]) -> Result<Vec<T>> {
    let sig = game.signature();
    sig.require_len(x.len(), "state")?;
    let ax = game.payoff().mul_vec(x);
    let avg = group_averages(sig, x, &ax);
    Ok((0..x.len()).map(|i| ax[i].clone() - avg[sig.group_of(i)].clone()).collect())
}

/// Field in chart coordinates, `u̇ = -E A φ(u)`.
pub fn chart_field(game: &PolymatrixGame<f64>, u: &[f64]) -> Result<Vec<f64>> {
    let sig = game.signature();
    sig.require_chart_len(u.len())?;
    let x = phi(sig, u)?;
    let ax = game.payoff().mul_vec(&x);
    Ok(chart_velocity(sig, &ax))
}

/// `-E v` for the standard incidence matrix, computed blockwise.
pub(crate) fn chart_velocity(sig: &Signature, v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(sig.reduced_dim());
    for b in sig.blocks() {
        let last = v[b.end - 1];
        out.extend(v[b.start..b.end - 1].iter().map(|vi| vi - last));
    }
    out
}

/// Same as [`chart_field`], using the explicit incidence matrix. Kept for
/// cross-checking the blockwise shortcut.
pub fn chart_field_matrix_form(game: &PolymatrixGame<f64>, u: &[f64]) -> Result<Vec<f64>> {
    let sig = game.signature();
    let x = phi(sig, u)?;
    let e = incidence_matrix::<f64>(sig);
    let eax = e.mul_vec(&game.payoff().mul_vec(&x));
    Ok(eax.into_iter().map(|v| -v).collect())
}

type ScalingFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// State-dependent per-group scaling `λ_α(x)`, inducing
/// `D(x) = diag(λ_α(x) I_{n_α})`.
///
/// The functions are only evaluated, never differentiated.
#[derive(Clone)]
pub struct GeneralizedScaling {
    functions: Vec<ScalingFn>,
}

impl fmt::Debug for GeneralizedScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneralizedScaling({} groups)", self.functions.len())
    }
}

impl GeneralizedScaling {
    pub fn constant(lambda: &[f64]) -> Self {
        GeneralizedScaling {
            functions: lambda
                .iter()
                .map(|&l| Arc::new(move |_: &[f64]| l) as ScalingFn)
                .collect(),
        }
    }

    pub fn from_fns(functions: Vec<Box<dyn Fn(&[f64]) -> f64 + Send + Sync>>) -> Self {
        GeneralizedScaling {
            functions: functions.into_iter().map(Arc::from).collect(),
        }
    }

    pub fn groups(&self) -> usize {
        self.functions.len()
    }

    /// `λ(x)`, rejecting vanishing or non-finite values.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.functions
            .iter()
            .enumerate()
            .map(|(group, f)| {
                let l = f(x);
                if l == 0.0 || !l.is_finite() {
                    Err(Error::ZeroScaling { group })
                } else {
                    Ok(l)
                }
            })
            .collect()
    }
}

/// Generalized field `Y(x) = X_{A D(x)}(x)`:
/// `ẋ_i = x_i ((A D(x) x)_i - Σ_β λ_β(x) (x^α)ᵀ A^{αβ} x^β)`.
pub fn generalized_field(
    game: &PolymatrixGame<f64>,
    scaling: &GeneralizedScaling,
    x: &[f64],
) -> Result<Vec<f64>> {
    let sig = game.signature();
    sig.require_len(x.len(), "state")?;
    if scaling.groups() != sig.groups() {
        return Err(Error::DimensionMismatch(format!(
            "{} scaling functions for {} groups",
            scaling.groups(),
            sig.groups()
        )));
    }
    let lambda = scaling.evaluate(x)?;
    let dx: Vec<f64> = (0..x.len()).map(|j| lambda[sig.group_of(j)] * x[j]).collect();
    let adx = game.payoff().mul_vec(&dx);
    let a = game.payoff();
    let mut out = vec![0.0; x.len()];
    for ba in sig.blocks() {
        let mut avg = 0.0;
        for (beta, bb) in sig.blocks().enumerate() {
            let mut s = 0.0;
            for i in ba.clone() {
                for j in bb.clone() {
                    s += x[i] * a[(i, j)] * x[j];
                }
            }
            avg += lambda[beta] * s;
        }
        for i in ba {
            out[i] = x[i] * (adx[i] - avg);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game::PrismPoint;
    use crate::matrix::max_abs_diff;
    use crate::scalar::{rat, Rational};
    use num_traits::Zero;

    /// Scalar-by-scalar transcription of the polymatrix replicator.
    fn brute_force_field(a: &Matrix<f64>, parts: &[usize], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut group = Vec::new();
        for (g, &k) in parts.iter().enumerate() {
            group.extend(std::iter::repeat_n(g, k));
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut axi = 0.0;
            for j in 0..n {
                axi += a[(i, j)] * x[j];
            }
            let mut avg = 0.0;
            for k in 0..n {
                if group[k] != group[i] {
                    continue;
                }
                for j in 0..n {
                    avg += x[k] * a[(k, j)] * x[j];
                }
            }
            out[i] = x[i] * (axi - avg);
        }
        out
    }

    #[test]
    fn vanishes_at_example_equilibrium() {
        let ex = fixtures::example1();
        let v = vector_field(&ex.game, &ex.equilibrium).unwrap();
        assert!(v.iter().all(Zero::is_zero));
    }

    #[test]
    fn vanishes_at_vertices() {
        let ex = fixtures::example2();
        for support in ex.signature.vertices() {
            let p = PrismPoint::<Rational>::vertex(&ex.signature, &support).unwrap();
            assert!(vector_field(&ex.game, p.coords()).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn center_matches_brute_force() {
        let ex = fixtures::example1();
        let x = vec![0.5; 6];
        let v = vector_field(&ex.game.to_f64(), &x).unwrap();
        let oracle = brute_force_field(&ex.game.payoff().to_f64(), &[2, 2, 2], &x);
        assert!(max_abs_diff(&v, &oracle) <= 1e-15);
        // exact value at the center for the first strategy
        let exact = vector_field(&ex.game, &vec![rat(1, 2); 6]).unwrap();
        assert_eq!(exact[0].to_f64(), v[0]);
        assert!(v.iter().any(|c| c.abs() > 1e-3));
    }

    #[test]
    fn chart_forms_agree() {
        let ex = fixtures::example2();
        let g = ex.game.to_f64();
        let u = [0.3, -1.2, 0.7];
        let a = chart_field(&g, &u).unwrap();
        let b = chart_field_matrix_form(&g, &u).unwrap();
        assert!(max_abs_diff(&a, &b) <= 1e-15);
    }

    #[test]
    fn zero_scaling_rejected() {
        let g = fixtures::example1().game.to_f64();
        let s = GeneralizedScaling::constant(&[1.0, 0.0, 1.0]);
        assert_eq!(
            generalized_field(&g, &s, &[0.5; 6]),
            Err(Error::ZeroScaling { group: 1 })
        );
    }
}
