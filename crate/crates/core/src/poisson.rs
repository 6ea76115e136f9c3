//! The bivector `π_A`, the reduced constant structure `B = -E A Eᵀ`, the
//! softmax chart `φ`, and numerical checks of the Poisson property.
//!
//! For skew `A`, `φ : ℝ^{n-p} → Γ°` pulls `π_A` back to the constant bracket
//! given by `B`, so symplectic leaves are `φ`-images of the affine subspaces
//! `u + col(B)` and every kernel vector `w` of `B` yields a Casimir
//! `x ↦ w · φ⁻¹(x)`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::{PolymatrixGame, Signature};
use crate::linsolve::{nullspace, rank};
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar, FLOAT_TOL};

/// Block-diagonal `(n-p) x n` matrix `E = diag(E_α)`, where row `j` of `E_α`
/// is `-e_j + e_{n_α}`.
pub fn incidence_matrix<T: Scalar>(sig: &Signature) -> Matrix<T> {
    let mut e = Matrix::zeros(sig.reduced_dim(), sig.total());
    let mut row = 0;
    for b in sig.blocks() {
        for j in b.start..b.end - 1 {
            e[(row, j)] = -T::one();
            e[(row, b.end - 1)] = T::one();
            row += 1;
        }
    }
    e
}

/// `B = -E A Eᵀ` for an arbitrary incidence basis `e`.
pub fn reduced_structure_with<T: Scalar>(e: &Matrix<T>, a: &Matrix<T>) -> Matrix<T> {
    e.mul(a).mul(&e.transpose()).neg()
}

/// `B = -E A Eᵀ` for the standard incidence matrix.
pub fn reduced_structure<T: Scalar>(sig: &Signature, a: &Matrix<T>) -> Matrix<T> {
    reduced_structure_with(&incidence_matrix(sig), a)
}

/// Softmax chart with the last strategy of each group as pivot:
/// `φ^α(u^α) = (e^{u_1}, …, e^{u_{n_α-1}}, 1) / (1 + Σ e^{u_i})`.
pub fn phi(sig: &Signature, u: &[f64]) -> Result<Vec<f64>> {
    sig.require_chart_len(u.len())?;
    let mut x = Vec::with_capacity(sig.total());
    for g in 0..sig.groups() {
        let ub = &u[sig.chart_block(g)];
        let shift = ub.iter().copied().fold(0.0_f64, f64::max);
        let pivot = (-shift).exp();
        let exps: Vec<f64> = ub.iter().map(|v| (v - shift).exp()).collect();
        let total = pivot + exps.iter().sum::<f64>();
        x.extend(exps.iter().map(|e| e / total));
        x.push(pivot / total);
    }
    Ok(x)
}

/// Inverse chart, `u^α_i = log(x_i / x_{n_α})`.
pub fn phi_inverse(sig: &Signature, x: &[f64]) -> Result<Vec<f64>> {
    sig.require_len(x.len(), "point")?;
    check_positive(x)?;
    let mut u = Vec::with_capacity(sig.reduced_dim());
    for b in sig.blocks() {
        let last = x[b.end - 1].ln();
        u.extend(x[b.start..b.end - 1].iter().map(|v| v.ln() - last));
    }
    Ok(u)
}

fn check_positive(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !(*v > 0.0)) {
        Some(index) => Err(Error::BoundaryPoint { index, value: x[index] }),
        None => Ok(()),
    }
}

/// Jacobian `dφ(u)`, an `n x (n-p)` block-diagonal matrix with blocks
/// `∂φ_i/∂u_j = δ_ij φ_i - φ_i φ_j`.
pub fn jacobian_phi(sig: &Signature, u: &[f64]) -> Result<Matrix<f64>> {
    let x = phi(sig, u)?;
    let mut jac = Matrix::zeros(sig.total(), sig.reduced_dim());
    for g in 0..sig.groups() {
        let rows = sig.block(g);
        let cols = sig.chart_block(g);
        for (ii, i) in rows.clone().enumerate() {
            for (jj, c) in cols.clone().enumerate() {
                let j = rows.start + jj;
                let delta = if ii == jj { x[i] } else { 0.0 };
                jac[(i, c)] = delta - x[i] * x[j];
            }
        }
    }
    Ok(jac)
}

/// Block-diagonal `T_x = diag(x^α 𝟙ᵀ - I)`.
pub fn transition_matrix<T: Scalar>(sig: &Signature, x: &[T]) -> Matrix<T> {
    let n = sig.total();
    let mut t = Matrix::zeros(n, n);
    for b in sig.blocks() {
        for i in b.clone() {
            for j in b.clone() {
                t[(i, j)] = if i == j { x[i].clone() - T::one() } else { x[i].clone() };
            }
        }
    }
    t
}

/// `π_A(x)` together with its factors `T_x` and `D_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivectorValue<T> {
    pub matrix: Matrix<T>,
    pub t_x: Matrix<T>,
    pub d_x: Matrix<T>,
}

/// `π_A(x) = -T_x D_x A D_x T_xᵀ`, defined for any `A` and any `x ∈ ℝⁿ`.
pub fn bivector<T: Scalar>(game: &PolymatrixGame<T>, x: &[T]) -> Result<BivectorValue<T>> {
    let sig = game.signature();
    sig.require_len(x.len(), "point")?;
    let t_x = transition_matrix(sig, x);
    let d_x = Matrix::diagonal(x);
    let td = t_x.mul(&d_x);
    let matrix = td.mul(game.payoff()).mul(&td.transpose()).neg();
    Ok(BivectorValue { matrix, t_x, d_x })
}

/// Per-point sums shared by the entrywise formula and its partials:
/// `row[i][β] = (A^{αβ} x^β)_i`, `col[j][α] = ((A^{αβ})ᵀ x^α)_j`,
/// `quad[α][β] = (x^α)ᵀ A^{αβ} x^β`.
struct BlockSums<T> {
    row: Vec<Vec<T>>,
    col: Vec<Vec<T>>,
    quad: Vec<Vec<T>>,
}

impl<T: Scalar> BlockSums<T> {
    fn new(sig: &Signature, a: &Matrix<T>, x: &[T]) -> Self {
        let n = sig.total();
        let row: Vec<Vec<T>> = (0..n)
            .map(|i| {
                sig.blocks()
                    .map(|bb| bb.fold(T::zero(), |s, m| s + a[(i, m)].clone() * x[m].clone()))
                    .collect()
            })
            .collect();
        let col = (0..n)
            .map(|j| {
                sig.blocks()
                    .map(|ba| ba.fold(T::zero(), |s, k| s + x[k].clone() * a[(k, j)].clone()))
                    .collect()
            })
            .collect();
        let p = sig.groups();
        let quad = sig
            .blocks()
            .map(|ba| {
                (0..p)
                    .map(|beta| ba.clone().fold(T::zero(), |s, k| s + x[k].clone() * row[k][beta].clone()))
                    .collect()
            })
            .collect();
        BlockSums { row, col, quad }
    }

    /// `π_ij / (x_i x_j)`.
    fn factor(&self, a: &Matrix<T>, sig: &Signature, i: usize, j: usize) -> T {
        let alpha = sig.group_of(i);
        let beta = sig.group_of(j);
        -a[(i, j)].clone() + self.row[i][beta].clone() + self.col[j][alpha].clone() - self.quad[alpha][beta].clone()
    }
}

/// Entrywise form of `π_A(x)`: for `(i, j) ∈ α × β`,
/// `x_i x_j (-a_ij + (A^{αβ} x^β)_i + ((A^{αβ})ᵀ x^α)_j - (x^α)ᵀ A^{αβ} x^β)`.
pub fn bivector_entrywise<T: Scalar>(game: &PolymatrixGame<T>, x: &[T]) -> Result<Matrix<T>> {
    let sig = game.signature();
    sig.require_len(x.len(), "point")?;
    let a = game.payoff();
    let sums = BlockSums::new(sig, a, x);
    let n = sig.total();
    Ok(Matrix::from_fn(n, n, |i, j| {
        x[i].clone() * x[j].clone() * sums.factor(a, sig, i, j)
    }))
}

/// Exact partial derivative `∂π_A/∂x_l` at `x`, from the product rule applied
/// to the entrywise formula.
pub fn bivector_partial<T: Scalar>(game: &PolymatrixGame<T>, x: &[T], l: usize) -> Result<Matrix<T>> {
    let sig = game.signature();
    sig.require_len(x.len(), "point")?;
    if l >= x.len() {
        return Err(Error::DimensionMismatch(format!("no coordinate {l}")));
    }
    let sums = BlockSums::new(sig, game.payoff(), x);
    Ok(partial_with(game, x, l, &sums))
}

fn partial_with<T: Scalar>(game: &PolymatrixGame<T>, x: &[T], l: usize, sums: &BlockSums<T>) -> Matrix<T> {
    let sig = game.signature();
    let a = game.payoff();
    let n = sig.total();
    let gl = sig.group_of(l);
    Matrix::from_fn(n, n, |i, j| {
        let alpha = sig.group_of(i);
        let beta = sig.group_of(j);
        let mut out = T::zero();
        // derivative of the x_i x_j prefactor
        if i == l || j == l {
            let mut d = T::zero();
            if i == l {
                d = d + x[j].clone();
            }
            if j == l {
                d = d + x[i].clone();
            }
            out = out + d * sums.factor(a, sig, i, j);
        }
        let mut df = T::zero();
        if gl == beta {
            df = df + a[(i, l)].clone() - sums.col[l][alpha].clone();
        }
        if gl == alpha {
            df = df + a[(l, j)].clone() - sums.row[l][beta].clone();
        }
        if df.is_zero() {
            out
        } else {
            out + x[i].clone() * x[j].clone() * df
        }
    })
}

/// Error unless the payoff is skew-symmetric (exactly for rationals, within
/// [`FLOAT_TOL`] for floats).
pub fn require_skew<T: Scalar>(game: &PolymatrixGame<T>) -> Result<()> {
    if game.is_skew(FLOAT_TOL) {
        return Ok(());
    }
    let a = game.payoff();
    let defect = a.add(&a.transpose()).max_abs();
    Err(Error::NotSkew(defect))
}

/// `‖dφ(u) B dφ(u)ᵀ - π_A(φ(u))‖_max`, which vanishes when `φ` is a Poisson map.
pub fn check_poisson_map<T: Scalar>(game: &PolymatrixGame<T>, u: &[f64]) -> Result<f64> {
    require_skew(game)?;
    let g = game.to_f64();
    let sig = g.signature();
    let b = reduced_structure(sig, g.payoff());
    let jac = jacobian_phi(sig, u)?;
    let pulled = jac.mul(&b).mul(&jac.transpose());
    let x = phi(sig, u)?;
    let pi = bivector(&g, &x)?.matrix;
    Ok(pulled.sub(&pi).max_abs())
}

/// Cyclic Jacobi sum `Σ_l ∂_l π_ij π_lk + ∂_l π_jk π_li + ∂_l π_ki π_lj`
/// maximized over triples, given the partials `d[l] = ∂π/∂x_l`. For skew `π`
/// the sum is totally antisymmetric in `(i, j, k)`, so `i < j < k` suffices.
fn jacobi_max<T: Scalar>(pi: &Matrix<T>, d: &[Matrix<T>]) -> T {
    let n = pi.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let mut s = T::zero();
                for (l, dl) in d.iter().enumerate() {
                    s = s
                        + dl[(i, j)].clone() * pi[(l, k)].clone()
                        + dl[(j, k)].clone() * pi[(l, i)].clone()
                        + dl[(k, i)].clone() * pi[(l, j)].clone();
                }
                let s = s.abs_val();
                if s > worst {
                    worst = s;
                }
            }
        }
    }
    worst
}

/// Default finite-difference step for [`jacobi_residual_fd`].
pub const JACOBI_FD_STEP: f64 = 1e-5;

/// Jacobi residual with partials by central differences of step `h`.
pub fn jacobi_residual_fd<T: Scalar>(game: &PolymatrixGame<T>, x: &[f64], h: f64) -> Result<f64> {
    require_skew(game)?;
    let g = game.to_f64();
    g.signature().require_len(x.len(), "point")?;
    let pi = bivector(&g, x)?.matrix;
    let partials = (0..x.len())
        .map(|l| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[l] += h;
            xm[l] -= h;
            let fp = bivector(&g, &xp)?.matrix;
            let fm = bivector(&g, &xm)?.matrix;
            Ok(fp.sub(&fm).scale(&(0.5 / h)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(jacobi_max(&pi, &partials))
}

/// Jacobi residual with exact polynomial partials; zero for skew `A`.
pub fn jacobi_residual_exact(game: &PolymatrixGame<Rational>, x: &[Rational]) -> Result<Rational> {
    require_skew(game)?;
    let pi = bivector_entrywise(game, x)?;
    let sums = BlockSums::new(game.signature(), game.payoff(), x);
    let partials: Vec<_> = (0..x.len()).map(|l| partial_with(game, x, l, &sums)).collect();
    Ok(jacobi_max(&pi, &partials))
}

/// Hamiltonian vector field `X_H(x) = π_A(x) dH(x)`.
pub fn hamiltonian_field<T: Scalar>(game: &PolymatrixGame<T>, grad: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    require_skew(game)?;
    let g = game.to_f64();
    g.signature().require_len(grad.len(), "gradient")?;
    if let Some(i) = grad.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteGradient(i));
    }
    Ok(bivector(&g, x)?.matrix.mul_vec(grad))
}

/// Reduced structure of a payoff matrix and the kernel vectors that label
/// its symplectic leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonData {
    signature: Signature,
    pub incidence: Matrix<Rational>,
    pub reduced: Matrix<Rational>,
    pub rank: usize,
    /// Exact kernel basis of `reduced`, each vector with its last free
    /// coordinate equal to one.
    pub kernel: Vec<Vec<Rational>>,
    /// `Eᵀ w` for every kernel vector `w`; the leaf invariant is
    /// `-(Eᵀ w) · log x`.
    log_weights: Vec<Vec<f64>>,
}

impl PoissonData {
    /// Data for the standard incidence matrix, matching the chart `φ`.
    pub fn new(sig: &Signature, a: &Matrix<Rational>) -> Result<Self> {
        Self::with_incidence(sig, a, incidence_matrix(sig))
    }

    /// Data for another basis of the block-sum-zero covectors. The rows of
    /// `e` must have zero block sums and rank `n - p`.
    pub fn with_incidence(sig: &Signature, a: &Matrix<Rational>, e: Matrix<Rational>) -> Result<Self> {
        let n = sig.total();
        if !a.is_square() || a.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "payoff is {}x{}, signature total is {n}",
                a.nrows(),
                a.ncols()
            )));
        }
        if e.nrows() != sig.reduced_dim() || e.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "incidence matrix must be {}x{n}",
                sig.reduced_dim()
            )));
        }
        let zero_sums = e.rows_iter().all(|row| {
            sig.blocks()
                .all(|b| row[b].iter().fold(Rational::zero(), |s, v| s + v).is_zero())
        });
        if !zero_sums || rank(&e) != sig.reduced_dim() {
            return Err(Error::DimensionMismatch(
                "incidence rows must span the block-sum-zero covectors".into(),
            ));
        }
        let reduced = reduced_structure_with(&e, a);
        let kernel = nullspace(&reduced);
        let et = e.transpose();
        let log_weights = kernel
            .iter()
            .map(|w| et.mul_vec(w).iter().map(Scalar::to_f64).collect())
            .collect();
        Ok(PoissonData {
            signature: sig.clone(),
            rank: reduced.nrows() - kernel.len(),
            incidence: e,
            reduced,
            kernel,
            log_weights,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Leaf invariants `-(Eᵀ w) · log x`; with the standard incidence matrix
    /// this is `w · φ⁻¹(x)`.
    pub fn leaf_invariant(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.signature.require_len(x.len(), "point")?;
        check_positive(x)?;
        let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        Ok(self
            .log_weights
            .iter()
            .map(|c| -c.iter().zip(&logs).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }

    /// Gradient in `x` of the `k`-th leaf invariant: `-(Eᵀ w)_j / x_j`.
    pub fn casimir_gradient(&self, k: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.signature.require_len(x.len(), "point")?;
        check_positive(x)?;
        Ok(self.log_weights[k].iter().zip(x).map(|(c, v)| -c / v).collect())
    }

    /// Kernel vectors as floats.
    pub fn kernel_f64(&self) -> Vec<Vec<f64>> {
        self.kernel
            .iter()
            .map(|w| w.iter().map(Scalar::to_f64).collect())
            .collect()
    }

    pub fn is_standard(&self) -> bool {
        self.incidence == incidence_matrix(&self.signature)
    }
}

/// [`PoissonData`] of a game's own payoff matrix.
pub fn build_poisson_data(game: &PolymatrixGame<Rational>) -> PoissonData {
    PoissonData::new(game.signature(), game.payoff()).expect("game dimensions are consistent")
}

/// Leaf invariants `w · φ⁻¹(x)` at an interior point.
pub fn leaf_invariant(data: &PoissonData, x: &[f64]) -> Result<Vec<f64>> {
    data.leaf_invariant(x)
}

/// Whether two vectors are proportional by a nonzero factor.
pub fn proportional(a: &[Rational], b: &[Rational]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some(k) = a.iter().position(|v| !v.is_zero()) else {
        return b.iter().all(Zero::is_zero);
    };
    if b[k].is_zero() {
        return false;
    }
    let factor = &b[k] / &a[k];
    a.iter().zip(b).all(|(x, y)| x * &factor == *y)
}
