//! Formal equilibria, conservative decompositions `A ~ A0 D`, and the
//! Hamiltonian `H(x) = Σ_β λ_β Σ_{j∈β} q_j log x_j`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::{vector_field, GeneralizedScaling};
use crate::game::{block_sums, has_row_constant_blocks, is_block_constant, PolymatrixGame, Signature};
use crate::linsolve::{solve_linear_exact, LinearSolution};
use crate::matrix::{max_abs_diff, Matrix};
use crate::poisson::bivector;
use crate::scalar::{int, Rational, Scalar};

/// Above this many candidate vertices the interior search is skipped.
const MAX_VERTEX_CANDIDATES: usize = 50_000;

/// Affine set of formal equilibria `{q : A q block-constant, block sums 1}`
/// with a selected representative.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalEquilibrium {
    /// Representative: the minimum-norm solution, unless that lies outside
    /// the open prism while another solution lies inside; then a solution
    /// maximizing the smallest coordinate.
    pub q: Vec<Rational>,
    /// Basis of the direction space of the affine set.
    pub directions: Vec<Vec<Rational>>,
    /// `max over the set of min_j q_j`, when computed. Positive iff the set
    /// meets the open prism, non-negative iff it meets the prism.
    pub max_min_coordinate: Option<Rational>,
}

impl FormalEquilibrium {
    pub fn is_interior(&self) -> bool {
        self.q.iter().all(|v| v > &Rational::zero())
    }

    pub fn meets_interior(&self) -> Option<bool> {
        self.max_min_coordinate.as_ref().map(|t| t > &Rational::zero())
    }

    pub fn meets_prism(&self) -> Option<bool> {
        self.max_min_coordinate.as_ref().map(|t| t >= &Rational::zero())
    }

    pub fn q_f64(&self) -> Vec<f64> {
        self.q.iter().map(Scalar::to_f64).collect()
    }

    /// Replaces the representative by another member of the same set.
    pub fn with_representative(mut self, game: &PolymatrixGame<Rational>, q: Vec<Rational>) -> Result<Self> {
        if !is_formal_equilibrium(game, &q) {
            return Err(Error::NoSolution);
        }
        self.q = q;
        Ok(self)
    }
}

/// Conditions (a) and (b) of a formal equilibrium, checked exactly.
pub fn is_formal_equilibrium(game: &PolymatrixGame<Rational>, q: &[Rational]) -> bool {
    let sig = game.signature();
    q.len() == sig.total()
        && is_block_constant(sig, &game.payoff().mul_vec(q), 0.0)
        && block_sums(sig, q).iter().all(One::is_one)
}

/// Linear system whose solutions are the formal equilibria: consecutive row
/// differences within each group, plus one block-sum row per group.
pub fn formal_equilibrium_system(game: &PolymatrixGame<Rational>) -> (Matrix<Rational>, Vec<Rational>) {
    let sig = game.signature();
    let a = game.payoff();
    let n = sig.total();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for b in sig.blocks() {
        for i in b.start..b.end - 1 {
            rows.push((0..n).map(|j| &a[(i, j)] - &a[(i + 1, j)]).collect());
            rhs.push(Rational::zero());
        }
        rows.push((0..n).map(|j| if b.contains(&j) { Rational::one() } else { Rational::zero() }).collect());
        rhs.push(Rational::one());
    }
    (Matrix::from_rows(rows).expect("rows have length n"), rhs)
}

/// Solves for the formal equilibria of `game`.
pub fn formal_equilibria(game: &PolymatrixGame<Rational>) -> Result<FormalEquilibrium> {
    let (m, b) = formal_equilibrium_system(game);
    let LinearSolution { particular, nullspace } = solve_linear_exact(&m, &b)?;
    let min_norm = min_norm_point(&particular, &nullspace);
    let best = max_min_point(&particular, &nullspace);
    let min_norm_interior = min_norm.iter().all(|v| v > &Rational::zero());
    let (q, max_min) = match best {
        Some((point, t)) if t > Rational::zero() && !min_norm_interior => (point, Some(t)),
        Some((_, t)) => (min_norm, Some(t)),
        None => (min_norm, None),
    };
    Ok(FormalEquilibrium {
        q,
        directions: nullspace,
        max_min_coordinate: max_min,
    })
}

/// Point of `q0 + span(dirs)` closest to the origin.
fn min_norm_point(q0: &[Rational], dirs: &[Vec<Rational>]) -> Vec<Rational> {
    if dirs.is_empty() {
        return q0.to_vec();
    }
    let k = dirs.len();
    let gram = Matrix::from_fn(k, k, |i, j| dot(&dirs[i], &dirs[j]));
    let rhs: Vec<Rational> = dirs.iter().map(|d| dot(d, q0)).collect();
    let y = solve_linear_exact(&gram, &rhs).expect("directions are independent").particular;
    let mut q = q0.to_vec();
    for (d, c) in dirs.iter().zip(&y) {
        for (qi, di) in q.iter_mut().zip(d) {
            *qi -= c * di;
        }
    }
    q
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |s, (x, y)| s + x * y)
}

/// Maximizes `min_j q_j` over `q ∈ q0 + span(dirs)` by enumerating the
/// vertices of the epigraph polyhedron. The directions have zero block sums,
/// so the problem is bounded. Returns `None` when the enumeration is too large.
fn max_min_point(q0: &[Rational], dirs: &[Vec<Rational>]) -> Option<(Vec<Rational>, Rational)> {
    let n = q0.len();
    let k = dirs.len();
    if k == 0 {
        let t = q0.iter().min().cloned().unwrap_or_else(Rational::zero);
        return Some((q0.to_vec(), t));
    }
    if binomial(n, k + 1) > MAX_VERTEX_CANDIDATES {
        return None;
    }
    let mut best: Option<(Vec<Rational>, Rational)> = None;
    for active in combinations(n, k + 1) {
        // rows: Σ_c s_c d_c[i] - t = -q0[i]
        let m = Matrix::from_fn(k + 1, k + 1, |r, c| {
            if c < k {
                dirs[c][active[r]].clone()
            } else {
                -Rational::one()
            }
        });
        let rhs: Vec<Rational> = active.iter().map(|&i| -q0[i].clone()).collect();
        let Ok(sol) = solve_linear_exact(&m, &rhs) else {
            continue;
        };
        if !sol.nullspace.is_empty() {
            continue;
        }
        let t = sol.particular[k].clone();
        if best.as_ref().is_some_and(|(_, bt)| &t <= bt) {
            continue;
        }
        let mut point = q0.to_vec();
        for (d, c) in dirs.iter().zip(&sol.particular[..k]) {
            for (pi, di) in point.iter_mut().zip(d) {
                *pi += c * di;
            }
        }
        if point.iter().all(|v| v >= &t) {
            best = Some((point, t));
        }
    }
    best
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc: usize = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}

/// A certificate that `G` is conservative: `A - A0 D` has equal rows in each
/// block, `A0` is skew, every `λ_β ≠ 0`, and `q` is a formal equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservativeDecomposition {
    pub skew_model: Matrix<Rational>,
    pub lambda: Vec<Rational>,
    /// `p x n` matrix; row `α`, columns of group `β` hold `c^{αβ}` so that
    /// block `(α, β)` of `A - A0 D` is `𝟙 (c^{αβ})ᵀ`.
    pub adjusters: Matrix<Rational>,
    pub equilibrium: FormalEquilibrium,
}

impl ConservativeDecomposition {
    /// Diagonal of `D = diag(λ_α I_{n_α})`.
    pub fn scaling_diagonal(&self, sig: &Signature) -> Vec<Rational> {
        (0..sig.total()).map(|j| self.lambda[sig.group_of(j)].clone()).collect()
    }

    /// `A0 D`.
    pub fn scaled_model(&self, sig: &Signature) -> Matrix<Rational> {
        self.skew_model.mul(&Matrix::diagonal(&self.scaling_diagonal(sig)))
    }

    /// Block-expanded adjusters, `C` with `A = A0 D + C`.
    pub fn adjuster_matrix(&self, sig: &Signature) -> Matrix<Rational> {
        let n = sig.total();
        Matrix::from_fn(n, n, |i, j| self.adjusters[(sig.group_of(i), j)].clone())
    }

    pub fn skew_game(&self, sig: &Signature) -> PolymatrixGame<Rational> {
        PolymatrixGame::new(sig.clone(), self.skew_model.clone()).expect("model matches signature")
    }

    pub fn hamiltonian(&self, sig: &Signature) -> HamiltonianSpec {
        HamiltonianSpec::new(
            sig.clone(),
            self.equilibrium.q_f64(),
            self.lambda.iter().map(Scalar::to_f64).collect(),
        )
    }

    /// Rescales `λ` by `factor` and `A0` by its inverse, leaving `A0 D` unchanged.
    pub fn rescaled(&self, factor: &Rational) -> Self {
        let mut out = self.clone();
        out.lambda = self.lambda.iter().map(|l| l * factor).collect();
        out.skew_model = self.skew_model.scale(&factor.recip());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConservativeFailure {
    DimensionMismatch,
    NotSkew,
    ZeroScaling,
    /// `A - A0 D` has a block with unequal rows.
    NotEquivalent,
    /// The stored adjusters do not reproduce `A - A0 D`.
    AdjusterMismatch,
    NotFormalEquilibrium,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub failure: Option<ConservativeFailure>,
    /// `max |A0 + A0ᵀ|`.
    pub skew_defect: f64,
    /// Largest within-block row spread of `A - A0 D`.
    pub equivalence_defect: f64,
}

impl VerifyReport {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks every condition of a candidate decomposition exactly.
pub fn verify_conservative(game: &PolymatrixGame<Rational>, cand: &ConservativeDecomposition) -> VerifyReport {
    let sig = game.signature();
    let n = sig.total();
    let fail = |f| VerifyReport {
        failure: Some(f),
        skew_defect: f64::NAN,
        equivalence_defect: f64::NAN,
    };
    if cand.skew_model.nrows() != n
        || cand.skew_model.ncols() != n
        || cand.lambda.len() != sig.groups()
        || cand.adjusters.nrows() != sig.groups()
        || cand.adjusters.ncols() != n
        || cand.equilibrium.q.len() != n
    {
        return fail(ConservativeFailure::DimensionMismatch);
    }
    let a0 = &cand.skew_model;
    let skew_defect = a0.add(&a0.transpose()).max_abs();
    let diff = game.payoff().sub(&cand.scaled_model(sig));
    let equivalence_defect = (0..n)
        .flat_map(|i| {
            let last = sig.last_of(sig.group_of(i));
            let diff = &diff;
            (0..n).map(move |j| (&diff[(i, j)] - &diff[(last, j)]).to_f64().abs())
        })
        .fold(0.0, f64::max);
    let failure = if !a0.is_skew(0.0) {
        Some(ConservativeFailure::NotSkew)
    } else if cand.lambda.iter().any(Zero::is_zero) {
        Some(ConservativeFailure::ZeroScaling)
    } else if !has_row_constant_blocks(sig, &diff, 0.0) {
        Some(ConservativeFailure::NotEquivalent)
    } else if diff != cand.adjuster_matrix(sig) {
        Some(ConservativeFailure::AdjusterMismatch)
    } else if !is_formal_equilibrium(game, &cand.equilibrium.q) {
        Some(ConservativeFailure::NotFormalEquilibrium)
    } else {
        None
    };
    VerifyReport {
        failure,
        skew_defect,
        equivalence_defect,
    }
}

/// Builds the conservative game `(n, A0 D)` with `λ_α = Σ_{j∈α} q̃_j` and
/// formal equilibrium `q = D^{-1} q̃`.
pub fn make_conservative(
    skew_model: &Matrix<Rational>,
    sig: &Signature,
    qtilde: &[Rational],
) -> Result<(PolymatrixGame<Rational>, ConservativeDecomposition)> {
    let n = sig.total();
    if skew_model.nrows() != n || skew_model.ncols() != n || qtilde.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "skew model and point must have size {n}"
        )));
    }
    if !skew_model.is_skew(0.0) {
        return Err(Error::SkewViolation);
    }
    let image = skew_model.mul_vec(qtilde);
    for (group, b) in sig.blocks().enumerate() {
        if image[b.clone()].iter().any(|v| v != &image[b.end - 1]) {
            return Err(Error::BlockConstantViolation { group });
        }
    }
    let lambda = block_sums(sig, qtilde);
    if let Some(group) = lambda.iter().position(Zero::is_zero) {
        return Err(Error::ZeroBlockSum { group });
    }
    let q: Vec<Rational> = (0..n).map(|j| &qtilde[j] / &lambda[sig.group_of(j)]).collect();
    let mut decomposition = ConservativeDecomposition {
        skew_model: skew_model.clone(),
        lambda,
        adjusters: Matrix::zeros(sig.groups(), n),
        equilibrium: FormalEquilibrium {
            q: Vec::new(),
            directions: Vec::new(),
            max_min_coordinate: None,
        },
    };
    let game = PolymatrixGame::new(sig.clone(), decomposition.scaled_model(sig))?;
    decomposition.equilibrium = formal_equilibria(&game)?.with_representative(&game, q)?;
    Ok((game, decomposition))
}

#[derive(Debug, Clone, PartialEq)]
pub enum NotConservativeReason {
    /// Every solution of the linearized system has `μ_α = 0` for this group.
    ScalingForcedZero { group: usize },
    /// The reconstructed model failed the exact skewness check.
    ModelNotSkew,
    NoFormalEquilibrium,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detection {
    Conservative(ConservativeDecomposition),
    NotConservative(NotConservativeReason),
}

impl Detection {
    pub fn decomposition(&self) -> Option<&ConservativeDecomposition> {
        match self {
            Detection::Conservative(d) => Some(d),
            Detection::NotConservative(_) => None,
        }
    }
}

/// Unknown layout of the linearized conservativity system: `μ_α` first, then
/// the vectors `d^{αβ}` (length `n_β`) in row-major group order.
struct DetectionLayout<'a> {
    sig: &'a Signature,
}

impl DetectionLayout<'_> {
    fn mu(&self, alpha: usize) -> usize {
        alpha
    }

    fn d(&self, alpha: usize, beta: usize, k: usize) -> usize {
        let p = self.sig.groups();
        p + alpha * self.sig.total() + self.sig.block(beta).start + k
    }

    fn unknowns(&self) -> usize {
        let p = self.sig.groups();
        p + p * self.sig.total()
    }
}

/// Searches for a decomposition `A ~ A0 D`.
///
/// With `μ_α = 1/λ_α` and `d^{αβ} = μ_β c^{αβ}` the conditions become the
/// homogeneous linear system
/// `μ_β A^{αβ} + μ_α (A^{βα})ᵀ = 𝟙 (d^{αβ})ᵀ + d^{βα} 𝟙ᵀ` for all `α ≤ β`.
/// A solution with every `μ_α ≠ 0` is normalized to `μ_1 = 1`.
pub fn detect_conservative(game: &PolymatrixGame<Rational>) -> Detection {
    let sig = game.signature();
    let a = game.payoff();
    let p = sig.groups();
    let layout = DetectionLayout { sig };
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for alpha in 0..p {
        for beta in alpha..p {
            for (ai, i) in sig.block(alpha).enumerate() {
                for (bj, j) in sig.block(beta).enumerate() {
                    let mut row = vec![Rational::zero(); layout.unknowns()];
                    row[layout.mu(beta)] += &a[(i, j)];
                    row[layout.mu(alpha)] += &a[(j, i)];
                    row[layout.d(alpha, beta, bj)] -= Rational::one();
                    row[layout.d(beta, alpha, ai)] -= Rational::one();
                    rows.push(row);
                }
            }
        }
    }
    let system = Matrix::from_rows(rows).expect("uniform row length");
    let basis = crate::linsolve::nullspace(&system);
    let mu_of = |v: &Vec<Rational>| -> Vec<Rational> { (0..p).map(|g| v[layout.mu(g)].clone()).collect() };
    for group in 0..p {
        if basis.iter().all(|v| v[layout.mu(group)].is_zero()) {
            return Detection::NotConservative(NotConservativeReason::ScalingForcedZero { group });
        }
    }
    // Each μ_α is a nonzero polynomial of degree < dim in t along the curve
    // Σ t^i v_i, so some t ≤ p·dim + 1 makes all of them nonzero.
    let dim = basis.len();
    let combo = (1..=(p * dim + 1) as i64)
        .map(|t| {
            let mut v = vec![Rational::zero(); layout.unknowns()];
            let mut w = Rational::one();
            for b in &basis {
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += &w * bi;
                }
                w *= int(t);
            }
            v
        })
        .find(|v| mu_of(v).iter().all(|m| !m.is_zero()))
        .expect("a nonvanishing combination exists");
    let scale = combo[layout.mu(0)].recip();
    let sol: Vec<Rational> = combo.iter().map(|v| v * &scale).collect();
    let mu = mu_of(&sol);
    let n = sig.total();
    let skew_model = Matrix::from_fn(n, n, |i, j| {
        let alpha = sig.group_of(i);
        let beta = sig.group_of(j);
        let k = j - sig.block(beta).start;
        &mu[beta] * &a[(i, j)] - &sol[layout.d(alpha, beta, k)]
    });
    if !skew_model.is_skew(0.0) {
        return Detection::NotConservative(NotConservativeReason::ModelNotSkew);
    }
    let adjusters = Matrix::from_fn(p, n, |alpha, j| {
        let beta = sig.group_of(j);
        let k = j - sig.block(beta).start;
        &sol[layout.d(alpha, beta, k)] / &mu[beta]
    });
    let Ok(equilibrium) = formal_equilibria(game) else {
        return Detection::NotConservative(NotConservativeReason::NoFormalEquilibrium);
    };
    Detection::Conservative(ConservativeDecomposition {
        skew_model,
        lambda: mu.iter().map(Rational::recip).collect(),
        adjusters,
        equilibrium,
    })
}

/// Evaluator for `H(x) = Σ_β λ_β Σ_{j∈β} q_j log x_j` and its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    signature: Signature,
    pub q: Vec<f64>,
    pub lambda: Vec<f64>,
    weights: Vec<f64>,
}

impl HamiltonianSpec {
    pub fn new(signature: Signature, q: Vec<f64>, lambda: Vec<f64>) -> Self {
        let weights = (0..signature.total())
            .map(|j| lambda[signature.group_of(j)] * q[j])
            .collect();
        HamiltonianSpec { signature, q, lambda, weights }
    }

    /// `Σ_j q_j log x_j`, i.e. unit scaling.
    pub fn unscaled(signature: Signature, q: Vec<f64>) -> Self {
        let lambda = vec![1.0; signature.groups()];
        HamiltonianSpec::new(signature, q, lambda)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        self.signature.require_len(x.len(), "point")?;
        match (0..x.len()).find(|&j| self.weights[j] != 0.0 && !(x[j] > 0.0)) {
            Some(index) => Err(Error::DomainError { index, value: x[index] }),
            None => Ok(()),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self
            .weights
            .iter()
            .zip(x)
            .filter(|(w, _)| **w != 0.0)
            .map(|(w, v)| w * v.ln())
            .sum())
    }

    /// Components `λ_β q_j / x_j`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        Ok(self
            .weights
            .iter()
            .zip(x)
            .map(|(w, v)| if *w == 0.0 { 0.0 } else { w / v })
            .collect())
    }
}

pub fn hamiltonian(spec: &HamiltonianSpec, x: &[f64]) -> Result<f64> {
    spec.value(x)
}

pub fn hamiltonian_gradient(spec: &HamiltonianSpec, x: &[f64]) -> Result<Vec<f64>> {
    spec.gradient(x)
}

/// The 1-form `ξ(x)` with components `λ_α(x) q_j / x_j`.
pub fn xi_form(sig: &Signature, q: &[f64], scaling: &GeneralizedScaling, x: &[f64]) -> Result<Vec<f64>> {
    sig.require_len(x.len(), "point")?;
    sig.require_len(q.len(), "equilibrium")?;
    if let Some(index) = x.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::BoundaryPoint { index, value: x[index] });
    }
    let lambda = scaling.evaluate(x)?;
    Ok((0..x.len()).map(|j| lambda[sig.group_of(j)] * q[j] / x[j]).collect())
}

/// `‖X_A(x) - π_{A0}(x) ∇H(x)‖_max` for a conservative decomposition.
pub fn hamiltonian_identity_residual(
    game: &PolymatrixGame<f64>,
    skew_model: &PolymatrixGame<f64>,
    spec: &HamiltonianSpec,
    x: &[f64],
) -> Result<f64> {
    let field = vector_field(game, x)?;
    let grad = spec.gradient(x)?;
    let pi = bivector(skew_model, x)?.matrix;
    Ok(max_abs_diff(&field, &pi.mul_vec(&grad)))
}
