//! Polymatrix games: signatures, payoff blocks, equivalence, faces and equilibria.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar, FLOAT_TOL};

/// Block sum tolerance used when validating floating-point prism points.
pub const PRISM_TOL: f64 = 1e-9;

/// Per-group strategy counts `(n_1, ..., n_p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    parts: Vec<usize>,
    offsets: Vec<usize>,
}

impl Signature {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyGroup { group: 0 });
        }
        if let Some(group) = parts.iter().position(|&n| n == 0) {
            return Err(Error::EmptyGroup { group });
        }
        let mut offsets = Vec::with_capacity(parts.len() + 1);
        offsets.push(0);
        for &n in &parts {
            offsets.push(offsets.last().unwrap() + n);
        }
        Ok(Signature { parts, offsets })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of groups `p`.
    pub fn groups(&self) -> usize {
        self.parts.len()
    }

    /// Total number of strategies `n`.
    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Dimension `n - p` of the prism.
    pub fn reduced_dim(&self) -> usize {
        self.total() - self.groups()
    }

    pub fn block(&self, group: usize) -> Range<usize> {
        self.offsets[group]..self.offsets[group + 1]
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.groups()).map(|g| self.block(g))
    }

    /// Last strategy of a group (the pivot of the chart).
    pub fn last_of(&self, group: usize) -> usize {
        self.offsets[group + 1] - 1
    }

    pub fn group_of(&self, strategy: usize) -> usize {
        debug_assert!(strategy < self.total());
        self.offsets.partition_point(|&o| o <= strategy) - 1
    }

    /// Range of chart coordinates belonging to a group.
    pub fn chart_block(&self, group: usize) -> Range<usize> {
        let start = self.offsets[group] - group;
        start..start + self.parts[group] - 1
    }

    /// Drops the last coordinate of every block, giving the cube/prism model
    /// coordinates used to draw low-dimensional examples.
    pub fn model_coordinates<T: Clone>(&self, x: &[T]) -> Vec<T> {
        self.blocks()
            .flat_map(|b| x[b.start..b.end - 1].to_vec())
            .collect()
    }

    /// Every vertex of the prism, as support index lists (one strategy per group).
    pub fn vertices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for block in self.blocks() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    block.clone().map(move |s| {
                        let mut v = prefix.clone();
                        v.push(s);
                        v
                    })
                })
                .collect();
        }
        out
    }

    fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.total() {
            return Err(Error::DimensionMismatch(format!(
                "{what} has length {len}, signature total is {}",
                self.total()
            )));
        }
        Ok(())
    }

    pub(crate) fn require_len(&self, len: usize, what: &str) -> Result<()> {
        self.check_len(len, what)
    }

    pub(crate) fn require_chart_len(&self, len: usize) -> Result<()> {
        if len != self.reduced_dim() {
            return Err(Error::DimensionMismatch(format!(
                "chart point has length {len}, expected {}",
                self.reduced_dim()
            )));
        }
        Ok(())
    }
}

/// A signature together with an `n x n` payoff matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymatrixGame<T = Rational> {
    signature: Signature,
    payoff: Matrix<T>,
}

impl<T: Scalar> PolymatrixGame<T> {
    pub fn new(signature: Signature, payoff: Matrix<T>) -> Result<Self> {
        if !payoff.is_square() || payoff.nrows() != signature.total() {
            return Err(Error::DimensionMismatch(format!(
                "payoff is {}x{} but signature total is {}",
                payoff.nrows(),
                payoff.ncols(),
                signature.total()
            )));
        }
        Ok(PolymatrixGame { signature, payoff })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn payoff(&self) -> &Matrix<T> {
        &self.payoff
    }

    pub fn n(&self) -> usize {
        self.signature.total()
    }

    /// Block `A^{αβ}`.
    pub fn block(&self, alpha: usize, beta: usize) -> Matrix<T> {
        let rows: Vec<usize> = self.signature.block(alpha).collect();
        let cols: Vec<usize> = self.signature.block(beta).collect();
        self.payoff.select(&rows, &cols)
    }

    pub fn is_skew(&self, tol: f64) -> bool {
        self.payoff.is_skew(tol)
    }

    pub fn to_f64(&self) -> PolymatrixGame<f64> {
        PolymatrixGame {
            signature: self.signature.clone(),
            payoff: self.payoff.to_f64(),
        }
    }
}

impl PolymatrixGame<f64> {
    pub fn to_rational(&self) -> Option<PolymatrixGame<Rational>> {
        Some(PolymatrixGame {
            signature: self.signature.clone(),
            payoff: self.payoff.to_rational()?,
        })
    }
}

/// Checks a signature and a row list and assembles the game.
pub fn validate_game<T: Scalar>(parts: &[usize], rows: Vec<Vec<T>>) -> Result<PolymatrixGame<T>> {
    let signature = Signature::new(parts.to_vec())?;
    let n = signature.total();
    if rows.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "payoff has {} rows, signature total is {n}",
            rows.len()
        )));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "payoff row {} has {} entries, expected {n}",
            i + 1,
            row.len()
        )));
    }
    let payoff = Matrix::from_rows(rows).expect("row lengths checked");
    PolymatrixGame::new(signature, payoff)
}

/// Normal form of the equivalence class: within every block, the last row is
/// subtracted from each row so that the last row of each block vanishes.
pub fn canonical_form<T: Scalar>(game: &PolymatrixGame<T>) -> Matrix<T> {
    let sig = game.signature();
    let a = game.payoff();
    Matrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        let last = sig.last_of(sig.group_of(i));
        a[(i, j)].clone() - a[(last, j)].clone()
    })
}

/// Whether the two games define the same replicator field, i.e. every block
/// of `A - B` has equal rows. Float entries are compared within [`FLOAT_TOL`].
pub fn games_equivalent<T: Scalar>(g1: &PolymatrixGame<T>, g2: &PolymatrixGame<T>) -> Result<bool> {
    games_equivalent_with_tol(g1, g2, FLOAT_TOL)
}

pub fn games_equivalent_with_tol<T: Scalar>(
    g1: &PolymatrixGame<T>,
    g2: &PolymatrixGame<T>,
    tol: f64,
) -> Result<bool> {
    if g1.signature() != g2.signature() {
        return Err(Error::SignatureMismatch {
            left: g1.signature().parts().to_vec(),
            right: g2.signature().parts().to_vec(),
        });
    }
    let c1 = canonical_form(g1);
    let c2 = canonical_form(g2);
    Ok(c1.sub(&c2).is_zero_matrix(tol))
}

/// Whether every block of `m` (partitioned by `sig` on both sides) has equal rows.
pub fn has_row_constant_blocks<T: Scalar>(sig: &Signature, m: &Matrix<T>, tol: f64) -> bool {
    (0..m.nrows()).all(|i| {
        let last = sig.last_of(sig.group_of(i));
        (0..m.ncols()).all(|j| (m[(i, j)].clone() - m[(last, j)].clone()).is_negligible(tol))
    })
}

/// Whether `v` is constant within every block.
pub fn is_block_constant<T: Scalar>(sig: &Signature, v: &[T], tol: f64) -> bool {
    sig.blocks().all(|b| {
        let last = v[b.end - 1].clone();
        v[b].iter().all(|x| (x.clone() - last.clone()).is_negligible(tol))
    })
}

pub fn block_sums<T: Scalar>(sig: &Signature, v: &[T]) -> Vec<T> {
    sig.blocks()
        .map(|b| v[b].iter().fold(T::zero(), |acc, x| acc + x.clone()))
        .collect()
}

/// A subset `I` of strategies meeting every group, identifying the face `σ_I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceIndexSet {
    indices: Vec<usize>,
    restricted: Signature,
}

impl FaceIndexSet {
    /// Zero-based strategy indices; order and duplicates are normalized away.
    pub fn new(sig: &Signature, indices: &[usize]) -> Result<Self> {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if let Some(&bad) = idx.iter().find(|&&i| i >= sig.total()) {
            return Err(Error::InvalidFace(format!("index {bad} out of range")));
        }
        let parts: Vec<usize> = sig
            .blocks()
            .map(|b| idx.iter().filter(|i| b.contains(i)).count())
            .collect();
        if let Some(group) = parts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidFace(format!("group {} is emptied", group + 1)));
        }
        Ok(FaceIndexSet {
            indices: idx,
            restricted: Signature::new(parts)?,
        })
    }

    pub fn full(sig: &Signature) -> Self {
        FaceIndexSet {
            indices: (0..sig.total()).collect(),
            restricted: sig.clone(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn restricted_signature(&self) -> &Signature {
        &self.restricted
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Coordinates of `x` indexed by the face.
    pub fn project<T: Clone>(&self, x: &[T]) -> Vec<T> {
        self.indices.iter().map(|&i| x[i].clone()).collect()
    }
}

/// The restricted game `G|_I`.
pub fn restrict<T: Scalar>(game: &PolymatrixGame<T>, face: &FaceIndexSet) -> Result<PolymatrixGame<T>> {
    if face.indices().last().is_some_and(|&i| i >= game.n()) {
        return Err(Error::InvalidFace("face indices exceed the game size".into()));
    }
    // re-validate against this game's signature
    let face = FaceIndexSet::new(game.signature(), face.indices())?;
    let payoff = game.payoff().select(face.indices(), face.indices());
    PolymatrixGame::new(face.restricted_signature().clone(), payoff)
}

/// A validated point of the prism `Γ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrismPoint<T = f64> {
    coords: Vec<T>,
}

impl<T: Scalar> PrismPoint<T> {
    /// Validates non-negativity and unit block sums (exact for rationals,
    /// within [`PRISM_TOL`] for floats).
    pub fn new(sig: &Signature, coords: Vec<T>) -> Result<Self> {
        Self::with_tolerance(sig, coords, PRISM_TOL)
    }

    pub fn with_tolerance(sig: &Signature, coords: Vec<T>, tol: f64) -> Result<Self> {
        sig.require_len(coords.len(), "point")?;
        if let Some(i) = coords.iter().position(|c| *c < T::zero() && !c.is_negligible(tol)) {
            return Err(Error::NotOnPrism(format!(
                "coordinate {} is negative ({})",
                i + 1,
                coords[i].to_f64()
            )));
        }
        for (g, s) in block_sums(sig, &coords).into_iter().enumerate() {
            if !(s.clone() - T::one()).is_negligible(tol) {
                return Err(Error::NotOnPrism(format!(
                    "group {} sums to {}",
                    g + 1,
                    s.to_f64()
                )));
            }
        }
        Ok(PrismPoint { coords })
    }

    /// The vertex with the listed support strategy in each group.
    pub fn vertex(sig: &Signature, support: &[usize]) -> Result<Self> {
        if support.len() != sig.groups() {
            return Err(Error::NotVertex);
        }
        let mut coords = vec![T::zero(); sig.total()];
        for (g, &s) in support.iter().enumerate() {
            if !sig.block(g).contains(&s) {
                return Err(Error::NotVertex);
            }
            coords[s] = T::one();
        }
        Ok(PrismPoint { coords })
    }

    /// Barycenter: uniform distribution inside each group.
    pub fn center(sig: &Signature) -> Self {
        let mut coords = Vec::with_capacity(sig.total());
        for &n in sig.parts() {
            let mut k = T::zero();
            for _ in 0..n {
                k = k + T::one();
            }
            let v = T::one() / k;
            coords.extend(std::iter::repeat_n(v, n));
        }
        PrismPoint { coords }
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn is_interior(&self) -> bool {
        self.coords.iter().all(|c| *c > T::zero())
    }

    /// The smallest face carrying the point.
    pub fn support_face(&self, sig: &Signature) -> FaceIndexSet {
        let idx: Vec<usize> = (0..self.coords.len())
            .filter(|&i| self.coords[i] > T::zero())
            .collect();
        FaceIndexSet::new(sig, &idx).expect("a prism point meets every group")
    }
}

/// Whether `x` is a rest point: `(A x)_i` agrees within `tol` across the
/// supported strategies of each group.
pub fn is_equilibrium<T: Scalar>(game: &PolymatrixGame<T>, x: &PrismPoint<T>, tol: f64) -> Result<bool> {
    let sig = game.signature();
    sig.require_len(x.coords().len(), "point")?;
    let ax = game.payoff().mul_vec(x.coords());
    for block in sig.blocks() {
        let support: Vec<usize> = block.filter(|&i| x.coords()[i] > T::zero()).collect();
        let first = &ax[support[0]];
        if support
            .iter()
            .any(|&i| !(ax[i].clone() - first.clone()).is_negligible(tol))
        {
            return Ok(false);
        }
    }
    Ok(true)
}
