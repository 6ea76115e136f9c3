//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Rational;

/// Reduced row echelon form of `m` together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub reduced: Matrix<Rational>,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn rref(m: &Matrix<Rational>) -> Echelon {
    let mut a = m.clone();
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        a.swap_rows(r, p);
        let inv = a[(r, c)].recip();
        for v in a.row_mut(r) {
            *v = &*v * &inv;
        }
        let pivot_row = a.row(r).to_vec();
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let factor = a[(i, c)].clone();
            for (v, pv) in a.row_mut(i).iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Echelon { reduced: a, pivots }
}

pub fn rank(m: &Matrix<Rational>) -> usize {
    rref(m).rank()
}

/// Basis of `{v : m v = 0}`, one vector per free column with that column set to 1.
pub fn nullspace(m: &Matrix<Rational>) -> Vec<Vec<Rational>> {
    let ech = rref(m);
    nullspace_from_echelon(&ech, m.ncols())
}

fn nullspace_from_echelon(ech: &Echelon, cols: usize) -> Vec<Vec<Rational>> {
    let free: Vec<usize> = (0..cols).filter(|c| !ech.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &pc) in ech.pivots.iter().enumerate() {
                v[pc] = -ech.reduced[(r, f)].clone();
            }
            v
        })
        .collect()
}

/// Full solution set of `m x = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    /// Solution with every free variable set to zero.
    pub particular: Vec<Rational>,
    pub nullspace: Vec<Vec<Rational>>,
}

/// Solves `m x = b` exactly; `Error::NoSolution` when the system is inconsistent.
pub fn solve_linear_exact(m: &Matrix<Rational>, b: &[Rational]) -> Result<LinearSolution> {
    if b.len() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {} but matrix has {} rows",
            b.len(),
            m.nrows()
        )));
    }
    let cols = m.ncols();
    let augmented = Matrix::from_fn(m.nrows(), cols + 1, |i, j| {
        if j < cols {
            m[(i, j)].clone()
        } else {
            b[i].clone()
        }
    });
    let ech = rref(&augmented);
    if ech.pivots.last() == Some(&cols) {
        return Err(Error::NoSolution);
    }
    let mut particular = vec![Rational::zero(); cols];
    for (r, &pc) in ech.pivots.iter().enumerate() {
        particular[pc] = ech.reduced[(r, cols)].clone();
    }
    let coeff = Echelon {
        reduced: Matrix::from_fn(ech.reduced.nrows(), cols, |i, j| ech.reduced[(i, j)].clone()),
        pivots: ech.pivots,
    };
    Ok(LinearSolution {
        particular,
        nullspace: nullspace_from_echelon(&coeff, cols),
    })
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse(m: &Matrix<Rational>) -> Option<Matrix<Rational>> {
    if !m.is_square() {
        return None;
    }
    let n = m.nrows();
    let augmented = Matrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m[(i, j)].clone()
        } else if j - n == i {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    let ech = rref(&augmented);
    if ech.pivots.len() < n || ech.pivots[n - 1] != n - 1 {
        return None;
    }
    Some(Matrix::from_fn(n, n, |i, j| ech.reduced[(i, j + n)].clone()))
}
