//! The two bundled three-dimensional games: a conservative game on the cube
//! `Γ_(2,2,2)` with closed orbits, and one on the prism `Γ_(3,2)` whose orbits
//! run from a repeller vertex to a sink vertex.
//!
//! All matrices are exact reference values.

use crate::game::{PolymatrixGame, Signature};
use crate::matrix::Matrix;
use crate::scalar::{int, rat, Rational};

#[derive(Debug, Clone)]
pub struct ExampleGame {
    pub name: &'static str,
    pub signature: Signature,
    /// Skew-symmetric model `A0`.
    pub skew_model: Matrix<Rational>,
    /// Point `q̃` with `A0 q̃` block-constant.
    pub qtilde: Vec<Rational>,
    /// Expected `A0 q̃`.
    pub skew_model_image: Vec<Rational>,
    pub scaling: Vec<Rational>,
    /// Reference payoff `A = A0 D`.
    pub game: PolymatrixGame<Rational>,
    /// Formal equilibrium `q = D^{-1} q̃`, full coordinates.
    pub equilibrium: Vec<Rational>,
    /// Direction of the line of formal equilibria in model coordinates.
    pub equilibrium_direction: Vec<Rational>,
    /// Incidence basis in which the reference reduced matrix is written.
    pub reference_incidence: Matrix<Rational>,
    /// `B = -E A0 E^T` for `reference_incidence`.
    pub reference_reduced: Matrix<Rational>,
    /// Kernel vector of `reference_reduced`.
    pub reference_kernel: Vec<Rational>,
    /// Kernel vector of the reduced matrix in the standard chart coordinates.
    pub chart_kernel: Vec<Rational>,
}

fn m(rows: Vec<Vec<Rational>>) -> Matrix<Rational> {
    Matrix::from_rows(rows).expect("fixture rows are rectangular")
}

fn z() -> Rational {
    int(0)
}

pub fn example1() -> ExampleGame {
    let signature = Signature::new(vec![2, 2, 2]).unwrap();
    let h = || rat(1, 2);
    let skew_model = m(vec![
        vec![z(), int(-1), z(), h(), z(), int(1)],
        vec![int(1), z(), z(), -h(), int(-1), h()],
        vec![z(), z(), z(), z(), h(), int(-1)],
        vec![-h(), h(), z(), z(), z(), z()],
        vec![z(), int(1), -h(), z(), z(), -h()],
        vec![int(-1), -h(), int(1), z(), h(), z()],
    ]);
    let payoff = m(vec![
        vec![z(), rat(-5, 2), z(), rat(9, 8), z(), int(2)],
        vec![rat(5, 2), z(), z(), rat(-9, 8), int(-2), int(1)],
        vec![z(), z(), z(), z(), int(1), int(-2)],
        vec![rat(-5, 4), rat(5, 4), z(), z(), z(), z()],
        vec![z(), rat(5, 2), rat(-9, 8), z(), z(), int(-1)],
        vec![rat(-5, 2), rat(-5, 4), rat(9, 4), z(), int(1), z()],
    ]);
    ExampleGame {
        name: "ex1",
        game: PolymatrixGame::new(signature.clone(), payoff).unwrap(),
        signature,
        skew_model,
        qtilde: vec![rat(7, 4), rat(3, 4), rat(5, 4), int(1), int(1), int(1)],
        skew_model_image: vec![rat(3, 4), rat(3, 4), rat(-1, 2), rat(-1, 2), rat(-3, 8), rat(-3, 8)],
        scaling: vec![rat(5, 2), rat(9, 4), int(2)],
        equilibrium: vec![rat(7, 10), rat(3, 10), rat(5, 9), rat(4, 9), rat(1, 2), rat(1, 2)],
        equilibrium_direction: vec![rat(6, 5), rat(-4, 9), int(-1)],
        reference_incidence: m(vec![
            vec![int(1), int(-1), z(), z(), z(), z()],
            vec![z(), z(), int(1), int(-1), z(), z()],
            vec![z(), z(), z(), z(), int(1), int(-1)],
        ]),
        reference_reduced: m(vec![
            vec![z(), int(1), rat(-1, 2)],
            vec![int(-1), z(), rat(-3, 2)],
            vec![rat(1, 2), rat(3, 2), z()],
        ]),
        reference_kernel: vec![rat(-3, 2), rat(1, 2), int(1)],
        chart_kernel: vec![rat(-3, 2), rat(1, 2), int(1)],
    }
}

pub fn example2() -> ExampleGame {
    let signature = Signature::new(vec![3, 2]).unwrap();
    let h = || rat(1, 2);
    let skew_model = m(vec![
        vec![z(), z(), h(), h(), int(-1)],
        vec![z(), z(), -h(), h(), -h()],
        vec![-h(), h(), z(), int(1), h()],
        vec![-h(), -h(), int(-1), z(), z()],
        vec![int(1), h(), -h(), z(), z()],
    ]);
    let payoff = m(vec![
        vec![z(), z(), rat(-1, 10), h(), int(-1)],
        vec![z(), z(), rat(1, 10), h(), -h()],
        vec![rat(1, 10), rat(-1, 10), z(), int(1), h()],
        vec![rat(1, 10), rat(1, 10), rat(1, 5), z(), z()],
        vec![rat(-1, 5), rat(-1, 10), rat(1, 10), z(), z()],
    ]);
    ExampleGame {
        name: "ex2",
        game: PolymatrixGame::new(signature.clone(), payoff).unwrap(),
        signature,
        skew_model,
        qtilde: vec![rat(9, 10), rat(-8, 5), h(), z(), int(1)],
        skew_model_image: vec![rat(-3, 4), rat(-3, 4), rat(-3, 4), rat(-3, 20), rat(-3, 20)],
        scaling: vec![rat(-1, 5), int(1)],
        equilibrium: vec![rat(-9, 2), int(8), rat(-5, 2), z(), int(1)],
        equilibrium_direction: vec![rat(-5, 2), int(5), int(-1)],
        reference_incidence: m(vec![
            vec![int(1), int(-1), z(), z(), z()],
            vec![int(1), z(), int(-1), z(), z()],
            vec![z(), z(), z(), int(1), int(-1)],
        ]),
        reference_reduced: m(vec![
            vec![z(), int(1), rat(-1, 2)],
            vec![int(-1), z(), int(-1)],
            vec![rat(1, 2), int(1), z()],
        ]),
        reference_kernel: vec![int(-1), rat(1, 2), int(1)],
        chart_kernel: vec![rat(-1, 2), int(1), int(1)],
    }
}

/// Repeller vertex `r = (1,0,0)` of the second game, model coordinates
/// `(x, y, z)`, as a support list.
pub fn example2_repeller() -> Vec<usize> {
    vec![0, 4]
}

/// Sink vertex `s = (0,0,1)` of the second game.
pub fn example2_sink() -> Vec<usize> {
    vec![2, 3]
}

pub fn by_name(name: &str) -> Option<ExampleGame> {
    match name {
        "ex1" => Some(example1()),
        "ex2" => Some(example2()),
        _ => None,
    }
}
