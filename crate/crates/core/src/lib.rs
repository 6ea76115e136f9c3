//! Polymatrix replicator dynamics on products of simplexes.
//!
//! The crate covers the game algebra (signatures, payoff equivalence, faces,
//! formal equilibria), the replicator field and its chart form, the Poisson
//! bivector `π_A` with its reduced constant structure, conservative
//! decompositions `A ~ A0 D` with their Hamiltonians, and orbit integration
//! with structure monitors.
//!
//! Exact computations use [`Rational`]; numerics use `f64`. Most routines are
//! generic over [`Scalar`].

pub mod conservative;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod game;
pub mod linsolve;
pub mod matrix;
pub mod ode;
pub mod poisson;
pub mod sampling;
pub mod scalar;

pub use conservative::{
    detect_conservative, formal_equilibria, hamiltonian, hamiltonian_gradient, hamiltonian_identity_residual,
    is_formal_equilibrium, make_conservative, verify_conservative, xi_form, ConservativeDecomposition,
    ConservativeFailure, Detection, FormalEquilibrium, HamiltonianSpec, NotConservativeReason, VerifyReport,
};
pub use dynamics::{
    classify_vertices, integrate, integrate_batch, linearize_at_vertex, monitor_report, recurrence_check,
    vertex_support, CoordinateMode, DriftReport, IntegrationMethod, IntegratorConfig, Trajectory,
    VertexKind, VertexLinearization,
};
pub use error::{Error, Result};
pub use field::{chart_field, generalized_field, relative_fitness, vector_field, GeneralizedScaling};
pub use game::{
    block_sums, canonical_form, games_equivalent, games_equivalent_with_tol, is_equilibrium, restrict,
    validate_game, FaceIndexSet, PolymatrixGame, PrismPoint, Signature,
};
pub use matrix::Matrix;
pub use poisson::{
    bivector, build_poisson_data, check_poisson_map, incidence_matrix, jacobi_residual_exact,
    jacobi_residual_fd, leaf_invariant, phi, phi_inverse, reduced_structure, PoissonData,
};
pub use scalar::{format_rational, parse_rational, Rational, Scalar};
