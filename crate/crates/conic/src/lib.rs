//! A small dense convex conic solver.
//!
//! Solves problems of the form
//!
//! ```text
//! minimize    c'x
//! subject to  A x = b
//!             x in K
//! ```
//!
//! where `K` is a product of free, zero, nonnegative, second-order and
//! (real symmetric, svec-packed) semidefinite cones. The algorithm is a
//! primal-dual interior-point method on the homogeneous self-dual
//! embedding with Nesterov-Todd scaling and a Mehrotra predictor-corrector
//! step, which keeps it robust on the small dense problems this crate is
//! meant for (a few hundred variables at most) and yields infeasibility
//! and unboundedness certificates for free.
//!
//! Complex Hermitian semidefinite constraints are handled through the
//! standard real embedding, see [`embed_hermitian`]. Convex quadratics are
//! reformulated to second-order-cone epigraphs via [`CompressedQuadratic`]
//! and [`ProblemBuilder`] so the solver has a single entry point.

mod builder;
mod cones;
mod embed;
mod presolve;
mod problem;
pub mod selftest;
mod solver;
mod svec;

pub use builder::{BlockRef, CompressedQuadratic, LinExpr, ProblemBuilder};
pub use embed::{embed_hermitian, hermitian_from_embedding, EmbedError};
pub use problem::{Cone, ConicProblem, ConicSolution, KktResiduals, ProblemError, SolveStatus};
pub use solver::{solve, solve_with, ConicError, InitialPoint, SolverOptions};
pub use svec::{mat_from_svec, svec_dim, svec_from_mat, svec_index};
