//! Real root-finding for real univariate polynomials and real eigenvalue
//! extraction for real nonsymmetric matrices.
//!
//! The central driver iterates the sign-type recurrence `Y <- (Y - Y^{-1})/2`
//! in the matrix algebra generated by the companion matrix, which pushes the
//! images of nonreal roots to `+-i` while images of real roots stay real;
//! squaring and adding the identity then separates an invariant subspace that
//! a randomized range finder extracts, leaving a small projected eigenproblem
//! that carries exactly the real roots. Polynomial-side alternatives
//! (half-difference lifting, Cayley plus root squaring, a modular square-root
//! iteration, and a root-radii Newton sweep) and a dense-matrix variant with
//! a factorized Cayley-power filter round out the toolbox, together with the
//! test-family generators and the benchmark harness behind the `realroots`
//! binary.

pub mod bench;
pub mod error;
pub mod frobenius;
pub mod lifting;
pub mod linalg;
pub mod poly;
pub mod radii;
pub mod realeig;
pub mod report;
pub mod signiter;
pub mod sqrtmod;

pub use error::{Error, Result};
pub use poly::Polynomial;
pub use report::{EigReport, RootReport, SolveStatus};
