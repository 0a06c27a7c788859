//! Dynamics of the Coxeter transformation on the cubic surface of SL2 trace
//! coordinates.
//!
//! The crate is split along the computational pipeline:
//!
//! * [`params`] maps Painlevé parameters κ to monodromy traces, eigenvalues and
//!   the surface coefficients θ, and decides affine Weyl wall membership.
//! * [`surface`] holds the affine cubic `S(θ)`, the involutions σ_i, the braid
//!   maps g_i, word evaluation and Jacobians.
//! * [`lattice`] is the exact integer picture on `H²`: the pull-backs σ_i*,
//!   c*, characteristic polynomials and trace powers.
//! * [`lines`] builds the 27 lines in eigenvalue coordinates and checks how the
//!   involutions permute them.
//! * [`counting`] has the closed-form periodic point counts, the zeta function
//!   and a multistart solver that recovers the counts numerically.

pub mod counting;
pub mod error;
pub mod lattice;
pub mod lines;
pub mod params;
pub mod poly;
pub mod surface;

pub use error::{Error, Result};
pub use num_complex::Complex64;
