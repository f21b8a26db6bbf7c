//! Character sums over finite fields and finite classical groups.
//!
//! The crate computes normalized Gauss sums, twisted and torus Gauss sums,
//! doubling-method Jacobi kernels and gamma factors, and verifies the
//! closed-form identities they satisfy against direct brute-force summation
//! at desk scale. Groups covered: GL_n, U_n, Sp_2n, SO_2n+1, SO±_2n and
//! their similitude versions, with tori indexed by partition pairs.

pub mod chars;
pub mod error;
pub mod ff;
pub mod gl2;
pub mod groups;
pub mod mat;
pub mod report;
pub mod sums;
pub mod verify;

pub use error::{Error, Result};
