//! Numerical toolkit for the quantitative stability of the critical Hartree
//! (Choquard) equation −Δu = (I_μ ∗ |u|^{2μ*})|u|^{2μ*−2}u.
//!
//! The crate provides validated exponents and sharp constants, Talenti bubbles
//! and conformal maps, radial and 3D-box field backends, Riesz potentials, the
//! bubble interaction integrals, the dual-norm deficit Θ(u), projection onto
//! sums of bubbles, randomized checks of the elementary inequalities, and the
//! experiment drivers used by the `hls-stab` CLI.

pub mod bubble;
pub mod deficit;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod inequalities;
pub mod interaction;
pub mod par;
pub mod params;
pub mod projection;
pub mod riesz;
pub mod special;

pub use error::{Error, Result};
