//! Numerics for the sub-Riemannian X-ray transform on H-type groups.

pub mod algebra;
pub mod error;
pub mod fock;
pub mod frequency;
pub mod geodesics;
pub mod io;
pub mod quadrature;
pub mod reconstruct;
pub mod special;
pub mod testfn;
pub mod transform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
