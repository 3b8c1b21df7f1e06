//! Algebraic independence testing over finite fields of any characteristic.
//!
//! The heart of the crate is a p-adic refinement of the Jacobian criterion:
//! polynomials are lifted to Witt vectors (concretely, to Galois rings), a
//! scaled Jacobian determinant is formed there, and independence is read off
//! a degeneracy condition on its coefficients. A brute-force search for
//! annihilating polynomials serves as an independent referee, and the same
//! machinery drives the construction of explicit hitting sets for sparse
//! circuits of small transcendence degree.

pub mod circuit;
pub mod cli;
pub mod error;
pub mod fq;
pub mod galois;
pub mod hitting;
pub mod interp;
pub mod oracle;
pub mod poly;
pub mod ring;
pub mod textio;
pub mod witt;
pub mod wj;

pub use error::{Error, Result};
pub use fq::{FqContext, FqElem};
pub use galois::{GrContext, GrElem};
pub use poly::{ExponentVec, SparsePoly};
pub use ring::{IntRing, RatRing, Ring};
pub use witt::{WittRing, WittVec};
