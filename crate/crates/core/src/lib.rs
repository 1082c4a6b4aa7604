//! Numerical Cayley-Klein orthogonal groups `SO(n+1; j)`.
//!
//! Each parameter `j_m` of a [`Signature`] is elliptic (`1`), parabolic (the
//! dual unit `ι`, a contraction) or hyperbolic (`i`). The crate provides
//!
//! - closed-form group elements in canonical coordinates and their recovery
//!   from matrices ([`group`]),
//! - the Lie algebra, structure constants and Casimir element ([`algebra`]),
//! - the invariant measure, parameter domains and Monte Carlo integration
//!   ([`measure`]),
//! - coadjoint orbits of the contracted groups `SO(n+1; ι, j')` and their
//!   stabilizers ([`orbits`]),
//! - the induced unitary representations of those groups ([`indrep`]).
//!
//! All arithmetic is real: branch dependence enters only through the kernels
//! in [`scalar`].

pub mod algebra;
pub mod checks;
pub mod cli;
pub mod error;
pub mod group;
pub mod indrep;
pub mod measure;
pub mod oracle;
pub mod orbits;
pub mod scalar;

pub use error::{CkError, Result};
pub use group::{BlockParams, CanonicalParams, GroupElement};
pub use scalar::{Branch, Signature};
