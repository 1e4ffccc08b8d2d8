//! Truncated-resolution numerics for Toeplitz, Hankel and Berezin analysis on
//! ℓ²-valued Bergman-type spaces over the disc, the bidisc and the plane.
//!
//! Functions are stored as coefficient arrays in an orthonormal monomial
//! basis `e_m(z) = c_m z^m`; operators are dense `(N·d) × (N·d)` matrices with
//! row/column index `m·d + k`.

pub mod axioms;
pub mod coeff;
pub mod covering;
pub mod error;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod quadrature;
pub mod rkt;
pub mod space;
pub mod symbol;

pub use error::{LabError, Result};
pub use space::{DomainPoint, SpaceKind, SpaceSpec, C64};
