//! Classical Birkhoff normal forms of Schrödinger symbols `ξ² + V(x)` at a
//! non-degenerate critical point, the resonance lattices they generate, and
//! the inverse problem of recovering the Taylor coefficients of an even
//! potential from a normal form or from resonance data.
//!
//! Pipeline:
//!
//! 1. [`model`]: build `p − E₀`, rescale the quadratic part, apply the
//!    complex scaling `x = e^{iπ/4}x̃` on hyperbolic directions.
//! 2. [`bnf`]: remove non-average terms degree by degree with Lie transforms.
//! 3. [`recovery`]: invert the averaging map to get the Taylor coefficients.
//! 4. [`resonance`]: generate labeled resonances, fit normal forms to data.
//! 5. [`oracle`]: brute-force resonances of the complex-scaled operator.

pub mod bnf;
pub mod error;
pub mod model;
pub mod number;
pub mod oracle;
pub mod poly;
pub mod recovery;
pub mod resonance;

pub use error::{Error, ErrorKind, Result};
pub use number::{Coeff, Exact, Float, Real};
pub use poly::{ActionPolynomial, Basis, MultiIndex, PhasePolynomial};
