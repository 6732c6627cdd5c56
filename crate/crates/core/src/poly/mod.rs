//! Sparse polynomial algebra on phase space.
//!
//! A [`PhasePolynomial`] lives on `2n` variables laid out as
//! `(x_1..x_n, ξ_1..ξ_n)` in the real basis and `(z_1..z_n, z̄_1..z̄_n)` in
//! the complex basis, with `z = x + iξ`. The Poisson bracket is
//!
//! ```text
//! {f, g} = Σ_j ∂f/∂ξ_j ∂g/∂x_j − ∂f/∂x_j ∂g/∂ξ_j
//! ```
//!
//! so that `{H, g}` is the derivative of `g` along the Hamiltonian vector
//! field `Σ_j H_ξj ∂_xj − H_xj ∂_ξj`; in particular `{ξ, x} = 1`. In the
//! complex basis this reads `{f, g} = 2i Σ_j (f_zj g_z̄j − f_z̄j g_zj)`.

mod action;
mod json;
mod multi_index;
mod phase;

pub use action::ActionPolynomial;
pub use json::{ActionPolyJson, PolyJson, TermJson};
pub use multi_index::MultiIndex;
pub use phase::{Basis, PhasePolynomial};
