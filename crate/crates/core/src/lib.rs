//! Computable warped-product hyperbolic fillings.
//!
//! The crate models the warped product `[0, ∞) ×_ψ Y` of the half-line with a
//! finite metric measure carrier `Y` and provides:
//!
//! * plane norms used to combine the radial and carrier factors ([`norms`]),
//! * warping profiles and the one-dimensional kernel `F(ρ) = ψ(ρ)·d − 2ρ`
//!   behind every distance and Gromov-product formula ([`profiles`]),
//! * finite carriers built from matrices, graphs or circles ([`spaces`]),
//! * exact ℓ¹ warped distances, Gromov products and ⊔-curves ([`warped`]),
//! * hyperbolicity estimates and visual boundary metrics ([`hyperbolicity`]),
//! * discrete Sobolev–Poincaré verification on weighted graphs ([`poincare`]).
//!
//! The `warpfill` binary exposes all of this through [`cli`].

pub mod cli;
pub mod error;
pub mod graph;
pub mod hyperbolicity;
pub mod norms;
pub mod poincare;
pub mod profiles;
pub mod quad;
pub mod spaces;
pub mod warped;

pub use error::{Error, Result};
pub use norms::Norm2;
pub use profiles::{FMinResult, WarpProfile};
pub use spaces::CarrierSpace;
pub use warped::{UCurve, WarpedPoint};
