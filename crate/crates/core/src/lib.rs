//! Fourier-spectral ground states for the nonlinear Dirac equation
//!
//! ```text
//! -i α·∇u + aβu + V(x)u = K(x) f(|u|) u,   u: R³ → C⁴
//! ```
//!
//! on a periodic box. The strongly indefinite energy
//! `Φ(u) = ½(‖u⁺‖² − ‖u⁻‖²) + ½∫V|u|² − ∫K F(|u|)` is minimized over the
//! generalized Nehari set by an outer descent on the unit sphere of `E⁺`,
//! where each sphere point is lifted to the set by maximizing `Φ` over the
//! half-space fiber `R⁺w ⊕ E⁻`.
//!
//! Module map:
//!
//! - [`algebra`]: Pauli/Dirac matrices and the per-frequency free Dirac symbol.
//! - [`field`]: grid, spinor fields, unitary DFT, `E±` projection and norms.
//! - [`model`]: nonlinearity, potentials, hypothesis checkers.
//! - [`energy`]: `Φ`, its L² residual, directional derivatives.
//! - [`nehari`]: fiber maximization, Nehari residuals, reduced functional.
//! - [`solver`]: ground-state minimization and grid refinement.
//! - [`diagnostics`]: the property battery and tail diagnostics.
//! - [`io`]: run configuration, binary field snapshots, JSON/CSV outputs.

pub mod algebra;
pub mod diagnostics;
pub mod energy;
mod error;
pub mod field;
mod fft;
pub mod io;
pub mod model;
pub mod nehari;
pub mod solver;

pub use error::{Error, Result};

pub use num_complex::Complex64;
