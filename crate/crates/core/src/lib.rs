//! Control synthesis and verification for dynamical systems with finite
//! stopping times.
//!
//! A first-order linear system `u' + A(t) u = 0` never reaches zero in finite
//! time on its own; an added control supported on `[0, T]` can force
//! `u(t) = 0` for all `t >= T`. This crate builds such controls and the
//! resulting processes at desk scale:
//!
//! - [`ode`]: fundamental solutions, variation of constants, the matrix
//!   normalization condition for stopping, and restart (no-memory) checks.
//! - [`relaxation`]: scalar decay processes with finite stopping time, the
//!   polynomial and bump control families, closed-form kernels, reconstructed
//!   time-dependent relaxation times, and energy monotonicity tests.
//! - [`oscillation`]: damped oscillator control pairs forcing
//!   `v(T) = v'(T) = 0`, and the finite-stop cosine kernel.
//! - [`diffusion`]: generalized Gaussian kernels with compactly supported
//!   profiles and bounded front speed, the control term of the forced heat
//!   equation, and finite-difference residual verification.
//! - [`waves`]: frequency-domain kernel families `exp(-alpha(omega) r)`,
//!   attenuation-law extraction, convolution semigroup and support checks,
//!   and spherical wave traces.
//! - [`acceptance`]: the end-to-end verification suite run by the `finstop`
//!   CLI and the integration tests.
//!
//! Transform convention: the forward transform is
//! `F(omega) = \int f(t) e^{+i 2 pi omega t} dt`, so differentiation maps to
//! multiplication by `(-i 2 pi omega)`. This is fixed once in [`waves`] and
//! recorded in emitted artifacts.

pub mod acceptance;
pub mod diffusion;
pub mod error;
pub mod grid;
pub mod ode;
pub mod oscillation;
pub mod quad;
pub mod relaxation;
pub mod report;
pub mod waves;

pub use error::{Error, Result};
pub use grid::{FrequencyGrid, TimeGrid};
