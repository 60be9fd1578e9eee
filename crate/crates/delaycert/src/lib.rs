//! Stability and inertial-manifold certificates for delay differential
//! equations, via frequency-domain inequalities checked along a vertical
//! line in the complex plane.
//!
//! The pipeline: describe a linear delay plant plus a sector- or
//! gain-bounded feedback nonlinearity, count characteristic roots right of
//! `Re p = -nu` with the argument principle, sweep the associated Hermitian
//! form along `p = -nu + i omega` with a certified tail bound, and package
//! the outcome as a [`freqcheck::Certificate`]. A method-of-steps integrator
//! validates certificates by direct simulation, and the `goodwin` module
//! reproduces the stability-region scan for the Goodwin feedback loop.

pub mod cmat;
pub mod error;
pub mod expr;
pub mod freqcheck;
pub mod goodwin;
pub mod mat;
pub mod measure;
pub mod nonlin;
pub mod quadform;
pub mod quadrature;
pub mod simulate;
pub mod smalldelay;
pub mod spectrum;
pub mod sysfile;
pub mod system;
pub mod transfer;

pub use error::{Error, Result};
