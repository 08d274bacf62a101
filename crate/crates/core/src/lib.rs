//! Bifurcation analysis of the scalar delay equation
//!
//! ```text
//! u'(t) = -gamma u(t) - kappa1 u(t - a1 - c u(t)) - kappa2 u(t - a2 - c u(t))
//! ```
//!
//! The crate covers the characteristic equation and its Hopf loci, the
//! double-Hopf normal form on the center manifold, an adaptive integrator for
//! state-dependent delays, and Poincaré-section diagnostics of the resulting
//! tori.

pub mod dynamics;
pub mod error;
pub mod expsum;
pub mod golden;
pub mod history;
pub mod integrator;
pub mod model;
pub mod normalform;
pub mod params;
pub mod registry;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use params::Parameters;
