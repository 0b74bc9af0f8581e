//! Explicit analytic Dirac sequences on real linear algebraic matrix groups.
//!
//! The kernel `phi_t(g) = C_t exp(-t^2 (|g-1|^p + |g^-1-1|^p))`, with `|.|`
//! the Frobenius gauge and `C_t` fixed by unit Haar mass, is built and checked
//! numerically here:
//!
//! - [`group`]: the matrix-group catalog, gauges, exp/log, algebra bases.
//! - [`haar`]: charts with Haar densities, tensor quadrature and Monte Carlo,
//!   tail bounds for truncated domains.
//! - [`kernel`]: normalization, Dirac-axiom checks, convolution,
//!   representation averaging and the orbit-map identity.
//! - [`crown`]: the holomorphic extension of the kernel to the complexified
//!   domain and the decay estimates behind it.
//! - [`decomp`]: Jordan-Chevalley factorization, certified distance upper
//!   bounds and the norm / growth inequalities built on them.

pub mod crown;
pub mod decomp;
pub mod error;
pub mod group;
pub mod haar;
pub mod kernel;

pub use error::{Error, Result};
pub use group::{Group, GroupElement, GroupExt, GroupKind, GroupSpec, Matrix};
