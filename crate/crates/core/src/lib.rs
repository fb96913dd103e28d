//! Perspective functions with nonlinear scaling.
//!
//! The library combines a convex function with a scaling function into the
//! preperspective `(x, y) |-> s(y) phi(x / s(y))` (for `0 < s(y) < +inf`,
//! `+inf` elsewhere) and computes its largest lsc convex minorant, the
//! perspective, through exact closed forms dispatched on the sign range of
//! the conjugate of `phi`. Every closed form is cross-checkable against a
//! brute-force discrete Legendre transform oracle on grids.
//!
//! Module map:
//! - [`extreal`]: total arithmetic on `[-inf, +inf]`.
//! - [`funcs`]: analytic function families, handles, and grids.
//! - [`transform`]: the grid oracle (conjugation, recession, hulls).
//! - [`envelopes`]: one-sided envelopes of a function and the Huber/Berhu pair.
//! - [`perspective`]: preperspective and perspective evaluation, sign
//!   classification, conjugate formulas, and branch dispatch.
//! - [`apps`]: transport integrands, mean scalings and the generalized
//!   Fisher functional.

pub mod apps;
pub mod envelopes;
pub mod error;
pub mod extreal;
pub mod funcs;
pub mod perspective;
pub mod transform;

pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use funcs::{AnalyticFamily, FuncHandle, GridFunction, GridSpec, Meta, Norm, Point, TriState};
