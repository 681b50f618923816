//! Exact chart-by-chart resolution of singularities of marked ideals.
//!
//! The crate is layered bottom-up:
//! - [`poly`]: sparse multivariate polynomials over exact rationals;
//! - [`groebner`]: Buchberger-based ideal oracles (membership with
//!   cofactors, localization emptiness, order bounding, generator
//!   rewriting);
//! - [`chart`]: the affine marked ideal data model (charts, transitions,
//!   controls, data vectors) with validation;
//! - [`transform`]: chart-wise blow-ups, controlled transforms and
//!   exceptional-divisor bookkeeping;
//! - [`invariant`]: pointwise/chartwise invariants: orders, monomial and
//!   residual parts, companion, derivative, coefficient and boundary
//!   ideals, maximal-contact candidates, the invariant vector;
//! - [`driver`]: the recursive resolution algorithm;
//! - [`bounds`]: exact big-integer/symbolic evaluation of the complexity
//!   bounds with Grzegorczyk-class tracking;
//! - [`io`]: JSON formats and the CLI entry points.

pub mod audit;
pub mod bounds;
pub mod chart;
pub mod driver;
pub mod error;
pub mod groebner;
pub mod invariant;
pub mod io;
pub mod poly;
pub mod transform;

pub use error::{Error, Result};
