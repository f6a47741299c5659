//! Stability certification for linear discrete-time delay systems
//! `x(t+1) = A x(t) + A_d x(t-tau)`.
//!
//! The toolkit has three layers:
//!
//! * exact-rational discrete orthogonal polynomials and the expansion
//!   coefficients built from them ([`polys`], [`coeffs`]),
//! * the multiple summation inequalities those coefficients realize and the
//!   Lyapunov-Krasovskii LMI assembled from them ([`ineq`], [`lmi`]),
//! * a small dense feasibility solver and the top-level delay analyses:
//!   single-point certification, maximum-delay search, the exact lifting
//!   oracle, and the empirical LMI hierarchy ([`sdp`], [`stability`]).
//!
//! All polynomial and coefficient computation is exact rational arithmetic;
//! floating point enters only when an LMI is assembled for the solver.
//!
//! Delay scans and hierarchy tables are data-parallel over `tau` values and
//! table cells. With the default `parallel` feature they run on a rayon pool;
//! without it the same code runs sequentially with identical results.

pub mod benchmarks;
pub mod coeffs;
pub mod error;
pub mod ineq;
pub mod lmi;
pub mod parallel;
pub mod polys;
pub mod rational;
pub mod sdp;
pub mod stability;

pub use error::{Error, Result};
pub use rational::Rational;
