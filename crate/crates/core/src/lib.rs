//! Inverse mixed-integer optimization.
//!
//! Given a feasible mixed-integer point `x̂`, a reference cost `c̊`, and the
//! constraint data of a forward problem `min c^T x : Ax = b, x >= 0` with
//! integrality marks, this crate recovers cost vectors `ĉ` close to `c̊` in
//! the l1 norm under which `x̂` is optimal or provably near-optimal:
//!
//! * [`inverse::solve_tolerance_model`] — single LP; the total LP gap is
//!   capped at a fraction `tau` of the cost deviation.
//! * [`inverse::solve_biobjective_model`] — single LP; deviation and weighted
//!   LP gap are minimized together.
//! * [`inverse::solve_bigm_model`] — exact complementarity via a big-M MILP.
//! * [`cutplane::run`] — a cutting-plane loop around the tolerance model that
//!   certifies optimality of `x̂` up to an absolute gap threshold.
//!
//! Closed-form solutions of the unit-norm variants, the linear-programming
//! inverse models, a self-contained LP/MILP engine, and brute-force oracles
//! for desk-scale verification round out the crate.

pub mod closed_form;
pub mod cutplane;
pub mod engine;
pub mod error;
pub mod generator;
pub mod inverse;
pub mod linalg;
pub mod linear;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
