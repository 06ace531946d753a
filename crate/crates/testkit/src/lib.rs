//! Shared fixtures and independent oracles for the test suites.
//!
//! The naive solver here deliberately takes a different algorithmic path
//! from the production engine (single-phase big-M tableau under Bland's
//! rule, no dual extraction) so that agreement between the two is evidence,
//! not tautology.

pub mod fixtures;
pub mod naive;
pub mod random_lp;
