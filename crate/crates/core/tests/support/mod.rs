//! Independent brute-force oracles shared by the integration tests and the
//! acceptance harness. The oracles never call the library's scoring code;
//! the fixture builders use it only to produce runs to check.

#![allow(dead_code)]

pub mod eval;
pub mod metrics;
pub mod retrieval;
