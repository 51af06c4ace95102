//! Exact-arithmetic toolkit for desk-scale homological algebra over small
//! dg-categories: cochain complexes, twisted complexes, homotopy colimits,
//! and projective resolutions of dg-modules, all over Q or a prime field.
//!
//! Everything is computed exactly; there are no floating point numbers
//! anywhere. Randomized verification suites draw structured samples with a
//! seeded generator so that every run is reproducible.

// Block-matrix code indexes several parallel structures with one counter;
// iterator rewrites obscure which offset belongs to which block.
#![allow(clippy::needless_range_loop)]

pub mod category;
pub mod complex;
pub mod dgmodule;
pub mod field;
pub mod fixtures;
pub mod holim;
pub mod io;
pub mod resolution;
pub mod sample;
pub mod tstructure;
pub mod twisted;
