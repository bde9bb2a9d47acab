//! Arithmetic progressions in `[N₁]×⋯×[N_d]` grids.
//!
//! The crate is organised the way the construction flows:
//!
//! * [`grid`] holds shapes, progressions and colorings, and evaluates the
//!   exact discrepancy of a coloring with one prefix-sum scan per direction.
//! * [`canonical`] splits every progression trace into dyadic canonical
//!   blocks and counts them.
//! * [`bounds`] evaluates the closed-form counting bounds next to brute-force
//!   counters so every inequality can be checked on concrete instances.
//! * [`lattice`] is exact rational lattice machinery: LLL, integer kernels,
//!   Minkowski search and the direction-collapsing projection map.
//! * [`solver`] builds low-discrepancy colorings (partial-coloring rounds,
//!   slice extension, exhaustive search for tiny grids).
//! * [`certify`] computes the lower-bound certificate and checks the
//!   convolution-energy inequality that backs it.
//! * [`sweep`] runs scaling ladders and writes their CSV.
//!
//! Data-parallel loops go through [`par::Execution`]; building without the
//! default `parallel` feature makes every loop sequential.

pub mod bounds;
pub mod canonical;
pub mod certify;
pub mod error;
pub mod grid;
pub mod io;
pub mod lattice;
pub mod par;
pub mod rng;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use grid::{ApSpec, GridShape, PartialColoring, Point};
