//! Fourier-analytic tools for subsets of Z_N: large spectra, additive
//! energies, sign systems, Gowers norms, dissociated bases and Bohr sets,
//! each paired with checks of the inequalities relating them.
//!
//! Counts are exact (`BigCount`). Floating point enters only through
//! transforms, and every threshold comparison near a tie is either decided
//! exactly or recorded as slack.

pub mod bohr;
mod compensated;
pub mod count;
pub mod cyclotomic;
pub mod dissociated;
pub mod energy;
pub mod error;
pub mod exec;
pub mod fourier;
pub mod group;
pub mod setspec;
pub mod spectrum;
pub mod systems;
pub mod verdict;

pub use count::BigCount;
pub use error::{Error, Result};
pub use exec::Execution;
pub use group::{CyclicGroup, ResidueSet};
pub use setspec::{make_set, SetSpec};
pub use spectrum::Alpha;
