//! Partial orders on finite metric measure spaces.
//!
//! The crate decides the mass order, the Lipschitz (metric) order and their
//! combination on finite spaces with explicit witnesses, computes Eurandom
//! distances over coupling polytopes, builds least upper bounds, and ships
//! seeded genealogy simulators whose outputs feed the exact checkers.

pub mod error;
pub mod genealogy;
pub mod mmcore;
pub mod order;
pub mod rng;
pub mod stats;
pub mod transport;

pub use error::{MmError, Result};
pub use mmcore::{FiniteMmSpace, Mode, Scalar};
