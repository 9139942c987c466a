//! Positivity-preserving operator semigroups on simplicial self-dual cones,
//! inheritance of positivity along embeddings, and stability of good quantum
//! numbers along chains of Hamiltonians.

pub mod cones;
pub mod error;
pub mod inheritance;
pub mod lattice;
pub mod numerics;
pub mod positivity;
pub mod semigroup;
pub mod spin;
pub mod stability;

pub use error::{Error, Result};
pub use numerics::{LinearOperator, SpaceId};
