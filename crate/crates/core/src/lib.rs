//! Representation-theoretic machinery for port-based teleportation (PBT):
//! Gelfand-Tsetlin bases of partially transposed permutation algebras, the
//! optimal PBT measurements and their Naimark dilations, gate-level synthesis
//! and simulation of the measurement circuits in two path encodings, and
//! resource-state construction. Everything is verified against brute-force
//! computational-basis oracles at desk scale.

// Index-based loops dominate the register and block arithmetic here and are
// clearer than iterator chains over multiple parallel arrays.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::too_many_arguments)]

pub mod algebra;
pub mod bratteli;
pub mod circuits;
pub mod error;
pub mod measurements;
pub mod partitions;
pub mod protocols;
pub mod verify;

pub use error::{Error, Result};
