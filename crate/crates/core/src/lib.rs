//! Harmonic analysis on finite groups, spectral invariants, Spectral
//! Networks trained for invariance, and recovery of a group's
//! multiplication table from learned weights.

pub mod error;
pub mod group;
pub mod invariants;
pub mod io;
pub mod linalg;
pub mod recover;
pub mod repr;
pub mod specnet;
pub mod verify;
pub mod train;

pub use error::{Error, Result};
pub use group::{FiniteGroup, GroupKind, MultiplicationTable, Signal};
pub use repr::{FourierCoefficients, Irrep, IrrepSet};
pub use specnet::WeightTensor;
