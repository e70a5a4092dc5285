//! Quantum kicked top simulations: overlap (fidelity) decay under a
//! perturbed kick strength, q-exponential relaxation fits, and scans that
//! locate the border between the regular island and the chaotic sea.

pub mod classical;
pub mod coherent;
pub mod edge;
pub mod error;
pub mod evolution;
pub mod kicked_top;
pub mod linalg;
pub mod nonextensive;
pub mod spin;

pub use error::{Error, Result};
pub use spin::{Spin, UnitaryMatrix};
