//! Entanglement swapping of orbital-angular-momentum photon pairs.
//!
//! The crate covers the full desk-scale chain: downconversion pair states,
//! the beamsplitter and coincidence post-selection that swap entanglement
//! from AB and CD onto AD, the detection chain with visibility noise and
//! accidental coincidences, two-qubit tomography with a pluggable
//! reconstructor registry, and the BC filter that purifies the swapped state.

pub mod circuit;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod purification;
pub mod state;
pub mod tomography;

pub use error::{Result, SwapError};
