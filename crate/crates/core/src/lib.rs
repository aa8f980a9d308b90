//! Simulation and analysis of a high-dimensional QKD protocol that draws key
//! values from photon orbital (OAM) or total (TAM) angular momentum and
//! checks security through polarization entanglement.

pub mod analytics;
pub mod angmom;
pub mod key;
pub mod numfmt;
pub mod protocol;

pub use key::KeySymbol;
