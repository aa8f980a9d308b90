//! Exact two-photon state engine over joint (OAM, spin) labels.
//!
//! Photons carry an integer topological charge `l` and a circular spin
//! `s = ±1` (`+1` is R, `-1` is L). Total angular momentum along the beam
//! axis is `j = l + s`. Linear polarization is handled in the circular basis
//! through `|H> = (|R> + |L>)/√2` and `|V> = i(|R> - |L>)/√2`.

mod density;
mod polarization;
mod state;

pub use density::{SpinDensity, SPIN_BASIS};
pub use polarization::{
    chsh_value, coincidence, correlation, four_outcomes, visibility, ChshAngles, Polarization,
    PolarizationAngle, VISIBILITY_GRID,
};
pub use state::{Measurement, ModeLabel, Observable, Party, Spin, TwoPhotonState};

use thiserror::Error;

/// Amplitudes whose magnitude falls below this are dropped.
pub const PRUNE_EPS: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("mode l={l} is outside the cap |l| <= {cap}")]
    ModeOutOfRange { l: i32, cap: i32 },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error(
        "erasing OAM on photon {party} would merge distinguishable branches: \
         spin {spin:+} carries both l={first} and l={second}"
    )]
    AmbiguousErasure {
        party: Party,
        spin: i32,
        first: i32,
        second: i32,
    },
    #[error("coincidence probabilities sum to {sum:e}, too small to normalize")]
    DegenerateCorrelation { sum: f64 },
    #[error("invalid spin density: {0}")]
    InvalidDensity(String),
    #[error("mixture weights must be non-negative with a positive total")]
    InvalidMixture,
}
