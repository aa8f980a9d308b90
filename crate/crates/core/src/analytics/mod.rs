//! Closed-form security analysis: joint key distributions with and without
//! eavesdropping, error rate, key fraction, mutual information, Eve's
//! information and secret key rate, plus an exact enumeration of the
//! eavesdropper branching tree and BB84 comparison curves.
//!
//! `l0 = 0` is rejected throughout: a one-symbol alphabet carries no key.

mod baselines;
mod distributions;
mod enumerate;
mod joint;
mod rates;

pub use baselines::{bb84_baseline, competing_oam_error, Bb84Point};
pub use distributions::{epsilon_bias, p0, p0_exact, p1, p1_exact, pab, pab_exact, pk};
pub use enumerate::{alice_values, enumerate_fig5, fig5_mixture, variable_weights};
pub use joint::{ExactJoint, JointDistribution};
pub use rates::{
    entropy, error_rate_closed, error_rate_from_distribution, eve_information, key_fraction_closed,
    key_fraction_exact, mutual_info_closed, mutual_info_of, secret_key_rate, undisturbed_entropy,
    DistributionRates, RatePoint,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("l0 must be at least 1")]
    InvalidL0,
    #[error("eavesdropping fraction {0} is outside [0, 1]")]
    EtaOutOfRange(f64),
    #[error("no probability mass where both parties hold a key value")]
    ZeroDenominator,
}

pub(crate) fn check_l0(l0: u32) -> Result<(), AnalyticsError> {
    if l0 == 0 {
        Err(AnalyticsError::InvalidL0)
    } else {
        Ok(())
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<(), AnalyticsError> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(AnalyticsError::EtaOutOfRange(eta))
    }
}
