use num_rational::Rational64;
use num_traits::One;

use super::joint::{ExactJoint, JointDistribution};
use super::{check_eta, check_l0, AnalyticsError};
use crate::key::KeySymbol;

/// Beam-splitter bias that makes every OAM value and every key-capable TAM
/// value equally likely: `ε = 1/(2(4l0+3))`.
pub fn epsilon_bias(l0: u32) -> Result<f64, AnalyticsError> {
    check_l0(l0)?;
    Ok(1.0 / (2.0 * (4 * l0 + 3) as f64))
}

fn prefactor(l0: u32) -> Rational64 {
    Rational64::new(2, 4 * l0 as i64 + 3)
}

/// Undisturbed joint distribution: `2/(4l0+3)` on each key diagonal entry,
/// `1/(4l0+3)` on NoKey/NoKey.
pub fn p0_exact(l0: u32) -> Result<ExactJoint, AnalyticsError> {
    check_l0(l0)?;
    let mut t = ExactJoint::zeros(l0);
    let w = prefactor(l0);
    for k in -(l0 as i32)..=l0 as i32 {
        t.add(KeySymbol::Value(k), KeySymbol::Value(k), w);
    }
    t.add(KeySymbol::NoKey, KeySymbol::NoKey, w / 2);
    Ok(t)
}

pub fn p0(l0: u32) -> Result<JointDistribution, AnalyticsError> {
    Ok(p0_exact(l0)?.to_f64())
}

/// Joint distribution on trials where Eve intervenes, built directly from the
/// smearing rule: each key row keeps 3/4 on the diagonal and sends 1/8 two
/// steps either way (into NoKey when that runs off the alphabet). Alice's two
/// no-key TAM values reach Bob's key values `±(l0-1)` with 1/32 each and stay
/// no-key with total 7/16. All in units of `2/(4l0+3)`.
pub fn p1_exact(l0: u32) -> Result<ExactJoint, AnalyticsError> {
    check_l0(l0)?;
    let l0i = l0 as i32;
    let w = prefactor(l0);
    let mut t = ExactJoint::zeros(l0);
    for k in -l0i..=l0i {
        let row = KeySymbol::Value(k);
        t.add(row, row, w * Rational64::new(3, 4));
        for shifted in [k - 2, k + 2] {
            t.add(
                row,
                KeySymbol::from_measured(shifted, l0),
                w * Rational64::new(1, 8),
            );
        }
    }
    for edge in [l0i - 1, 1 - l0i] {
        t.add(
            KeySymbol::NoKey,
            KeySymbol::Value(edge),
            w * Rational64::new(1, 32),
        );
    }
    t.add(
        KeySymbol::NoKey,
        KeySymbol::NoKey,
        w * Rational64::new(7, 16),
    );
    Ok(t)
}

pub fn p1(l0: u32) -> Result<JointDistribution, AnalyticsError> {
    Ok(p1_exact(l0)?.to_f64())
}

/// `(1-η) P0 + η P1` in exact arithmetic.
pub fn pab_exact(l0: u32, eta: Rational64) -> Result<ExactJoint, AnalyticsError> {
    if eta < Rational64::from_integer(0) || eta > Rational64::one() {
        return Err(AnalyticsError::EtaOutOfRange(
            *eta.numer() as f64 / *eta.denom() as f64,
        ));
    }
    Ok(p0_exact(l0)?.combine(Rational64::one() - eta, &p1_exact(l0)?, eta))
}

/// `(1-η) P0 + η P1`.
pub fn pab(l0: u32, eta: f64) -> Result<JointDistribution, AnalyticsError> {
    check_eta(eta)?;
    Ok(p0(l0)?.combine(1.0 - eta, &p1(l0)?, eta))
}

/// Key-generating events only: drop the NoKey row and column of `P_AB` and
/// renormalize by the both-value mass.
pub fn pk(l0: u32, eta: f64) -> Result<JointDistribution, AnalyticsError> {
    let full = pab(l0, eta)?;
    let f = full.both_value_mass();
    Ok(full.key_block().scaled(1.0 / f))
}
