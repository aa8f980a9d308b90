use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::distributions::{pab, pk};
use super::joint::JointDistribution;
use super::{check_eta, check_l0, AnalyticsError};

/// `x log2 x` with the `0 log 0 = 0` convention.
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Shannon entropy in bits.
pub fn entropy(probs: impl IntoIterator<Item = f64>) -> f64 {
    -probs.into_iter().map(xlog2x).sum::<f64>()
}

/// `H(A) + H(B) - H(A,B)` in bits.
pub fn mutual_info_of(p: &JointDistribution) -> f64 {
    entropy(p.row_marginal()) + entropy(p.col_marginal()) - entropy(p.entries().iter().copied())
}

/// Fraction of sifted rounds in which both parties obtain a key value:
/// `(4l0 + 2 - η)/(4l0 + 3)`.
pub fn key_fraction_closed(l0: u32, eta: f64) -> Result<f64, AnalyticsError> {
    check_l0(l0)?;
    check_eta(eta)?;
    let l = l0 as f64;
    Ok((4.0 * l + 2.0 - eta) / (4.0 * l + 3.0))
}

pub fn key_fraction_exact(l0: u32, eta: Rational64) -> Result<Rational64, AnalyticsError> {
    check_l0(l0)?;
    let l = l0 as i64;
    Ok((Rational64::from_integer(4 * l + 2) - eta) / (4 * l + 3))
}

/// Eavesdropper-induced error rate in the published closed form,
/// `(η/8)(4l0+1)/((2l0+1) - η/8)`.
pub fn error_rate_closed(l0: u32, eta: f64) -> Result<f64, AnalyticsError> {
    check_l0(l0)?;
    check_eta(eta)?;
    let l = l0 as f64;
    Ok(eta / 8.0 * (4.0 * l + 1.0) / ((2.0 * l + 1.0) - eta / 8.0))
}

/// `P(keys differ | both parties hold a key value)`.
pub fn error_rate_from_distribution(p: &JointDistribution) -> Result<f64, AnalyticsError> {
    let both = p.both_value_mass();
    if both < 1e-15 {
        return Err(AnalyticsError::ZeroDenominator);
    }
    Ok(p.mismatch_mass() / both)
}

/// Published closed form for `I(A;B)` over key-generating events.
pub fn mutual_info_closed(l0: u32, eta: f64) -> Result<f64, AnalyticsError> {
    check_l0(l0)?;
    check_eta(eta)?;
    let l = l0 as f64;
    let braces = (2.0 * l + 1.0 - eta / 2.0) * ((4.0 * l + 2.0 - eta) / 2.0).log2()
        - 8.0 * xlog2x(1.0 - eta / 8.0)
        + (2.0 * l + 1.0) * xlog2x(1.0 - eta / 4.0)
        + (2.0 * l - 1.0) * 2.0 * xlog2x(eta / 8.0);
    Ok(2.0 / (4.0 * l + 2.0 - eta) * braces)
}

/// Entropy of either party's symbol without eavesdropping,
/// `log2(4l0+3) - (4l0+2)/(4l0+3)`.
pub fn undisturbed_entropy(l0: u32) -> Result<f64, AnalyticsError> {
    check_l0(l0)?;
    let d = (4 * l0 + 3) as f64;
    Ok(d.log2() - (d - 1.0) / d)
}

/// Eve learns the full key value on the half of her interceptions that use
/// the right variable: `(η/2) log2(2l0+1)`.
pub fn eve_information(l0: u32, eta: f64) -> Result<f64, AnalyticsError> {
    check_l0(l0)?;
    check_eta(eta)?;
    Ok(eta / 2.0 * ((2 * l0 + 1) as f64).log2())
}

/// `κ = max(I(A;B) - I_E, 0)` with the closed-form `I(A;B)`.
pub fn secret_key_rate(l0: u32, eta: f64) -> Result<f64, AnalyticsError> {
    Ok((mutual_info_closed(l0, eta)? - eve_information(l0, eta)?).max(0.0))
}

/// All closed-form security quantities at one `(l0, η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub l0: u32,
    pub eta: f64,
    pub e: f64,
    pub f: f64,
    pub i_ab: f64,
    pub i_e: f64,
    pub kappa: f64,
    pub h_undisturbed: f64,
}

impl RatePoint {
    pub fn compute(l0: u32, eta: f64) -> Result<Self, AnalyticsError> {
        let i_ab = mutual_info_closed(l0, eta)?;
        let i_e = eve_information(l0, eta)?;
        Ok(Self {
            l0,
            eta,
            e: error_rate_closed(l0, eta)?,
            f: key_fraction_closed(l0, eta)?,
            i_ab,
            i_e,
            kappa: (i_ab - i_e).max(0.0),
            h_undisturbed: undisturbed_entropy(l0)?,
        })
    }
}

/// Distribution-derived counterparts of the closed forms, for side-by-side
/// reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionRates {
    pub e: f64,
    pub f: f64,
    pub i_ab: f64,
}

impl DistributionRates {
    pub fn compute(l0: u32, eta: f64) -> Result<Self, AnalyticsError> {
        let full = pab(l0, eta)?;
        Ok(Self {
            e: error_rate_from_distribution(&full)?,
            f: full.both_value_mass(),
            i_ab: mutual_info_of(&pk(l0, eta)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{p0, pab_exact};

    #[test]
    fn key_fraction_values() {
        let r = |n, d| Rational64::new(n, d);
        assert_eq!(key_fraction_exact(1, r(1, 1)).unwrap(), r(5, 7));
        assert_eq!(key_fraction_exact(1, r(0, 1)).unwrap(), r(6, 7));
        for l0 in 1..=10 {
            for i in 0..=10 {
                let eta = r(i, 10);
                assert_eq!(
                    pab_exact(l0, eta).unwrap().both_value_mass(),
                    key_fraction_exact(l0, eta).unwrap()
                );
            }
        }
        assert!(key_fraction_closed(100_000, 1.0).unwrap() > 0.99999);
    }

    #[test]
    fn error_rate_values() {
        assert_eq!(error_rate_closed(3, 0.0).unwrap(), 0.0);
        assert!((error_rate_closed(1, 1.0).unwrap() - 5.0 / 23.0).abs() < 1e-15);
        assert_eq!(error_rate_from_distribution(&p0(2).unwrap()).unwrap(), 0.0);
        for eta in [0.1, 0.5, 1.0] {
            assert!((error_rate_closed(200, eta).unwrap() - eta / 4.0).abs() < 1e-3);
            let d = error_rate_from_distribution(&pab(200, eta).unwrap()).unwrap();
            assert!((d - eta / 4.0).abs() < 1e-3);
        }
        // Mismatch-given-both-keys from the matrix: η(4l0-2)/(4(4l0+2-η)).
        let d = error_rate_from_distribution(&pab(1, 1.0).unwrap()).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_denominator() {
        let p =
            JointDistribution::from_fn(1, true, |i, j| if i == 3 && j == 3 { 1.0 } else { 0.0 });
        assert_eq!(
            error_rate_from_distribution(&p),
            Err(AnalyticsError::ZeroDenominator)
        );
    }

    #[test]
    fn mutual_information_anchors() {
        for l0 in 1..=10 {
            let n = (2 * l0 + 1) as f64;
            assert!((mutual_info_closed(l0, 0.0).unwrap() - n.log2()).abs() < 1e-12);
            assert!((mutual_info_of(&pk(l0, 0.0).unwrap()) - n.log2()).abs() < 1e-12);
            let h = undisturbed_entropy(l0).unwrap();
            assert!((mutual_info_of(&p0(l0).unwrap()) - h).abs() < 1e-12);
        }
        assert!((mutual_info_closed(1, 0.0).unwrap() - 3f64.log2()).abs() < 1e-15);
        let indep = JointDistribution::from_fn(2, true, |_, _| 1.0 / 36.0);
        assert!(mutual_info_of(&indep).abs() < 1e-12);
    }

    #[test]
    fn closed_mutual_information_matches_key_distribution_for_l0_two_up() {
        // For l0 = 1 the ±2 smearing wraps onto the opposite edge, which the
        // closed form does not model; from l0 = 2 on the two agree.
        for l0 in 2..=8 {
            for i in 0..=10 {
                let eta = i as f64 / 10.0;
                let closed = mutual_info_closed(l0, eta).unwrap();
                let direct = mutual_info_of(&pk(l0, eta).unwrap());
                assert!((closed - direct).abs() < 1e-12, "l0={l0} eta={eta}");
            }
        }
    }

    #[test]
    fn undisturbed_entropy_direct() {
        let h = undisturbed_entropy(1).unwrap();
        assert!((h - (7f64.log2() - 6.0 / 7.0)).abs() < 1e-15);
        let direct = entropy([2.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]);
        assert!((h - direct).abs() < 1e-12);
        let mut prev = 0.0;
        for l0 in 1..=50 {
            let h = undisturbed_entropy(l0).unwrap();
            assert!(h > prev);
            prev = h;
        }
    }

    #[test]
    fn eve_and_kappa() {
        assert_eq!(eve_information(4, 0.0).unwrap(), 0.0);
        assert!((eve_information(1, 1.0).unwrap() - 0.5 * 3f64.log2()).abs() < 1e-15);
        for l0 in [1, 3, 5] {
            let n = (2 * l0 + 1) as f64;
            assert!((secret_key_rate(l0, 0.0).unwrap() - n.log2()).abs() < 1e-12);
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let eta = i as f64 / 100.0;
                let k = secret_key_rate(l0, eta).unwrap();
                assert!(k > 0.0);
                assert!(k <= prev + 1e-12);
                prev = k;
            }
        }
        for i in 0..=10 {
            let eta = i as f64 / 10.0;
            assert!(secret_key_rate(3, eta).unwrap() > secret_key_rate(1, eta).unwrap());
        }
    }

    #[test]
    fn rate_point_invariants() {
        let p = RatePoint::compute(2, 0.3).unwrap();
        assert!((0.0..=1.0).contains(&p.e) && (0.0..=1.0).contains(&p.f));
        assert_eq!(p.kappa, (p.i_ab - p.i_e).max(0.0));
        assert!(RatePoint::compute(0, 0.3).is_err());
        assert!(RatePoint::compute(1, f64::NAN).is_err());
    }
}
