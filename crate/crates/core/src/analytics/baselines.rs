use serde::{Deserialize, Serialize};

use super::rates::xlog2x;
use super::{check_eta, check_l0, AnalyticsError};

/// Intercept-resend figures for polarization BB84 (equivalently E91).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bb84Point {
    pub e: f64,
    pub i_ab: f64,
    pub i_e: f64,
    pub kappa: f64,
}

/// `e = η/4`, `I_AB = 1 - h(e)`, `I_E = η/2`.
pub fn bb84_baseline(eta: f64) -> Result<Bb84Point, AnalyticsError> {
    check_eta(eta)?;
    let e = eta / 4.0;
    let i_ab = 1.0 + xlog2x(e) + xlog2x(1.0 - e);
    let i_e = eta / 2.0;
    Ok(Bb84Point {
        e,
        i_ab,
        i_e,
        kappa: (i_ab - i_e).max(0.0),
    })
}

/// Error rate of two-basis OAM schemes: `η l0/(2l0+1)`.
pub fn competing_oam_error(l0: u32, eta: f64) -> Result<f64, AnalyticsError> {
    check_l0(l0)?;
    check_eta(eta)?;
    Ok(eta * l0 as f64 / (2 * l0 + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::error_rate_closed;

    #[test]
    fn bb84_endpoints() {
        assert_eq!(
            bb84_baseline(0.0).unwrap(),
            Bb84Point {
                e: 0.0,
                i_ab: 1.0,
                i_e: 0.0,
                kappa: 1.0
            }
        );
        assert_eq!(bb84_baseline(1.0).unwrap().e, 0.25);
    }

    #[test]
    fn bb84_kappa_nonincreasing_and_continuous() {
        let ks: Vec<f64> = (0..=100)
            .map(|i| bb84_baseline(i as f64 / 100.0).unwrap().kappa)
            .collect();
        for w in ks.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
            assert!(w[0] - w[1] < 0.05);
        }
    }

    #[test]
    fn competing_scheme() {
        assert!((competing_oam_error(1, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((competing_oam_error(100_000, 1.0).unwrap() - 0.5).abs() < 1e-5);
        for l0 in 2..=25 {
            for i in 1..=10 {
                let eta = i as f64 / 10.0;
                assert!(
                    competing_oam_error(l0, eta).unwrap() > error_rate_closed(l0, eta).unwrap()
                );
            }
        }
    }
}
