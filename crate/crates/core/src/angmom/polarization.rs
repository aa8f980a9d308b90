use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::SpinDensity;
use super::state::Spin;
use super::StateError;

/// Number of analyzer settings swept by [`visibility`].
pub const VISIBILITY_GRID: usize = 360;

const DEGENERATE_SUM: f64 = 1e-12;

/// Linear polarizer orientation, reduced to `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolarizationAngle(f64);

impl PolarizationAngle {
    pub fn new(theta: f64) -> Self {
        let r = theta.rem_euclid(PI);
        Self(if r >= PI { 0.0 } else { r })
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// The orthogonal analyzer output.
    pub fn perp(self) -> Self {
        Self::new(self.0 + FRAC_PI_2)
    }
}

impl From<f64> for PolarizationAngle {
    fn from(theta: f64) -> Self {
        Self::new(theta)
    }
}

/// Single-photon polarization as `(R, L)` amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization([Complex64; 2]);

impl Polarization {
    /// `cos θ |H> + sin θ |V> = (e^{iθ}|R> + e^{-iθ}|L>)/√2`.
    pub fn linear(theta: f64) -> Self {
        Self([
            Complex64::from_polar(FRAC_1_SQRT_2, theta),
            Complex64::from_polar(FRAC_1_SQRT_2, -theta),
        ])
    }

    pub fn circular(s: Spin) -> Self {
        let mut v = [Complex64::default(); 2];
        v[s.index()] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    pub fn amplitude(&self, s: Spin) -> Complex64 {
        self.0[s.index()]
    }

    pub(crate) fn components(&self) -> &[Complex64; 2] {
        &self.0
    }
}

/// Probability that photon A passes a polarizer at `theta` and photon B
/// one at `phi`.
pub fn coincidence(rho: &SpinDensity, theta: PolarizationAngle, phi: PolarizationAngle) -> f64 {
    rho.expectation(
        Polarization::linear(theta.radians()).components(),
        Polarization::linear(phi.radians()).components(),
    )
}

/// Joint probabilities `[P(a,b), P(a,b⊥), P(a⊥,b), P(a⊥,b⊥)]`.
pub fn four_outcomes(rho: &SpinDensity, a: PolarizationAngle, b: PolarizationAngle) -> [f64; 4] {
    [
        coincidence(rho, a, b),
        coincidence(rho, a, b.perp()),
        coincidence(rho, a.perp(), b),
        coincidence(rho, a.perp(), b.perp()),
    ]
}

/// Polarization correlation `E(a,b)` from the four normalized outcome rates.
pub fn correlation(
    rho: &SpinDensity,
    a: PolarizationAngle,
    b: PolarizationAngle,
) -> Result<f64, StateError> {
    let [pp, pm, mp, mm] = four_outcomes(rho, a, b);
    let sum = pp + pm + mp + mm;
    if sum < DEGENERATE_SUM {
        return Err(StateError::DegenerateCorrelation { sum });
    }
    Ok((pp + mm - pm - mp) / sum)
}

/// Analyzer settings for a CHSH test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshAngles {
    pub a: PolarizationAngle,
    pub a_prime: PolarizationAngle,
    pub b: PolarizationAngle,
    pub b_prime: PolarizationAngle,
}

impl ChshAngles {
    /// `(a, a', b, b') = (0, π/4, π/8, 3π/8)`.
    pub fn canonical() -> Self {
        Self {
            a: PolarizationAngle::new(0.0),
            a_prime: PolarizationAngle::new(FRAC_PI_4),
            b: PolarizationAngle::new(FRAC_PI_8),
            b_prime: PolarizationAngle::new(3.0 * FRAC_PI_8),
        }
    }

    /// The four setting pairs in the order `(a,b), (a,b'), (a',b), (a',b')`.
    pub fn pairs(&self) -> [(PolarizationAngle, PolarizationAngle); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }

    /// Sign of each pair's correlation in `S`.
    pub const SIGNS: [f64; 4] = [1.0, -1.0, 1.0, 1.0];
}

impl Default for ChshAngles {
    fn default() -> Self {
        Self::canonical()
    }
}

/// `S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|`.
pub fn chsh_value(rho: &SpinDensity, angles: &ChshAngles) -> Result<f64, StateError> {
    let mut s = 0.0;
    for ((a, b), sign) in angles.pairs().into_iter().zip(ChshAngles::SIGNS) {
        s += sign * correlation(rho, a, b)?;
    }
    Ok(s.abs())
}

/// Fringe visibility `(Pmax - Pmin)/(Pmax + Pmin)` of the coincidence curve
/// with A's analyzer fixed and B's swept over [`VISIBILITY_GRID`] points of `[0, π)`.
pub fn visibility(rho: &SpinDensity, theta_fixed: PolarizationAngle) -> Result<f64, StateError> {
    let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..VISIBILITY_GRID {
        let phi = PolarizationAngle::new(i as f64 * PI / VISIBILITY_GRID as f64);
        let p = coincidence(rho, theta_fixed, phi);
        max = max.max(p);
        min = min.min(p);
    }
    let sum = max + min;
    if sum < DEGENERATE_SUM {
        return Err(StateError::DegenerateCorrelation { sum });
    }
    Ok((max - min) / sum)
}
