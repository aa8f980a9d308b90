use nalgebra::Matrix4;
use num_complex::Complex64;

use super::state::Spin;
use super::StateError;

/// Joint spin basis ordering used for every [`SpinDensity`] index.
pub const SPIN_BASIS: [(Spin, Spin); 4] = [
    (Spin::R, Spin::R),
    (Spin::R, Spin::L),
    (Spin::L, Spin::R),
    (Spin::L, Spin::L),
];

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Two-qubit polarization density matrix in the circular basis
/// `{RR, RL, LR, LL}` (photon A first).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinDensity {
    rho: Matrix4<Complex64>,
}

impl SpinDensity {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self, StateError> {
        let herm = (rho - rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > HERMITIAN_TOL {
            return Err(StateError::InvalidDensity(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(StateError::InvalidDensity(format!("trace is {tr}")));
        }
        let out = Self { rho };
        let min = out.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(StateError::InvalidDensity(format!(
                "eigenvalue {min:e} is negative"
            )));
        }
        Ok(out)
    }

    /// `Σ_k v_k v_k†` over unnormalized spin vectors whose squared norms sum to one.
    pub(crate) fn from_vectors<'a>(vectors: impl IntoIterator<Item = &'a [Complex64; 4]>) -> Self {
        let mut rho = Matrix4::<Complex64>::zeros();
        for v in vectors {
            for i in 0..4 {
                for j in 0..4 {
                    rho[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        Self { rho }
    }

    pub fn pure(v: [Complex64; 4]) -> Result<Self, StateError> {
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if n < 1e-30 {
            return Err(StateError::ZeroNorm);
        }
        let scaled = v.map(|z| z / n.sqrt());
        Ok(Self::from_vectors([&scaled]))
    }

    /// The polarization singlet `(|H>|V> - |V>|H>)/√2 = -i(|RL> - |LR>)/√2`.
    pub fn singlet() -> Self {
        let c = Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
        Self::pure([Complex64::default(), c, -c, Complex64::default()]).expect("nonzero")
    }

    /// Classical mixture; weights are renormalized.
    pub fn mixture(parts: &[(f64, SpinDensity)]) -> Result<Self, StateError> {
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0 || !w.is_finite()) || total <= 0.0 {
            return Err(StateError::InvalidMixture);
        }
        let rho = parts.iter().fold(Matrix4::zeros(), |acc, (w, d)| {
            acc + d.rho.scale(*w / total)
        });
        Ok(Self { rho })
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.rho[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.rho)
    }

    /// Transpose on photon B's index: `(a b, a' b') -> (a b', a' b)`.
    pub fn partial_transpose_b(&self) -> Matrix4<Complex64> {
        let mut out = Matrix4::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for ap in 0..2 {
                    for bp in 0..2 {
                        out[(2 * a + bp, 2 * ap + b)] = self.rho[(2 * a + b, 2 * ap + bp)];
                    }
                }
            }
        }
        out
    }

    /// Sum of the magnitudes of the negative eigenvalues of the partial
    /// transpose. Zero for separable two-qubit states, 1/2 for a Bell state.
    pub fn negativity(&self) -> f64 {
        hermitian_eigenvalues(self.partial_transpose_b())
            .into_iter()
            .filter(|&e| e < 0.0)
            .map(f64::abs)
            .sum()
    }

    /// `<a,b| rho |a,b>` for single-photon polarization vectors given in
    /// `(R, L)` components.
    pub(crate) fn expectation(&self, a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
        let mut v = [Complex64::default(); 4];
        for ia in 0..2 {
            for ib in 0..2 {
                v[2 * ia + ib] = a[ia] * b[ib];
            }
        }
        let mut acc = Complex64::default();
        for i in 0..4 {
            for j in 0..4 {
                acc += v[i].conj() * self.rho[(i, j)] * v[j];
            }
        }
        acc.re
    }
}

fn hermitian_eigenvalues(m: Matrix4<Complex64>) -> Vec<f64> {
    let hermitized = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = hermitized.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angmom::{Observable, Party, Polarization, TwoPhotonState};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn circular_products() -> SpinDensity {
        // |R>|L> and |L>|R> with equal weight.
        let rl = SpinDensity::pure([c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        let lr = SpinDensity::pure([c(0.0), c(0.0), c(1.0), c(0.0)]).unwrap();
        SpinDensity::mixture(&[(0.5, rl), (0.5, lr)]).unwrap()
    }

    #[test]
    fn singlet_is_pure_and_maximally_entangled() {
        let s = SpinDensity::singlet();
        assert!((s.purity() - 1.0).abs() < 1e-12);
        assert!((s.negativity() - 0.5).abs() < 1e-12);
        assert!(SpinDensity::new(*s.matrix()).is_ok());
    }

    #[test]
    fn source_traces_to_the_singlet() {
        for l0 in 1..=3 {
            let rho = TwoPhotonState::source(l0).spin_density();
            let diff = (rho.matrix() - SpinDensity::singlet().matrix()).norm();
            assert!(diff < 1e-12, "l0={l0}: {diff}");
        }
    }

    #[test]
    fn oam_measurement_leaves_spin_sector_alone() {
        let psi = TwoPhotonState::source(2);
        let before = psi.spin_density();
        for l in -2..=2 {
            let after = psi
                .project(Party::A, Observable::Oam, l)
                .unwrap()
                .spin_density();
            assert!((after.matrix() - before.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn product_mixture_is_diagonal_half_pure() {
        let m = circular_products();
        assert!((m.purity() - 0.5).abs() < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(m.get(i, j).norm() < 1e-15);
                }
            }
        }
        assert!(m.negativity() < 1e-12);
    }

    #[test]
    fn product_states_have_zero_negativity() {
        for k in 0..12 {
            let g = k as f64 * 0.27;
            let psi = TwoPhotonState::product(
                1,
                (0, Polarization::linear(g)),
                (0, Polarization::linear(g + 1.1)),
            )
            .unwrap();
            assert!(psi.spin_density().negativity() < 1e-12);
        }
    }

    #[test]
    fn half_mixed_singlet_negativity_anchor() {
        // Partial transpose maps the RL/LR coherence -(1-eta)/2 onto RR/LL,
        // giving eigenvalues ±(1-eta)/2 in that block.
        let eta = 0.5;
        let m = SpinDensity::mixture(&[
            (1.0 - eta, SpinDensity::singlet()),
            (eta, circular_products()),
        ])
        .unwrap();
        assert!((m.negativity() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_matrices() {
        let mut bad = *SpinDensity::singlet().matrix();
        bad[(0, 0)] += c(0.5);
        assert!(SpinDensity::new(bad).is_err());
        let mut skew = *SpinDensity::singlet().matrix();
        skew[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(SpinDensity::new(skew).is_err());
        assert_eq!(SpinDensity::mixture(&[]), Err(StateError::InvalidMixture));
    }
}
