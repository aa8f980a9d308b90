use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::SpinDensity;
use super::polarization::Polarization;
use super::{StateError, PRUNE_EPS};

/// Which photon an operation acts on. Photon B is the one sent to Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::A => f.write_str("A"),
            Party::B => f.write_str("B"),
        }
    }
}

/// The two angular-momentum variables a sorter can resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "OAM")]
    Oam,
    #[serde(rename = "TAM")]
    Tam,
}

impl Observable {
    pub fn other(self) -> Self {
        match self {
            Observable::Oam => Observable::Tam,
            Observable::Tam => Observable::Oam,
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Oam => f.write_str("OAM"),
            Observable::Tam => f.write_str("TAM"),
        }
    }
}

/// Circular polarization, i.e. the photon spin along the beam axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    /// `s = +1`, right circular.
    R,
    /// `s = -1`, left circular.
    L,
}

impl Spin {
    pub fn value(self) -> i32 {
        match self {
            Spin::R => 1,
            Spin::L => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::R => Spin::L,
            Spin::L => Spin::R,
        }
    }

    /// Position in the `(R, L)` basis used by [`SpinDensity`].
    pub(crate) fn index(self) -> usize {
        match self {
            Spin::R => 0,
            Spin::L => 1,
        }
    }

    pub(crate) const BOTH: [Spin; 2] = [Spin::R, Spin::L];
}

/// One photon's joint OAM/spin label `|l, s>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub l: i32,
    pub s: Spin,
}

impl ModeLabel {
    pub fn new(l: i32, s: Spin) -> Self {
        Self { l, s }
    }

    /// Total angular momentum `j = l + s`.
    pub fn j(&self) -> i32 {
        self.l + self.s.value()
    }

    pub fn eigenvalue(&self, observable: Observable) -> i32 {
        match observable {
            Observable::Oam => self.l,
            Observable::Tam => self.j(),
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{:+}>", self.l, self.s.value())
    }
}

type Key = (ModeLabel, ModeLabel);

/// Normalized pure state of the photon pair in the joint `|l,s>_A |l,s>_B`
/// basis. Only nonzero amplitudes are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    l0: u32,
    amplitudes: BTreeMap<Key, Complex64>,
}

/// Outcome of a projective measurement.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub eigenvalue: i32,
    pub probability: f64,
    pub state: TwoPhotonState,
}

impl TwoPhotonState {
    /// Down-conversion output with a flattened OAM spectrum:
    /// `(2(2l0+1))^{-1/2} Σ_l |l>_A |-l>_B (|H>_A|V>_B - |V>_A|H>_B)`.
    ///
    /// In the circular basis the polarization factor is `i(|L>|R> - |R>|L>)`,
    /// so each `l` contributes exactly two terms.
    pub fn source(l0: u32) -> Self {
        let h = Polarization::linear(0.0);
        let v = Polarization::linear(std::f64::consts::FRAC_PI_2);
        let l0i = l0 as i32;
        let norm = 1.0 / (2.0 * (2 * l0 + 1) as f64).sqrt();
        let mut terms = Vec::new();
        for l in -l0i..=l0i {
            for sa in Spin::BOTH {
                for sb in Spin::BOTH {
                    let amp = h.amplitude(sa) * v.amplitude(sb) - v.amplitude(sa) * h.amplitude(sb);
                    terms.push((ModeLabel::new(l, sa), ModeLabel::new(-l, sb), amp * norm));
                }
            }
        }
        Self::from_terms(l0, terms).expect("source state is within the mode cap and nonzero")
    }

    /// Polarization singlet `(|H>|V> - |V>|H>)/√2` carried by fixed OAM labels.
    pub fn spin_singlet(l0: u32, l_a: i32, l_b: i32) -> Result<Self, StateError> {
        let c = Complex64::new(0.0, -FRAC_1_SQRT_2);
        Self::from_terms(
            l0,
            [
                (
                    ModeLabel::new(l_a, Spin::R),
                    ModeLabel::new(l_b, Spin::L),
                    c,
                ),
                (
                    ModeLabel::new(l_a, Spin::L),
                    ModeLabel::new(l_b, Spin::R),
                    -c,
                ),
            ],
        )
    }

    /// Product state `|l_a, pol_a>_A |l_b, pol_b>_B`.
    pub fn product(
        l0: u32,
        (l_a, pol_a): (i32, Polarization),
        (l_b, pol_b): (i32, Polarization),
    ) -> Result<Self, StateError> {
        let mut terms = Vec::with_capacity(4);
        for sa in Spin::BOTH {
            for sb in Spin::BOTH {
                terms.push((
                    ModeLabel::new(l_a, sa),
                    ModeLabel::new(l_b, sb),
                    pol_a.amplitude(sa) * pol_b.amplitude(sb),
                ));
            }
        }
        Self::from_terms(l0, terms)
    }

    /// Builds a state from (possibly repeated) terms, then prunes and normalizes.
    pub fn from_terms<I>(l0: u32, terms: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (ModeLabel, ModeLabel, Complex64)>,
    {
        let cap = l0 as i32 + 2;
        let mut amplitudes: BTreeMap<Key, Complex64> = BTreeMap::new();
        for (a, b, amp) in terms {
            for m in [a, b] {
                if m.l.abs() > cap {
                    return Err(StateError::ModeOutOfRange { l: m.l, cap });
                }
            }
            *amplitudes.entry((a, b)).or_default() += amp;
        }
        Self::normalized(l0, amplitudes)
    }

    fn normalized(l0: u32, mut amplitudes: BTreeMap<Key, Complex64>) -> Result<Self, StateError> {
        amplitudes.retain(|_, a| a.norm() >= PRUNE_EPS);
        let norm = amplitudes
            .values()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm < PRUNE_EPS {
            return Err(StateError::ZeroNorm);
        }
        for a in amplitudes.values_mut() {
            *a /= norm;
        }
        Ok(Self { l0, amplitudes })
    }

    pub fn l0(&self) -> u32 {
        self.l0
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, a: ModeLabel, b: ModeLabel) -> Complex64 {
        self.amplitudes.get(&(a, b)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (ModeLabel, ModeLabel, Complex64)> + '_ {
        self.amplitudes.iter().map(|(&(a, b), &amp)| (a, b, amp))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .filter_map(|(k, a)| other.amplitudes.get(k).map(|b| a.conj() * b))
            .sum()
    }

    /// `|<self|other>|²`, insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    fn mode(key: &Key, party: Party) -> ModeLabel {
        match party {
            Party::A => key.0,
            Party::B => key.1,
        }
    }

    /// Born probabilities of each eigenvalue of `observable` on one photon,
    /// keyed in ascending eigenvalue order.
    pub fn born_distribution(&self, party: Party, observable: Observable) -> BTreeMap<i32, f64> {
        let mut dist = BTreeMap::new();
        for (key, amp) in &self.amplitudes {
            let ev = Self::mode(key, party).eigenvalue(observable);
            *dist.entry(ev).or_insert(0.0) += amp.norm_sqr();
        }
        dist
    }

    /// Projects onto the eigenspace of `observable` selected by inverse-CDF
    /// sampling of `draw ∈ [0, 1)` over ascending eigenvalues.
    pub fn measure(&self, party: Party, observable: Observable, draw: f64) -> Measurement {
        let dist = self.born_distribution(party, observable);
        let mut acc = 0.0;
        let mut chosen = None;
        for (&ev, &p) in &dist {
            acc += p;
            if draw < acc {
                chosen = Some((ev, p));
                break;
            }
        }
        // Rounding can leave the cumulative total a hair below 1.
        let (eigenvalue, probability) = chosen
            .or_else(|| dist.iter().next_back().map(|(&e, &p)| (e, p)))
            .expect("normalized state has a nonempty outcome distribution");
        let state = self
            .project(party, observable, eigenvalue)
            .expect("an outcome sampled with positive probability has a nonzero projection");
        Measurement {
            eigenvalue,
            probability,
            state,
        }
    }

    /// Renormalized projection onto one eigenvalue.
    pub fn project(
        &self,
        party: Party,
        observable: Observable,
        eigenvalue: i32,
    ) -> Result<Self, StateError> {
        let kept = self
            .amplitudes
            .iter()
            .filter(|(k, _)| Self::mode(k, party).eigenvalue(observable) == eigenvalue)
            .map(|(k, a)| (*k, *a))
            .collect();
        Self::normalized(self.l0, kept)
    }

    fn relabel(&self, party: Party, f: impl Fn(ModeLabel) -> ModeLabel) -> Self {
        let mut out: BTreeMap<Key, Complex64> = BTreeMap::new();
        for (&(a, b), &amp) in &self.amplitudes {
            let key = match party {
                Party::A => (f(a), b),
                Party::B => (a, f(b)),
            };
            *out.entry(key).or_default() += amp;
        }
        out.retain(|_, a| a.norm() >= PRUNE_EPS);
        Self {
            l0: self.l0,
            amplitudes: out,
        }
    }

    /// Shifts every OAM value on one photon to zero, keeping its spin.
    ///
    /// Only valid when each spin value on that photon's support is paired
    /// with a single `l`; otherwise distinguishable branches would be merged.
    pub fn erase_oam(&self, party: Party) -> Result<Self, StateError> {
        let mut seen: [Option<i32>; 2] = [None, None];
        for key in self.amplitudes.keys() {
            let m = Self::mode(key, party);
            let slot = &mut seen[m.s.index()];
            match *slot {
                None => *slot = Some(m.l),
                Some(l) if l != m.l => {
                    return Err(StateError::AmbiguousErasure {
                        party,
                        spin: m.s.value(),
                        first: l,
                        second: m.l,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(self.relabel(party, |m| ModeLabel::new(0, m.s)))
    }

    /// `s -> -s` on one photon.
    pub fn spin_flip(&self, party: Party) -> Self {
        self.relabel(party, |m| ModeLabel::new(m.l, m.s.flipped()))
    }

    /// Reduced polarization state after tracing out both OAM labels.
    pub fn spin_density(&self) -> SpinDensity {
        let mut by_oam: BTreeMap<(i32, i32), [Complex64; 4]> = BTreeMap::new();
        for (&(a, b), &amp) in &self.amplitudes {
            let v = by_oam.entry((a.l, b.l)).or_default();
            v[2 * a.s.index() + b.s.index()] += amp;
        }
        SpinDensity::from_vectors(by_oam.values())
    }
}

impl fmt::Display for TwoPhotonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&(a, b), amp) in &self.amplitudes {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i){}_A{}_B", amp.re, amp.im, a, b)?;
        }
        Ok(())
    }
}
