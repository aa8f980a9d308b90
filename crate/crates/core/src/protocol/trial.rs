use std::f64::consts::{FRAC_PI_2, PI};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{BellSettings, ProtocolConfig, SourceModel};
use super::ProtocolError;
use crate::analytics::alice_values;
use crate::angmom::{
    four_outcomes, Observable, Party, Polarization, PolarizationAngle, SpinDensity, TwoPhotonState,
};
use crate::key::KeySymbol;

/// What a sifted round is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    KeyRound,
    BellRound,
    Discarded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BellKind {
    /// One of the four CHSH setting pairs, indexed `(a,b), (a,b'), (a',b), (a',b')`.
    Chsh,
    /// A point of the visibility sweep.
    Sweep,
}

/// Polarizer settings and detector clicks of one Bell round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellRecord {
    pub kind: BellKind,
    pub index: u32,
    pub theta: PolarizationAngle,
    pub phi: PolarizationAngle,
    /// Alice's photon exits the `theta` port (otherwise `theta + π/2`).
    pub alice_pass: bool,
    pub bob_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub alice_var: Observable,
    pub bob_var: Observable,
    pub eve_var: Option<Observable>,
    pub alice_raw: i32,
    pub bob_raw: i32,
    pub eve_raw: Option<i32>,
    pub sifted: bool,
    pub role: Role,
    pub alice_key: KeySymbol,
    /// Negation of Bob's raw value, so a clean round has `alice_key == bob_key`.
    pub bob_key: KeySymbol,
    /// Sacrificed for error estimation.
    pub disclosed: bool,
    pub bell: Option<BellRecord>,
}

impl TrialRecord {
    pub fn both_keys(&self) -> Option<(i32, i32)> {
        Some((self.alice_key.as_value()?, self.bob_key.as_value()?))
    }

    /// Eve intercepted with the variable Alice did not use.
    pub fn eve_mismatched(&self) -> bool {
        self.eve_var.is_some_and(|v| v != self.alice_var)
    }
}

/// OAM with probability `1/2 - ε`, TAM otherwise. Low draws map to OAM.
pub fn choose_variable(draw: f64, epsilon: f64) -> Result<Observable, ProtocolError> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(ProtocolError::InvalidConfig(format!(
            "epsilon = {epsilon} is outside [0, 1/2)"
        )));
    }
    Ok(if draw < 0.5 - epsilon {
        Observable::Oam
    } else {
        Observable::Tam
    })
}

/// Inverse-CDF sampler over a finite set of values.
#[derive(Debug, Clone)]
struct ValueSampler {
    values: Vec<i32>,
    cumulative: Vec<f64>,
}

impl ValueSampler {
    fn new(weighted: impl IntoIterator<Item = (i32, f64)>) -> Self {
        let (mut values, mut cumulative) = (Vec::new(), Vec::new());
        let mut acc = 0.0;
        for (v, w) in weighted {
            acc += w;
            values.push(v);
            cumulative.push(acc);
        }
        Self { values, cumulative }
    }

    fn sample(&self, draw: f64) -> i32 {
        let total = *self.cumulative.last().expect("nonempty sampler");
        let i = self.cumulative.partition_point(|&c| c <= draw * total);
        self.values[i.min(self.values.len() - 1)]
    }
}

/// Per-session precomputation shared by every trial.
#[derive(Debug, Clone)]
pub(crate) struct TrialContext {
    config: ProtocolConfig,
    epsilon: f64,
    source: TwoPhotonState,
    oam_values: ValueSampler,
    tam_values: ValueSampler,
}

/// Number of uniforms consumed per trial; every trial draws all of them so
/// the stream layout is independent of the branch taken.
const DRAWS: usize = 12;

mod slot {
    pub const ALICE_VAR: usize = 0;
    pub const BOB_VAR: usize = 1;
    pub const EVE_ON: usize = 2;
    pub const EVE_VAR: usize = 3;
    pub const ALICE_OUT: usize = 4;
    pub const EVE_OUT: usize = 5;
    pub const BOB_OUT: usize = 6;
    pub const ROLE: usize = 7;
    pub const DISCLOSE: usize = 8;
    pub const BELL_SETTING: usize = 9;
    pub const BELL_OUT: usize = 10;
    pub const PRODUCT_AXIS: usize = 11;
}

impl TrialContext {
    pub(crate) fn new(config: &ProtocolConfig) -> Result<Self, ProtocolError> {
        config.validate()?;
        let to_f64 = |(v, w): (i32, num_rational::Rational64)| (v, w.to_f64().unwrap_or(0.0));
        Ok(Self {
            config: config.clone(),
            epsilon: config.epsilon()?,
            source: TwoPhotonState::source(config.l0),
            oam_values: ValueSampler::new(
                alice_values(config.l0, Observable::Oam)
                    .into_iter()
                    .map(to_f64),
            ),
            tam_values: ValueSampler::new(
                alice_values(config.l0, Observable::Tam)
                    .into_iter()
                    .map(to_f64),
            ),
        })
    }

    /// Counter-based stream: the same `(seed, index)` always replays the same trial.
    fn draws(&self, trial_index: u64) -> [f64; DRAWS] {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(trial_index);
        std::array::from_fn(|_| rng.random::<f64>())
    }

    pub(crate) fn run(&self, trial_index: u64) -> Result<TrialRecord, ProtocolError> {
        match self.config.source_model {
            SourceModel::Physical => self.run_physical(trial_index),
            SourceModel::PaperIdeal => self.run_paper_ideal(trial_index),
        }
    }

    fn eve_variable(&self, u: &[f64; DRAWS]) -> Option<Observable> {
        (u[slot::EVE_ON] < self.config.eta).then(|| {
            if u[slot::EVE_VAR] < 0.5 {
                Observable::Oam
            } else {
                Observable::Tam
            }
        })
    }

    fn role(&self, sifted: bool, u: &[f64; DRAWS]) -> Role {
        if !sifted {
            Role::Discarded
        } else if u[slot::ROLE] < self.config.bell_fraction {
            Role::BellRound
        } else {
            Role::KeyRound
        }
    }

    /// Intercept-resend on photon B with ideal projective measurements, in
    /// the order Alice, Eve, Bob, followed by the erasure matching each
    /// party's own variable.
    fn run_physical(&self, trial_index: u64) -> Result<TrialRecord, ProtocolError> {
        let u = self.draws(trial_index);
        let alice_var = choose_variable(u[slot::ALICE_VAR], self.epsilon)?;
        let bob_var = choose_variable(u[slot::BOB_VAR], self.epsilon)?;
        let eve_var = self.eve_variable(&u);

        let alice = self.source.measure(Party::A, alice_var, u[slot::ALICE_OUT]);
        let mut state = alice.state;
        let mut eve_raw = None;
        if let Some(var) = eve_var {
            let m = state.measure(Party::B, var, u[slot::EVE_OUT]);
            eve_raw = Some(m.eigenvalue);
            state = m.state;
        }
        let bob = state.measure(Party::B, bob_var, u[slot::BOB_OUT]);
        let mut state = bob.state;
        for (party, var) in [(Party::A, alice_var), (Party::B, bob_var)] {
            state = match var {
                Observable::Tam => state.erase_oam(party)?,
                Observable::Oam => state.spin_flip(party),
            };
        }

        let density = || state.spin_density();
        Ok(self.finish(
            trial_index,
            &u,
            (alice_var, bob_var, eve_var),
            (alice.eigenvalue, bob.eigenvalue, eve_raw),
            density,
        ))
    }

    /// Samples the branching model without state vectors. Sifting is an even
    /// coin independent of the variable, so kept rounds carry the biased
    /// variable weights `1/2 ∓ ε` unchanged.
    fn run_paper_ideal(&self, trial_index: u64) -> Result<TrialRecord, ProtocolError> {
        let u = self.draws(trial_index);
        let alice_var = choose_variable(u[slot::ALICE_VAR], self.epsilon)?;
        let bob_var = if u[slot::BOB_VAR] < 0.5 {
            alice_var
        } else {
            alice_var.other()
        };
        let eve_var = self.eve_variable(&u);
        let a = match alice_var {
            Observable::Oam => self.oam_values.sample(u[slot::ALICE_OUT]),
            Observable::Tam => self.tam_values.sample(u[slot::ALICE_OUT]),
        };
        let step = |draw: f64| if draw < 0.5 { -1 } else { 1 };

        // Values in Alice's frame; raw results on photon B are negated.
        let (eve_value, bob_value) = match eve_var {
            Some(v) if v == alice_var => (Some(a), a),
            Some(_) => {
                let e = a + step(u[slot::EVE_OUT]);
                (Some(e), e + step(u[slot::BOB_OUT]))
            }
            None => (None, a),
        };
        let bob_value = if bob_var == alice_var {
            bob_value
        } else {
            a + step(u[slot::BOB_OUT])
        };

        let entangled = !eve_var.is_some_and(|v| v != alice_var);
        let gamma = u[slot::PRODUCT_AXIS] * PI;
        let density = || {
            if entangled {
                SpinDensity::singlet()
            } else {
                TwoPhotonState::product(
                    self.config.l0,
                    (0, Polarization::linear(gamma)),
                    (0, Polarization::linear(gamma + FRAC_PI_2)),
                )
                .expect("l = 0 is within the mode cap")
                .spin_density()
            }
        };
        Ok(self.finish(
            trial_index,
            &u,
            (alice_var, bob_var, eve_var),
            (a, -bob_value, eve_value.map(|e| -e)),
            density,
        ))
    }

    fn finish(
        &self,
        trial_index: u64,
        u: &[f64; DRAWS],
        (alice_var, bob_var, eve_var): (Observable, Observable, Option<Observable>),
        (alice_raw, bob_raw, eve_raw): (i32, i32, Option<i32>),
        density: impl FnOnce() -> SpinDensity,
    ) -> TrialRecord {
        let l0 = self.config.l0;
        let sifted = alice_var == bob_var;
        let role = self.role(sifted, u);
        let (alice_key, bob_key) = if role == Role::KeyRound {
            (
                KeySymbol::from_measured(alice_raw, l0),
                KeySymbol::from_measured(-bob_raw, l0),
            )
        } else {
            (KeySymbol::NoKey, KeySymbol::NoKey)
        };
        let disclosed = alice_key.is_value()
            && bob_key.is_value()
            && u[slot::DISCLOSE] < self.config.disclose_fraction;
        let bell = (role == Role::BellRound).then(|| {
            sample_bell(
                &self.config.bell,
                &density(),
                u[slot::BELL_SETTING],
                u[slot::BELL_OUT],
            )
        });
        TrialRecord {
            trial_index,
            alice_var,
            bob_var,
            eve_var,
            alice_raw,
            bob_raw,
            eve_raw,
            sifted,
            role,
            alice_key,
            bob_key,
            disclosed,
            bell,
        }
    }
}

fn sample_bell(
    settings: &BellSettings,
    rho: &SpinDensity,
    setting_draw: f64,
    outcome_draw: f64,
) -> BellRecord {
    let (kind, index, theta, phi) = if setting_draw < 0.5 {
        let i = ((setting_draw * 8.0) as u32).min(3);
        let (a, b) = settings.chsh.pairs()[i as usize];
        (BellKind::Chsh, i, a, b)
    } else {
        let n = settings.sweep_points;
        let i = (((setting_draw - 0.5) * 2.0 * n as f64) as u32).min(n - 1);
        (
            BellKind::Sweep,
            i,
            settings.theta_fixed,
            settings.sweep_angle(i),
        )
    };
    let probs = four_outcomes(rho, theta, phi);
    let total: f64 = probs.iter().sum();
    let mut acc = 0.0;
    let mut outcome = 3;
    for (k, p) in probs.iter().enumerate() {
        acc += p / total;
        if outcome_draw < acc {
            outcome = k;
            break;
        }
    }
    // four_outcomes order: (θ,φ), (θ,φ⊥), (θ⊥,φ), (θ⊥,φ⊥).
    BellRecord {
        kind,
        index,
        theta,
        phi,
        alice_pass: outcome < 2,
        bob_pass: outcome % 2 == 0,
    }
}

/// Runs a single trial of `config` by index.
pub fn run_trial(config: &ProtocolConfig, trial_index: u64) -> Result<TrialRecord, ProtocolError> {
    TrialContext::new(config)?.run(trial_index)
}
