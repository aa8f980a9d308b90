use serde::{Deserialize, Serialize};

use super::config::{BellSettings, ProtocolConfig};
use super::session::{run_session, Transcript};
use super::trial::{BellKind, Role, TrialRecord};
use super::ProtocolError;
use crate::analytics::{mutual_info_of, JointDistribution};
use crate::angmom::StateError;
use crate::key::KeySymbol;

/// Fewest Bell rounds a CHSH/visibility estimate will be built from.
pub const MIN_BELL_ROUNDS: u64 = 1000;

/// An empirical quantity with its sample size and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
}

impl Estimate {
    /// Binomial proportion `k/n`.
    pub fn proportion(k: u64, n: u64) -> Self {
        let p = k as f64 / n as f64;
        Self {
            value: p,
            std_error: binomial_se(p, n),
            n,
        }
    }

    /// `|value - reference|` in units of the standard error. An exact match
    /// with zero error is 0, a mismatch with zero error is infinite.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.value - reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Disclosed-round error rate: fraction of disclosed rounds (both keys
/// present) whose keys differ.
pub fn estimate_error(transcript: &Transcript) -> Result<Estimate, ProtocolError> {
    let (mut n, mut errors) = (0u64, 0u64);
    for r in transcript.records.iter().filter(|r| r.disclosed) {
        n += 1;
        errors += u64::from(r.alice_key != r.bob_key);
    }
    if n == 0 {
        return Err(ProtocolError::NoKeyRounds);
    }
    Ok(Estimate::proportion(errors, n))
}

/// Fraction of key rounds where both parties hold a key value.
pub fn estimate_key_fraction(transcript: &Transcript) -> Result<Estimate, ProtocolError> {
    let s = &transcript.summary;
    if s.key_rounds == 0 {
        return Err(ProtocolError::NoKeyRounds);
    }
    Ok(Estimate::proportion(s.both_value, s.key_rounds))
}

/// Alice × Bob symbol counts over key rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalJoint {
    l0: u32,
    counts: Vec<u64>,
    n: u64,
}

/// Result of a cellwise comparison against an exact table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    pub max_z: f64,
    pub worst: Option<(KeySymbol, KeySymbol)>,
    /// Cells beyond the threshold, with their z-scores.
    pub flagged: Vec<(KeySymbol, KeySymbol, f64)>,
}

impl EmpiricalJoint {
    pub fn from_records<'a>(l0: u32, records: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let dim = 2 * l0 as usize + 2;
        let mut counts = vec![0; dim * dim];
        let mut n = 0;
        for r in records.into_iter().filter(|r| r.role == Role::KeyRound) {
            counts[r.alice_key.index(l0) * dim + r.bob_key.index(l0)] += 1;
            n += 1;
        }
        Self { l0, counts, n }
    }

    pub fn from_transcript(t: &Transcript) -> Self {
        Self::from_records(t.config.l0, &t.records)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn dim(&self) -> usize {
        2 * self.l0 as usize + 2
    }

    pub fn count(&self, alice: KeySymbol, bob: KeySymbol) -> u64 {
        self.counts[alice.index(self.l0) * self.dim() + bob.index(self.l0)]
    }

    pub fn frequencies(&self) -> JointDistribution {
        let (dim, n) = (self.dim(), self.n.max(1) as f64);
        JointDistribution::from_fn(self.l0, true, |i, j| self.counts[i * dim + j] as f64 / n)
    }

    /// Compares every cell with `expected` using binomial standard errors.
    pub fn check_cells(&self, expected: &JointDistribution, threshold: f64) -> CellCheck {
        let mut out = CellCheck {
            max_z: 0.0,
            worst: None,
            flagged: Vec::new(),
        };
        for a in KeySymbol::alphabet(self.l0) {
            for b in KeySymbol::alphabet(self.l0) {
                let p = expected.get(a, b);
                let est = Estimate {
                    value: self.count(a, b) as f64 / self.n as f64,
                    std_error: binomial_se(p, self.n),
                    n: self.n,
                };
                let z = est.z_score(p);
                if z > out.max_z || out.worst.is_none() {
                    out.max_z = out.max_z.max(z);
                    out.worst = Some((a, b));
                }
                if z > threshold {
                    out.flagged.push((a, b, z));
                }
            }
        }
        out
    }

    /// Plug-in mutual information of the key-value block. The standard
    /// error is the asymptotic one, `sqrt(Var[log2 p(a,b)/(p(a)p(b))]/n)`.
    pub fn mutual_info(&self) -> Result<Estimate, ProtocolError> {
        let k = 2 * self.l0 as usize + 1;
        let dim = self.dim();
        let n: u64 = (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| self.counts[i * dim + j])
            .sum();
        if n == 0 {
            return Err(ProtocolError::NoKeyRounds);
        }
        let nf = n as f64;
        let p =
            JointDistribution::from_fn(self.l0, false, |i, j| self.counts[i * dim + j] as f64 / nf);
        let value = mutual_info_of(&p);
        let (rows, cols) = (p.row_marginal(), p.col_marginal());
        let mut second = 0.0;
        for (i, pi) in rows.iter().enumerate() {
            for (j, pj) in cols.iter().enumerate() {
                let pij = p.at(i, j);
                if pij > 0.0 {
                    second += pij * (pij / (pi * pj)).log2().powi(2);
                }
            }
        }
        Ok(Estimate {
            value,
            std_error: ((second - value * value).max(0.0) / nf).sqrt(),
            n,
        })
    }
}

/// Empirical CHSH value and fringe visibility from Bell rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellSummary {
    pub counted: u64,
    pub correlations: [f64; 4],
    pub chsh_counts: [u64; 4],
    pub s: Estimate,
    pub sweep_rates: Vec<f64>,
    pub sweep_counts: Vec<u64>,
    pub visibility: Estimate,
}

impl BellSummary {
    pub fn from_records<'a>(
        settings: &BellSettings,
        records: impl IntoIterator<Item = &'a TrialRecord>,
    ) -> Result<Self, ProtocolError> {
        let m = settings.sweep_points as usize;
        let mut chsh_counts = [0u64; 4];
        let mut chsh_sum = [0i64; 4];
        let mut sweep_counts = vec![0u64; m];
        let mut sweep_hits = vec![0u64; m];
        let mut counted = 0;
        for b in records.into_iter().filter_map(|r| r.bell.as_ref()) {
            counted += 1;
            let i = b.index as usize;
            match b.kind {
                BellKind::Chsh => {
                    chsh_counts[i] += 1;
                    chsh_sum[i] += if b.alice_pass == b.bob_pass { 1 } else { -1 };
                }
                BellKind::Sweep => {
                    sweep_counts[i] += 1;
                    sweep_hits[i] += u64::from(b.alice_pass && b.bob_pass);
                }
            }
        }
        if counted < MIN_BELL_ROUNDS || chsh_counts.contains(&0) {
            return Err(ProtocolError::InsufficientBellRounds {
                counted,
                required: MIN_BELL_ROUNDS,
            });
        }

        let correlations: [f64; 4] =
            std::array::from_fn(|i| chsh_sum[i] as f64 / chsh_counts[i] as f64);
        let s_value = correlations
            .iter()
            .zip(crate::angmom::ChshAngles::SIGNS)
            .map(|(e, sign)| sign * e)
            .sum::<f64>()
            .abs();
        let s_var: f64 = (0..4)
            .map(|i| (1.0 - correlations[i].powi(2)).max(0.0) / chsh_counts[i] as f64)
            .sum();

        let sweep_rates: Vec<f64> = sweep_hits
            .iter()
            .zip(&sweep_counts)
            .map(|(&h, &n)| {
                if n == 0 {
                    f64::NAN
                } else {
                    h as f64 / n as f64
                }
            })
            .collect();
        let populated = || (0..m).filter(|&i| sweep_counts[i] > 0);
        let imax = populated().max_by(|&a, &b| sweep_rates[a].total_cmp(&sweep_rates[b]));
        let imin = populated().min_by(|&a, &b| sweep_rates[a].total_cmp(&sweep_rates[b]));
        let (Some(imax), Some(imin)) = (imax, imin) else {
            return Err(ProtocolError::InsufficientBellRounds {
                counted,
                required: MIN_BELL_ROUNDS,
            });
        };
        let (hi, lo) = (sweep_rates[imax], sweep_rates[imin]);
        if hi + lo <= 0.0 {
            return Err(StateError::DegenerateCorrelation { sum: hi + lo }.into());
        }
        // Delta method on (max - min)/(max + min), with the binomial variance
        // floored at one half count so an empty minimum bin still has spread.
        let var = |p: f64, n: u64| {
            let floor = 0.5 / n as f64;
            let q = p.clamp(floor, 1.0 - floor);
            q * (1.0 - q) / n as f64
        };
        let v_se = 2.0
            * (lo * lo * var(hi, sweep_counts[imax]) + hi * hi * var(lo, sweep_counts[imin]))
                .sqrt()
            / (hi + lo).powi(2);
        let n_sweep = sweep_counts.iter().sum();

        Ok(Self {
            counted,
            correlations,
            chsh_counts,
            s: Estimate {
                value: s_value,
                std_error: s_var.sqrt(),
                n: chsh_counts.iter().sum(),
            },
            sweep_rates,
            sweep_counts,
            visibility: Estimate {
                value: (hi - lo) / (hi + lo),
                std_error: v_se,
                n: n_sweep,
            },
        })
    }

    pub fn from_transcript(t: &Transcript) -> Result<Self, ProtocolError> {
        Self::from_records(&t.config.bell, &t.records)
    }
}

/// Runs a session and aggregates its Bell rounds.
pub fn bell_test(config: &ProtocolConfig) -> Result<BellSummary, ProtocolError> {
    if config.bell_fraction <= 0.0 {
        return Err(ProtocolError::InvalidConfig(
            "bell_fraction must be positive for a Bell test".into(),
        ));
    }
    BellSummary::from_transcript(&run_session(config)?)
}
