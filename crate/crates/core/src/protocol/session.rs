use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ProtocolConfig;
use super::trial::{Role, TrialContext, TrialRecord};
use super::ProtocolError;
use crate::key::KeySymbol;

/// Tallies over a transcript's records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    pub sifted: u64,
    pub key_rounds: u64,
    pub bell_rounds: u64,
    pub discarded: u64,
    /// Key rounds where both parties hold a key value.
    pub both_value: u64,
    /// Key rounds where at least one party has no key value.
    pub nokey: u64,
    pub disclosed: u64,
    pub disclosed_errors: u64,
}

impl Summary {
    pub fn tally<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut s = Summary::default();
        for r in records {
            s.trials += 1;
            s.sifted += u64::from(r.sifted);
            match r.role {
                Role::KeyRound => {
                    s.key_rounds += 1;
                    if r.both_keys().is_some() {
                        s.both_value += 1;
                    } else {
                        s.nokey += 1;
                    }
                }
                Role::BellRound => s.bell_rounds += 1,
                Role::Discarded => s.discarded += 1,
            }
            if r.disclosed {
                s.disclosed += 1;
                s.disclosed_errors += u64::from(r.alice_key != r.bob_key);
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub config: ProtocolConfig,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

impl Transcript {
    pub fn new(config: ProtocolConfig, records: Vec<TrialRecord>) -> Self {
        let summary = Summary::tally(&records);
        Self {
            config,
            records,
            summary,
        }
    }

    pub fn key_rounds(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| r.role == Role::KeyRound)
    }

    /// Undisclosed key rounds where both parties hold a value.
    pub fn final_key(&self) -> Vec<(KeySymbol, KeySymbol)> {
        self.key_rounds()
            .filter(|r| !r.disclosed && r.both_keys().is_some())
            .map(|r| (r.alice_key, r.bob_key))
            .collect()
    }
}

/// Runs `config.trials` independent rounds. Each round's randomness comes
/// from a stream keyed by `(seed, trial index)`, so the transcript does not
/// depend on how rayon schedules the work.
pub fn run_session(config: &ProtocolConfig) -> Result<Transcript, ProtocolError> {
    let ctx = TrialContext::new(config)?;
    let records = (0..config.trials)
        .into_par_iter()
        .map(|i| ctx.run(i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Transcript::new(config.clone(), records))
}
