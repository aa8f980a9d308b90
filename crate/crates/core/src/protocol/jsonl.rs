//! JSON-lines transcripts: a config header followed by one record per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::config::ProtocolConfig;
use super::session::Transcript;
use super::trial::{BellRecord, TrialRecord};
use super::ProtocolError;
use crate::angmom::PolarizationAngle;
use crate::numfmt::round_sig;

#[derive(Serialize, Deserialize)]
struct Line {
    l0: u32,
    eta: f64,
    #[serde(flatten)]
    record: TrialRecord,
}

fn rounded_config(c: &ProtocolConfig) -> ProtocolConfig {
    let mut c = c.clone();
    c.eta = round_sig(c.eta);
    c.bell_fraction = round_sig(c.bell_fraction);
    c.disclose_fraction = round_sig(c.disclose_fraction);
    c.epsilon_override = c.epsilon_override.map(round_sig);
    c.bell.theta_fixed = PolarizationAngle::new(round_sig(c.bell.theta_fixed.radians()));
    c
}

fn rounded_record(r: &TrialRecord) -> TrialRecord {
    let mut r = r.clone();
    r.bell = r.bell.map(|b| BellRecord {
        theta: PolarizationAngle::new(round_sig(b.theta.radians())),
        phi: PolarizationAngle::new(round_sig(b.phi.radians())),
        ..b
    });
    r
}

/// Writes the transcript; real numbers are rounded to 12 significant digits.
pub fn write_jsonl<W: Write>(transcript: &Transcript, mut out: W) -> Result<(), ProtocolError> {
    let config = rounded_config(&transcript.config);
    serde_json::to_writer(&mut out, &config)?;
    out.write_all(b"\n")?;
    for r in &transcript.records {
        let line = Line {
            l0: config.l0,
            eta: config.eta,
            record: rounded_record(r),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Transcript, ProtocolError> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| ProtocolError::Malformed("empty transcript".into()))??;
    let config: ProtocolConfig = serde_json::from_str(&header)?;
    config.validate()?;
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line)?;
        if parsed.l0 != config.l0 || parsed.eta != config.eta {
            return Err(ProtocolError::Malformed(format!(
                "record {n} has l0={}, eta={} but the header has l0={}, eta={}",
                parsed.l0, parsed.eta, config.l0, config.eta
            )));
        }
        records.push(parsed.record);
    }
    Ok(Transcript::new(config, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{run_session, SourceModel};
    use proptest::prelude::*;

    #[test]
    fn field_names() {
        let cfg = ProtocolConfig::new(1, 0.3, 50)
            .unwrap()
            .with_bell_fraction(0.5);
        let t = run_session(&cfg).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let second: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        for key in [
            "l0",
            "eta",
            "trial_index",
            "alice_var",
            "bob_var",
            "eve_var",
            "alice_raw",
            "bob_raw",
            "eve_raw",
            "sifted",
            "role",
            "alice_key",
            "bob_key",
        ] {
            assert!(second.get(key).is_some(), "missing {key}");
        }
        assert_eq!(text.lines().count(), 51);
        let nokey = t.records.iter().position(|r| {
            r.role == super::super::Role::KeyRound && r.alice_key.as_value().is_none()
        });
        if let Some(i) = nokey {
            let v: serde_json::Value =
                serde_json::from_str(text.lines().nth(i + 1).unwrap()).unwrap();
            assert!(v["alice_key"].is_null());
        }
    }

    #[test]
    fn rejects_mismatched_lines() {
        let cfg = ProtocolConfig::new(1, 0.3, 3).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&run_session(&cfg).unwrap(), &mut buf).unwrap();
        let text =
            String::from_utf8(buf)
                .unwrap()
                .replacen("\"l0\":1,\"eta\"", "\"l0\":2,\"eta\"", 1);
        assert!(read_jsonl(text.as_bytes()).is_err());
        assert!(read_jsonl(&b""[..]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn round_trip(l0 in 1u32..5, eta in 0.0f64..=1.0, seed: u64, physical: bool, bell in 0.0f64..=1.0) {
            let model = if physical { SourceModel::Physical } else { SourceModel::PaperIdeal };
            let cfg = ProtocolConfig::new(l0, eta, 40).unwrap()
                .with_seed(seed).with_model(model).with_bell_fraction(bell);
            let t = run_session(&cfg).unwrap();
            let mut buf = Vec::new();
            write_jsonl(&t, &mut buf).unwrap();
            let back = read_jsonl(buf.as_slice()).unwrap();
            prop_assert_eq!(&back.config, &rounded_config(&t.config));
            let expected: Vec<_> = t.records.iter().map(rounded_record).collect();
            prop_assert_eq!(&back.records, &expected);
            prop_assert_eq!(back.summary, t.summary);
            let mut again = Vec::new();
            write_jsonl(&back, &mut again).unwrap();
            prop_assert_eq!(buf, again);
        }
    }
}
