use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use hyperqkd::analytics::{
    bb84_baseline, error_rate_closed, error_rate_from_distribution, eve_information,
    mutual_info_closed, pab, secret_key_rate,
};
use hyperqkd::numfmt::fmt_sig;
use hyperqkd::protocol::{run_session, write_jsonl, EmpiricalJoint, SourceModel, Transcript};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{csv_field, emit, header_line, to_json_pretty, write_file};
use crate::report::{BellReport, ModelReport, PointReport, RowAgreement, SecurityReport};
use crate::spec::{OutputFormat, RunSpec};
use crate::CliError;

/// Runs `f` over the sweep points in parallel, keeping sweep order.
fn sweep<F>(spec: &RunSpec, f: F) -> Result<Vec<PointReport>, CliError>
where
    F: Fn(u32, f64) -> Result<PointReport, CliError> + Sync,
{
    spec.points()
        .into_par_iter()
        .map(|(l0, eta)| f(l0, eta))
        .collect()
}

pub fn run_analytic(spec: &RunSpec) -> Result<SecurityReport, CliError> {
    Ok(SecurityReport {
        run_spec: spec.clone(),
        points: sweep(spec, PointReport::analytic)?,
    })
}

/// Runs one session per point; returns the report and the transcripts.
pub fn run_simulate(spec: &RunSpec) -> Result<(SecurityReport, Vec<Transcript>), CliError> {
    let results: Vec<(PointReport, Transcript)> = spec
        .points()
        .into_par_iter()
        .map(|(l0, eta)| {
            let t = run_session(&spec.config(l0, eta)?)?;
            let mut p = PointReport::analytic(l0, eta)?;
            p.models.push(ModelReport::from_transcript(&t)?);
            Ok((p, t))
        })
        .collect::<Result<_, CliError>>()?;
    let (points, transcripts) = results.into_iter().unzip();
    Ok((
        SecurityReport {
            run_spec: spec.clone(),
            points,
        },
        transcripts,
    ))
}

pub fn run_compare(spec: &RunSpec) -> Result<SecurityReport, CliError> {
    let points = sweep(spec, |l0, eta| {
        let mut p = PointReport::analytic(l0, eta)?;
        let mut joints = Vec::new();
        for model in [SourceModel::PaperIdeal, SourceModel::Physical] {
            let t = run_session(&spec.config(l0, eta)?.with_model(model))?;
            p.models.push(ModelReport::from_transcript(&t)?);
            joints.push(EmpiricalJoint::from_transcript(&t));
        }
        p.model_agreement = RowAgreement::compare(l0, eta, &joints[0], &joints[1]);
        Ok(p)
    })?;
    Ok(SecurityReport {
        run_spec: spec.clone(),
        points,
    })
}

pub fn run_bell(spec: &RunSpec) -> Result<SecurityReport, CliError> {
    let points = sweep(spec, |l0, eta| {
        let t = run_session(&spec.config(l0, eta)?)?;
        let mut p = PointReport::analytic(l0, eta)?;
        p.bell = Some(BellReport::from_transcript(&t)?);
        Ok(p)
    })?;
    Ok(SecurityReport {
        run_spec: spec.clone(),
        points,
    })
}

/// One `x,series,value` data point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub x: f64,
    pub series: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub name: String,
    pub points: Vec<SeriesPoint>,
}

/// Error-rate curves are drawn for these interception ratios.
pub const FIG4_ETAS: [f64; 3] = [1.0, 0.5, 0.1];
pub const FIG4_MAX_L0: u32 = 25;

pub fn figure_data(spec: &RunSpec) -> Result<Vec<FigureData>, CliError> {
    let mut fig4 = Vec::new();
    for eta in FIG4_ETAS {
        let label = format!("eta={}", fmt_sig(eta));
        for l0 in 1..=FIG4_MAX_L0 {
            let x = l0 as f64;
            fig4.push(SeriesPoint {
                x,
                series: label.clone(),
                value: error_rate_closed(l0, eta)?,
            });
        }
        for l0 in 1..=FIG4_MAX_L0 {
            fig4.push(SeriesPoint {
                x: l0 as f64,
                series: format!("{label} distribution"),
                value: error_rate_from_distribution(&pab(l0, eta)?)?,
            });
        }
        let bb84 = bb84_baseline(eta)?.e;
        for l0 in 1..=FIG4_MAX_L0 {
            fig4.push(SeriesPoint {
                x: l0 as f64,
                series: format!("bb84 {label}"),
                value: bb84,
            });
        }
    }
    let mut figures = vec![FigureData {
        name: "fig4".into(),
        points: fig4,
    }];

    let mut bb84 = Vec::new();
    for (series, pick) in [
        (
            "I_AB",
            (|p: hyperqkd::analytics::Bb84Point| p.i_ab) as fn(_) -> f64,
        ),
        ("I_E", |p| p.i_e),
        ("kappa", |p| p.kappa),
    ] {
        for &eta in &spec.eta_grid {
            bb84.push(SeriesPoint {
                x: eta,
                series: series.into(),
                value: pick(bb84_baseline(eta)?),
            });
        }
    }
    figures.push(FigureData {
        name: "fig6a".into(),
        points: bb84,
    });

    for (i, &l0) in spec.l0_list.iter().enumerate() {
        let mut points = Vec::new();
        type Curve = fn(u32, f64) -> Result<f64, hyperqkd::analytics::AnalyticsError>;
        for (series, curve) in [
            ("I_AB", mutual_info_closed as Curve),
            ("I_E", eve_information),
            ("kappa", secret_key_rate),
        ] {
            for &eta in &spec.eta_grid {
                points.push(SeriesPoint {
                    x: eta,
                    series: series.into(),
                    value: curve(l0, eta)?,
                });
            }
        }
        figures.push(FigureData {
            name: format!("fig6{}", panel_letter(i)),
            points,
        });
    }
    Ok(figures)
}

fn panel_letter(i: usize) -> String {
    // Panel (a) is the baseline; per-l0 panels start at (b).
    let n = i + 1;
    if n < 26 {
        ((b'a' + n as u8) as char).to_string()
    } else {
        format!("_{n}")
    }
}

fn render_figure(spec: &RunSpec, fig: &FigureData) -> Result<String, CliError> {
    match spec.output_format {
        OutputFormat::Csv => {
            let mut s = header_line(spec)? + "\nx,series,value\n";
            for p in &fig.points {
                s.push_str(&format!(
                    "{},{},{}\n",
                    fmt_sig(p.x),
                    csv_field(&p.series),
                    fmt_sig(p.value)
                ));
            }
            Ok(s)
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                run_spec: &'a RunSpec,
                figure: &'a str,
                points: &'a [SeriesPoint],
            }
            to_json_pretty(&Doc {
                run_spec: spec,
                figure: &fig.name,
                points: &fig.points,
            })
        }
    }
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

pub const DEFAULT_FIGURE_DIR: &str = "fig_data";

/// Writes one file per figure; returns the paths written.
pub fn run_figures(spec: &RunSpec) -> Result<Vec<PathBuf>, CliError> {
    let dir = spec
        .output_path
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_FIGURE_DIR));
    let mut written = Vec::new();
    for fig in figure_data(spec)? {
        let path = dir.join(format!("{}.{}", fig.name, extension(spec.output_format)));
        write_file(&path, &render_figure(spec, &fig)?)?;
        written.push(path);
    }
    Ok(written)
}

pub fn render_report(spec: &RunSpec, report: &SecurityReport) -> Result<String, CliError> {
    match spec.output_format {
        OutputFormat::Csv => Ok(header_line(spec)? + "\n" + &report.to_csv()),
        OutputFormat::Json => to_json_pretty(report),
    }
}

pub fn transcript_name(l0: u32, eta: f64) -> String {
    format!("transcript_l0-{l0}_eta-{}.jsonl", fmt_sig(eta))
}

fn write_transcript(path: &Path, t: &Transcript) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_jsonl(t, BufWriter::new(file)).map_err(|e| match e {
        hyperqkd::protocol::ProtocolError::Io(io) => CliError::io(path, io),
        other => other.into(),
    })
}

/// Summary of a finished command.
#[derive(Debug)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    /// Gating 5σ flags (only fatal under `--strict`).
    pub failures: usize,
}

/// Executes the command and writes its outputs.
pub fn execute(spec: &RunSpec) -> Result<Outcome, CliError> {
    use crate::spec::Command;
    let report = match spec.command {
        Command::Figures => {
            return Ok(Outcome {
                written: run_figures(spec)?,
                failures: 0,
            })
        }
        Command::Simulate => {
            let (report, transcripts) = run_simulate(spec)?;
            let mut written = Vec::new();
            if let Some(dir) = &spec.output_path {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                for t in &transcripts {
                    let path = dir.join(transcript_name(t.config.l0, t.config.eta));
                    write_transcript(&path, t)?;
                    written.push(path);
                }
                let path = dir.join(format!("report.{}", extension(spec.output_format)));
                write_file(&path, &render_report(spec, &report)?)?;
                written.push(path);
            } else {
                emit(None, &render_report(spec, &report)?)?;
            }
            return Ok(Outcome {
                written,
                failures: report.failures(),
            });
        }
        Command::Analytic => run_analytic(spec)?,
        Command::Compare => run_compare(spec)?,
        Command::Bell => run_bell(spec)?,
    };
    emit(spec.output_path.as_deref(), &render_report(spec, &report)?)?;
    Ok(Outcome {
        written: spec.output_path.iter().cloned().collect(),
        failures: report.failures(),
    })
}
