use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::scoring::ScoreVector;

/// One evaluated configuration. Field names are part of the output format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub method: String,
    pub psi: usize,
    pub t: usize,
    pub seed: u64,
    pub auroc: f64,
    pub fit_seconds: f64,
    pub score_seconds: f64,
    pub feature_bytes: usize,
}

impl ExperimentReport {
    /// Copy with both timing fields zeroed, for run-to-run comparisons.
    pub fn without_timings(&self) -> Self {
        Self {
            fit_seconds: 0.0,
            score_seconds: 0.0,
            ..self.clone()
        }
    }
}

/// Averages AUROC and timings; identity fields come from the first report.
pub fn mean_report(reports: &[ExperimentReport]) -> Option<ExperimentReport> {
    let first = reports.first()?;
    let k = reports.len() as f64;
    let mean = |f: fn(&ExperimentReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
    Some(ExperimentReport {
        auroc: mean(|r| r.auroc),
        fit_seconds: mean(|r| r.fit_seconds),
        score_seconds: mean(|r| r.score_seconds),
        ..first.clone()
    })
}

/// Per-size timings of SIK against the IDK baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub sik_fit_seconds: f64,
    pub sik_score_seconds: f64,
    pub idk_fit_seconds: f64,
    pub idk_score_seconds: f64,
    pub sik_feature_bytes: usize,
    pub idk_feature_bytes: usize,
}

fn write_csv_rows<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_jsonl_rows<W: Write, T: Serialize>(rows: &[T], mut out: W) -> Result<()> {
    for r in rows {
        serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_reports_csv<W: Write>(reports: &[ExperimentReport], out: W) -> Result<()> {
    write_csv_rows(reports, out)
}

pub fn write_reports_jsonl<W: Write>(reports: &[ExperimentReport], out: W) -> Result<()> {
    write_jsonl_rows(reports, out)
}

/// Contamination sweep output: the report fields followed by a `contamination` column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContaminationRecord {
    pub method: String,
    pub psi: usize,
    pub t: usize,
    pub seed: u64,
    pub auroc: f64,
    pub fit_seconds: f64,
    pub score_seconds: f64,
    pub feature_bytes: usize,
    pub contamination: f64,
}

impl ContaminationRecord {
    pub fn new(ratio: f64, r: &ExperimentReport) -> Self {
        Self {
            method: r.method.clone(),
            psi: r.psi,
            t: r.t,
            seed: r.seed,
            auroc: r.auroc,
            fit_seconds: r.fit_seconds,
            score_seconds: r.score_seconds,
            feature_bytes: r.feature_bytes,
            contamination: ratio,
        }
    }
}

pub fn write_contamination_csv<W: Write>(records: &[ContaminationRecord], out: W) -> Result<()> {
    write_csv_rows(records, out)
}

pub fn write_contamination_jsonl<W: Write>(records: &[ContaminationRecord], out: W) -> Result<()> {
    write_jsonl_rows(records, out)
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    write_csv_rows(rows, out)
}

pub fn write_bench_jsonl<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    write_jsonl_rows(rows, out)
}

/// Formats a score with 17 significant digits.
pub fn format_score(score: f64) -> String {
    format!("{score:.16e}")
}

/// `index,score[,label]` rows.
pub fn write_scores_csv<W: Write>(scores: &ScoreVector, labels: Option<&[bool]>, mut out: W) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != scores.len() {
            return Err(crate::error::SikError::shape("score labels", scores.len(), l.len()));
        }
    }
    out.write_all(if labels.is_some() { b"index,score,label\n" } else { b"index,score\n" })?;
    for (i, s) in scores.as_slice().iter().enumerate() {
        match labels {
            Some(l) => writeln!(out, "{i},{},{}", format_score(*s), u8::from(l[i]))?,
            None => writeln!(out, "{i},{}", format_score(*s))?,
        }
    }
    out.flush()?;
    Ok(())
}
