use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate, GroundTruth, SynthConfig};
use crate::detector::CoordinationReport;
use crate::error::{Error, Result};
use crate::ingest::UrlResolver;
use crate::pipeline::{detect, DetectParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// `None` when nothing was flagged but the truth set is non-empty.
    pub precision: Option<f64>,
    /// `None` when the truth set is empty but something was flagged.
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn evaluate_sets(flagged: &HashSet<String>, truth: &GroundTruth) -> Metrics {
    let tp = flagged.iter().filter(|u| truth.coordinated_ids.contains(*u)).count();
    let fp = flagged.len() - tp;
    let fn_ = truth.coordinated_ids.len() - tp;
    let precision = match (flagged.len(), truth.coordinated_ids.len()) {
        (0, 0) => Some(1.0),
        (0, _) => None,
        (f, _) => Some(tp as f64 / f as f64),
    };
    let recall = match (truth.coordinated_ids.len(), flagged.len()) {
        (0, 0) => Some(1.0),
        (0, _) => None,
        (t, _) => Some(tp as f64 / t as f64),
    };
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    Metrics {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        precision,
        recall,
        f1,
    }
}

pub fn evaluate(report: &CoordinationReport, truth: &GroundTruth) -> Metrics {
    evaluate_sets(&report.flagged_ids(), truth)
}

/// Parameter grid; rows are emitted in nesting order
/// seed > overlap > similarity threshold > percentile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    pub base: SynthConfig,
    pub params: DetectParams,
    pub seeds: Vec<u64>,
    pub overlaps: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub percentiles: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        let base = SynthConfig::default();
        let params = DetectParams::default();
        SweepGrid {
            seeds: vec![base.seed],
            overlaps: vec![base.campaign_overlap],
            thresholds: vec![params.similarity_threshold],
            percentiles: vec![params.percentile],
            base,
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    pub overlap: f64,
    pub similarity_threshold: f64,
    pub percentile: f64,
    /// "ok" or "error: <message>".
    pub status: String,
    pub flagged: usize,
    pub metrics: Option<Metrics>,
}

impl SweepGrid {
    pub fn points(&self) -> Vec<(u64, f64, f64, f64)> {
        let mut out = Vec::new();
        for &seed in &self.seeds {
            for &overlap in &self.overlaps {
                for &threshold in &self.thresholds {
                    for &p in &self.percentiles {
                        out.push((seed, overlap, threshold, p));
                    }
                }
            }
        }
        out
    }
}

fn run_point(grid: &SweepGrid, (seed, overlap, threshold, percentile): (u64, f64, f64, f64)) -> SweepRow {
    let cfg = SynthConfig {
        seed,
        campaign_overlap: overlap,
        ..grid.base.clone()
    };
    let params = DetectParams {
        similarity_threshold: threshold,
        percentile,
        ..grid.params.clone()
    };
    let outcome = generate(&cfg).and_then(|corpus| {
        let det = detect(&corpus.posts, &UrlResolver::default(), &params)?;
        Ok((det.report.flagged.len(), evaluate(&det.report, &corpus.truth)))
    });
    let (status, flagged, metrics) = match outcome {
        Ok((n, m)) => ("ok".to_string(), n, Some(m)),
        Err(e) => (format!("error: {e}"), 0, None),
    };
    SweepRow {
        seed,
        overlap,
        similarity_threshold: threshold,
        percentile,
        status,
        flagged,
        metrics,
    }
}

/// One detection run per grid point. Failed points become error rows.
pub fn sweep(grid: &SweepGrid) -> Vec<SweepRow> {
    grid.points().into_par_iter().map(|pt| run_point(grid, pt)).collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "seed",
        "overlap",
        "similarity_threshold",
        "percentile",
        "status",
        "flagged",
        "tp",
        "fp",
        "fn",
        "precision",
        "recall",
        "f1",
    ])?;
    for r in rows {
        let m = r.metrics;
        w.write_record([
            r.seed.to_string(),
            r.overlap.to_string(),
            r.similarity_threshold.to_string(),
            r.percentile.to_string(),
            r.status.clone(),
            r.flagged.to_string(),
            m.map(|m| m.true_positives.to_string()).unwrap_or_default(),
            m.map(|m| m.false_positives.to_string()).unwrap_or_default(),
            m.map(|m| m.false_negatives.to_string()).unwrap_or_default(),
            opt(m.and_then(|m| m.precision)),
            opt(m.and_then(|m| m.recall)),
            opt(m.and_then(|m| m.f1)),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<sweep csv>", e))
}
