//! Classification of detected turns against reference annotations.
//!
//! A detected turn is a true positive when it covers at least 20% of the
//! corresponding reference turn's duration. Matching is one-to-one and
//! greedy by descending overlap. Temporal errors are signed so that a
//! negative value means the detected turn started (or ended) before the
//! reference one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::TurnAnnotation;
use crate::util::{mean, quantile_sorted, sample_sd};

/// Default minimum overlap fraction of the reference turn for a match.
pub const DEFAULT_OVERLAP_MIN: f64 = 0.20;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("{which} turn list must be sorted and non-overlapping")]
    UnsortedOrOverlapping { which: &'static str },
    #[error("overlap_min must lie in (0, 1], got {0}")]
    BadOverlapMin(f64),
    #[error("no defined detection scores to summarize")]
    EmptyScores,
}

// --------------------------------------------------------------------------
// Outcomes
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MatchKind {
    Tp,
    Fp,
    Fn,
}

/// One classified turn: a matched pair (TP), an unmatched detected turn
/// (FP), or an unmatched reference turn (FN).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub kind: MatchKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detected: Option<TurnAnnotation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<TurnAnnotation>,
    /// Intersection over the reference duration; TP only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap_fraction: Option<f64>,
    /// detected.start − reference.start; TP only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub onset_error_s: Option<f64>,
    /// detected.end − reference.end; TP only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end_error_s: Option<f64>,
}

/// Aggregate detection performance over one session or participant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
    /// tp/(tp+fp); 0 when tp = 0.
    pub precision: f64,
    /// tp/(tp+fn); 0 when tp = 0.
    pub recall: f64,
    /// Harmonic mean of precision and recall; 0 when tp = 0.
    pub f1: f64,
    /// Mean TP overlap, percent of reference duration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_overlap_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub onset_error_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub onset_error_sd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end_error_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end_error_sd: Option<f64>,
}

// --------------------------------------------------------------------------
// Classification
// --------------------------------------------------------------------------

fn check_sorted(list: &[TurnAnnotation], which: &'static str) -> Result<(), MatchError> {
    for w in list.windows(2) {
        if w[1].start_s < w[0].end_s {
            return Err(MatchError::UnsortedOrOverlapping { which });
        }
    }
    Ok(())
}

/// Fraction of `reference` covered by `detected`.
pub fn overlap_fraction(detected: &TurnAnnotation, reference: &TurnAnnotation) -> f64 {
    let inter = detected.end_s.min(reference.end_s) - detected.start_s.max(reference.start_s);
    inter.max(0.0) / reference.duration()
}

/// Greedy one-to-one matching of detected turns against reference turns.
///
/// Candidate pairs with overlap ≥ `overlap_min` are taken in descending
/// overlap order (exact ties: earlier reference turn first, then earlier
/// detected turn). Unmatched detected turns become FPs, unmatched reference
/// turns FNs. Outcomes are returned in time order.
pub fn classify_turns(
    detected: &[TurnAnnotation],
    reference: &[TurnAnnotation],
    overlap_min: f64,
) -> Result<Vec<MatchOutcome>, MatchError> {
    if !(overlap_min > 0.0 && overlap_min <= 1.0) {
        return Err(MatchError::BadOverlapMin(overlap_min));
    }
    check_sorted(detected, "detected")?;
    check_sorted(reference, "reference")?;

    struct Candidate {
        frac: f64,
        d: usize,
        r: usize,
    }
    let mut candidates = Vec::new();
    for (d, det) in detected.iter().enumerate() {
        for (r, refe) in reference.iter().enumerate() {
            let frac = overlap_fraction(det, refe);
            if frac >= overlap_min {
                candidates.push(Candidate { frac, d, r });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.frac
            .total_cmp(&a.frac)
            .then(a.r.cmp(&b.r))
            .then(a.d.cmp(&b.d))
    });

    let mut det_match: Vec<Option<usize>> = vec![None; detected.len()];
    let mut ref_match: Vec<Option<usize>> = vec![None; reference.len()];
    for c in &candidates {
        if det_match[c.d].is_none() && ref_match[c.r].is_none() {
            det_match[c.d] = Some(c.r);
            ref_match[c.r] = Some(c.d);
        }
    }

    let mut outcomes = Vec::new();
    for (d, det) in detected.iter().enumerate() {
        match det_match[d] {
            Some(r) => {
                let refe = &reference[r];
                outcomes.push(MatchOutcome {
                    kind: MatchKind::Tp,
                    detected: Some(*det),
                    reference: Some(*refe),
                    overlap_fraction: Some(overlap_fraction(det, refe)),
                    onset_error_s: Some(det.start_s - refe.start_s),
                    end_error_s: Some(det.end_s - refe.end_s),
                });
            }
            None => outcomes.push(MatchOutcome {
                kind: MatchKind::Fp,
                detected: Some(*det),
                reference: None,
                overlap_fraction: None,
                onset_error_s: None,
                end_error_s: None,
            }),
        }
    }
    for (r, refe) in reference.iter().enumerate() {
        if ref_match[r].is_none() {
            outcomes.push(MatchOutcome {
                kind: MatchKind::Fn,
                detected: None,
                reference: Some(*refe),
                overlap_fraction: None,
                onset_error_s: None,
                end_error_s: None,
            });
        }
    }
    outcomes.sort_by(|a, b| outcome_time(a).total_cmp(&outcome_time(b)));
    Ok(outcomes)
}

fn outcome_time(o: &MatchOutcome) -> f64 {
    o.detected
        .map(|d| d.start_s)
        .unwrap_or_else(|| o.reference.unwrap().start_s)
}

// --------------------------------------------------------------------------
// Scores
// --------------------------------------------------------------------------

/// Aggregates outcomes into a detection score.
///
/// Returns `None` when there is nothing to score (no detected and no
/// reference turns); such sessions are excluded from cohort summaries.
pub fn score(outcomes: &[MatchOutcome]) -> Option<DetectionScore> {
    let count = |k: MatchKind| outcomes.iter().filter(|o| o.kind == k).count();
    let (tp, fp, fn_count) = (count(MatchKind::Tp), count(MatchKind::Fp), count(MatchKind::Fn));
    if tp + fp + fn_count == 0 {
        return None;
    }
    let (precision, recall, f1) = if tp == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let p = tp as f64 / (tp + fp) as f64;
        let r = tp as f64 / (tp + fn_count) as f64;
        (p, r, 2.0 * p * r / (p + r))
    };
    let overlaps: Vec<f64> = outcomes.iter().filter_map(|o| o.overlap_fraction).collect();
    let onsets: Vec<f64> = outcomes.iter().filter_map(|o| o.onset_error_s).collect();
    let ends: Vec<f64> = outcomes.iter().filter_map(|o| o.end_error_s).collect();
    let stats = |v: &[f64]| -> (Option<f64>, Option<f64>) {
        match v.len() {
            0 => (None, None),
            1 => (Some(v[0]), None),
            _ => (Some(mean(v)), Some(sample_sd(v))),
        }
    };
    let (onset_error_mean, onset_error_sd) = stats(&onsets);
    let (end_error_mean, end_error_sd) = stats(&ends);
    Some(DetectionScore {
        tp,
        fp,
        fn_count,
        precision,
        recall,
        f1,
        mean_overlap_pct: (!overlaps.is_empty()).then(|| 100.0 * mean(&overlaps)),
        onset_error_mean,
        onset_error_sd,
        end_error_mean,
        end_error_sd,
    })
}

/// Distribution summary of per-participant F1 scores, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub n: usize,
    pub mean: f64,
    /// Normal-approximation 95% CI of the mean.
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub sd: f64,
    pub min: f64,
    pub p05: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub p95: f64,
    pub max: f64,
}

/// Summarizes F1 (×100, percent) across defined per-participant scores.
pub fn cohort_score_stats(per_participant: &[DetectionScore]) -> Result<ScoreSummary, MatchError> {
    if per_participant.is_empty() {
        return Err(MatchError::EmptyScores);
    }
    let values: Vec<f64> = per_participant.iter().map(|s| 100.0 * s.f1).collect();
    Ok(summarize_values(&values))
}

/// Distribution summary of raw values (used for F1 percents; exposed for
/// report tables).
pub fn summarize_values(values: &[f64]) -> ScoreSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let m = mean(&sorted);
    let sd = if n > 1 { sample_sd(&sorted) } else { 0.0 };
    let half = 1.96 * sd / (n as f64).sqrt();
    ScoreSummary {
        n,
        mean: m,
        ci_lower: m - half,
        ci_upper: m + half,
        sd,
        min: sorted[0],
        p05: quantile_sorted(&sorted, 0.05),
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.50),
        q3: quantile_sorted(&sorted, 0.75),
        p95: quantile_sorted(&sorted, 0.95),
        max: sorted[n - 1],
    }
}
