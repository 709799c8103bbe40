//! Measurement-validation statistics: agreement, reliability, and
//! group-difference tests.
//!
//! Agreement between repeated measurements is quantified with the
//! single-measurement intraclass correlation computed from a balanced
//! two-way ANOVA with absolute agreement, plus Bland-Altman limits of
//! agreement. Measurement error is summarized as SEM (standard error of
//! measurement) and MDC (minimal detectable change at 95% confidence).
//! Confidence intervals come from a seeded percentile bootstrap so every
//! result is reproducible bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measures::SplitMode;
use crate::util::{mean, median, quantile_sorted, splitmix64};

/// Multiplier turning an SEM into a 95% minimal detectable change.
pub const MDC_FACTOR: f64 = 1.96 * std::f64::consts::SQRT_2;

/// Default number of bootstrap replicates.
pub const BOOTSTRAP_REPS: usize = 500;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("need at least {need} columns, got {got}")]
    TooFewColumns { need: usize, got: usize },
    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedMatrix { row: usize, expected: usize, got: usize },
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("total variance is zero; agreement is undefined")]
    ZeroTotalVariance,
    #[error("paired series have different lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least {need} pairs, got {got}")]
    TooFewPairs { need: usize, got: usize },
    #[error("ranks have zero variance; correlation is undefined")]
    ZeroRankVariance,
    #[error("both groups must be non-empty")]
    EmptyGroup,
    #[error("all pooled values are identical; test is undefined")]
    AllValuesTied,
    #[error("bootstrap statistic undefined in {undefined} of {reps} replicates (limit 20%)")]
    BootstrapUndefined { undefined: usize, reps: usize },
    #[error("bootstrap needs a non-empty sample and at least one replicate")]
    BootstrapEmpty,
}

// --------------------------------------------------------------------------
// Intraclass correlation
// --------------------------------------------------------------------------

/// Which population model the single-measurement agreement ICC is reported
/// under. Raters fixed (each participant measured by the same two half
/// splits) corresponds to the mixed model; raters sampled corresponds to
/// the random model. For a balanced layout both share the same
/// absolute-agreement estimate; the label records the intended inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IccModel {
    #[serde(rename = "two_way_mixed_31")]
    TwoWayMixed31,
    #[serde(rename = "two_way_random_21")]
    TwoWayRandom21,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IccResult {
    pub model: IccModel,
    /// Estimate clamped to [-1, 1] for reporting.
    pub value: f64,
    /// Raw ANOVA estimate before clamping.
    pub unclamped: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    pub ms_rows: f64,
    pub ms_cols: f64,
    pub ms_error: f64,
}

fn check_matrix(matrix: &[Vec<f64>]) -> Result<(usize, usize), StatsError> {
    let n = matrix.len();
    if n < 2 {
        return Err(StatsError::TooFewRows { need: 2, got: n });
    }
    let m = matrix[0].len();
    if m < 2 {
        return Err(StatsError::TooFewColumns { need: 2, got: m });
    }
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != m {
            return Err(StatsError::RaggedMatrix { row, expected: m, got: r.len() });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }
    Ok((n, m))
}

/// Single-measurement ICC with absolute agreement from a balanced two-way
/// layout (rows = participants, columns = repeated measurements).
///
/// ICC = (MSR − MSE) / (MSR + (m−1)·MSE + (m/n)·(MSC − MSE))
///
/// Errors when the matrix has zero total variance, in which case agreement
/// carries no information.
pub fn icc_agreement_single(matrix: &[Vec<f64>], model: IccModel) -> Result<IccResult, StatsError> {
    let (n, m) = check_matrix(matrix)?;
    let nf = n as f64;
    let mf = m as f64;
    let grand = mean(&matrix.iter().flatten().copied().collect::<Vec<_>>());
    let row_means: Vec<f64> = matrix.iter().map(|r| mean(r)).collect();
    let col_means: Vec<f64> = (0..m)
        .map(|j| matrix.iter().map(|r| r[j]).sum::<f64>() / nf)
        .collect();

    let mut sst = 0.0;
    let mut sse = 0.0;
    for (i, row) in matrix.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            sst += (x - grand).powi(2);
            let resid = x - row_means[i] - col_means[j] + grand;
            sse += resid * resid;
        }
    }
    if sst == 0.0 {
        return Err(StatsError::ZeroTotalVariance);
    }
    let ssr = mf * row_means.iter().map(|&r| (r - grand).powi(2)).sum::<f64>();
    let ssc = nf * col_means.iter().map(|&c| (c - grand).powi(2)).sum::<f64>();
    let ms_rows = ssr / (nf - 1.0);
    let ms_cols = ssc / (mf - 1.0);
    let ms_error = sse / ((nf - 1.0) * (mf - 1.0));

    let denom = ms_rows + (mf - 1.0) * ms_error + (mf / nf) * (ms_cols - ms_error);
    let unclamped = (ms_rows - ms_error) / denom;
    if !unclamped.is_finite() {
        return Err(StatsError::ZeroTotalVariance);
    }
    Ok(IccResult {
        model,
        value: unclamped.clamp(-1.0, 1.0),
        unclamped,
        n_rows: n,
        n_cols: m,
        ms_rows,
        ms_cols,
        ms_error,
    })
}

/// Standard error of measurement: square root of the within-participant
/// mean square from a one-way layout.
pub fn sem_within(matrix: &[Vec<f64>]) -> Result<f64, StatsError> {
    let (n, m) = check_matrix(matrix)?;
    let mut ssw = 0.0;
    for row in matrix {
        let rm = mean(row);
        ssw += row.iter().map(|&x| (x - rm).powi(2)).sum::<f64>();
    }
    Ok((ssw / (n as f64 * (m as f64 - 1.0))).sqrt())
}

/// Minimal detectable change at 95% confidence.
pub fn mdc_from_sem(sem: f64) -> f64 {
    MDC_FACTOR * sem
}

// --------------------------------------------------------------------------
// Variance components
// --------------------------------------------------------------------------

/// How between/within variance components are estimated from a balanced
/// one-way layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    /// Method-of-moments ANOVA estimators; between may come out negative.
    Anova,
    /// Restricted maximum likelihood, closed form for a balanced layout:
    /// equal to the ANOVA solution when it is interior, otherwise between
    /// is pinned at zero and within becomes the pooled total variance.
    Reml,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponents {
    pub between: f64,
    pub within: f64,
}

pub fn variance_components(
    matrix: &[Vec<f64>],
    method: VarianceMethod,
) -> Result<VarianceComponents, StatsError> {
    let (n, m) = check_matrix(matrix)?;
    let nf = n as f64;
    let mf = m as f64;
    let grand = mean(&matrix.iter().flatten().copied().collect::<Vec<_>>());
    let row_means: Vec<f64> = matrix.iter().map(|r| mean(r)).collect();
    let ssb = mf * row_means.iter().map(|&r| (r - grand).powi(2)).sum::<f64>();
    let mut ssw = 0.0;
    for (i, row) in matrix.iter().enumerate() {
        ssw += row.iter().map(|&x| (x - row_means[i]).powi(2)).sum::<f64>();
    }
    let msb = ssb / (nf - 1.0);
    let msw = ssw / (nf * (mf - 1.0));
    Ok(match method {
        VarianceMethod::Anova => VarianceComponents {
            between: (msb - msw) / mf,
            within: msw,
        },
        VarianceMethod::Reml => {
            if msb >= msw {
                VarianceComponents {
                    between: (msb - msw) / mf,
                    within: msw,
                }
            } else {
                VarianceComponents {
                    between: 0.0,
                    within: (ssb + ssw) / (nf * mf - 1.0),
                }
            }
        }
    })
}

/// One-way ICC implied by variance components (between, clamped at zero,
/// over total).
pub fn icc_oneway(c: &VarianceComponents) -> f64 {
    let b = c.between.max(0.0);
    b / (b + c.within)
}

// --------------------------------------------------------------------------
// Bland-Altman
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlandAltman {
    pub n: usize,
    /// Mean of the paired differences a − b.
    pub bias: f64,
    /// Sample SD of the differences.
    pub sd: f64,
    pub loa_lower: f64,
    pub loa_upper: f64,
}

/// Bland-Altman agreement of two paired series; differences are a − b and
/// the limits of agreement are bias ± 1.96·SD.
pub fn bland_altman(a: &[f64], b: &[f64]) -> Result<BlandAltman, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.len() < 2 {
        return Err(StatsError::TooFewPairs { need: 2, got: a.len() });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let bias = mean(&d);
    let sd = crate::util::sample_sd(&d);
    Ok(BlandAltman {
        n: d.len(),
        bias,
        sd,
        loa_lower: bias - 1.96 * sd,
        loa_upper: bias + 1.96 * sd,
    })
}

// --------------------------------------------------------------------------
// Bootstrap
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOutcome<const M: usize> {
    pub intervals: [BootstrapInterval; M],
    pub reps_defined: usize,
    pub reps_undefined: usize,
}

/// Percentile bootstrap over a sample of `n` units (participants).
///
/// Replicate `r` gets its own deterministic generator: the seeded base
/// stream shifted to stream `r + 1` (stream 0 stays free for the caller's
/// point estimate). Each replicate draws `n` unit indices with replacement
/// and hands them, plus the generator, to `stat`, which may use the
/// generator for any internal randomness (e.g. fresh test partitions) and
/// may return `None` when the statistic is undefined for that resample.
///
/// Errors when more than 20% of replicates are undefined.
pub fn bootstrap_ci_multi<const M: usize, F>(
    n: usize,
    reps: usize,
    seed: u64,
    mut stat: F,
) -> Result<BootstrapOutcome<M>, StatsError>
where
    F: FnMut(&[usize], &mut ChaCha8Rng) -> Option<[f64; M]>,
{
    if n == 0 || reps == 0 {
        return Err(StatsError::BootstrapEmpty);
    }
    let mut draws: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); M];
    let mut undefined = 0usize;
    let mut sample = vec![0usize; n];
    for r in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64 + 1);
        for slot in sample.iter_mut() {
            *slot = rng.gen_range(0..n);
        }
        match stat(&sample, &mut rng) {
            Some(values) => {
                for (k, v) in values.iter().enumerate() {
                    draws[k].push(*v);
                }
            }
            None => undefined += 1,
        }
    }
    if (undefined as f64) > 0.20 * reps as f64 {
        return Err(StatsError::BootstrapUndefined { undefined, reps });
    }
    let mut intervals = [BootstrapInterval { lower: f64::NAN, upper: f64::NAN }; M];
    for (k, vals) in draws.iter_mut().enumerate() {
        vals.sort_by(f64::total_cmp);
        intervals[k] = BootstrapInterval {
            lower: quantile_sorted(vals, 0.025),
            upper: quantile_sorted(vals, 0.975),
        };
    }
    Ok(BootstrapOutcome {
        intervals,
        reps_defined: reps - undefined,
        reps_undefined: undefined,
    })
}

/// Single-statistic convenience wrapper around [`bootstrap_ci_multi`].
pub fn bootstrap_ci<F>(
    n: usize,
    reps: usize,
    seed: u64,
    mut stat: F,
) -> Result<(BootstrapInterval, usize), StatsError>
where
    F: FnMut(&[usize], &mut ChaCha8Rng) -> Option<f64>,
{
    let out = bootstrap_ci_multi::<1, _>(n, reps, seed, |idx, rng| stat(idx, rng).map(|v| [v]))?;
    Ok((out.intervals[0], out.reps_undefined))
}

// --------------------------------------------------------------------------
// Reliability curve
// --------------------------------------------------------------------------

/// One participant's chronological per-test values (e.g. test-level median
/// turn speeds over a monitoring period).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantSeries {
    pub participant_id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityEstimate {
    pub icc: f64,
    pub sem: f64,
    pub mdc: f64,
}

/// Reliability at one aggregation size `k`; `estimate` is absent when
/// fewer than 3 participants have 2k tests or the retained matrix carries
/// no variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityPoint {
    pub k: usize,
    pub n_retained: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<ReliabilityEstimate>,
}

/// Builds the n×2 split-half matrix for aggregation size `k`: participants
/// with at least 2k tests contribute the medians of two disjoint k-test
/// halves drawn by `mode`. Input order is preserved; callers that need
/// run-to-run determinism must pass a stable order.
pub fn reliability_matrix<R: Rng>(
    series: &[ParticipantSeries],
    k: usize,
    mode: SplitMode,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut matrix = Vec::new();
    for s in series {
        if s.values.len() >= 2 * k {
            if let Ok((m1, m2)) = crate::measures::split_medians(&s.values, k, mode, rng) {
                matrix.push(vec![m1, m2]);
            }
        }
    }
    matrix
}

/// ICC(2,1), SEM, and MDC of a split-half matrix, or `None` when the
/// matrix is too small or has zero variance.
pub fn reliability_point(matrix: &[Vec<f64>]) -> Option<ReliabilityEstimate> {
    if matrix.len() < 3 {
        return None;
    }
    let icc = icc_agreement_single(matrix, IccModel::TwoWayRandom21).ok()?;
    let sem = sem_within(matrix).ok()?;
    Some(ReliabilityEstimate {
        icc: icc.value,
        sem,
        mdc: mdc_from_sem(sem),
    })
}

/// Test-retest reliability as a function of how many tests are aggregated
/// per measurement.
///
/// For each k in 1..=max_k, participants with at least 2k tests are split
/// into two disjoint k-test groups (random draw or chronological prefix,
/// per `mode`), each summarized by its median. Partitions for different k
/// use independent generators derived from `seed`, and participants are
/// processed in sorted id order, so the curve is reproducible regardless
/// of input order.
pub fn reliability_curve(
    series: &[ParticipantSeries],
    mode: SplitMode,
    seed: u64,
    max_k: usize,
) -> Vec<ReliabilityPoint> {
    let mut ordered: Vec<&ParticipantSeries> = series.iter().collect();
    ordered.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
    let ordered: Vec<ParticipantSeries> = ordered.into_iter().cloned().collect();
    let mut curve = Vec::with_capacity(max_k);
    for k in 1..=max_k {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ k as u64));
        let matrix = reliability_matrix(&ordered, k, mode, &mut rng);
        curve.push(ReliabilityPoint {
            k,
            n_retained: matrix.len(),
            estimate: reliability_point(&matrix),
        });
    }
    curve
}

// --------------------------------------------------------------------------
// Rank statistics
// --------------------------------------------------------------------------

/// Ranks with ties replaced by the average of the tied positions (1-based).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &slot in &idx[i..=j] {
            ranks[slot] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(StatsError::ZeroRankVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { a: x.len(), b: y.len() });
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewPairs { need: 2, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of the first group.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub method: PValueMethod,
}

/// Two-sided Mann-Whitney U test.
///
/// Uses the exact null distribution (full enumeration by counting) when
/// n1·n2 ≤ 400 and there are no ties across the pooled sample; otherwise a
/// normal approximation with tie and continuity corrections.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptyGroup);
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n1 = a.len();
    let n2 = b.len();
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let u2 = (n1 * n2) as f64 - u1;

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let has_ties = sorted.windows(2).any(|w| w[0] == w[1]);

    if n1 * n2 <= 400 && !has_ties {
        let u_min = u1.min(u2).round() as usize;
        let p = (2.0 * exact_u_cdf(n1, n2, u_min)).min(1.0);
        return Ok(MannWhitney { u: u1, p, method: PValueMethod::Exact });
    }

    let nf = (n1 + n2) as f64;
    let prod = (n1 * n2) as f64;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = prod / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if var <= 0.0 {
        return Err(StatsError::AllValuesTied);
    }
    let z = ((u1 - prod / 2.0).abs() - 0.5).max(0.0) / var.sqrt();
    let p = libm::erfc(z / std::f64::consts::SQRT_2);
    Ok(MannWhitney { u: u1, p, method: PValueMethod::NormalApprox })
}

/// P(U ≤ u_max) under the exact Mann-Whitney null for group sizes (n1, n2).
///
/// Counts rank arrangements with the recurrence
/// N(u; a, b) = N(u−b; a−1, b) + N(u; a, b−1).
fn exact_u_cdf(n1: usize, n2: usize, u_max: usize) -> f64 {
    let cap = n1 * n2;
    let u_max = u_max.min(cap);
    let mut table = vec![vec![vec![0.0f64; cap + 1]; n2 + 1]; n1 + 1];
    for b in 0..=n2 {
        table[0][b][0] = 1.0;
    }
    for a in 0..=n1 {
        table[a][0][0] = 1.0;
    }
    for a in 1..=n1 {
        for b in 1..=n2 {
            for u in 0..=cap {
                let mut c = table[a][b - 1][u];
                if u >= b {
                    c += table[a - 1][b][u - b];
                }
                table[a][b][u] = c;
            }
        }
    }
    let total: f64 = table[n1][n2].iter().sum();
    let below: f64 = table[n1][n2][..=u_max].iter().sum();
    below / total
}

// --------------------------------------------------------------------------
// Interpretation bands
// --------------------------------------------------------------------------

/// Reliability interpretation bands for ICC point estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IccBand {
    Poor,
    Moderate,
    Good,
    Excellent,
}

impl IccBand {
    pub fn classify(icc: f64) -> Self {
        if icc < 0.50 {
            IccBand::Poor
        } else if icc < 0.75 {
            IccBand::Moderate
        } else if icc < 0.90 {
            IccBand::Good
        } else {
            IccBand::Excellent
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IccBand::Poor => "poor",
            IccBand::Moderate => "moderate",
            IccBand::Good => "good",
            IccBand::Excellent => "excellent",
        }
    }
}

/// Strength bands for rank correlation magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoBand {
    VeryWeak,
    Weak,
    Moderate,
    Strong,
    VeryStrong,
}

impl RhoBand {
    pub fn classify(rho: f64) -> Self {
        let r = rho.abs();
        if r < 0.20 {
            RhoBand::VeryWeak
        } else if r < 0.40 {
            RhoBand::Weak
        } else if r < 0.60 {
            RhoBand::Moderate
        } else if r < 0.80 {
            RhoBand::Strong
        } else {
            RhoBand::VeryStrong
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RhoBand::VeryWeak => "very weak",
            RhoBand::Weak => "weak",
            RhoBand::Moderate => "moderate",
            RhoBand::Strong => "strong",
            RhoBand::VeryStrong => "very strong",
        }
    }
}

/// Conventional significance stars for a p-value.
pub fn p_value_stars(p: f64) -> &'static str {
    if p < 0.0001 {
        "****"
    } else if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        "ns"
    }
}

/// Midpoint-rule median, re-exported for report code.
pub fn median_value(values: &[f64]) -> Option<f64> {
    median(values)
}
