//! Verification and identification metrics: FAR/FRR curves, equal error
//! rate, decidability index, and cumulative match characteristics.
//!
//! The acceptance convention is shared with [`crate::matching::verify`]: a
//! dissimilarity score is accepted when it is strictly below the threshold,
//! so thresholds read off these curves are directly usable for decisions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Genuine and imposter dissimilarity scores.
#[derive(Debug, Clone, Default)]
pub struct ScoreSet {
    pub genuine: Vec<f64>,
    pub imposter: Vec<f64>,
}

impl ScoreSet {
    fn validate(&self) -> Result<()> {
        if self.genuine.is_empty() || self.imposter.is_empty() {
            return Err(Error::Argument(
                "both genuine and imposter score sets must be nonempty".into(),
            ));
        }
        if self
            .genuine
            .iter()
            .chain(&self.imposter)
            .any(|s| !s.is_finite())
        {
            return Err(Error::Argument("scores must be finite".into()));
        }
        Ok(())
    }
}

/// One operating point of the error-tradeoff curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

/// FAR/FRR over a uniform threshold grid; FAR is nondecreasing and FRR
/// nonincreasing in the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    points: Vec<RocPoint>,
}

impl RocCurve {
    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }
}

/// Sweeps `num_thresholds` uniform grid points over [0, 1]:
/// `FAR(t) = |imposter < t| / |imposter|`, `FRR(t) = |genuine >= t| / |genuine|`.
pub fn far_frr_curve(scores: &ScoreSet, num_thresholds: usize) -> Result<RocCurve> {
    scores.validate()?;
    if num_thresholds < 2 {
        return Err(Error::Argument(
            "the threshold grid needs at least 2 points".into(),
        ));
    }
    let mut genuine = scores.genuine.clone();
    let mut imposter = scores.imposter.clone();
    genuine.sort_unstable_by(f64::total_cmp);
    imposter.sort_unstable_by(f64::total_cmp);

    let points = (0..num_thresholds)
        .map(|i| {
            let t = i as f64 / (num_thresholds - 1) as f64;
            // number of elements strictly below t
            let below = |sorted: &[f64]| sorted.partition_point(|&s| s < t);
            let far = below(&imposter) as f64 / imposter.len() as f64;
            let frr = (genuine.len() - below(&genuine)) as f64 / genuine.len() as f64;
            RocPoint {
                threshold: t,
                far,
                frr,
            }
        })
        .collect();
    Ok(RocCurve { points })
}

/// Locates the equal-error point of a curve.
///
/// The difference FAR - FRR is nondecreasing in the threshold; the crossing
/// is linearly interpolated between the bracketing grid points. When the
/// curves are equal over a plateau, the midpoint threshold of the plateau is
/// reported. Degenerate curves with no sign change fall back to the grid
/// point minimizing |FAR - FRR|.
pub fn compute_eer(curve: &RocCurve) -> (f64, f64) {
    let pts = curve.points();
    debug_assert!(!pts.is_empty());
    let diff = |p: &RocPoint| p.far - p.frr;

    // exact-zero plateau
    let zeros: Vec<usize> = pts
        .iter()
        .enumerate()
        .filter(|(_, p)| diff(p) == 0.0)
        .map(|(i, _)| i)
        .collect();
    if !zeros.is_empty() {
        // contiguous run containing the first zero
        let start = zeros[0];
        let mut end = start;
        while end + 1 < pts.len() && diff(&pts[end + 1]) == 0.0 {
            end += 1;
        }
        let t = (pts[start].threshold + pts[end].threshold) / 2.0;
        return (pts[start].far, t);
    }

    for w in pts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (da, db) = (diff(a), diff(b));
        if da < 0.0 && db > 0.0 {
            let alpha = -da / (db - da);
            let t = a.threshold + alpha * (b.threshold - a.threshold);
            let eer = a.far + alpha * (b.far - a.far);
            return (eer, t);
        }
    }

    // no crossing: report the closest approach
    let best = pts
        .iter()
        .min_by(|a, b| diff(a).abs().total_cmp(&diff(b).abs()))
        .expect("curve is nonempty");
    ((best.far + best.frr) / 2.0, best.threshold)
}

/// Decidability index: normalized separation of the genuine and imposter
/// score distributions, using sample (n-1) standard deviations.
pub fn compute_di(scores: &ScoreSet) -> Result<f64> {
    scores.validate()?;
    if scores.genuine.len() < 2 || scores.imposter.len() < 2 {
        return Err(Error::Argument(
            "decidability needs at least 2 samples per class".into(),
        ));
    }
    let (mu_g, var_g) = mean_var(&scores.genuine);
    let (mu_i, var_i) = mean_var(&scores.imposter);
    let pooled = (var_g + var_i) / 2.0;
    if pooled == 0.0 {
        return Err(Error::UndefinedDi(
            "both score sets have zero variance".into(),
        ));
    }
    Ok((mu_g - mu_i).abs() / pooled.sqrt())
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() < 2 {
        0.0
    } else {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    };
    (mean, var)
}

/// Sample mean and (n-1) standard deviation, the spread reported across
/// evaluation rounds.
pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let (mean, var) = mean_var(xs);
    (mean, var.sqrt())
}

/// Cumulative match characteristic from 1-based true-subject ranks.
/// `cmc[k]` is the fraction of queries whose true subject appears within the
/// top `k + 1` candidates; the curve reaches 1 at the gallery size.
pub fn cmc_curve(ranks: &[usize], gallery_size: usize) -> Result<Vec<f64>> {
    if ranks.is_empty() {
        return Err(Error::Argument("no identification results".into()));
    }
    if gallery_size == 0 {
        return Err(Error::Argument("gallery is empty".into()));
    }
    if ranks.iter().any(|&r| r == 0 || r > gallery_size) {
        return Err(Error::Argument(
            "ranks must be 1-based and within the gallery size".into(),
        ));
    }
    let mut counts = vec![0usize; gallery_size];
    for &r in ranks {
        counts[r - 1] += 1;
    }
    let mut cumulative = 0usize;
    Ok(counts
        .iter()
        .map(|&c| {
            cumulative += c;
            cumulative as f64 / ranks.len() as f64
        })
        .collect())
}

/// Rank-1 recognition index: the head of the CMC curve.
pub fn recognition_index(cmc: &[f64]) -> f64 {
    cmc.first().copied().unwrap_or(0.0)
}
