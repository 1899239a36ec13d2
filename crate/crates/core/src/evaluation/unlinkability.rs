//! Unlinkability analysis over mated and non-mated score distributions.
//!
//! Mated scores compare templates of the same subject generated with
//! different key sets; non-mated scores compare templates of different
//! subjects with different key sets. The score-wise linkability is the
//! difference of the two score-conditional probabilities under equal
//! priors; its positive part, weighted by the mated density, aggregates
//! into a single system measure in [0, 1].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Histogram-based linkability report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnlinkabilityReport {
    /// Bin centers of the shared score grid.
    pub bin_centers: Vec<f64>,
    pub bin_width: f64,
    /// Density estimates integrating to 1 over the grid.
    pub mated_density: Vec<f64>,
    pub nonmated_density: Vec<f64>,
    /// Score-wise linkability per bin, in [-1, 1]; 0 where both densities
    /// vanish.
    pub d_link: Vec<f64>,
    /// Global linkability in [0, 1]; 0 is fully unlinkable.
    pub d_sys: f64,
}

/// Estimates score-conditional linkability with equal-width histograms over
/// the union support of both samples.
pub fn unlinkability_analysis(
    mated: &[f64],
    nonmated: &[f64],
    bins: usize,
) -> Result<UnlinkabilityReport> {
    if mated.is_empty() || nonmated.is_empty() {
        return Err(Error::Argument(
            "both mated and non-mated score sets must be nonempty".into(),
        ));
    }
    if bins == 0 {
        return Err(Error::Argument("bin count must be positive".into()));
    }
    if mated.iter().chain(nonmated).any(|s| !s.is_finite()) {
        return Err(Error::Argument("scores must be finite".into()));
    }

    let lo = mated
        .iter()
        .chain(nonmated)
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = mated
        .iter()
        .chain(nonmated)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    // degenerate support: every score identical, so the distributions match
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };

    let bin_of = |s: f64| -> usize {
        if hi <= lo {
            return 0;
        }
        (((s - lo) / width) as usize).min(bins - 1)
    };

    let mut mated_counts = vec![0usize; bins];
    for &s in mated {
        mated_counts[bin_of(s)] += 1;
    }
    let mut nonmated_counts = vec![0usize; bins];
    for &s in nonmated {
        nonmated_counts[bin_of(s)] += 1;
    }

    let m_total = mated.len() as f64;
    let nm_total = nonmated.len() as f64;
    let mut bin_centers = Vec::with_capacity(bins);
    let mut mated_density = Vec::with_capacity(bins);
    let mut nonmated_density = Vec::with_capacity(bins);
    let mut d_link = Vec::with_capacity(bins);
    let mut d_sys = 0.0;
    for b in 0..bins {
        bin_centers.push(lo + (b as f64 + 0.5) * width);
        let pm = mated_counts[b] as f64 / (m_total * width);
        let pnm = nonmated_counts[b] as f64 / (nm_total * width);
        mated_density.push(pm);
        nonmated_density.push(pnm);
        // equal priors: P(mated | s) - P(nonmated | s) = (pm - pnm)/(pm + pnm)
        let d = if pm + pnm > 0.0 {
            ((pm - pnm) / (pm + pnm)).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        d_link.push(d);
        // integral of max(0, d) against the mated density
        d_sys += d.max(0.0) * (mated_counts[b] as f64 / m_total);
    }

    Ok(UnlinkabilityReport {
        bin_centers,
        bin_width: width,
        mated_density,
        nonmated_density,
        d_link,
        d_sys: d_sys.clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn identical_distributions_are_unlinkable() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mated: Vec<f64> = (0..10_000).map(|_| rng.gen_range(0.0..1.0)).collect();
        let nonmated: Vec<f64> = (0..10_000).map(|_| rng.gen_range(0.0..1.0)).collect();
        let report = unlinkability_analysis(&mated, &nonmated, 40).unwrap();
        assert!(report.d_sys <= 0.05, "d_sys = {}", report.d_sys);
        let mean_abs: f64 =
            report.d_link.iter().map(|d| d.abs()).sum::<f64>() / report.d_link.len() as f64;
        assert!(mean_abs < 0.1, "mean |d_link| = {mean_abs}");
    }

    #[test]
    fn disjoint_supports_are_fully_linkable() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let mated: Vec<f64> = (0..5_000).map(|_| rng.gen_range(0.0..0.4)).collect();
        let nonmated: Vec<f64> = (0..5_000).map(|_| rng.gen_range(0.6..1.0)).collect();
        let report = unlinkability_analysis(&mated, &nonmated, 50).unwrap();
        assert!((report.d_sys - 1.0).abs() < 1e-9, "d_sys = {}", report.d_sys);
        for (b, (&d, (&pm, &pn))) in report
            .d_link
            .iter()
            .zip(report.mated_density.iter().zip(&report.nonmated_density))
            .enumerate()
        {
            if pm > 0.0 || pn > 0.0 {
                assert!((d.abs() - 1.0).abs() < 1e-12, "bin {b}: d = {d}");
            }
        }
    }

    #[test]
    fn uniform_overlap_matches_closed_form() {
        // mated ~ U[0, 0.5], nonmated ~ U[0.25, 0.75]:
        // d = +1 below 0.25, 0 on [0.25, 0.5], -1 above 0.5; d_sys = 0.5
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let mated: Vec<f64> = (0..100_000).map(|_| rng.gen_range(0.0..0.5)).collect();
        let nonmated: Vec<f64> = (0..100_000).map(|_| rng.gen_range(0.25..0.75)).collect();
        let bins = 60;
        let report = unlinkability_analysis(&mated, &nonmated, bins).unwrap();
        assert!(
            (report.d_sys - 0.5).abs() < 0.03,
            "d_sys = {}",
            report.d_sys
        );
        for (center, &d) in report.bin_centers.iter().zip(&report.d_link) {
            let w = report.bin_width;
            // skip bins straddling a region boundary
            let inside = |x: f64| center - w / 2.0 > x || center + w / 2.0 < x;
            if !(inside(0.25) && inside(0.5)) {
                continue;
            }
            let expected = if *center < 0.25 {
                1.0
            } else if *center < 0.5 {
                0.0
            } else {
                -1.0
            };
            assert!(
                (d - expected).abs() <= 0.05,
                "bin at {center}: d = {d}, expected {expected}"
            );
        }
    }

    #[test]
    fn degenerate_equal_scores_are_unlinkable() {
        let report = unlinkability_analysis(&[0.3; 100], &[0.3; 100], 10).unwrap();
        assert_eq!(report.d_sys, 0.0);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert!(unlinkability_analysis(&[], &[0.5], 10).is_err());
        assert!(unlinkability_analysis(&[0.5], &[], 10).is_err());
        assert!(unlinkability_analysis(&[0.5], &[0.5], 0).is_err());
    }

    #[test]
    fn d_link_is_always_bounded() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..20 {
            let mated: Vec<f64> = (0..200).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let nonmated: Vec<f64> = (0..17).map(|_| rng.gen_range(-1.0..5.0)).collect();
            let report = unlinkability_analysis(&mated, &nonmated, 13).unwrap();
            assert!((0.0..=1.0).contains(&report.d_sys));
            assert!(report.d_link.iter().all(|d| (-1.0..=1.0).contains(d)));
        }
    }
}
