//! Template comparison: cosine dissimilarity, 1:1 verification, and 1:N
//! ranked identification.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::template::ProtectedTemplate;

/// Cosine dissimilarity in [0, 1] (for componentwise-nonnegative templates).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MatchScore(f64);

impl MatchScore {
    pub fn value(&self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for MatchScore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

/// Default acceptance threshold for face templates.
pub const FACE_THRESHOLD: f64 = 0.45;
/// Default acceptance threshold for fingerprint templates.
pub const FINGERPRINT_THRESHOLD: f64 = 0.5;

fn check_comparable(a: &ProtectedTemplate, b: &ProtectedTemplate) -> Result<()> {
    if a.dimension() != b.dimension() {
        return Err(Error::IncomparableTemplates(format!(
            "dimensions differ: {} vs {}",
            a.dimension(),
            b.dimension()
        )));
    }
    Ok(())
}

/// Cosine dissimilarity between two template distance vectors:
/// `1 - (a.b) / (|a| |b|)`, clamped into [0, 1] against rounding.
pub fn cosine_dissimilarity(a: &ProtectedTemplate, b: &ProtectedTemplate) -> Result<MatchScore> {
    check_comparable(a, b)?;
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.distances().iter().zip(b.distances()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateTemplate(
            "cosine dissimilarity requires a nonzero template".into(),
        ));
    }
    let score = 1.0 - dot / (na.sqrt() * nb.sqrt());
    Ok(MatchScore(score.clamp(0.0, 1.0)))
}

/// Outcome of a 1:1 verification attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationDecision {
    pub accepted: bool,
    pub best_score: MatchScore,
    pub threshold: f64,
}

/// Verifies a claimed identity: the best (minimum) dissimilarity against the
/// subject's enrolled templates must be strictly below the threshold.
pub fn verify(
    query: &ProtectedTemplate,
    enrolled: &[ProtectedTemplate],
    threshold: f64,
) -> Result<VerificationDecision> {
    if enrolled.is_empty() {
        return Err(Error::Argument(
            "verification needs at least one enrolled template".into(),
        ));
    }
    let mut best = f64::INFINITY;
    for t in enrolled {
        let score = cosine_dissimilarity(query, t)?.value();
        if score < best {
            best = score;
        }
    }
    Ok(VerificationDecision {
        accepted: best < threshold,
        best_score: MatchScore(best),
        threshold,
    })
}

/// Ranked outcome of a 1:N identification scan.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationResult {
    ranking: Vec<(String, MatchScore)>,
}

impl IdentificationResult {
    /// `(subject_id, best score)` pairs, ascending by score; ties broken by
    /// subject id.
    pub fn ranking(&self) -> &[(String, MatchScore)] {
        &self.ranking
    }

    /// 1-based rank of a subject, if present.
    pub fn rank_of(&self, subject_id: &str) -> Option<usize> {
        self.ranking
            .iter()
            .position(|(id, _)| id == subject_id)
            .map(|p| p + 1)
    }

    pub fn top(&self) -> &(String, MatchScore) {
        &self.ranking[0]
    }
}

/// Scans a gallery and ranks every subject by its best (minimum) template
/// score against the query. All gallery templates must share the query's
/// key-set dimension.
pub fn identify(
    query: &ProtectedTemplate,
    gallery: &BTreeMap<String, Vec<ProtectedTemplate>>,
) -> Result<IdentificationResult> {
    if gallery.is_empty() {
        return Err(Error::Argument("identification gallery is empty".into()));
    }
    let mut ranking = Vec::with_capacity(gallery.len());
    for (subject, templates) in gallery {
        if templates.is_empty() {
            return Err(Error::Argument(format!(
                "gallery subject {subject} has no templates"
            )));
        }
        let mut best = f64::INFINITY;
        for t in templates {
            let score = cosine_dissimilarity(query, t)?.value();
            if score < best {
                best = score;
            }
        }
        ranking.push((subject.clone(), MatchScore(best)));
    }
    ranking.sort_by(|a, b| {
        a.1 .0
            .total_cmp(&b.1 .0)
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(IdentificationResult { ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Builds a template carrying explicit distances (test-only back door via
    /// the binary codec so library invariants still apply).
    fn template(distances: &[f64]) -> ProtectedTemplate {
        template_named(distances, "k")
    }

    fn template_named(distances: &[f64], key_id: &str) -> ProtectedTemplate {
        // Smallest n with C(n,2) >= len; pad with zeros if the length is not
        // exactly triangular. Tests below always pass triangular lengths.
        let n = (1..)
            .find(|&n: &usize| n * (n - 1) / 2 == distances.len())
            .expect("test distances must have triangular length");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.cbt");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"CBT1");
        bytes.extend_from_slice(&(n as u32).to_le_bytes());
        bytes.extend_from_slice(&(16u64).to_le_bytes());
        bytes.extend_from_slice(&(key_id.len() as u32).to_le_bytes());
        bytes.extend_from_slice(key_id.as_bytes());
        for d in distances {
            bytes.extend_from_slice(&d.to_le_bytes());
        }
        std::fs::write(&path, bytes).unwrap();
        crate::template::load_template(&path).unwrap()
    }

    #[test]
    fn identical_templates_score_zero() {
        let a = template(&[1.0, 2.0, 3.0]);
        let s = cosine_dissimilarity(&a, &a).unwrap();
        assert!(s.value() <= 1e-12);
    }

    #[test]
    fn orthogonal_templates_score_one() {
        let a = template(&[1.0, 0.0, 0.0]);
        let b = template(&[0.0, 1.0, 0.0]);
        assert_eq!(cosine_dissimilarity(&a, &b).unwrap().value(), 1.0);
    }

    #[test]
    fn hand_computed_score() {
        // 1 - 1/sqrt(2)
        let a = template(&[1.0, 0.0, 0.0]);
        let b = template(&[1.0, 1.0, 0.0]);
        let s = cosine_dissimilarity(&a, &b).unwrap().value();
        assert!((s - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn zero_template_is_degenerate() {
        let a = template(&[0.0, 0.0, 0.0]);
        let b = template(&[1.0, 1.0, 1.0]);
        assert!(matches!(
            cosine_dissimilarity(&a, &b).unwrap_err(),
            Error::DegenerateTemplate(_)
        ));
    }

    #[test]
    fn dimension_mismatch_is_incomparable() {
        let a = template(&[1.0]);
        let b = template(&[1.0, 1.0, 1.0]);
        assert!(matches!(
            cosine_dissimilarity(&a, &b).unwrap_err(),
            Error::IncomparableTemplates(_)
        ));
    }

    #[test]
    fn verify_accepts_below_threshold() {
        let query = template(&[1.0, 2.0, 3.0]);
        let enrolled = vec![template(&[1.1, 2.1, 2.9]), template(&[3.0, 1.0, 0.5])];
        let d = verify(&query, &enrolled, FACE_THRESHOLD).unwrap();
        assert!(d.accepted);
        assert!(d.best_score.value() < 0.45);
    }

    #[test]
    fn verify_rejects_at_exact_threshold() {
        // orthogonal templates score exactly 1.0; threshold 1.0 must reject
        let query = template(&[1.0, 0.0, 0.0]);
        let enrolled = vec![template(&[0.0, 1.0, 0.0])];
        let d = verify(&query, &enrolled, 1.0).unwrap();
        assert_eq!(d.best_score.value(), 1.0);
        assert!(!d.accepted, "strict less-than at the boundary");
    }

    #[test]
    fn verify_self_is_accepted_for_any_positive_threshold() {
        let query = template(&[4.0, 5.0, 6.0]);
        let d = verify(&query, std::slice::from_ref(&query), 1e-9).unwrap();
        assert!(d.accepted);
        assert!(d.best_score.value() <= 1e-12);
    }

    #[test]
    fn verify_requires_enrollment() {
        let query = template(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            verify(&query, &[], 0.45).unwrap_err(),
            Error::Argument(_)
        ));
    }

    #[test]
    fn identify_ranks_by_score_then_id() {
        let query = template(&[1.0, 0.0, 0.0]);
        let mut gallery = BTreeMap::new();
        // angles chosen so scores order B < A < C
        gallery.insert("A".to_string(), vec![template(&[1.0, 0.5, 0.0])]);
        gallery.insert("B".to_string(), vec![template(&[1.0, 0.1, 0.0])]);
        gallery.insert("C".to_string(), vec![template(&[1.0, 2.0, 0.0])]);
        let result = identify(&query, &gallery).unwrap();
        let ids: Vec<&str> = result.ranking().iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["B", "A", "C"]);
        assert_eq!(result.rank_of("A"), Some(2));
    }

    #[test]
    fn identify_tie_breaks_by_subject_id() {
        let query = template(&[1.0, 1.0, 1.0]);
        let mut gallery = BTreeMap::new();
        gallery.insert("zeta".to_string(), vec![template(&[2.0, 2.0, 2.0])]);
        gallery.insert("alpha".to_string(), vec![template(&[3.0, 3.0, 3.0])]);
        let result = identify(&query, &gallery).unwrap();
        assert_eq!(result.top().0, "alpha");
    }

    #[test]
    fn identify_finds_exact_match_at_rank_one() {
        let query = template(&[1.0, 2.0, 3.0]);
        let mut gallery = BTreeMap::new();
        gallery.insert("impostor".to_string(), vec![template(&[9.0, 1.0, 1.0])]);
        gallery.insert("me".to_string(), vec![template(&[1.0, 2.0, 3.0])]);
        let result = identify(&query, &gallery).unwrap();
        assert_eq!(result.top().0, "me");
        assert!(result.top().1.value() <= 1e-12);
    }

    #[test]
    fn identify_rejects_empty_gallery() {
        let query = template(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            identify(&query, &BTreeMap::new()).unwrap_err(),
            Error::Argument(_)
        ));
    }

    proptest! {
        #[test]
        fn score_is_symmetric(xs in proptest::collection::vec(0.01f64..100.0, 3),
                              ys in proptest::collection::vec(0.01f64..100.0, 3)) {
            let a = template(&xs);
            let b = template(&ys);
            let ab = cosine_dissimilarity(&a, &b).unwrap().value();
            let ba = cosine_dissimilarity(&b, &a).unwrap().value();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn score_is_scale_invariant(xs in proptest::collection::vec(0.01f64..100.0, 3),
                                    ys in proptest::collection::vec(0.01f64..100.0, 3),
                                    alpha in 0.001f64..1000.0) {
            let a = template(&xs);
            let scaled: Vec<f64> = xs.iter().map(|x| x * alpha).collect();
            let a2 = template(&scaled);
            let b = template(&ys);
            let s1 = cosine_dissimilarity(&a, &b).unwrap().value();
            let s2 = cosine_dissimilarity(&a2, &b).unwrap().value();
            prop_assert!((s1 - s2).abs() < 1e-12);
        }

        #[test]
        fn identification_is_a_permutation(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let query = template(&[1.0, 2.0, 3.0]);
            let mut gallery = BTreeMap::new();
            for i in 0..8 {
                let d: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..10.0)).collect();
                gallery.insert(format!("s{i:02}"), vec![template(&d)]);
            }
            let result = identify(&query, &gallery).unwrap();
            prop_assert_eq!(result.ranking().len(), gallery.len());
            let mut ids: Vec<&str> = result.ranking().iter().map(|(id, _)| id.as_str()).collect();
            ids.sort();
            let expected: Vec<String> = gallery.keys().cloned().collect();
            prop_assert_eq!(ids, expected.iter().map(|s| s.as_str()).collect::<Vec<_>>());
            // scores ascend
            for w in result.ranking().windows(2) {
                prop_assert!(w[0].1.value() <= w[1].1.value());
            }
        }
    }
}
