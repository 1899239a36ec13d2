//! User-specific random vectors: ordered window-size partitions of the
//! feature length that drive the median transformations.
//!
//! A random vector splits a length-`l` feature vector into consecutive
//! windows, each between [`WINDOW_MIN`] and [`WINDOW_MAX`] wide. A key set
//! bundles `n` pairwise-distinct random vectors; replacing the key set
//! revokes every template derived from it. This module also counts how many
//! keys exist for a given `l`, both by the published recurrence and by exact
//! dynamic programming over the window bounds.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible window size.
pub const WINDOW_MIN: usize = 2;
/// Largest admissible window size; wider windows blur too many feature
/// values into one median and hurt distinguishability.
pub const WINDOW_MAX: usize = 20;
/// Key-set sizes observed to give good recognition performance.
pub const RECOMMENDED_N: std::ops::RangeInclusive<usize> = 15..=30;

/// Inclusive window-size bounds used for generation and counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowBounds {
    pub min: usize,
    pub max: usize,
}

impl Default for WindowBounds {
    fn default() -> Self {
        WindowBounds {
            min: WINDOW_MIN,
            max: WINDOW_MAX,
        }
    }
}

impl WindowBounds {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min < 1 || min > max {
            return Err(Error::Config(format!(
                "window bounds must satisfy 1 <= min <= max, got [{min}, {max}]"
            )));
        }
        Ok(WindowBounds { min, max })
    }

    /// True when `length` is expressible as a sum of parts in the bounds:
    /// some part count k must satisfy k*min <= length <= k*max.
    pub fn feasible(&self, length: usize) -> bool {
        if length == 0 {
            return false;
        }
        let k_lo = length.div_ceil(self.max);
        let k_hi = length / self.min;
        k_lo <= k_hi
    }
}

/// An ordered partition of the feature length into window sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomVector {
    windows: Vec<u32>,
    feature_length: usize,
}

impl RandomVector {
    /// Validates window sizes against the canonical [2, 20] bounds and the
    /// sum constraint.
    pub fn new(windows: Vec<u32>, feature_length: usize) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::Argument("random vector has no windows".into()));
        }
        for &w in &windows {
            let w = w as usize;
            if !(WINDOW_MIN..=WINDOW_MAX).contains(&w) {
                return Err(Error::Argument(format!(
                    "window size {w} outside the admissible range [{WINDOW_MIN}, {WINDOW_MAX}]"
                )));
            }
        }
        let sum: usize = windows.iter().map(|&w| w as usize).sum();
        if sum != feature_length {
            return Err(Error::Argument(format!(
                "window sizes sum to {sum}, expected feature length {feature_length}"
            )));
        }
        Ok(RandomVector {
            windows,
            feature_length,
        })
    }

    pub fn windows(&self) -> &[u32] {
        &self.windows
    }

    pub fn feature_length(&self) -> usize {
        self.feature_length
    }

    /// Number of windows, i.e. the number of distinct values a transformed
    /// vector can carry.
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// Draws one random vector for feature length `l`.
///
/// Windows are drawn left to right, uniformly over the sizes that leave the
/// remaining length representable, so no rejection loop is needed and every
/// valid composition has positive probability. Deterministic for a fixed
/// seed.
pub fn generate_random_vector(l: usize, bounds: WindowBounds, seed: u64) -> Result<RandomVector> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    generate_random_vector_with(l, bounds, &mut rng)
}

fn generate_random_vector_with(
    l: usize,
    bounds: WindowBounds,
    rng: &mut ChaCha20Rng,
) -> Result<RandomVector> {
    if bounds.min < WINDOW_MIN || bounds.max > WINDOW_MAX {
        return Err(Error::Config(format!(
            "generation bounds [{}, {}] must lie within [{WINDOW_MIN}, {WINDOW_MAX}]",
            bounds.min, bounds.max
        )));
    }
    if !bounds.feasible(l) {
        return Err(Error::InfeasibleLength {
            length: l,
            min: bounds.min,
            max: bounds.max,
        });
    }

    let mut windows = Vec::with_capacity(l / bounds.min + 1);
    let mut remaining = l;
    while remaining > 0 {
        let hi = bounds.max.min(remaining);
        let candidates: Vec<usize> = (bounds.min..=hi)
            .filter(|&r| {
                let rest = remaining - r;
                rest == 0 || bounds.feasible(rest)
            })
            .collect();
        debug_assert!(!candidates.is_empty(), "feasibility pre-check failed");
        let pick = candidates[rng.gen_range(0..candidates.len())];
        windows.push(pick as u32);
        remaining -= pick;
    }
    RandomVector::new(windows, l)
}

/// The revocable per-user key: `n` pairwise-distinct random vectors over a
/// common feature length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySet {
    key_id: String,
    feature_length: usize,
    vectors: Vec<RandomVector>,
    seed: Option<u64>,
}

impl KeySet {
    pub fn key_id(&self) -> &str {
        &self.key_id
    }

    pub fn feature_length(&self) -> usize {
        self.feature_length
    }

    pub fn vectors(&self) -> &[RandomVector] {
        &self.vectors
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    /// Seed the set was generated from, if known.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Template dimension implied by this key set: one distance per
    /// unordered pair of vectors.
    pub fn template_dimension(&self) -> usize {
        self.n() * (self.n() - 1) / 2
    }

    fn validate(vectors: &[RandomVector], l: usize) -> Result<()> {
        if vectors.len() < 2 {
            return Err(Error::Argument(format!(
                "a key set needs at least 2 random vectors, got {}",
                vectors.len()
            )));
        }
        let mut seen = HashSet::new();
        for v in vectors {
            if v.feature_length() != l {
                return Err(Error::Argument(format!(
                    "random vector covers length {}, expected {l}",
                    v.feature_length()
                )));
            }
            if !seen.insert(v.windows()) {
                return Err(Error::Argument(
                    "key set contains duplicate random vectors".into(),
                ));
            }
        }
        Ok(())
    }

    /// Builds a key set from pre-validated vectors (used by the loader and
    /// by tests that construct explicit keys).
    pub fn from_vectors(key_id: String, vectors: Vec<RandomVector>) -> Result<Self> {
        let l = vectors
            .first()
            .map(RandomVector::feature_length)
            .unwrap_or(0);
        Self::validate(&vectors, l)?;
        warn_if_unusual_n(vectors.len());
        Ok(KeySet {
            key_id,
            feature_length: l,
            vectors,
            seed: None,
        })
    }
}

fn warn_if_unusual_n(n: usize) {
    if !RECOMMENDED_N.contains(&n) {
        log::warn!(
            "key set size n={n} outside the recommended range {}..={}; \
             recognition accuracy may degrade",
            RECOMMENDED_N.start(),
            RECOMMENDED_N.end()
        );
    }
}

/// Mixes several words into one sub-seed (splitmix64 finalizer).
pub(crate) fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        let mut z = h ^ p.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

/// Generates `n` pairwise-distinct random vectors for feature length `l`.
///
/// Deterministic for a fixed seed. On the (for realistic `l`, astronomically
/// rare) collision, the colliding vector is regenerated from a derived
/// sub-seed. A warning is logged when `n` falls outside the recommended
/// range; `n < 2` is an error because the template would be empty.
pub fn generate_key_set(n: usize, l: usize, seed: u64) -> Result<KeySet> {
    generate_key_set_with(n, l, WindowBounds::default(), seed, None)
}

/// [`generate_key_set`] with explicit bounds and key id.
pub fn generate_key_set_with(
    n: usize,
    l: usize,
    bounds: WindowBounds,
    seed: u64,
    key_id: Option<String>,
) -> Result<KeySet> {
    if n < 2 {
        return Err(Error::Argument(format!(
            "key set size n must be at least 2, got {n}"
        )));
    }
    warn_if_unusual_n(n);

    let mut vectors: Vec<RandomVector> = Vec::with_capacity(n);
    let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(n);
    for index in 0..n as u64 {
        let mut attempt = 0u64;
        loop {
            let sub = mix_seed(&[seed, index, attempt]);
            let mut rng = ChaCha20Rng::seed_from_u64(sub);
            let v = generate_random_vector_with(l, bounds, &mut rng)?;
            if seen.insert(v.windows().to_vec()) {
                vectors.push(v);
                break;
            }
            attempt += 1;
            if attempt > 10_000 {
                // Only reachable when the composition space is smaller than n.
                return Err(Error::Argument(format!(
                    "cannot draw {n} distinct random vectors for feature length {l}"
                )));
            }
        }
    }

    let key_id = key_id.unwrap_or_else(|| format!("key-{:016x}", mix_seed(&[seed, n as u64])));
    Ok(KeySet {
        key_id,
        feature_length: l,
        vectors,
        seed: Some(seed),
    })
}

/// On-disk representation of a key set (versioned JSON).
#[derive(Serialize, Deserialize)]
struct KeyFile {
    version: u32,
    key_id: String,
    l: u64,
    n: u64,
    vectors: Vec<Vec<u32>>,
    seed: Option<String>,
}

const KEY_FILE_VERSION: u32 = 1;

/// Serializes a key set to versioned JSON.
pub fn save_key_set(ks: &KeySet, path: &Path) -> Result<()> {
    let file = KeyFile {
        version: KEY_FILE_VERSION,
        key_id: ks.key_id.clone(),
        l: ks.feature_length as u64,
        n: ks.vectors.len() as u64,
        vectors: ks.vectors.iter().map(|v| v.windows().to_vec()).collect(),
        seed: ks.seed.map(|s| s.to_string()),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::KeyFile(format!("serialization failed: {e}")))?;
    fs::write(path, json)?;
    Ok(())
}

/// Loads and revalidates a key set; every invariant is checked again so a
/// tampered or truncated file is rejected.
pub fn load_key_set(path: &Path) -> Result<KeySet> {
    let text = fs::read_to_string(path)?;
    let file: KeyFile =
        serde_json::from_str(&text).map_err(|e| Error::KeyFile(format!("malformed JSON: {e}")))?;
    if file.version != KEY_FILE_VERSION {
        return Err(Error::KeyFile(format!(
            "unsupported key file version {}, expected {KEY_FILE_VERSION}",
            file.version
        )));
    }
    let l = file.l as usize;
    if file.vectors.len() != file.n as usize {
        return Err(Error::KeyFile(format!(
            "file declares n={} but carries {} vectors",
            file.n,
            file.vectors.len()
        )));
    }
    let mut vectors = Vec::with_capacity(file.vectors.len());
    for windows in file.vectors {
        let v = RandomVector::new(windows, l)
            .map_err(|e| Error::KeyFile(format!("invalid random vector: {e}")))?;
        vectors.push(v);
    }
    KeySet::validate(&vectors, l).map_err(|e| Error::KeyFile(e.to_string()))?;
    warn_if_unusual_n(vectors.len());
    let seed = file.seed.and_then(|s| s.parse().ok());
    Ok(KeySet {
        key_id: file.key_id,
        feature_length: l,
        vectors,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Keyspace counting
// ---------------------------------------------------------------------------

/// The three keyspace counts for a feature length.
#[derive(Debug, Clone)]
pub struct KeyspaceCount {
    pub feature_length: usize,
    pub bounds: WindowBounds,
    /// Sum of the published exact-k-parts recurrence over k in
    /// [ceil(l/max), floor(l/min)], with unrestricted part sizes.
    pub recurrence_partitions: BigUint,
    /// Exact number of unordered window-size multisets honoring the bounds.
    pub bounded_partitions: BigUint,
    /// Exact number of ordered window sequences honoring the bounds; this is
    /// the true number of distinct random vectors.
    pub bounded_compositions: BigUint,
}

/// Counts partitions of `l` into exactly `k` parts (unrestricted part sizes)
/// for all k up to `k_max`, via the recurrence
/// `P_k(l) = P_k(l - k) + P_{k-1}(l - 1)`.
///
/// Returns a table `t[l][k]`. Exact big-integer arithmetic.
fn partition_table(l_max: usize, k_max: usize) -> Vec<Vec<BigUint>> {
    let zero = BigUint::from(0u32);
    let mut t = vec![vec![zero; k_max + 1]; l_max + 1];
    t[0][0] = BigUint::from(1u32);
    for l in 1..=l_max {
        for k in 1..=k_max.min(l) {
            let mut v = t[l - 1][k - 1].clone();
            if l >= k {
                v += t[l - k][k].clone();
            }
            t[l][k] = v;
        }
    }
    t
}

/// Partition count as printed in the source recurrence: parts are not
/// bounded, only the part count k is restricted to [ceil(l/20), floor(l/2)].
///
/// This over-counts the admissible keys because it admits windows of size 1
/// and windows wider than 20; see [`count_partitions_bounded`] for the exact
/// keyspace. Exposed so the published figure can be reproduced and the
/// discrepancy inspected.
pub fn count_partitions_paper(l: usize) -> BigUint {
    count_partitions_recurrence(l, WindowBounds::default())
}

/// [`count_partitions_paper`] with explicit bounds for the k bracket.
pub fn count_partitions_recurrence(l: usize, bounds: WindowBounds) -> BigUint {
    if l == 0 {
        return BigUint::from(0u32);
    }
    let k_lo = l.div_ceil(bounds.max);
    let k_hi = l / bounds.min;
    if k_lo > k_hi {
        return BigUint::from(0u32);
    }
    let table = partition_table(l, k_hi);
    let mut total = BigUint::from(0u32);
    for k in k_lo..=k_hi {
        total += table[l][k].clone();
    }
    total
}

/// Exact number of partitions of `l` into parts within the bounds (any part
/// count). Dynamic programming over (remaining length, largest allowed
/// part); exact big-integer arithmetic.
pub fn count_partitions_bounded(l: usize, bounds: WindowBounds) -> BigUint {
    if l == 0 {
        return BigUint::from(0u32);
    }
    // dp[m] = partitions of m into parts from bounds.min..=p, built up part
    // size by part size so memory stays O(l).
    let mut dp = vec![BigUint::from(0u32); l + 1];
    dp[0] = BigUint::from(1u32);
    for part in bounds.min..=bounds.max.min(l) {
        for m in part..=l {
            let add = dp[m - part].clone();
            dp[m] += add;
        }
    }
    dp[l].clone()
}

/// Exact number of compositions (ordered window sequences) of `l` with parts
/// within the bounds. This counts the distinct random vectors.
pub fn count_compositions_bounded(l: usize, bounds: WindowBounds) -> BigUint {
    if l == 0 {
        return BigUint::from(0u32);
    }
    let mut dp = vec![BigUint::from(0u32); l + 1];
    dp[0] = BigUint::from(1u32);
    for m in 1..=l {
        let lo = bounds.min;
        let hi = bounds.max.min(m);
        let mut acc = BigUint::from(0u32);
        for part in lo..=hi {
            acc += dp[m - part].clone();
        }
        dp[m] = acc;
    }
    dp[l].clone()
}

/// Computes all three counts at once.
pub fn count_keyspace(l: usize, bounds: WindowBounds) -> KeyspaceCount {
    KeyspaceCount {
        feature_length: l,
        bounds,
        recurrence_partitions: count_partitions_recurrence(l, bounds),
        bounded_partitions: count_partitions_bounded(l, bounds),
        bounded_compositions: count_compositions_bounded(l, bounds),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustively enumerates compositions of `l` with parts in bounds.
    fn enum_compositions(l: usize, bounds: WindowBounds) -> Vec<Vec<u32>> {
        fn rec(rest: usize, bounds: WindowBounds, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if rest == 0 {
                out.push(cur.clone());
                return;
            }
            for part in bounds.min..=bounds.max.min(rest) {
                cur.push(part as u32);
                rec(rest - part, bounds, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(l, bounds, &mut Vec::new(), &mut out);
        out
    }

    /// Exhaustively enumerates partitions (nonincreasing parts) of `l` with
    /// parts in bounds.
    fn enum_partitions(l: usize, bounds: WindowBounds) -> Vec<Vec<u32>> {
        fn rec(
            rest: usize,
            max_part: usize,
            bounds: WindowBounds,
            cur: &mut Vec<u32>,
            out: &mut Vec<Vec<u32>>,
        ) {
            if rest == 0 {
                out.push(cur.clone());
                return;
            }
            for part in (bounds.min..=max_part.min(rest)).rev() {
                cur.push(part as u32);
                rec(rest - part, part, bounds, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(l, bounds.max, bounds, &mut Vec::new(), &mut out);
        out
    }

    /// Counts partitions of `l` into exactly `k` parts (parts unrestricted)
    /// by explicit enumeration — the independent oracle for the recurrence.
    fn enum_exact_k_parts(l: usize, k: usize) -> u64 {
        fn rec(rest: usize, parts_left: usize, max_part: usize) -> u64 {
            if parts_left == 0 {
                return u64::from(rest == 0);
            }
            if rest < parts_left {
                return 0;
            }
            let mut total = 0;
            for part in 1..=max_part.min(rest) {
                total += rec(rest - part, parts_left - 1, part);
            }
            total
        }
        rec(l, k, l)
    }

    #[test]
    fn example_vector_from_illustration_is_valid() {
        // 3+2+4+3+2+5+4+2 = 25
        let v = RandomVector::new(vec![3, 2, 4, 3, 2, 5, 4, 2], 25).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(v.feature_length(), 25);
    }

    #[test]
    fn length_two_is_forced() {
        for seed in 0..20 {
            let v = generate_random_vector(2, WindowBounds::default(), seed).unwrap();
            assert_eq!(v.windows(), &[2]);
        }
    }

    #[test]
    fn length_one_is_infeasible() {
        let err = generate_random_vector(1, WindowBounds::default(), 0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleLength { length: 1, .. }));
    }

    #[test]
    fn generated_vectors_are_members_of_the_composition_space() {
        let bounds = WindowBounds::default();
        let all: HashSet<Vec<u32>> = enum_compositions(10, bounds).into_iter().collect();
        assert_eq!(all.len(), 34);
        for seed in 0..1000 {
            let v = generate_random_vector(10, bounds, seed).unwrap();
            assert!(all.contains(v.windows()), "{:?} not enumerated", v.windows());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_random_vector(477, WindowBounds::default(), 42).unwrap();
        let b = generate_random_vector(477, WindowBounds::default(), 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn key_set_has_distinct_vectors_summing_to_l() {
        let ks = generate_key_set(20, 477_144, 7).unwrap();
        assert_eq!(ks.n(), 20);
        let mut seen = HashSet::new();
        for v in ks.vectors() {
            assert_eq!(
                v.windows().iter().map(|&w| w as usize).sum::<usize>(),
                477_144
            );
            assert!(seen.insert(v.windows().to_vec()));
        }
    }

    #[test]
    fn key_set_same_seed_same_result() {
        let a = generate_key_set(15, 1000, 99).unwrap();
        let b = generate_key_set(15, 1000, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_composition_space_still_yields_distinct_vectors() {
        // Compositions of 4 with parts in [2,20]: (2,2) and (4) only.
        let ks = generate_key_set(2, 4, 3).unwrap();
        let set: HashSet<&[u32]> = ks.vectors().iter().map(|v| v.windows()).collect();
        assert_eq!(set.len(), 2);
        for v in &set {
            assert!(*v == [2, 2] || *v == [4]);
        }
    }

    #[test]
    fn key_set_rejects_n_below_two() {
        assert!(matches!(
            generate_key_set(1, 100, 0).unwrap_err(),
            Error::Argument(_)
        ));
    }

    #[test]
    fn key_file_round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("key.json");
        let ks = generate_key_set(16, 1234, 5).unwrap();
        save_key_set(&ks, &path).unwrap();
        let loaded = load_key_set(&path).unwrap();
        assert_eq!(ks, loaded);
    }

    #[test]
    fn key_file_rejects_oversized_window() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("key.json");
        fs::write(
            &path,
            r#"{"version":1,"key_id":"k","l":23,"n":2,"vectors":[[21,2],[20,3]],"seed":null}"#,
        )
        .unwrap();
        let err = load_key_set(&path).unwrap_err();
        assert!(matches!(err, Error::KeyFile(_)));
        assert!(err.to_string().contains("[2, 20]"), "{err}");
    }

    #[test]
    fn key_file_rejects_mismatched_sums() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("key.json");
        fs::write(
            &path,
            r#"{"version":1,"key_id":"k","l":10,"n":2,"vectors":[[5,5],[4,4]],"seed":null}"#,
        )
        .unwrap();
        assert!(matches!(load_key_set(&path).unwrap_err(), Error::KeyFile(_)));
    }

    #[test]
    fn key_file_rejects_wrong_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("key.json");
        fs::write(
            &path,
            r#"{"version":2,"key_id":"k","l":4,"n":2,"vectors":[[4],[2,2]],"seed":null}"#,
        )
        .unwrap();
        assert!(matches!(load_key_set(&path).unwrap_err(), Error::KeyFile(_)));
    }

    #[test]
    fn recurrence_count_small_values() {
        assert_eq!(count_partitions_paper(2), BigUint::from(1u32));
        // l=4 brackets k in [1,2]; the unrestricted recurrence admits {4},
        // {2,2} and the window-bound-violating {3,1}.
        assert_eq!(count_partitions_paper(4), BigUint::from(3u32));
        assert_eq!(
            count_partitions_bounded(4, WindowBounds::default()),
            BigUint::from(2u32)
        );
    }

    #[test]
    fn recurrence_count_l40_frozen() {
        // The literal recurrence, unrestricted parts, k in [2, 20].
        assert_eq!(count_partitions_paper(40), BigUint::from(35_250u32));
    }

    #[test]
    fn bounded_count_l40_matches_published_order_of_magnitude() {
        let c = count_partitions_bounded(40, WindowBounds::default());
        assert_eq!(c, BigUint::from(5_663u32));
    }

    #[test]
    fn bounded_counts_match_enumeration() {
        let bounds = WindowBounds::default();
        for l in 1..=30 {
            let parts = enum_partitions(l, bounds).len();
            let comps = enum_compositions(l, bounds).len();
            assert_eq!(
                count_partitions_bounded(l, bounds),
                BigUint::from(parts),
                "partitions of {l}"
            );
            assert_eq!(
                count_compositions_bounded(l, bounds),
                BigUint::from(comps),
                "compositions of {l}"
            );
        }
    }

    #[test]
    fn composition_examples() {
        let bounds = WindowBounds::default();
        assert_eq!(count_partitions_bounded(2, bounds), BigUint::from(1u32));
        assert_eq!(count_compositions_bounded(2, bounds), BigUint::from(1u32));
        // (2,2,2), (2,4), (4,2), (3,3), (6)
        assert_eq!(count_compositions_bounded(6, bounds), BigUint::from(5u32));
    }

    #[test]
    fn composition_count_nondecreasing_from_four() {
        let bounds = WindowBounds::default();
        let mut prev = count_compositions_bounded(4, bounds);
        for l in 5..=80 {
            let cur = count_compositions_bounded(l, bounds);
            assert!(cur >= prev, "composition count dropped at l={l}");
            prev = cur;
        }
    }

    #[test]
    fn recurrence_identity_matches_enumeration() {
        // P_k(l) = P_k(l-k) + P_{k-1}(l-1), with every value cross-checked
        // against explicit enumeration.
        let l_max = 60;
        let table = partition_table(l_max, l_max);
        for l in 1..=l_max {
            for k in 1..=l {
                let expected = enum_exact_k_parts(l, k);
                assert_eq!(
                    table[l][k],
                    BigUint::from(expected),
                    "P_{k}({l}) vs enumeration"
                );
                let mut rhs = table[l - 1][k - 1].clone();
                if l >= k {
                    rhs += table[l - k][k].clone();
                }
                assert_eq!(table[l][k], rhs, "recurrence identity at l={l}, k={k}");
            }
        }
    }

    proptest! {
        #[test]
        fn generated_vector_invariants(l in 2usize..600, seed in any::<u64>()) {
            let v = generate_random_vector(l, WindowBounds::default(), seed).unwrap();
            let sum: usize = v.windows().iter().map(|&w| w as usize).sum();
            prop_assert_eq!(sum, l);
            for &w in v.windows() {
                prop_assert!((WINDOW_MIN..=WINDOW_MAX).contains(&(w as usize)));
            }
        }
    }
}
