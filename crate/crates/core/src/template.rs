//! Protected-template generation: randomized median transformations of a
//! feature vector and the pairwise-distance template assembled from them.
//!
//! Each random vector cuts the feature vector into consecutive windows and
//! replaces every window by copies of its median, so the transformed vector
//! carries at most as many distinct values as the key has windows. The
//! stored template is the vector of Euclidean distances between all pairs of
//! transformed versions; the feature vector and the transformed versions are
//! intermediate only and are never persisted.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::keyspace::{KeySet, RandomVector};

/// One median-filtered version of a feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedVector {
    values: Vec<f64>,
}

impl TransformedVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Median of a window of at most [`crate::keyspace::WINDOW_MAX`] values.
/// Even-sized windows take the mean of the two central order statistics.
fn window_median(window: &[f64]) -> f64 {
    debug_assert!(!window.is_empty() && window.len() <= 20);
    let mut buf = [0.0f64; 20];
    let buf = &mut buf[..window.len()];
    buf.copy_from_slice(window);
    buf.sort_unstable_by(f64::total_cmp);
    let mid = buf.len() / 2;
    if buf.len() % 2 == 1 {
        buf[mid]
    } else {
        (buf[mid - 1] + buf[mid]) / 2.0
    }
}

/// Applies the windowed median transformation of `key` to raw values.
pub fn transform_slice(values: &[f64], key: &RandomVector) -> Result<Vec<f64>> {
    if values.len() != key.feature_length() {
        return Err(Error::Dimension {
            context: "median transformation",
            expected: key.feature_length(),
            actual: values.len(),
        });
    }
    let mut out = Vec::with_capacity(values.len());
    let mut start = 0usize;
    for &w in key.windows() {
        let w = w as usize;
        let m = window_median(&values[start..start + w]);
        out.resize(out.len() + w, m);
        start += w;
    }
    Ok(out)
}

/// Applies the windowed median transformation of `key` to a feature vector.
pub fn transform(features: &FeatureVector, key: &RandomVector) -> Result<TransformedVector> {
    Ok(TransformedVector {
        values: transform_slice(features.values(), key)?,
    })
}

/// The stored pseudo-identifier: Euclidean distances between all pairs of
/// transformed feature vectors, ordered lexicographically by pair index.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtectedTemplate {
    distances: Vec<f64>,
    n: usize,
    feature_length: usize,
    key_id: String,
}

impl ProtectedTemplate {
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// Number of transformed versions the template was built from.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn feature_length(&self) -> usize {
        self.feature_length
    }

    pub fn key_id(&self) -> &str {
        &self.key_id
    }

    /// Template length, n(n-1)/2.
    pub fn dimension(&self) -> usize {
        self.distances.len()
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// Euclidean distances between all pairs of equal-length vectors, in
/// lexicographic pair order (0,1), (0,2), ..., (n-2, n-1).
///
/// Each distance is summed sequentially so results do not depend on worker
/// count; pairs are computed in parallel.
pub fn pairwise_distances(vectors: &[Vec<f64>]) -> Vec<f64> {
    let n = vectors.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .map(|&(i, j)| euclidean(&vectors[i], &vectors[j]))
        .collect()
}

/// Builds the protected template for a feature vector under a key set.
///
/// The transformed versions live only for the duration of this call.
pub fn generate_template(features: &FeatureVector, keys: &KeySet) -> Result<ProtectedTemplate> {
    if features.len() != keys.feature_length() {
        return Err(Error::Dimension {
            context: "template generation",
            expected: keys.feature_length(),
            actual: features.len(),
        });
    }
    let transformed: Vec<Vec<f64>> = keys
        .vectors()
        .par_iter()
        .map(|key| transform_slice(features.values(), key))
        .collect::<Result<_>>()?;
    let distances = pairwise_distances(&transformed);
    Ok(ProtectedTemplate {
        distances,
        n: keys.n(),
        feature_length: keys.feature_length(),
        key_id: keys.key_id().to_string(),
    })
}

// ---------------------------------------------------------------------------
// Template file format
// ---------------------------------------------------------------------------

const TEMPLATE_MAGIC: &[u8; 4] = b"CBT1";

/// Writes the binary template format: magic "CBT1", little-endian u32 n,
/// u64 feature length, u32 key-id length + UTF-8 bytes, then n(n-1)/2
/// little-endian f64 distances.
pub fn save_template(t: &ProtectedTemplate, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(TEMPLATE_MAGIC)?;
    w.write_all(&(t.n as u32).to_le_bytes())?;
    w.write_all(&(t.feature_length as u64).to_le_bytes())?;
    let id = t.key_id.as_bytes();
    w.write_all(&(id.len() as u32).to_le_bytes())?;
    w.write_all(id)?;
    for &d in &t.distances {
        w.write_all(&d.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads and revalidates a binary template file.
pub fn load_template(path: &Path) -> Result<ProtectedTemplate> {
    let mut file = fs::File::open(path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    parse_template(&bytes)
}

fn parse_template(bytes: &[u8]) -> Result<ProtectedTemplate> {
    let fail = |msg: &str| Error::TemplateFile(msg.to_string());
    if bytes.len() < 4 || &bytes[..4] != TEMPLATE_MAGIC {
        return Err(fail("missing CBT1 magic"));
    }
    let mut pos = 4usize;
    let take = |pos: &mut usize, len: usize| -> Result<&[u8]> {
        let end = pos
            .checked_add(len)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| fail("truncated template file"))?;
        let slice = &bytes[*pos..end];
        *pos = end;
        Ok(slice)
    };
    let n = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let feature_length = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
    let id_len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let key_id = String::from_utf8(take(&mut pos, id_len)?.to_vec())
        .map_err(|_| fail("key id is not UTF-8"))?;
    if n < 2 {
        return Err(fail("template requires n >= 2"));
    }
    let expected = n * (n - 1) / 2;
    if bytes.len() - pos != expected * 8 {
        return Err(fail("distance payload has the wrong length"));
    }
    let mut distances = Vec::with_capacity(expected);
    for chunk in bytes[pos..].chunks_exact(8) {
        let d = f64::from_le_bytes(chunk.try_into().unwrap());
        if !d.is_finite() || d < 0.0 {
            return Err(fail("distances must be finite and nonnegative"));
        }
        distances.push(d);
    }
    Ok(ProtectedTemplate {
        distances,
        n,
        feature_length,
        key_id,
    })
}

/// Writes the template as CSV, one `pair_i,pair_j,distance` row per pair in
/// the same lexicographic order as the binary format (indices 1-based).
pub fn write_template_csv<W: Write>(t: &ProtectedTemplate, mut out: W) -> Result<()> {
    writeln!(out, "i,j,distance")?;
    let mut k = 0usize;
    for i in 1..=t.n {
        for j in (i + 1)..=t.n {
            writeln!(out, "{i},{j},{}", t.distances[k])?;
            k += 1;
        }
    }
    Ok(())
}
