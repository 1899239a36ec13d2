//! Dataset ingestion, train/test splitting, and synthetic data generation.
//!
//! Two directory layouts are supported: `fvc` (flat files named
//! `subject_sample.ext`) and `folders` (one directory per subject). The
//! synthetic generator produces per-subject band-limited textures so the
//! filter bank has structure to respond to; samples perturb the base with a
//! small circular translation and Gaussian pixel noise.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::features::{fft2d, ImageMatrix};
use crate::keyspace::mix_seed;
use crate::preprocess::preprocess_path;

/// Biometric modality tag; decides the default verification threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Face,
    Fingerprint,
    Synthetic,
}

impl Modality {
    pub fn default_threshold(&self) -> f64 {
        match self {
            Modality::Face => crate::matching::FACE_THRESHOLD,
            Modality::Fingerprint => crate::matching::FINGERPRINT_THRESHOLD,
            Modality::Synthetic => crate::matching::FACE_THRESHOLD,
        }
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "face" => Ok(Modality::Face),
            "fingerprint" | "finger" => Ok(Modality::Fingerprint),
            "synthetic" | "synth" => Ok(Modality::Synthetic),
            other => Err(Error::Argument(format!("unknown modality: {other}"))),
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modality::Face => write!(f, "face"),
            Modality::Fingerprint => write!(f, "fingerprint"),
            Modality::Synthetic => write!(f, "synthetic"),
        }
    }
}

/// Where a sample's pixels come from.
#[derive(Debug, Clone, PartialEq)]
enum SampleSource {
    File(PathBuf),
    Memory(ImageMatrix),
}

/// One biometric sample of a subject.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub name: String,
    source: SampleSource,
}

impl Sample {
    /// Loads (and preprocesses) the sample to a `side x side` matrix.
    /// In-memory samples must already match the requested side.
    pub fn image(&self, side: usize) -> Result<ImageMatrix> {
        match &self.source {
            SampleSource::File(path) => preprocess_path(path, side),
            SampleSource::Memory(m) => {
                if m.side() != side {
                    return Err(Error::Dimension {
                        context: "in-memory sample",
                        expected: side,
                        actual: m.side(),
                    });
                }
                Ok(m.clone())
            }
        }
    }

    /// Direct access to in-memory pixels, if any.
    pub fn memory_image(&self) -> Option<&ImageMatrix> {
        match &self.source {
            SampleSource::Memory(m) => Some(m),
            SampleSource::File(_) => None,
        }
    }
}

/// An ordered subject with its ordered samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub id: String,
    pub samples: Vec<Sample>,
}

/// An ordered collection of subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub subjects: Vec<SubjectRecord>,
    pub modality: Modality,
    /// Source path or synthesis seed, for report provenance.
    pub provenance: String,
}

impl Dataset {
    pub fn num_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn num_samples(&self) -> usize {
        self.subjects.iter().map(|s| s.samples.len()).sum()
    }
}

/// Supported directory layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Flat files named `subjectID_sampleID.ext`; ids sorted numerically.
    Fvc,
    /// One directory per subject; directories and files sorted
    /// lexicographically.
    Folders,
}

impl std::str::FromStr for Layout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fvc" => Ok(Layout::Fvc),
            "folders" => Ok(Layout::Folders),
            other => Err(Error::Argument(format!("unknown layout: {other}"))),
        }
    }
}

const IMAGE_EXTENSIONS: &[&str] = &["png", "bmp", "pgm", "ppm", "pbm", "tif", "tiff", "jpg", "jpeg"];

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

/// Loads a dataset directory with deterministic subject and sample ordering.
pub fn load_dataset(root: &Path, layout: Layout, modality: Modality) -> Result<Dataset> {
    if !root.is_dir() {
        return Err(Error::Ingestion {
            path: root.to_path_buf(),
            reason: "not a directory".into(),
        });
    }
    let subjects = match layout {
        Layout::Fvc => load_fvc(root)?,
        Layout::Folders => load_folders(root)?,
    };
    if subjects.is_empty() {
        return Err(Error::Ingestion {
            path: root.to_path_buf(),
            reason: "no image files found".into(),
        });
    }
    Ok(Dataset {
        subjects,
        modality,
        provenance: root.display().to_string(),
    })
}

fn load_fvc(root: &Path) -> Result<Vec<SubjectRecord>> {
    let mut grouped: BTreeMap<u64, Vec<(u64, PathBuf)>> = BTreeMap::new();
    for entry in std::fs::read_dir(root)? {
        let path = entry?.path();
        if !path.is_file() || !has_image_extension(&path) {
            continue;
        }
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default();
        let (subj, sample) = stem.split_once('_').ok_or_else(|| Error::Ingestion {
            path: path.clone(),
            reason: "expected subject_sample filename".into(),
        })?;
        let subj: u64 = subj.parse().map_err(|_| Error::Ingestion {
            path: path.clone(),
            reason: format!("subject id {subj} is not numeric"),
        })?;
        let sample: u64 = sample.parse().map_err(|_| Error::Ingestion {
            path: path.clone(),
            reason: format!("sample id {sample} is not numeric"),
        })?;
        grouped.entry(subj).or_default().push((sample, path));
    }
    let mut subjects = Vec::with_capacity(grouped.len());
    for (subj, mut samples) in grouped {
        samples.sort_by_key(|(idx, _)| *idx);
        subjects.push(SubjectRecord {
            id: subj.to_string(),
            samples: samples
                .into_iter()
                .map(|(idx, path)| Sample {
                    name: idx.to_string(),
                    source: SampleSource::File(path),
                })
                .collect(),
        });
    }
    Ok(subjects)
}

fn load_folders(root: &Path) -> Result<Vec<SubjectRecord>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    let mut subjects = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && has_image_extension(p))
            .collect();
        files.sort();
        if files.is_empty() {
            continue;
        }
        let id = dir
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        subjects.push(SubjectRecord {
            id,
            samples: files
                .into_iter()
                .map(|path| Sample {
                    name: path
                        .file_stem()
                        .and_then(|s| s.to_str())
                        .unwrap_or_default()
                        .to_string(),
                    source: SampleSource::File(path),
                })
                .collect(),
        });
    }
    Ok(subjects)
}

/// How many samples per subject go to training and testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SplitProtocol {
    pub train_per_subject: usize,
    pub test_per_subject: usize,
    /// Keep only the first this-many subjects (in dataset order).
    pub subject_limit: Option<usize>,
}

/// Deterministic split: the first `train` samples of each subject train, the
/// next `test` samples test. Errors name the first subject that cannot
/// satisfy the protocol.
pub fn split(ds: &Dataset, protocol: &SplitProtocol) -> Result<(Dataset, Dataset)> {
    if protocol.train_per_subject == 0 || protocol.test_per_subject == 0 {
        return Err(Error::Protocol(
            "split needs at least one training and one testing sample per subject".into(),
        ));
    }
    let limit = protocol.subject_limit.unwrap_or(ds.subjects.len());
    let selected = &ds.subjects[..limit.min(ds.subjects.len())];
    let needed = protocol.train_per_subject + protocol.test_per_subject;

    let mut train_subjects = Vec::with_capacity(selected.len());
    let mut test_subjects = Vec::with_capacity(selected.len());
    for subject in selected {
        if subject.samples.len() < needed {
            return Err(Error::Protocol(format!(
                "subject {} has {} samples but the protocol needs {needed}",
                subject.id,
                subject.samples.len()
            )));
        }
        train_subjects.push(SubjectRecord {
            id: subject.id.clone(),
            samples: subject.samples[..protocol.train_per_subject].to_vec(),
        });
        test_subjects.push(SubjectRecord {
            id: subject.id.clone(),
            samples: subject.samples
                [protocol.train_per_subject..protocol.train_per_subject + protocol.test_per_subject]
                .to_vec(),
        });
    }
    let train = Dataset {
        subjects: train_subjects,
        modality: ds.modality,
        provenance: format!("{} [train]", ds.provenance),
    };
    let test = Dataset {
        subjects: test_subjects,
        modality: ds.modality,
        provenance: format!("{} [test]", ds.provenance),
    };
    Ok((train, test))
}

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthConfig {
    pub num_subjects: usize,
    pub samples_per_subject: usize,
    pub side: usize,
    /// Per-pixel Gaussian noise standard deviation.
    pub noise_sigma: f64,
    /// Maximum circular translation per axis, in pixels; 0 disables.
    pub max_translation: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_subjects: 25,
            samples_per_subject: 5,
            side: 141,
            noise_sigma: 0.02,
            max_translation: 2,
            seed: 1,
        }
    }
}

/// Band edges of the synthetic texture spectrum, in cycles per pixel. The
/// band sits below the finest filter scale so small translations do not
/// decorrelate samples, while staying broad enough that subjects differ
/// across several filter channels.
const TEXTURE_BAND_CENTER: f64 = 0.08;
const TEXTURE_BAND_SIGMA: f64 = 0.55;
/// Width of the per-subject orientation emphasis.
const TEXTURE_ORIENT_SIGMA: f64 = 0.5;

fn freq_coord(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64 / n as f64
    } else {
        (k as f64 - n as f64) / n as f64
    }
}

/// One seeded band-limited anisotropic texture, normalized to [0, 1].
fn base_texture(side: usize, rng: &mut ChaCha20Rng) -> ImageMatrix {
    let n = side;
    let mut buf: Vec<Complex<f64>> = (0..n * n)
        .map(|_| Complex::new(rng.sample::<f64, _>(StandardNormal), 0.0))
        .collect();
    fft2d(&mut buf, n, false);

    // Subject-specific orientation emphasis; applied to the line angle so
    // the mask stays even and the inverse transform stays real.
    let theta_s: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    for row in 0..n {
        let fy = freq_coord(row, n);
        for col in 0..n {
            let fx = freq_coord(col, n);
            let r = fx.hypot(fy);
            let idx = row * n + col;
            if r == 0.0 {
                buf[idx] = Complex::new(0.0, 0.0);
                continue;
            }
            let band = (-((r / TEXTURE_BAND_CENTER).ln().powi(2))
                / (2.0 * TEXTURE_BAND_SIGMA.ln().powi(2)))
            .exp();
            // angular distance to the orientation line, modulo pi
            let theta = fy.atan2(fx);
            let mut d = (theta - theta_s).rem_euclid(std::f64::consts::PI);
            if d > std::f64::consts::FRAC_PI_2 {
                d = std::f64::consts::PI - d;
            }
            let orient = 0.25 + 0.75 * (-(d * d) / (2.0 * TEXTURE_ORIENT_SIGMA.powi(2))).exp();
            buf[idx] *= band * orient;
        }
    }

    fft2d(&mut buf, n, true);
    let norm = 1.0 / (n * n) as f64;
    let real: Vec<f64> = buf.iter().map(|c| c.re * norm).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &real {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    let pixels = if span > 0.0 {
        real.iter().map(|v| (v - lo) / span).collect()
    } else {
        vec![0.5; n * n]
    };
    ImageMatrix::from_pixels(n, pixels).expect("normalized texture is in range")
}

/// Circularly shifts a base texture and adds clamped Gaussian noise.
fn perturb(
    base: &ImageMatrix,
    dx: i64,
    dy: i64,
    noise_sigma: f64,
    rng: &mut ChaCha20Rng,
) -> ImageMatrix {
    let n = base.side();
    let mut pixels = Vec::with_capacity(n * n);
    for row in 0..n {
        let src_row = (row as i64 - dy).rem_euclid(n as i64) as usize;
        for col in 0..n {
            let src_col = (col as i64 - dx).rem_euclid(n as i64) as usize;
            let mut v = base.get(src_row, src_col);
            if noise_sigma > 0.0 {
                v += noise_sigma * rng.sample::<f64, _>(StandardNormal);
            }
            pixels.push(v.clamp(0.0, 1.0));
        }
    }
    ImageMatrix::from_pixels(n, pixels).expect("clamped pixels are in range")
}

/// Generates a deterministic synthetic dataset.
///
/// Each subject gets a distinct base texture; each sample is the base plus a
/// seeded circular translation (at most `max_translation` pixels per axis)
/// and Gaussian pixel noise. With zero noise and zero translation all
/// samples of a subject are identical.
pub fn synth_generate(config: &SynthConfig) -> Result<Dataset> {
    if config.num_subjects < 2 {
        return Err(Error::Argument(
            "synthetic datasets need at least 2 subjects".into(),
        ));
    }
    if config.samples_per_subject < 2 {
        return Err(Error::Argument(
            "synthetic datasets need at least 2 samples per subject".into(),
        ));
    }
    if config.side == 0 {
        return Err(Error::Argument("side must be positive".into()));
    }
    if !(config.noise_sigma >= 0.0) {
        return Err(Error::Argument("noise sigma must be nonnegative".into()));
    }

    let width = (config.num_subjects as f64).log10().floor() as usize + 1;
    let mut subjects = Vec::with_capacity(config.num_subjects);
    for s in 0..config.num_subjects {
        let mut base_rng = ChaCha20Rng::seed_from_u64(mix_seed(&[config.seed, s as u64, 0]));
        let base = base_texture(config.side, &mut base_rng);
        let mut samples = Vec::with_capacity(config.samples_per_subject);
        for i in 0..config.samples_per_subject {
            let mut rng =
                ChaCha20Rng::seed_from_u64(mix_seed(&[config.seed, s as u64, 1 + i as u64]));
            let t = config.max_translation as i64;
            let (dx, dy) = if t > 0 {
                (rng.gen_range(-t..=t), rng.gen_range(-t..=t))
            } else {
                (0, 0)
            };
            let image = perturb(&base, dx, dy, config.noise_sigma, &mut rng);
            samples.push(Sample {
                name: format!("{:02}", i + 1),
                source: SampleSource::Memory(image),
            });
        }
        subjects.push(SubjectRecord {
            id: format!("s{:0width$}", s + 1),
            samples,
        });
    }
    Ok(Dataset {
        subjects,
        modality: Modality::Synthetic,
        provenance: format!("synthetic(seed={})", config.seed),
    })
}

/// Writes a dataset to disk as 16-bit grayscale PNGs in the `folders`
/// layout. In-memory samples are written directly; file-backed samples are
/// preprocessed to `side` first.
pub fn save_dataset_png(ds: &Dataset, dir: &Path, side: usize) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for subject in &ds.subjects {
        let sub_dir = dir.join(&subject.id);
        std::fs::create_dir_all(&sub_dir)?;
        for sample in &subject.samples {
            let m = sample.image(side)?;
            let mut img = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::new(
                side as u32,
                side as u32,
            );
            for y in 0..side {
                for x in 0..side {
                    let v = (m.get(y, x) * 65535.0).round().clamp(0.0, 65535.0) as u16;
                    img.put_pixel(x as u32, y as u32, image::Luma([v]));
                }
            }
            let path = sub_dir.join(format!("{}.png", sample.name));
            img.save(&path)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        }
    }
    Ok(())
}
