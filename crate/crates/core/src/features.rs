//! Log-Gabor filter bank and feature extraction.
//!
//! The bank holds `p * q` frequency-domain masks (p scales, q orientations)
//! built directly on the unshifted FFT grid. Each mask is the product of a
//! log-normal radial term, centered on the scale frequency, and a Gaussian
//! angular term centered on the orientation; the zero-frequency bin is
//! forced to zero so constant images produce no response. Features are the
//! per-pixel magnitudes of the inverse-transformed masked spectra, scaled
//! and concatenated scale-major.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// A square grayscale image with intensities in [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageMatrix {
    side: usize,
    pixels: Vec<f64>,
}

impl ImageMatrix {
    pub fn from_pixels(side: usize, pixels: Vec<f64>) -> Result<Self> {
        if side == 0 {
            return Err(Error::Input("image side must be positive".into()));
        }
        if pixels.len() != side * side {
            return Err(Error::Dimension {
                context: "image construction",
                expected: side * side,
                actual: pixels.len(),
            });
        }
        if pixels.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(Error::Input(
                "image intensities must be finite and within [0, 1]".into(),
            ));
        }
        Ok(ImageMatrix { side, pixels })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.side + col]
    }
}

/// Parameters of the log-Gabor bank.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FilterBankConfig {
    /// Number of scales p.
    pub num_scales: usize,
    /// Number of orientations q.
    pub num_orientations: usize,
    /// Minimum wavelength in pixels; the highest center frequency is its
    /// reciprocal.
    pub min_wavelength: f64,
    /// Wavelength multiplier between consecutive scales.
    pub scale_multiplier: f64,
    /// Ratio sigma of the log-normal radial term (0 < ratio < 1 narrows the
    /// band as it approaches 1).
    pub radial_bandwidth: f64,
    /// Standard deviation of the angular Gaussian, in radians.
    pub angular_bandwidth: f64,
    /// Image side N; masks are N x N.
    pub image_side: usize,
}

impl Default for FilterBankConfig {
    fn default() -> Self {
        FilterBankConfig {
            num_scales: 4,
            num_orientations: 6,
            min_wavelength: 3.0,
            scale_multiplier: 1.7,
            radial_bandwidth: 0.65,
            angular_bandwidth: 1.3,
            image_side: 141,
        }
    }
}

impl FilterBankConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.num_scales < 1 {
            return fail("num_scales must be >= 1".into());
        }
        if self.num_orientations < 1 {
            return fail("num_orientations must be >= 1".into());
        }
        if !(self.min_wavelength >= 2.0) {
            return fail(format!(
                "min_wavelength must be >= 2 pixels, got {}",
                self.min_wavelength
            ));
        }
        if !(self.scale_multiplier > 1.0) {
            return fail(format!(
                "scale_multiplier must be > 1, got {}",
                self.scale_multiplier
            ));
        }
        if !(self.radial_bandwidth > 0.0 && self.radial_bandwidth < 1.0) {
            return fail(format!(
                "radial_bandwidth is a sigma ratio in (0, 1), got {}",
                self.radial_bandwidth
            ));
        }
        if !(self.angular_bandwidth > 0.0) {
            return fail(format!(
                "angular_bandwidth must be > 0, got {}",
                self.angular_bandwidth
            ));
        }
        if self.image_side == 0 {
            return fail("image_side must be positive".into());
        }
        Ok(())
    }

    /// Center frequency of scale `i` (0-based), in cycles per pixel.
    pub fn center_frequency(&self, scale: usize) -> f64 {
        1.0 / (self.min_wavelength * self.scale_multiplier.powi(scale as i32))
    }

    /// Orientation angle of filter `j` (0-based), in radians.
    pub fn orientation_angle(&self, orientation: usize) -> f64 {
        orientation as f64 * std::f64::consts::PI / self.num_orientations as f64
    }

    /// Length of the flat feature vector: p * q * N^2.
    pub fn feature_length(&self) -> usize {
        self.num_scales * self.num_orientations * self.image_side * self.image_side
    }
}

/// The constructed bank: `p * q` real masks over the unshifted FFT grid.
#[derive(Debug, Clone)]
pub struct LogGaborFilterBank {
    config: FilterBankConfig,
    masks: Vec<Vec<f64>>,
}

impl LogGaborFilterBank {
    pub fn config(&self) -> &FilterBankConfig {
        &self.config
    }

    /// Masks in scale-major order: all orientations of scale 0, then scale 1,
    /// and so on.
    pub fn masks(&self) -> &[Vec<f64>] {
        &self.masks
    }

    pub fn mask(&self, scale: usize, orientation: usize) -> &[f64] {
        &self.masks[scale * self.config.num_orientations + orientation]
    }
}

/// Frequency coordinate of FFT bin `k` for side `n`, in cycles per pixel.
fn freq_coord(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64 / n as f64
    } else {
        (k as f64 - n as f64) / n as f64
    }
}

/// The radial log-Gabor term: 1 at `r == center`, falling off log-normally.
fn radial_term(r: f64, center: f64, sigma_ratio: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let num = (r / center).ln().powi(2);
    let den = 2.0 * sigma_ratio.ln().powi(2);
    (-num / den).exp()
}

/// The angular Gaussian term with wrap-around distance, 1 at the filter
/// orientation.
fn angular_term(theta: f64, center: f64, sigma: f64) -> f64 {
    let ds = theta.sin() * center.cos() - theta.cos() * center.sin();
    let dc = theta.cos() * center.cos() + theta.sin() * center.sin();
    let dtheta = ds.atan2(dc);
    (-(dtheta * dtheta) / (2.0 * sigma * sigma)).exp()
}

/// Builds the log-Gabor bank for a configuration.
pub fn build_filter_bank(config: &FilterBankConfig) -> Result<LogGaborFilterBank> {
    config.validate()?;
    let n = config.image_side;
    let mut masks = Vec::with_capacity(config.num_scales * config.num_orientations);
    for scale in 0..config.num_scales {
        let omega = config.center_frequency(scale);
        for orientation in 0..config.num_orientations {
            let theta_j = config.orientation_angle(orientation);
            let mut mask = vec![0.0f64; n * n];
            for row in 0..n {
                let fy = freq_coord(row, n);
                for col in 0..n {
                    let fx = freq_coord(col, n);
                    let r = fx.hypot(fy);
                    if r == 0.0 {
                        continue; // DC stays zero: no response to constants
                    }
                    let theta = fy.atan2(fx);
                    mask[row * n + col] = radial_term(r, omega, config.radial_bandwidth)
                        * angular_term(theta, theta_j, config.angular_bandwidth);
                }
            }
            masks.push(mask);
        }
    }
    Ok(LogGaborFilterBank {
        config: config.clone(),
        masks,
    })
}

/// The flat feature vector: scaled response magnitudes, concatenated
/// scale-major then orientation, row-major pixels within each response.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    scale_factor: f64,
}

impl FeatureVector {
    pub fn from_values(values: Vec<f64>, scale_factor: f64) -> Self {
        FeatureVector {
            values,
            scale_factor,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }
}

/// Default multiplier applied to the raw response magnitudes, which would
/// otherwise sit in a numerically awkward small range.
pub const DEFAULT_SCALE_FACTOR: f64 = 100.0;

/// In-place 2-D FFT over a row-major square buffer.
pub(crate) fn fft2d(buf: &mut [Complex<f64>], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    for row in buf.chunks_exact_mut(n) {
        fft.process(row);
    }
    // Transpose, transform the (former) columns, transpose back.
    transpose_square(buf, n);
    for row in buf.chunks_exact_mut(n) {
        fft.process(row);
    }
    transpose_square(buf, n);
}

fn transpose_square(buf: &mut [Complex<f64>], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Extracts the log-Gabor feature vector of an image.
///
/// For every mask: multiply the image spectrum by the mask, inverse
/// transform, take per-pixel complex magnitudes, scale, and append.
pub fn extract_features(
    image: &ImageMatrix,
    bank: &LogGaborFilterBank,
    scale_factor: f64,
) -> Result<FeatureVector> {
    let n = bank.config().image_side;
    if image.side() != n {
        return Err(Error::Dimension {
            context: "feature extraction",
            expected: n,
            actual: image.side(),
        });
    }

    let mut spectrum: Vec<Complex<f64>> = image
        .pixels()
        .iter()
        .map(|&p| Complex::new(p, 0.0))
        .collect();
    fft2d(&mut spectrum, n, false);

    let norm = 1.0 / (n * n) as f64;
    let per_mask: Vec<Vec<f64>> = bank
        .masks()
        .par_iter()
        .map(|mask| {
            let mut response: Vec<Complex<f64>> = spectrum
                .iter()
                .zip(mask)
                .map(|(s, &m)| s * m)
                .collect();
            fft2d(&mut response, n, true);
            response
                .iter()
                .map(|c| c.norm() * norm * scale_factor)
                .collect()
        })
        .collect();

    let mut values = Vec::with_capacity(bank.config().feature_length());
    for block in per_mask {
        values.extend_from_slice(&block);
    }
    Ok(FeatureVector {
        values,
        scale_factor,
    })
}
