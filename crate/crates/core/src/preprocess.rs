//! Deterministic image preprocessing: decode, luminance grayscale, center
//! square crop, bilinear resize to the working side.
//!
//! The resampler uses the pixel-center convention
//! `src = (dst + 0.5) * scale - 0.5`, so resizing to the source size is the
//! identity and downsampling an exact nearest-neighbor upscale recovers the
//! original values.

use std::path::Path;

use image::DynamicImage;

use crate::error::{Error, Result};
use crate::features::ImageMatrix;

// Rec. 601 luminance weights.
const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Decodes an image file and reduces it to a grayscale N x N matrix.
pub fn preprocess_path(path: &Path, target_side: usize) -> Result<ImageMatrix> {
    let img = image::open(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    preprocess_image(&img, target_side)
}

/// Decodes an in-memory encoded image and preprocesses it.
pub fn preprocess_bytes(bytes: &[u8], target_side: usize) -> Result<ImageMatrix> {
    let img = image::load_from_memory(bytes).map_err(|e| Error::Format(e.to_string()))?;
    preprocess_image(&img, target_side)
}

/// Preprocesses an already-decoded image.
pub fn preprocess_image(img: &DynamicImage, target_side: usize) -> Result<ImageMatrix> {
    if target_side == 0 {
        return Err(Error::Input("target side must be positive".into()));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::Input("image has no pixels".into()));
    }

    let rgb = img.to_rgb32f();
    let mut gray = Vec::with_capacity(w * h);
    for px in rgb.pixels() {
        let (r, g, b) = (px.0[0] as f64, px.0[1] as f64, px.0[2] as f64);
        // Gray pixels pass through exactly; the weights sum to 1 only up to
        // rounding.
        let y = if r == g && g == b {
            r
        } else {
            LUMA_R * r + LUMA_G * g + LUMA_B * b
        };
        gray.push(y.clamp(0.0, 1.0));
    }

    let (square, side) = center_crop_square(&gray, w, h);
    let resized = if side == target_side {
        square
    } else {
        resize_bilinear(&square, side, target_side)
    };
    ImageMatrix::from_pixels(target_side, resized)
}

/// Crops the largest centered square from a row-major buffer.
fn center_crop_square(pixels: &[f64], w: usize, h: usize) -> (Vec<f64>, usize) {
    let side = w.min(h);
    if side == w && side == h {
        return (pixels.to_vec(), side);
    }
    let x0 = (w - side) / 2;
    let y0 = (h - side) / 2;
    let mut out = Vec::with_capacity(side * side);
    for row in 0..side {
        let start = (y0 + row) * w + x0;
        out.extend_from_slice(&pixels[start..start + side]);
    }
    (out, side)
}

/// Bilinear resize of a square buffer, pixel-center convention.
fn resize_bilinear(src: &[f64], src_side: usize, dst_side: usize) -> Vec<f64> {
    let scale = src_side as f64 / dst_side as f64;
    let max = src_side - 1;
    let mut out = Vec::with_capacity(dst_side * dst_side);
    for dy in 0..dst_side {
        let sy = ((dy as f64 + 0.5) * scale - 0.5).max(0.0);
        let y0 = (sy.floor() as usize).min(max);
        let y1 = (y0 + 1).min(max);
        let fy = sy - y0 as f64;
        for dx in 0..dst_side {
            let sx = ((dx as f64 + 0.5) * scale - 0.5).max(0.0);
            let x0 = (sx.floor() as usize).min(max);
            let x1 = (x0 + 1).min(max);
            let fx = sx - x0 as f64;
            let top = src[y0 * src_side + x0] * (1.0 - fx) + src[y0 * src_side + x1] * fx;
            let bottom = src[y1 * src_side + x0] * (1.0 - fx) + src[y1 * src_side + x1] * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{ImageBuffer, Luma, Rgb, Rgb32FImage};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn gray_image_at_target_side_is_unchanged() {
        let img: ImageBuffer<Luma<u8>, Vec<u8>> =
            ImageBuffer::from_fn(141, 141, |x, y| Luma([((x * 7 + y * 13) % 256) as u8]));
        let dynimg = DynamicImage::ImageLuma8(img.clone());
        let m = preprocess_image(&dynimg, 141).unwrap();
        for y in 0..141 {
            for x in 0..141 {
                let expected = (img.get_pixel(x, y).0[0] as f32 / 255.0) as f64;
                assert_eq!(m.get(y as usize, x as usize), expected);
            }
        }
    }

    #[test]
    fn rgb_converts_via_fixed_weights() {
        let mut buf = Rgb32FImage::new(3, 3);
        for px in buf.pixels_mut() {
            *px = Rgb([0.2, 0.6, 0.9]);
        }
        let m = preprocess_image(&DynamicImage::ImageRgb32F(buf), 3).unwrap();
        let expected = 0.299 * 0.2f32 as f64 + 0.587 * 0.6f32 as f64 + 0.114 * 0.9f32 as f64;
        assert!((m.get(1, 1) - expected).abs() < 1e-12);
    }

    #[test]
    fn preprocessing_is_deterministic() {
        let img: ImageBuffer<Luma<u8>, Vec<u8>> =
            ImageBuffer::from_fn(200, 160, |x, y| Luma([((x * 3 + y * 11) % 256) as u8]));
        let dynimg = DynamicImage::ImageLuma8(img);
        let a = preprocess_path_free(&dynimg);
        let b = preprocess_path_free(&dynimg);
        assert_eq!(a, b);
    }

    fn preprocess_path_free(img: &DynamicImage) -> Vec<u64> {
        preprocess_image(img, 64)
            .unwrap()
            .pixels()
            .iter()
            .map(|p| p.to_bits())
            .collect()
    }

    #[test]
    fn nearest_neighbor_upscale_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let side = 141usize;
        let original: Vec<f64> = (0..side * side).map(|_| rng.gen_range(0.0..1.0)).collect();

        let mut up = Rgb32FImage::new((side * 2) as u32, (side * 2) as u32);
        for y in 0..side * 2 {
            for x in 0..side * 2 {
                let v = original[(y / 2) * side + (x / 2)] as f32;
                up.put_pixel(x as u32, y as u32, Rgb([v, v, v]));
            }
        }
        let m = preprocess_image(&DynamicImage::ImageRgb32F(up), side).unwrap();
        for (got, want) in m.pixels().iter().zip(&original) {
            // f32 storage quantizes the original f64 values
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn non_square_input_is_center_cropped() {
        // 6 wide, 4 tall: the centered 4x4 square spans columns 1..5.
        let mut img: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::new(6, 4);
        for y in 0..4 {
            for x in 0..6 {
                img.put_pixel(x, y, Luma([(x * 10 + y) as u8]));
            }
        }
        let m = preprocess_image(&DynamicImage::ImageLuma8(img), 4).unwrap();
        assert_eq!(m.get(0, 0), (10.0f32 / 255.0) as f64);
        assert_eq!(m.get(0, 3), (40.0f32 / 255.0) as f64);
    }

    #[test]
    fn undecodable_bytes_are_a_format_error() {
        let err = preprocess_bytes(b"definitely not an image", 16).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn zero_target_side_is_an_input_error() {
        let img: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::new(4, 4);
        let err = preprocess_image(&DynamicImage::ImageLuma8(img), 0).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }
}
