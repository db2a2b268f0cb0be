//! Forward image formation for both tracks.
//!
//! The clean track is a plain projection through the camera response. The
//! real-world track runs projection, RGGB subsampling, shot and dark noise,
//! bilinear demosaicing, 8-bit quantization and a JPEG round trip, in that
//! order.

pub mod bayer;
pub mod noise;

pub use bayer::{demosaic_bilinear, mosaic_rggb, rggb_channel, BayerMosaic};
pub use noise::{add_sensor_noise, NoiseParams};

use crate::css::CameraResponse;
use crate::cube::HsiCube;
use crate::error::{Error, Result};
use crate::io::codec::{self, JpegSettings};
use crate::rgb::{Rgb8Image, RgbImage};

/// Per-pixel `css · spectrum`, linear and unquantized.
pub fn project_clean(cube: &HsiCube, css: &CameraResponse) -> Result<RgbImage> {
    if cube.grid() != css.grid() {
        return Err(Error::invalid(format!(
            "cube grid {:?} does not match response grid {:?}",
            cube.grid(),
            css.grid()
        )));
    }
    let n = cube.pixels();
    let bands = cube.bands();
    let mut out = vec![0.0; n * 3];
    // Accumulate band by band so each pass streams one contiguous plane.
    for ch in 0..3 {
        let row = css.row(ch);
        for (b, &w) in row.iter().enumerate().take(bands) {
            let plane = cube.band(b);
            for (p, &s) in plane.iter().enumerate() {
                out[p * 3 + ch] += w * s;
            }
        }
    }
    RgbImage::new(cube.height(), cube.width(), out)
}

/// Clean-track input: identical to [`project_clean`]. The white level is
/// accepted for symmetry with the real-world track and validated, but the
/// linear output is not normalized.
pub fn simulate_clean(cube: &HsiCube, css: &CameraResponse, white_level: f64) -> Result<RgbImage> {
    check_white_level(white_level)?;
    project_clean(cube, css)
}

/// `round(255 · clamp(x / white_level, 0, 1))`, halves rounded up.
pub fn quantize(rgb: &RgbImage, white_level: f64) -> Result<Rgb8Image> {
    check_white_level(white_level)?;
    let data = rgb
        .data()
        .iter()
        .map(|&x| quantize_sample(x, white_level))
        .collect();
    Rgb8Image::new(rgb.height(), rgb.width(), data, white_level)
}

#[inline]
pub fn quantize_sample(x: f64, white_level: f64) -> u8 {
    let v = (x / white_level).clamp(0.0, 1.0);
    // NaN falls through clamp; the saturating cast maps it to 0.
    (255.0 * v + 0.5).floor() as u8
}

fn check_white_level(white_level: f64) -> Result<()> {
    if !(white_level.is_finite() && white_level > 0.0) {
        return Err(Error::invalid(format!(
            "white level must be positive and finite, got {white_level}"
        )));
    }
    Ok(())
}

/// Linear RGB after the mosaic, noise and demosaic stages, normalized so that
/// `white_level` maps to 1.0. Noise parameters are interpreted in these
/// normalized units.
pub fn simulate_sensor(
    cube: &HsiCube,
    css: &CameraResponse,
    noise: &NoiseParams,
    white_level: f64,
) -> Result<RgbImage> {
    check_white_level(white_level)?;
    let linear = project_clean(cube, css)?;
    let normalized = linear.map(|v| v / white_level);
    let mosaic = mosaic_rggb(&normalized)?;
    let noisy = add_sensor_noise(&mosaic, noise)?;
    Ok(demosaic_bilinear(&noisy))
}

/// Real-world-track input: the full five-stage pipeline followed by a JPEG
/// encode and decode, so callers see compression artifacts. The returned
/// image carries `white_level` for dequantization.
pub fn simulate_real_world(
    cube: &HsiCube,
    css: &CameraResponse,
    noise: &NoiseParams,
    jpeg: &JpegSettings,
    white_level: f64,
) -> Result<Rgb8Image> {
    let bytes = simulate_real_world_jpeg(cube, css, noise, jpeg, white_level)?;
    let decoded = codec::decode_rgb8(&bytes)?;
    Rgb8Image::new(
        decoded.height(),
        decoded.width(),
        decoded.data().to_vec(),
        white_level,
    )
}

/// As [`simulate_real_world`] but returns the encoded JPEG stream.
pub fn simulate_real_world_jpeg(
    cube: &HsiCube,
    css: &CameraResponse,
    noise: &NoiseParams,
    jpeg: &JpegSettings,
    white_level: f64,
) -> Result<Vec<u8>> {
    jpeg.validate()?;
    let demosaiced = simulate_sensor(cube, css, noise, white_level)?;
    let q = quantize(&demosaiced, 1.0)?;
    codec::encode_jpeg(&q, jpeg)
}

/// Percentile (0..=100) of all clean-track RGB samples over `cubes`, by the
/// nearest-rank rule. Used as the default exposure normalization.
pub fn white_level_percentile<'a>(
    cubes: impl IntoIterator<Item = &'a HsiCube>,
    css: &CameraResponse,
    percentile: f64,
) -> Result<f64> {
    if !(0.0..=100.0).contains(&percentile) {
        return Err(Error::invalid(format!(
            "percentile must be in [0, 100], got {percentile}"
        )));
    }
    let mut samples = Vec::new();
    for cube in cubes {
        samples.extend_from_slice(project_clean(cube, css)?.data());
    }
    if samples.is_empty() {
        return Err(Error::invalid("no cubes to derive a white level from"));
    }
    samples.sort_by(f64::total_cmp);
    let rank = ((percentile / 100.0) * samples.len() as f64).ceil() as usize;
    let level = samples[rank.clamp(1, samples.len()) - 1];
    if level > 0.0 {
        Ok(level)
    } else {
        Err(Error::invalid("clean RGB percentile is zero; cannot normalize"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::WavelengthGrid;

    #[test]
    fn flat_spectrum_scales_row_sums() {
        let css = CameraResponse::default();
        let cube = HsiCube::filled(2, 2, WavelengthGrid::default(), 0.5).unwrap();
        let rgb = project_clean(&cube, &css).unwrap();
        for ch in 0..3 {
            let s: f64 = css.row(ch).iter().sum();
            assert!((rgb.get(1, 1, ch) - 0.5 * s).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let css = CameraResponse::default();
        let grid = WavelengthGrid::new(400.0, 10.0, 30).unwrap();
        let cube = HsiCube::filled(2, 2, grid, 0.5).unwrap();
        assert!(matches!(project_clean(&cube, &css), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn quantize_endpoints_and_half() {
        let rgb = RgbImage::new(1, 1, vec![2.0, 0.0, 1.0]).unwrap();
        let q = quantize(&rgb, 2.0).unwrap();
        assert_eq!(q.data(), &[255, 0, 128]);
        assert!(quantize(&rgb, 0.0).is_err());
        assert!(quantize(&rgb, -1.0).is_err());
    }

    #[test]
    fn quantize_clamps_out_of_range() {
        let rgb = RgbImage::new(1, 1, vec![5.0, -1.0, f64::NAN]).unwrap();
        assert_eq!(quantize(&rgb, 1.0).unwrap().data(), &[255, 0, 0]);
    }

    #[test]
    fn white_level_nearest_rank() {
        let css = CameraResponse::default();
        let cube = HsiCube::filled(2, 2, WavelengthGrid::default(), 1.0).unwrap();
        let max = project_clean(&cube, &css).unwrap().data().iter().cloned().fold(0.0, f64::max);
        assert_eq!(white_level_percentile([&cube], &css, 100.0).unwrap(), max);
    }
}
