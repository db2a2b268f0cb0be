//! Linear floating-point and quantized 8-bit RGB images, interleaved row-major.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl RgbImage {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be nonzero, got {height}x{width}"
            )));
        }
        if Some(data.len()) != height.checked_mul(width).and_then(|n| n.checked_mul(3)) {
            return Err(Error::invalid(format!(
                "rgb data length {} does not match {height}x{width}x3",
                data.len()
            )));
        }
        Ok(RgbImage {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, rgb: [f64; 3]) -> Result<Self> {
        let data = (0..height * width).flat_map(|_| rgb).collect();
        Self::new(height, width, data)
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * 3);
        for r in 0..height {
            for c in 0..width {
                for ch in 0..3 {
                    data.push(f(r, c, ch));
                }
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[(row * self.width + col) * 3 + ch]
    }

    pub fn pixel(&self, pixel: usize) -> [f64; 3] {
        let p = &self.data[pixel * 3..pixel * 3 + 3];
        [p[0], p[1], p[2]]
    }

    pub fn same_shape(&self, other: &RgbImage) -> bool {
        self.height == other.height && self.width == other.width
    }

    pub fn scale(&self, factor: f64) -> RgbImage {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RgbImage {
        RgbImage {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Returns true when every sample is finite and nonnegative.
    pub fn is_valid_radiance(&self) -> bool {
        self.data.iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// 8-bit RGB as delivered to reconstructors on the real-world track.
#[derive(Debug, Clone, PartialEq)]
pub struct Rgb8Image {
    height: usize,
    width: usize,
    data: Vec<u8>,
    /// The linear value that was mapped to code 255.
    pub white_level: f64,
}

impl Rgb8Image {
    pub fn new(height: usize, width: usize, data: Vec<u8>, white_level: f64) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be nonzero, got {height}x{width}"
            )));
        }
        if Some(data.len()) != height.checked_mul(width).and_then(|n| n.checked_mul(3)) {
            return Err(Error::invalid(format!(
                "rgb8 data length {} does not match {height}x{width}x3",
                data.len()
            )));
        }
        if !(white_level.is_finite() && white_level > 0.0) {
            return Err(Error::invalid(format!(
                "white level must be positive, got {white_level}"
            )));
        }
        Ok(Rgb8Image {
            height,
            width,
            data,
            white_level,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize, ch: usize) -> u8 {
        self.data[(row * self.width + col) * 3 + ch]
    }

    /// Codes divided by 255; the feature domain used for real-world fitting.
    pub fn normalized(&self) -> RgbImage {
        let data = self.data.iter().map(|&v| f64::from(v) / 255.0).collect();
        RgbImage::new(self.height, self.width, data).expect("shape already validated")
    }

    /// Maps codes back to linear units using the stored white level.
    pub fn dequantize(&self) -> RgbImage {
        self.normalized().scale(self.white_level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        assert!(RgbImage::new(2, 2, vec![0.0; 12]).is_ok());
        assert!(RgbImage::new(2, 2, vec![0.0; 11]).is_err());
        assert!(Rgb8Image::new(1, 1, vec![0; 3], 1.0).is_ok());
        assert!(Rgb8Image::new(1, 1, vec![0; 3], 0.0).is_err());
    }

    #[test]
    fn dequantize_maps_full_scale_to_white() {
        let img = Rgb8Image::new(1, 1, vec![0, 255, 51], 2.0).unwrap();
        let lin = img.dequantize();
        assert_eq!(lin.data(), &[0.0, 2.0, 0.4]);
    }
}
