//! RGGB mosaicing and bilinear demosaicing.

use crate::error::{Error, Result};
use crate::rgb::RgbImage;

/// Channel index sampled at `(row, col)` of an RGGB tiling: 0=R, 1=G, 2=B.
#[inline]
pub fn rggb_channel(row: usize, col: usize) -> usize {
    [0, 1, 1, 2][((row & 1) << 1) | (col & 1)]
}

/// Single-plane sensor samples on a fixed RGGB tiling.
#[derive(Debug, Clone, PartialEq)]
pub struct BayerMosaic {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl BayerMosaic {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || !height.is_multiple_of(2) || !width.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "mosaic dimensions must be even and nonzero, got {height}x{width}"
            )));
        }
        if data.len() != height * width {
            return Err(Error::invalid(format!(
                "mosaic data length {} does not match {height}x{width}",
                data.len()
            )));
        }
        Ok(BayerMosaic {
            height,
            width,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Sample at a signed position with reflect-101 borders. Reflection about
    /// the edge sample keeps the Bayer parity of the mirrored site.
    #[inline]
    fn reflected(&self, row: isize, col: isize) -> f64 {
        self.get(reflect101(row, self.height), reflect101(col, self.width))
    }
}

#[inline]
pub(crate) fn reflect101(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if n == 1 {
        return 0;
    }
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

/// Keeps, at every site, only the channel the RGGB tiling dictates.
pub fn mosaic_rggb(rgb: &RgbImage) -> Result<BayerMosaic> {
    let (h, w) = (rgb.height(), rgb.width());
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::invalid(format!(
            "mosaicing needs even dimensions, got {h}x{w}"
        )));
    }
    let mut data = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            data.push(rgb.get(r, c, rggb_channel(r, c)));
        }
    }
    BayerMosaic::new(h, w, data)
}

/// Bilinear demosaicing: each missing channel is the mean of the nearest
/// same-channel sites (2 or 4 of them). Borders use reflect-101.
pub fn demosaic_bilinear(m: &BayerMosaic) -> RgbImage {
    let (h, w) = (m.height(), m.width());
    let mut out = Vec::with_capacity(h * w * 3);
    for r in 0..h {
        let ri = r as isize;
        for c in 0..w {
            let ci = c as isize;
            let at = |dr: isize, dc: isize| m.reflected(ri + dr, ci + dc);
            let own = m.get(r, c);
            // Pairwise sums keep the mean of equal samples exact.
            let cross = || ((at(-1, 0) + at(1, 0)) + (at(0, -1) + at(0, 1))) * 0.25;
            let diag = || ((at(-1, -1) + at(1, 1)) + (at(-1, 1) + at(1, -1))) * 0.25;
            let horiz = || (at(0, -1) + at(0, 1)) * 0.5;
            let vert = || (at(-1, 0) + at(1, 0)) * 0.5;
            let px = match (r & 1, c & 1) {
                (0, 0) => [own, cross(), diag()],
                (1, 1) => [diag(), cross(), own],
                // green on a red row
                (0, 1) => [horiz(), own, vert()],
                // green on a blue row
                _ => [vert(), own, horiz()],
            };
            out.extend_from_slice(&px);
        }
    }
    RgbImage::new(h, w, out).expect("dimensions come from a valid mosaic")
}
