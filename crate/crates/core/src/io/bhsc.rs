//! Flat binary containers for spectral cubes (`BHSC`) and linear RGB (`BRGB`).
//!
//! `BHSC` layout, all integers and floats little-endian:
//!
//! ```text
//! magic   "BHSC"
//! version u16      1 = f32 samples, 2 = f64 samples
//! height  u32
//! width   u32
//! bands   u16
//! grid    v1: bands x f32 wavelengths (nm)
//!         v2: start_nm f64, step_nm f64
//! samples height x width x bands, band-sequential, row-major per band
//! ```
//!
//! The writer emits version 1 when every sample is exactly representable as
//! `f32` and the grid survives the f32 wavelength list, and version 2
//! otherwise, so `read(write(c)) == c` bit for bit.
//!
//! `BRGB` is `magic "BRGB", version u16 = 1, height u32, width u32`, then
//! interleaved f64 RGB samples.

use std::path::Path;

use crate::cube::{HsiCube, WavelengthGrid};
use crate::error::{Error, Result};
use crate::rgb::RgbImage;

pub const CUBE_MAGIC: &[u8; 4] = b"BHSC";
pub const RGB_MAGIC: &[u8; 4] = b"BRGB";
pub const CUBE_VERSION_F32: u16 = 1;
pub const CUBE_VERSION_F64: u16 = 2;
pub const RGB_VERSION: u16 = 1;

const CUBE_HEADER_LEN: usize = 4 + 2 + 4 + 4 + 2;

/// Relative tolerance on wavelength spacing when rebuilding the grid.
const GRID_SPACING_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    F32,
    F64,
}

impl SampleFormat {
    /// The narrowest format that stores `cube` exactly, grid included.
    pub fn lossless_for(cube: &HsiCube) -> Self {
        let exact = cube
            .data()
            .iter()
            .all(|&v| f64::from(v as f32).to_bits() == v.to_bits());
        if exact && grid_survives_f32(cube.grid()) {
            SampleFormat::F32
        } else {
            SampleFormat::F64
        }
    }
}

fn f32_wavelengths(grid: &WavelengthGrid) -> Vec<f64> {
    grid.wavelengths().map(|w| f64::from(w as f32)).collect()
}

fn grid_survives_f32(grid: &WavelengthGrid) -> bool {
    grid_from_wavelengths(&f32_wavelengths(grid)).is_ok_and(|g| {
        g.bands == grid.bands
            && g.start_nm.to_bits() == grid.start_nm.to_bits()
            && g.step_nm.to_bits() == grid.step_nm.to_bits()
    })
}

pub fn encode_cube(cube: &HsiCube) -> Result<Vec<u8>> {
    encode_cube_as(cube, SampleFormat::lossless_for(cube))
}

/// Encodes with an explicit sample format. `F32` rounds samples and
/// wavelengths that are not representable.
pub fn encode_cube_as(cube: &HsiCube, format: SampleFormat) -> Result<Vec<u8>> {
    let height = u32::try_from(cube.height())
        .map_err(|_| Error::format("height", "does not fit in u32"))?;
    let width =
        u32::try_from(cube.width()).map_err(|_| Error::format("width", "does not fit in u32"))?;
    let bands =
        u16::try_from(cube.bands()).map_err(|_| Error::format("bands", "does not fit in u16"))?;
    let sample_size = match format {
        SampleFormat::F32 => 4,
        SampleFormat::F64 => 8,
    };
    let mut out =
        Vec::with_capacity(CUBE_HEADER_LEN + 4 * cube.bands() + sample_size * cube.data().len());
    out.extend_from_slice(CUBE_MAGIC);
    let version = match format {
        SampleFormat::F32 => CUBE_VERSION_F32,
        SampleFormat::F64 => CUBE_VERSION_F64,
    };
    out.extend_from_slice(&version.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&bands.to_le_bytes());
    match format {
        SampleFormat::F32 => {
            for wl in cube.grid().wavelengths() {
                out.extend_from_slice(&(wl as f32).to_le_bytes());
            }
            for &v in cube.data() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        SampleFormat::F64 => {
            out.extend_from_slice(&cube.grid().start_nm.to_le_bytes());
            out.extend_from_slice(&cube.grid().step_nm.to_le_bytes());
            for &v in cube.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                Error::format(
                    field,
                    format!(
                        "truncated: need {n} bytes at offset {}, file has {}",
                        self.pos,
                        self.buf.len()
                    ),
                )
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self, field: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, field)?.try_into().unwrap()))
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()))
    }

    fn f64(&mut self, field: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

pub fn decode_cube(bytes: &[u8]) -> Result<HsiCube> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    if cur.take(4, "magic")? != CUBE_MAGIC {
        return Err(Error::format("magic", "bad magic"));
    }
    let version = cur.u16("version")?;
    let sample_size = match version {
        CUBE_VERSION_F32 => 4usize,
        CUBE_VERSION_F64 => 8,
        v => return Err(Error::format("version", format!("unsupported version {v}"))),
    };
    let height = cur.u32("height")? as usize;
    let width = cur.u32("width")? as usize;
    let bands = cur.u16("bands")? as usize;
    for (name, v) in [("height", height), ("width", width), ("bands", bands)] {
        if v == 0 {
            return Err(Error::format(name, "must be nonzero"));
        }
    }
    let samples = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(bands))
        .ok_or_else(|| Error::format("height", "dimension overflow"))?;
    let payload = samples
        .checked_mul(sample_size)
        .ok_or_else(|| Error::format("samples", "dimension overflow"))?;

    let grid = if version == CUBE_VERSION_F32 {
        let wavelengths: Vec<f64> = cur
            .take(4 * bands, "wavelengths")?
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        grid_from_wavelengths(&wavelengths)?
    } else {
        let start = cur.f64("start_nm")?;
        let step = cur.f64("step_nm")?;
        WavelengthGrid::new(start, step, bands).map_err(|e| Error::format("grid", e.to_string()))?
    };

    if cur.remaining() < payload {
        return Err(Error::format(
            "samples",
            format!(
                "truncated: header declares {samples} samples ({payload} bytes), file has {}",
                cur.remaining()
            ),
        ));
    }
    let raw = cur.take(payload, "samples")?;
    if cur.remaining() != 0 {
        return Err(Error::format(
            "samples",
            format!("{} trailing bytes after sample data", cur.remaining()),
        ));
    }
    let data: Vec<f64> = if sample_size == 4 {
        raw.chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect()
    } else {
        raw.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect()
    };
    HsiCube::new(height, width, grid, data)
}

/// Rebuilds a uniform grid from stored band centres. A single band gets the
/// default 10 nm step since spacing cannot be recovered.
pub fn grid_from_wavelengths(wl: &[f64]) -> Result<WavelengthGrid> {
    if wl.is_empty() {
        return Err(Error::format("wavelengths", "no bands"));
    }
    if wl.iter().any(|w| !w.is_finite()) {
        return Err(Error::format("wavelengths", "non-finite wavelength"));
    }
    let start = wl[0];
    if wl.len() == 1 {
        return WavelengthGrid::new(start, WavelengthGrid::default().step_nm, 1)
            .map_err(|e| Error::format("wavelengths", e.to_string()));
    }
    if wl.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::format("wavelengths", "not strictly increasing"));
    }
    let n = wl.len();
    let step = (wl[n - 1] - start) / (n - 1) as f64;
    for (i, &w) in wl.iter().enumerate() {
        let expected = start + i as f64 * step;
        if (w - expected).abs() > GRID_SPACING_TOLERANCE * step + f64::from(f32::EPSILON) * w.abs()
        {
            return Err(Error::format(
                "wavelengths",
                format!("non-uniform spacing at band {i}: {w} vs {expected}"),
            ));
        }
    }
    WavelengthGrid::new(start, step, n).map_err(|e| Error::format("wavelengths", e.to_string()))
}

pub fn write_cube(cube: &HsiCube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_cube(cube)?).map_err(|e| Error::io(path, e))
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<HsiCube> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_cube(&bytes)
}

pub fn encode_rgb(img: &RgbImage) -> Result<Vec<u8>> {
    let height =
        u32::try_from(img.height()).map_err(|_| Error::format("height", "does not fit in u32"))?;
    let width =
        u32::try_from(img.width()).map_err(|_| Error::format("width", "does not fit in u32"))?;
    let mut out = Vec::with_capacity(14 + 8 * img.data().len());
    out.extend_from_slice(RGB_MAGIC);
    out.extend_from_slice(&RGB_VERSION.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    out.extend_from_slice(&width.to_le_bytes());
    for &v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_rgb(bytes: &[u8]) -> Result<RgbImage> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    if cur.take(4, "magic")? != RGB_MAGIC {
        return Err(Error::format("magic", "bad magic"));
    }
    let version = cur.u16("version")?;
    if version != RGB_VERSION {
        return Err(Error::format("version", format!("unsupported version {version}")));
    }
    let height = cur.u32("height")? as usize;
    let width = cur.u32("width")? as usize;
    if height == 0 || width == 0 {
        return Err(Error::format("height", "dimensions must be nonzero"));
    }
    let payload = height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(3 * 8))
        .ok_or_else(|| Error::format("height", "dimension overflow"))?;
    if cur.remaining() != payload {
        let what = if cur.remaining() < payload { "truncated" } else { "trailing bytes" };
        return Err(Error::format(
            "samples",
            format!("{what}: expected {payload} bytes, found {}", cur.remaining()),
        ));
    }
    let data = cur
        .take(payload, "samples")?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    RgbImage::new(height, width, data)
}

pub fn write_rgb(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_rgb(img)?).map_err(|e| Error::io(path, e))
}

pub fn read_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_rgb(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(h: usize, w: usize) -> HsiCube {
        HsiCube::from_fn(h, w, WavelengthGrid::default(), |r, c, b| {
            (r * 7 + c * 3 + b) as f64 * 0.125
        })
        .unwrap()
    }

    fn field_of(e: Error) -> String {
        match e {
            Error::Format { field, message } => format!("{field}: {message}"),
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn f32_exact_cube_uses_version_1() {
        let c = cube(2, 2);
        let bytes = encode_cube(&c).unwrap();
        assert_eq!(&bytes[0..4], b"BHSC");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(bytes.len(), CUBE_HEADER_LEN + 31 * 4 + 2 * 2 * 31 * 4);
        assert_eq!(decode_cube(&bytes).unwrap(), c);
    }

    #[test]
    fn f64_cube_uses_version_2() {
        let c = cube(2, 2).map(|v| v + 0.1);
        let bytes = encode_cube(&c).unwrap();
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 2);
        let back = decode_cube(&bytes).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn inexact_grid_uses_version_2() {
        let g = WavelengthGrid::new(400.1, 0.7, 5).unwrap();
        let c = HsiCube::from_fn(2, 3, g, |r, c, b| (r + c + b) as f64).unwrap();
        let bytes = encode_cube(&c).unwrap();
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 2);
        assert_eq!(bytes.len(), CUBE_HEADER_LEN + 16 + 2 * 3 * 5 * 8);
        assert_eq!(decode_cube(&bytes).unwrap(), c);

        let one = HsiCube::from_fn(1, 1, WavelengthGrid::new(500.0, 3.0, 1).unwrap(), |_, _, _| 1.0).unwrap();
        assert_eq!(decode_cube(&encode_cube(&one).unwrap()).unwrap(), one);
    }

    #[test]
    fn header_fields_little_endian() {
        let c = cube(3, 5);
        let bytes = encode_cube(&c).unwrap();
        assert_eq!(&bytes[6..10], &3u32.to_le_bytes());
        assert_eq!(&bytes[10..14], &5u32.to_le_bytes());
        assert_eq!(&bytes[14..16], &31u16.to_le_bytes());
        assert_eq!(&bytes[16..20], &400.0f32.to_le_bytes());
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode_cube(&cube(2, 2)).unwrap();
        bytes[0] = b'X';
        let msg = field_of(decode_cube(&bytes).unwrap_err());
        assert!(msg.contains("bad magic"), "{msg}");
    }

    #[test]
    fn truncated_samples() {
        let bytes = encode_cube(&cube(2, 2)).unwrap();
        let msg = field_of(decode_cube(&bytes[..bytes.len() - 1]).unwrap_err());
        assert!(msg.starts_with("samples") && msg.contains("truncated"), "{msg}");
    }

    #[test]
    fn overflowing_dimensions() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"BHSC");
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&u32::MAX.to_le_bytes());
        bytes.extend_from_slice(&u32::MAX.to_le_bytes());
        bytes.extend_from_slice(&u16::MAX.to_le_bytes());
        let err = decode_cube(&bytes).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = encode_cube(&cube(2, 2)).unwrap();
        bytes.push(0);
        assert!(decode_cube(&bytes).is_err());
    }

    #[test]
    fn non_uniform_wavelengths_rejected() {
        assert!(grid_from_wavelengths(&[400.0, 410.0, 430.0]).is_err());
        assert!(grid_from_wavelengths(&[400.0, 400.0]).is_err());
        let g = grid_from_wavelengths(&[400.0, 410.0, 420.0]).unwrap();
        assert_eq!((g.start_nm, g.step_nm, g.bands), (400.0, 10.0, 3));
    }

    #[test]
    fn rgb_roundtrip_and_errors() {
        let img = RgbImage::from_fn(3, 2, |r, c, ch| (r + c) as f64 * 0.1 + ch as f64).unwrap();
        let bytes = encode_rgb(&img).unwrap();
        assert_eq!(decode_rgb(&bytes).unwrap(), img);
        assert!(decode_rgb(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[1] = 0;
        assert!(decode_rgb(&bad).is_err());
    }
}
