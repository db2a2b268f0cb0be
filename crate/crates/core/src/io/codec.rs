//! 8-bit RGB codecs: lossless PNG and baseline JPEG.
//!
//! Decoding goes through `image`. JPEG encoding uses `jpeg-encoder`, which
//! exposes the chroma subsampling factor explicitly.

use std::path::Path;

use jpeg_encoder::{ColorType, Encoder, SamplingFactor};

use crate::error::{Error, Result};
use crate::rgb::Rgb8Image;

pub const DEFAULT_JPEG_QUALITY: u8 = 95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChromaSubsampling {
    #[default]
    #[serde(rename = "4:2:0")]
    Yuv420,
    #[serde(rename = "4:4:4")]
    Yuv444,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JpegSettings {
    /// 1 to 100.
    pub quality: u32,
    pub subsampling: ChromaSubsampling,
    /// Written into an APP segment when present; used for provenance.
    pub provenance: Option<Vec<u8>>,
}

impl Default for JpegSettings {
    fn default() -> Self {
        JpegSettings {
            quality: u32::from(DEFAULT_JPEG_QUALITY),
            subsampling: ChromaSubsampling::Yuv420,
            provenance: None,
        }
    }
}

impl JpegSettings {
    pub fn with_quality(quality: u32) -> Self {
        JpegSettings {
            quality,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=100).contains(&self.quality) {
            return Err(Error::invalid(format!(
                "jpeg quality must be in [1, 100], got {}",
                self.quality
            )));
        }
        Ok(())
    }
}

/// APP segment number used for provenance payloads.
const PROVENANCE_APP: u8 = 11;

pub fn encode_jpeg(img: &Rgb8Image, settings: &JpegSettings) -> Result<Vec<u8>> {
    settings.validate()?;
    let (w, h) = dims_u16(img)?;
    let mut out = Vec::new();
    let mut enc = Encoder::new(&mut out, settings.quality as u8);
    enc.set_sampling_factor(match settings.subsampling {
        ChromaSubsampling::Yuv420 => SamplingFactor::F_2_2,
        ChromaSubsampling::Yuv444 => SamplingFactor::F_1_1,
    });
    if let Some(payload) = &settings.provenance {
        enc.add_app_segment(PROVENANCE_APP, payload)
            .map_err(|e| Error::invalid(format!("provenance segment: {e}")))?;
    }
    enc.encode(img.data(), w, h, ColorType::Rgb)
        .map_err(|e| Error::Decode(format!("jpeg encode failed: {e}")))?;
    Ok(out)
}

pub fn encode_png(img: &Rgb8Image) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let enc = image::codecs::png::PngEncoder::new(&mut out);
    image::ImageEncoder::write_image(
        enc,
        img.data(),
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::Rgb8,
    )
    .map_err(|e| Error::Decode(format!("png encode failed: {e}")))?;
    Ok(out)
}

/// Decodes PNG or JPEG. The white level is unknown from the stream alone and
/// is set to 1.0; callers that know it should rebuild the image.
pub fn decode_rgb8(bytes: &[u8]) -> Result<Rgb8Image> {
    let format = image::guess_format(bytes)
        .map_err(|e| Error::Decode(format!("unrecognized image stream: {e}")))?;
    if !matches!(format, image::ImageFormat::Png | image::ImageFormat::Jpeg) {
        return Err(Error::Decode(format!("unsupported codec {format:?}")));
    }
    let mut reader = image::ImageReader::with_format(std::io::Cursor::new(bytes), format);
    let mut limits = image::Limits::default();
    limits.max_alloc = Some(256 * 1024 * 1024);
    reader.limits(limits);
    let decoded = reader
        .decode()
        .map_err(|e| Error::Decode(e.to_string()))?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    Rgb8Image::new(h as usize, w as usize, decoded.into_raw(), 1.0)
}

pub fn write_png(img: &Rgb8Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_png(img)?).map_err(|e| Error::io(path, e))
}

pub fn write_jpeg(img: &Rgb8Image, path: impl AsRef<Path>, quality: u32) -> Result<()> {
    write_jpeg_with(img, path, &JpegSettings::with_quality(quality))
}

pub fn write_jpeg_with(img: &Rgb8Image, path: impl AsRef<Path>, settings: &JpegSettings) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_jpeg(img, settings)?).map_err(|e| Error::io(path, e))
}

pub fn read_rgb8(path: impl AsRef<Path>) -> Result<Rgb8Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_rgb8(&bytes)
}

fn dims_u16(img: &Rgb8Image) -> Result<(u16, u16)> {
    let w = u16::try_from(img.width())
        .map_err(|_| Error::invalid(format!("jpeg width {} exceeds 65535", img.width())))?;
    let h = u16::try_from(img.height())
        .map_err(|_| Error::invalid(format!("jpeg height {} exceeds 65535", img.height())))?;
    Ok((w, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(h: usize, w: usize) -> Rgb8Image {
        let mut data = Vec::new();
        for r in 0..h {
            for c in 0..w {
                data.extend_from_slice(&[(r * 40) as u8, (c * 50) as u8, ((r + c) * 17) as u8]);
            }
        }
        Rgb8Image::new(h, w, data, 1.0).unwrap()
    }

    #[test]
    fn png_roundtrip_bit_exact() {
        let img = gradient(4, 4);
        assert_eq!(decode_rgb8(&encode_png(&img).unwrap()).unwrap(), img);
    }

    #[test]
    fn jpeg_constant_gray_within_two_codes() {
        let img = Rgb8Image::new(8, 8, vec![128; 8 * 8 * 3], 1.0).unwrap();
        let back = decode_rgb8(&encode_jpeg(&img, &JpegSettings::default()).unwrap()).unwrap();
        assert_eq!((back.height(), back.width()), (8, 8));
        let max_dev = img
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (i16::from(*a) - i16::from(*b)).abs())
            .max()
            .unwrap();
        assert!(max_dev <= 2, "max deviation {max_dev}");
    }

    #[test]
    fn jpeg_preserves_odd_dimensions() {
        let img = gradient(5, 7);
        let back = decode_rgb8(&encode_jpeg(&img, &JpegSettings::with_quality(80)).unwrap()).unwrap();
        assert_eq!((back.height(), back.width()), (5, 7));
    }

    #[test]
    fn quality_out_of_range() {
        let img = gradient(2, 2);
        for q in [0, 101] {
            let err = encode_jpeg(&img, &JpegSettings::with_quality(q)).unwrap_err();
            assert!(matches!(err, Error::InvalidArgument(_)));
        }
    }

    #[test]
    fn provenance_does_not_change_pixels() {
        let img = gradient(8, 8);
        let plain = encode_jpeg(&img, &JpegSettings::default()).unwrap();
        let tagged = JpegSettings {
            provenance: Some(b"config=abc".to_vec()),
            ..Default::default()
        };
        let tagged = encode_jpeg(&img, &tagged).unwrap();
        assert!(tagged.windows(10).any(|w| w == b"config=abc"));
        assert_eq!(decode_rgb8(&plain).unwrap(), decode_rgb8(&tagged).unwrap());
    }

    #[test]
    fn garbage_is_decode_error() {
        assert!(matches!(decode_rgb8(b"not an image"), Err(Error::Decode(_))));
        let mut png = encode_png(&gradient(4, 4)).unwrap();
        png.truncate(png.len() / 2);
        assert!(decode_rgb8(&png).is_err());
    }
}
