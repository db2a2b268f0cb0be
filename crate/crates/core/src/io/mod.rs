//! On-disk formats: cube and float-RGB containers, CSS tables, 8-bit image
//! codecs and scene manifests.

pub mod bhsc;
pub mod codec;
pub mod css_csv;
pub mod manifest;

pub use bhsc::{decode_cube, decode_rgb, encode_cube, encode_rgb, read_cube, read_rgb, write_cube, write_rgb};
pub use codec::{decode_rgb8, encode_jpeg, encode_png, read_rgb8, write_jpeg, write_png, ChromaSubsampling, JpegSettings};
pub use css_csv::{parse_css, read_css, write_css, write_css_string};
pub use manifest::{filter_by_tag, load_manifest, parse_manifest, Manifest, SceneRecord};
