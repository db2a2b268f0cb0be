//! Spectral reconstruction benchmarking: spectral cubes, camera simulation,
//! evaluation metrics, robustness protocols and classical reconstructors.
//!
//! ```
//! use specbench::{camera, metrics, recon, CameraResponse, HsiCube, WavelengthGrid};
//!
//! let css = CameraResponse::default();
//! let cube = HsiCube::filled(4, 4, WavelengthGrid::default(), 0.5).unwrap();
//! let rgb = camera::project_clean(&cube, &css).unwrap();
//! let rec = recon::pseudoinverse_estimate(&css, &rgb).unwrap();
//! let cfg = metrics::MetricConfig::default();
//! assert!(metrics::physical_consistency(&rec, &css, &rgb, &cfg).unwrap() < 1e-10);
//! ```

pub mod camera;
pub mod css;
pub mod cube;
pub mod error;
pub mod io;
pub mod metrics;
pub mod recon;
pub mod report;
pub mod rgb;
pub mod rng;
pub mod robustness;
pub mod synth;

pub use css::CameraResponse;
pub use cube::{HsiCube, WavelengthGrid};
pub use error::{Error, Result};
pub use rgb::{Rgb8Image, RgbImage};
