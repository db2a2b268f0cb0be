//! Auxiliary robustness evaluations.

pub mod shuffle;
pub mod suite;

pub use shuffle::{shuffle_patches, Shuffle, ShuffleSpec, DEFAULT_PATCH};
pub use suite::{
    run_aux_scene, run_aux_suite, run_aux_suite_manifest, AuxReport, AuxRow, AuxScene,
    PseudoInverse, Reconstructor, SuiteConfig, Track, TrackConfig, AUX_COLUMNS, AUX_HEADINGS,
};

use crate::cube::HsiCube;
use crate::error::Result;

/// `(cube × 0.5, cube × 2)`. Callers re-simulate RGB from these.
pub fn brightness_variants(cube: &HsiCube) -> Result<(HsiCube, HsiCube)> {
    Ok((cube.scale(0.5)?, cube.scale(2.0)?))
}
