//! Classical reconstructors: pseudoinverse, ridge regression on RGB features,
//! and learned basis functions. All of them act on each pixel independently.

pub mod basis;
pub mod features;
pub mod linalg;
pub mod linear;
pub mod model_io;

pub use basis::{fit_basis, predict_basis, BasisFit, BasisModel, Objective, DEFAULT_BASIS_COUNT};
pub use features::FeatureOrder;
pub use linear::{fit_linear, predict_linear, pseudoinverse_estimate, pseudoinverse_matrix, LinearModel};
pub use model_io::{decode_model, encode_model, read_model, write_model};

use crate::cube::WavelengthGrid;
use crate::rgb::RgbImage;
use crate::HsiCube;

pub const DEFAULT_LAMBDA: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Basis(BasisModel),
}

impl Model {
    pub fn predict(&self, rgb: &RgbImage) -> HsiCube {
        match self {
            Model::Linear(m) => predict_linear(m, rgb),
            Model::Basis(m) => predict_basis(m, rgb),
        }
    }

    pub fn grid(&self) -> &WavelengthGrid {
        match self {
            Model::Linear(m) => &m.grid,
            Model::Basis(m) => &m.grid,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::Basis(_) => "basis",
        }
    }
}
