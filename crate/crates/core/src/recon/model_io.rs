//! SBMD: fitted model container. All fields little-endian.
//!
//! ```text
//! magic     "SBMD"
//! version   u16   (1)
//! kind      u8    (1 = linear, 2 = basis)
//! order     u8    (feature order, 1 or 2)
//! bands     u32
//! features  u32   (must equal the order's feature count)
//! k         u32   (0 for linear models)
//! lambda    f64
//! start_nm  f64
//! step_nm   f64
//! payload   f64 × n
//!     linear: weights, bands × features
//!     basis:  basis, k × bands; then weight_map, k × features
//! ```

use std::path::Path;

use crate::cube::WavelengthGrid;
use crate::error::{Error, Result};
use crate::recon::basis::BasisModel;
use crate::recon::features::FeatureOrder;
use crate::recon::linear::LinearModel;
use crate::recon::Model;

pub const MODEL_MAGIC: &[u8; 4] = b"SBMD";
pub const MODEL_VERSION: u16 = 1;
const KIND_LINEAR: u8 = 1;
const KIND_BASIS: u8 = 2;
const HEADER_LEN: usize = 4 + 2 + 1 + 1 + 4 + 4 + 4 + 8 * 3;

pub fn encode_model(model: &Model) -> Vec<u8> {
    let (kind, order, grid, k, lambda, payload): (u8, FeatureOrder, WavelengthGrid, usize, f64, Vec<&[f64]>) = match model {
        Model::Linear(m) => (KIND_LINEAR, m.order, m.grid, 0, m.lambda, vec![&m.weights]),
        Model::Basis(m) => (KIND_BASIS, m.order, m.grid, m.k, m.lambda, vec![&m.basis, &m.weight_map]),
    };
    let n: usize = payload.iter().map(|p| p.len()).sum();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n);
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.push(kind);
    out.push(order.order());
    out.extend_from_slice(&(grid.bands as u32).to_le_bytes());
    out.extend_from_slice(&(order.len() as u32).to_le_bytes());
    out.extend_from_slice(&(k as u32).to_le_bytes());
    out.extend_from_slice(&lambda.to_le_bytes());
    out.extend_from_slice(&grid.start_nm.to_le_bytes());
    out.extend_from_slice(&grid.step_nm.to_le_bytes());
    for v in payload.into_iter().flatten() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::format(field, "truncated file"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, field: &str) -> Result<u8> {
        Ok(self.take(1, field)?[0])
    }

    fn u16(&mut self, field: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, field)?.try_into().unwrap()))
    }

    fn u32(&mut self, field: &str) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self, field: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }

    fn f64s(&mut self, count: usize, field: &str) -> Result<Vec<f64>> {
        let len = count
            .checked_mul(8)
            .ok_or_else(|| Error::format(field, "dimension overflow"))?;
        let raw = self.take(len, field)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<Model> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MODEL_MAGIC {
        return Err(Error::format("magic", "bad magic"));
    }
    let version = r.u16("version")?;
    if version != MODEL_VERSION {
        return Err(Error::format("version", format!("unsupported version {version}")));
    }
    let kind = r.u8("kind")?;
    let order = FeatureOrder::from_order(r.u8("order")?).map_err(|e| Error::format("order", e.to_string()))?;
    let bands = r.u32("bands")?;
    let features = r.u32("features")?;
    let k = r.u32("k")?;
    let lambda = r.f64("lambda")?;
    let start = r.f64("start_nm")?;
    let step = r.f64("step_nm")?;
    if features != order.len() {
        return Err(Error::format(
            "features",
            format!("order {} implies {} features, header says {features}", order.order(), order.len()),
        ));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::format("lambda", format!("invalid ridge lambda {lambda}")));
    }
    let grid = WavelengthGrid::new(start, step, bands).map_err(|e| Error::format("grid", e.to_string()))?;
    let overflow = || Error::format("payload", "dimension overflow");
    let model = match kind {
        KIND_LINEAR => {
            if k != 0 {
                return Err(Error::format("k", "linear model must have k = 0"));
            }
            let n = bands.checked_mul(features).ok_or_else(overflow)?;
            let weights = r.f64s(n, "weights")?;
            Model::Linear(
                LinearModel::new(order, grid, weights, lambda).map_err(|e| Error::format("weights", e.to_string()))?,
            )
        }
        KIND_BASIS => {
            if k == 0 || k > bands {
                return Err(Error::format("k", format!("basis count {k} outside [1, {bands}]")));
            }
            let basis = r.f64s(k.checked_mul(bands).ok_or_else(overflow)?, "basis")?;
            let map = r.f64s(k.checked_mul(features).ok_or_else(overflow)?, "weight_map")?;
            Model::Basis(
                BasisModel::new(order, grid, k, basis, map, lambda)
                    .map_err(|e| Error::format("payload", e.to_string()))?,
            )
        }
        other => return Err(Error::format("kind", format!("unknown model kind {other}"))),
    };
    if r.pos != bytes.len() {
        return Err(Error::format("payload", format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(model)
}

pub fn write_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
