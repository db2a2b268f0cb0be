//! Per-pixel RGB feature vectors. There is no constant term, so order 1
//! features are positively homogeneous in the input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum FeatureOrder {
    /// `[r, g, b]`
    Linear,
    /// `[r, g, b, r², g², b², rg, rb, gb]`
    Quadratic,
}

impl FeatureOrder {
    pub fn from_order(order: u8) -> Result<Self> {
        match order {
            1 => Ok(FeatureOrder::Linear),
            2 => Ok(FeatureOrder::Quadratic),
            other => Err(Error::invalid(format!("feature order must be 1 or 2, got {other}"))),
        }
    }

    pub fn order(self) -> u8 {
        match self {
            FeatureOrder::Linear => 1,
            FeatureOrder::Quadratic => 2,
        }
    }

    pub fn len(self) -> usize {
        match self {
            FeatureOrder::Linear => 3,
            FeatureOrder::Quadratic => 9,
        }
    }

    /// Writes the features of one pixel into `out[..self.len()]`.
    #[inline]
    pub fn fill(self, rgb: [f64; 3], out: &mut [f64]) {
        let [r, g, b] = rgb;
        out[..3].copy_from_slice(&rgb);
        if self == FeatureOrder::Quadratic {
            out[3] = r * r;
            out[4] = g * g;
            out[5] = b * b;
            out[6] = r * g;
            out[7] = r * b;
            out[8] = g * b;
        }
    }

    pub fn features(self, rgb: [f64; 3]) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        self.fill(rgb, &mut v);
        v
    }
}

impl TryFrom<u8> for FeatureOrder {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        FeatureOrder::from_order(v)
    }
}

impl From<FeatureOrder> for u8 {
    fn from(o: FeatureOrder) -> u8 {
        o.order()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_layout() {
        let f = FeatureOrder::Quadratic.features([2.0, 3.0, 5.0]);
        assert_eq!(f, vec![2.0, 3.0, 5.0, 4.0, 9.0, 25.0, 6.0, 10.0, 15.0]);
        assert_eq!(FeatureOrder::Linear.features([2.0, 3.0, 5.0]), vec![2.0, 3.0, 5.0]);
        assert!(FeatureOrder::from_order(3).is_err());
    }
}
