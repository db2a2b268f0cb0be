//! Patch relocation. Only the largest top-left region tiled by whole
//! patches is permuted; any remainder strip stays where it is.

use crate::cube::HsiCube;
use crate::error::{Error, Result};
use crate::rgb::RgbImage;
use crate::rng::{salt, SplitMix};

pub const DEFAULT_PATCH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShuffleSpec {
    pub patch: usize,
    pub seed: u64,
    /// Output patch `i` is taken from input patch `permutation[i]`, patches
    /// numbered row-major over the tiled region. Derived from `seed` when
    /// absent.
    pub permutation: Option<Vec<usize>>,
}

impl ShuffleSpec {
    pub fn new(patch: usize, seed: u64) -> Self {
        ShuffleSpec {
            patch,
            seed,
            permutation: None,
        }
    }

    pub fn with_permutation(patch: usize, permutation: Vec<usize>) -> Self {
        ShuffleSpec {
            patch,
            seed: 0,
            permutation: Some(permutation),
        }
    }

    /// Patch grid (rows, cols) for an image of the given size.
    pub fn grid(&self, height: usize, width: usize) -> Result<(usize, usize)> {
        if self.patch == 0 {
            return Err(Error::invalid("patch size must be at least 1"));
        }
        if self.patch > height.min(width) {
            return Err(Error::invalid(format!(
                "patch {} larger than {height}x{width} image",
                self.patch
            )));
        }
        Ok((height / self.patch, width / self.patch))
    }

    /// Seeded Fisher-Yates permutation of `count` patches.
    pub fn seeded_permutation(seed: u64, count: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..count).collect();
        let mut rng = SplitMix::for_site(seed, salt::SHUFFLE, 0);
        for i in (1..count).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            perm.swap(i, j);
        }
        perm
    }

    /// A copy with the permutation filled in and checked for an image of
    /// this size.
    pub fn resolve(&self, height: usize, width: usize) -> Result<ShuffleSpec> {
        let (gr, gc) = self.grid(height, width)?;
        let count = gr * gc;
        let permutation = match &self.permutation {
            Some(p) => {
                if p.len() != count {
                    return Err(Error::invalid(format!(
                        "permutation has {} entries, image has {count} patches",
                        p.len()
                    )));
                }
                let mut seen = vec![false; count];
                for &i in p {
                    if i >= count || std::mem::replace(&mut seen[i], true) {
                        return Err(Error::invalid("permutation is not a bijection"));
                    }
                }
                p.clone()
            }
            None => Self::seeded_permutation(self.seed, count),
        };
        Ok(ShuffleSpec {
            patch: self.patch,
            seed: self.seed,
            permutation: Some(permutation),
        })
    }

    /// The spec that undoes this one. Requires a resolved permutation.
    pub fn inverse(&self) -> Result<ShuffleSpec> {
        let p = self
            .permutation
            .as_ref()
            .ok_or_else(|| Error::invalid("resolve the spec before inverting it"))?;
        let mut inv = vec![0; p.len()];
        for (i, &src) in p.iter().enumerate() {
            inv[src] = i;
        }
        Ok(ShuffleSpec {
            patch: self.patch,
            seed: self.seed,
            permutation: Some(inv),
        })
    }

    /// Source pixel index for every output pixel.
    fn pixel_map(&self, height: usize, width: usize) -> Vec<usize> {
        let perm = self.permutation.as_ref().expect("resolved");
        let p = self.patch;
        let gc = width / p;
        let (th, tw) = ((height / p) * p, gc * p);
        let mut map: Vec<usize> = (0..height * width).collect();
        for r in 0..th {
            for c in 0..tw {
                let src = perm[(r / p) * gc + c / p];
                let (sr, sc) = ((src / gc) * p + r % p, (src % gc) * p + c % p);
                map[r * width + c] = sr * width + sc;
            }
        }
        map
    }
}

/// Types whose pixels can be relocated.
pub trait Shuffle: Sized {
    fn shuffle_patches(&self, spec: &ShuffleSpec) -> Result<(Self, ShuffleSpec)>;
}

impl Shuffle for HsiCube {
    fn shuffle_patches(&self, spec: &ShuffleSpec) -> Result<(Self, ShuffleSpec)> {
        let spec = spec.resolve(self.height(), self.width())?;
        let map = spec.pixel_map(self.height(), self.width());
        let n = self.pixels();
        let mut data = Vec::with_capacity(self.data().len());
        for b in 0..self.bands() {
            let plane = self.band(b);
            data.extend(map.iter().map(|&s| plane[s]));
        }
        debug_assert_eq!(data.len(), n * self.bands());
        Ok((HsiCube::new(self.height(), self.width(), *self.grid(), data)?, spec))
    }
}

impl Shuffle for RgbImage {
    fn shuffle_patches(&self, spec: &ShuffleSpec) -> Result<(Self, ShuffleSpec)> {
        let spec = spec.resolve(self.height(), self.width())?;
        let map = spec.pixel_map(self.height(), self.width());
        let data = map.iter().flat_map(|&s| self.pixel(s)).collect();
        Ok((RgbImage::new(self.height(), self.width(), data)?, spec))
    }
}

pub fn shuffle_patches<T: Shuffle>(x: &T, spec: &ShuffleSpec) -> Result<(T, ShuffleSpec)> {
    x.shuffle_patches(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::WavelengthGrid;

    fn cube(h: usize, w: usize) -> HsiCube {
        let grid = WavelengthGrid::new(400.0, 10.0, 2).unwrap();
        HsiCube::from_fn(h, w, grid, |r, c, b| (b * 1000 + r * w + c) as f64).unwrap()
    }

    #[test]
    fn identity_override() {
        let x = cube(8, 8);
        let spec = ShuffleSpec::with_permutation(4, (0..4).collect());
        assert_eq!(x.shuffle_patches(&spec).unwrap().0, x);
    }

    #[test]
    fn remainder_strip_untouched_and_inverse_restores() {
        let x = cube(10, 9);
        let (y, spec) = x.shuffle_patches(&ShuffleSpec::new(4, 7)).unwrap();
        for r in 0..10 {
            for c in 0..9 {
                if r >= 8 || c >= 8 {
                    assert_eq!(x.get(r, c, 1), y.get(r, c, 1));
                }
            }
        }
        let mut a = x.data().to_vec();
        let mut b = y.data().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
        let (back, _) = y.shuffle_patches(&spec.inverse().unwrap()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn patches_move_whole() {
        let x = cube(8, 8);
        let spec = ShuffleSpec::with_permutation(4, vec![3, 2, 1, 0]);
        let (y, _) = x.shuffle_patches(&spec).unwrap();
        assert_eq!(y.get(0, 0, 0), x.get(4, 4, 0));
        assert_eq!(y.get(3, 3, 0), x.get(7, 7, 0));
        assert_eq!(y.get(0, 4, 1), x.get(4, 0, 1));
    }

    #[test]
    fn rejects_bad_specs() {
        let x = cube(4, 4);
        assert!(x.shuffle_patches(&ShuffleSpec::new(5, 0)).is_err());
        assert!(x.shuffle_patches(&ShuffleSpec::new(0, 0)).is_err());
        assert!(x.shuffle_patches(&ShuffleSpec::with_permutation(2, vec![0, 0, 1, 2])).is_err());
    }

    #[test]
    fn rgb_and_cube_share_permutation() {
        let x = cube(8, 8);
        let rgb = RgbImage::from_fn(8, 8, |r, c, ch| x.get(r, c, 0) + ch as f64).unwrap();
        let (xs, spec) = x.shuffle_patches(&ShuffleSpec::new(2, 3)).unwrap();
        let (rs, _) = rgb.shuffle_patches(&spec).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(rs.get(r, c, 0), xs.get(r, c, 0));
            }
        }
    }
}
