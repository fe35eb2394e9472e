use ndarray::{Array3, ArrayView3};

use crate::{Error, Result};

/// Cubic volume of `n³` samples. Sample `[a, b, c]` sits at the physical
/// position `((a - n/2)·h, (b - n/2)·h, (c - n/2)·h)` with `h` the voxel size,
/// so the index origin of the centered range `-n/2..n/2` is the rotation
/// center.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    pub data: Array3<f64>,
    /// Voxel size in mm.
    pub voxel_size: f64,
}

impl Volume {
    pub fn new(data: Array3<f64>, voxel_size: f64) -> Result<Self> {
        let (a, b, c) = data.dim();
        if a != b || b != c {
            return Err(Error::ShapeMismatch {
                expected: vec![a, a, a],
                actual: vec![a, b, c],
            });
        }
        Ok(Self { data, voxel_size })
    }

    pub fn zeros(n: usize, voxel_size: f64) -> Self {
        Self {
            data: Array3::zeros((n, n, n)),
            voxel_size,
        }
    }

    pub fn n(&self) -> usize {
        self.data.dim().0
    }

    pub fn view(&self) -> ArrayView3<'_, f64> {
        self.data.view()
    }

    /// Physical coordinate of index `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.n() / 2) as f64) * self.voxel_size
    }
}

pub(crate) fn check_even_cube(dim: &[usize]) -> Result<usize> {
    let n = dim[0];
    if dim.iter().any(|&d| d != n) {
        return Err(Error::ShapeMismatch {
            expected: vec![n; dim.len()],
            actual: dim.to_vec(),
        });
    }
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddSize(n));
    }
    Ok(n)
}

pub(crate) fn check_finite<'a>(values: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}
