//! Pseudo-polar Fourier transforms.
//!
//! For an image `I(u, v, w)` on the centered index cube `-n/2..n/2` the
//! trigonometric polynomial
//!
//! ```text
//! Î(ξ1, ξ2, ξ3) = Σ I(u, v, w)·exp(-(2πi/m)(ξ1·u + ξ2·v + ξ3·w)),   m = 3n + 1
//! ```
//!
//! is sampled on three sectors of concentric cube faces:
//!
//! ```text
//! PP1(k, l, j) = Î(k, -2lk/n, -2jk/n)
//! PP2(k, l, j) = Î(-2lk/n, k, -2jk/n)
//! PP3(k, l, j) = Î(-2lk/n, -2jk/n, k)
//! ```
//!
//! with `k ∈ -3n/2..=3n/2` and `l, j ∈ -n/2..=n/2`. Each sector is stored as
//! an `(3n+1) × (n+1) × (n+1)` array indexed `[k + 3n/2, l + n/2, j + n/2]`.
//! In sector `i`, `l` pairs with the lower-numbered of the two remaining axes.
//!
//! The 2D transform uses `m = 2n + 1`, `k ∈ -n..=n` and
//! `PP1(k, l) = Î(-2lk/n, k)`, `PP2(k, l) = Î(k, -2lk/n)`, so that sector 1
//! matches the basically-horizontal line family of the 2D discrete Radon
//! transform.
//!
//! Evaluation is exact: a zero-padded DFT along the sector's main axis,
//! followed by chirp-z sweeps with factor `2k/n` along the remaining axes
//! and a reversal of the slope indices.

use ndarray::{s, Array2, Array3, ArrayView2, ArrayView3, ArrayViewMut2, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::spectral::{CenteredDft, ChirpZ, Workspace};
use crate::volume::{check_even_cube, check_finite};
use crate::{Error, Result};

/// One point of the 3D pseudo-polar grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    /// Sector 1, 2 or 3.
    pub sector: usize,
    pub k: i64,
    pub l: i64,
    pub j: i64,
    pub xi: [f64; 3],
}

/// Frequency coordinates `(ξ1, ξ2, ξ3)` of grid point `(k, l, j)` in `sector`.
pub fn sector_frequency(sector: usize, n: usize, k: i64, l: i64, j: i64) -> [f64; 3] {
    let k_f = k as f64;
    let a = -2.0 * l as f64 * k_f / n as f64;
    let b = -2.0 * j as f64 * k_f / n as f64;
    match sector {
        1 => [k_f, a, b],
        2 => [a, k_f, b],
        3 => [a, b, k_f],
        _ => panic!("sector must be 1, 2 or 3"),
    }
}

/// All `(3n+1)·(n+1)²` points of one sector of the 3D pseudo-polar grid.
pub fn grid_points(n: usize, sector: usize) -> Result<Vec<GridPoint>> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddSize(n));
    }
    if !(1..=3).contains(&sector) {
        return Err(Error::InvalidParameter(format!("sector {sector} not in 1..=3")));
    }
    let half = (n / 2) as i64;
    let mut points = Vec::with_capacity((3 * n + 1) * (n + 1) * (n + 1));
    for k in -3 * half..=3 * half {
        for l in -half..=half {
            for j in -half..=half {
                points.push(GridPoint {
                    sector,
                    k,
                    l,
                    j,
                    xi: sector_frequency(sector, n, k, l, j),
                });
            }
        }
    }
    Ok(points)
}

/// The three sectors of a 3D pseudo-polar Fourier transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Ppft3 {
    pub n: usize,
    pub sectors: [Array3<Complex64>; 3],
}

impl Ppft3 {
    /// Value at signed indices `(k, l, j)` of sector `1..=3`.
    pub fn get(&self, sector: usize, k: i64, l: i64, j: i64) -> Complex64 {
        let half = (self.n / 2) as i64;
        self.sectors[sector - 1][[(k + 3 * half) as usize, (l + half) as usize, (j + half) as usize]]
    }
}

/// The two sectors of a 2D pseudo-polar Fourier transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Ppft2 {
    pub n: usize,
    pub sectors: [Array2<Complex64>; 2],
}

impl Ppft2 {
    pub fn get(&self, sector: usize, k: i64, l: i64) -> Complex64 {
        let half = (self.n / 2) as i64;
        self.sectors[sector - 1][[(k + 2 * half) as usize, (l + half) as usize]]
    }
}

/// 3D pseudo-polar Fourier transform of a real `n³` volume (`n` even).
pub fn ppft3(volume: ArrayView3<'_, f64>) -> Result<Ppft3> {
    let n = check_even_cube(volume.shape())?;
    check_finite(volume.iter())?;
    let mut planner = FftPlanner::new();
    let sectors = [0, 1, 2].map(|axis| ppft3_sector(volume, axis, &mut planner));
    Ok(Ppft3 { n, sectors })
}

/// 2D pseudo-polar Fourier transform of a real `n²` image (`n` even).
pub fn ppft2(image: ArrayView2<'_, f64>) -> Result<Ppft2> {
    let n = check_even_cube(image.shape())?;
    check_finite(image.iter())?;
    let mut planner = FftPlanner::new();
    // sector 1 has its radial index on the v axis
    let sectors = [image.t(), image].map(|oriented| ppft2_sector(oriented, &mut planner));
    Ok(Ppft2 { n, sectors })
}

/// Sector whose radial index runs along `main_axis` of `volume`.
fn ppft3_sector(
    volume: ArrayView3<'_, f64>,
    main_axis: usize,
    planner: &mut FftPlanner<f64>,
) -> Array3<Complex64> {
    let n = volume.dim().0;
    let m = 3 * n + 1;
    let mut order = vec![main_axis];
    order.extend((0..3).filter(|&a| a != main_axis));
    let oriented = volume.permuted_axes([order[0], order[1], order[2]]);

    // DFT along the main axis, padded to m; the two slope axes padded to n + 1
    let dft = CenteredDft::new(planner, m);
    let mut ws = Workspace::default();
    let mut out = Array3::<Complex64>::zeros((m, n + 1, n + 1));
    let mut line = vec![Complex64::default(); n];
    let mut spectrum = vec![Complex64::default(); m];
    for b in 0..n {
        for c in 0..n {
            for (dst, &x) in line.iter_mut().zip(oriented.slice(s![.., b, c])) {
                *dst = Complex64::new(x, 0.0);
            }
            dft.forward(&line, &mut spectrum, &mut ws);
            for (k, &y) in spectrum.iter().enumerate() {
                out[[k, b, c]] = y;
            }
        }
    }

    let half = (n / 2) as f64;
    for (k_slot, mut plane) in out.axis_iter_mut(Axis(0)).enumerate() {
        let k = k_slot as f64 - 1.5 * n as f64;
        let plan = ChirpZ::new(planner, n + 1, n + 1, 2.0 * k / (n as f64 * m as f64), -half, -half);
        // the sweeps sample Î at +2lk/n; reversing l and j gives -2lk/n
        sweep_plane(&mut plane, &plan, &mut ws, true);
    }
    out
}

fn ppft2_sector(image: ArrayView2<'_, f64>, planner: &mut FftPlanner<f64>) -> Array2<Complex64> {
    let n = image.dim().0;
    let m = 2 * n + 1;
    let dft = CenteredDft::new(planner, m);
    let mut ws = Workspace::default();
    let mut out = Array2::<Complex64>::zeros((m, n + 1));
    let mut line = vec![Complex64::default(); n];
    let mut spectrum = vec![Complex64::default(); m];
    for b in 0..n {
        for (dst, &x) in line.iter_mut().zip(image.column(b)) {
            *dst = Complex64::new(x, 0.0);
        }
        dft.forward(&line, &mut spectrum, &mut ws);
        for (k, &y) in spectrum.iter().enumerate() {
            out[[k, b]] = y;
        }
    }

    let half = (n / 2) as f64;
    let mut row = vec![Complex64::default(); n + 1];
    let mut swept = vec![Complex64::default(); n + 1];
    for (k_slot, mut lane) in out.axis_iter_mut(Axis(0)).enumerate() {
        let k = k_slot as f64 - n as f64;
        let plan = ChirpZ::new(planner, n + 1, n + 1, 2.0 * k / (n as f64 * m as f64), -half, -half);
        row.iter_mut().zip(lane.iter()).for_each(|(d, &s)| *d = s);
        plan.process(&row, &mut swept, &mut ws);
        lane.iter_mut().zip(swept.iter().rev()).for_each(|(d, &s)| *d = s);
    }
    out
}

/// Applies `plan` along both axes of a square plane, in place, optionally
/// reversing each output lane.
pub(crate) fn sweep_plane(
    plane: &mut ArrayViewMut2<'_, Complex64>,
    plan: &ChirpZ,
    ws: &mut Workspace,
    reverse: bool,
) {
    let len = plan.input_len();
    let mut line = vec![Complex64::default(); len];
    let mut swept = vec![Complex64::default(); len];
    for axis in [Axis(0), Axis(1)] {
        for mut lane in plane.lanes_mut(axis) {
            line.iter_mut().zip(lane.iter()).for_each(|(d, &s)| *d = s);
            plan.process(&line, &mut swept, ws);
            if reverse {
                swept.reverse();
            }
            lane.iter_mut().zip(&swept).for_each(|(d, &s)| *d = s);
        }
    }
}
