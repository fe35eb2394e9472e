//! Discrete Radon transforms on linogram (slope/intercept) grids.
//!
//! The 2D transform of an `n²` image sums trigonometrically interpolated
//! samples along two line families, with `m = 2n + 1`:
//!
//! ```text
//! R1(q, p) = Σ_u Σ_v I(u, v)·D_m(q·u + p − v)      (v = q·u + p, basically horizontal)
//! R2(q, p) = Σ_u Σ_v I(u, v)·D_m(q·v + p − u)      (u = q·v + p, basically vertical)
//! ```
//!
//! The 3D transform of an `n³` volume sums over three plane families, with
//! `m = 3n + 1`:
//!
//! ```text
//! R1(q1, q2, p) = Σ I(u, v, w)·D_m(q1·v + q2·w + p − u)
//! R2(q1, q2, p) = Σ I(u, v, w)·D_m(q1·u + q2·w + p − v)
//! R3(q1, q2, p) = Σ I(u, v, w)·D_m(q1·u + q2·v + p − w)
//! ```
//!
//! Slopes are `q = 2l/n` for `l ∈ -n/2..=n/2`; intercepts `p` are integers in
//! index units. Each family is the centered inverse DFT along the radial
//! index of the matching pseudo-polar sector, which is how the fast
//! transforms are computed.

use nalgebra::{DMatrix, DVector};
use ndarray::{s, Array3, Array4, ArrayView2, ArrayView3, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::ppft::{ppft2, ppft3};
use crate::spectral::{dft_axis, dirichlet_kernel, truncate_centered, CenteredDft, Workspace};
use crate::volume::{check_even_cube, check_finite};
use crate::{Error, Result, Volume};

/// Largest side accepted by the brute-force oracles.
pub const ORACLE_MAX_N: usize = 16;

/// Slope `q = 2l/n` of slope index `l`.
pub fn slope(n: usize, l: i64) -> f64 {
    2.0 * l as f64 / n as f64
}

/// 2D discrete Radon transform, stored `[family, p + n, l + n/2]` with shape
/// `2 × (2n+1) × (n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Drt2 {
    pub n: usize,
    /// Pixel size of the transformed image in mm.
    pub du: f64,
    pub data: Array3<f64>,
}

impl Drt2 {
    pub fn zeros(n: usize, du: f64) -> Self {
        Self {
            n,
            du,
            data: Array3::zeros((2, 2 * n + 1, n + 1)),
        }
    }

    /// Value of family `1..=2` at intercept `p` and slope index `l`.
    pub fn get(&self, family: usize, p: i64, l: i64) -> f64 {
        let h = (self.n / 2) as i64;
        self.data[[family - 1, (p + 2 * h) as usize, (l + h) as usize]]
    }

    /// `(2n+1) × (n+1)` view of one family, indexed `[p + n, l + n/2]`.
    pub fn family(&self, family: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(Axis(0), family - 1)
    }
}

/// Pseudo-polar 3D Radon space, stored `[family, p + 3n/2, l + n/2, j + n/2]`
/// with shape `3 × (3n+1) × (n+1) × (n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonSpace4D {
    pub n: usize,
    /// Voxel size of the object in mm.
    pub du: f64,
    pub data: Array4<f64>,
}

impl RadonSpace4D {
    pub fn zeros(n: usize, du: f64) -> Self {
        Self {
            n,
            du,
            data: Array4::zeros((3, 3 * n + 1, n + 1, n + 1)),
        }
    }

    /// Wraps `data`, checking its shape against a side length `n`.
    pub fn new(data: Array4<f64>, du: f64) -> Result<Self> {
        let shape = data.shape().to_vec();
        let n = shape[2].saturating_sub(1);
        let expected = vec![3, 3 * n + 1, n + 1, n + 1];
        if shape != expected || n < 2 || !n.is_multiple_of(2) {
            return Err(Error::ShapeMismatch {
                expected,
                actual: shape,
            });
        }
        Ok(Self { n, du, data })
    }

    pub fn get(&self, family: usize, p: i64, l: i64, j: i64) -> f64 {
        let h = (self.n / 2) as i64;
        self.data[[family - 1, (p + 3 * h) as usize, (l + h) as usize, (j + h) as usize]]
    }

    /// `(3n+1) × (n+1) × (n+1)` view of one family.
    pub fn family(&self, family: usize) -> ArrayView3<'_, f64> {
        self.data.index_axis(Axis(0), family - 1)
    }
}

/// Fast 2D discrete Radon transform.
pub fn drt2(image: ArrayView2<'_, f64>, du: f64) -> Result<Drt2> {
    let pp = ppft2(image)?;
    let n = pp.n;
    let m = 2 * n + 1;
    let mut planner = FftPlanner::new();
    let dft = CenteredDft::new(&mut planner, m);
    let mut ws = Workspace::default();
    let mut out = Drt2::zeros(n, du);
    let mut line = vec![Complex64::default(); m];
    let mut radial = vec![Complex64::default(); m];
    for (f, sector) in pp.sectors.iter().enumerate() {
        for l in 0..=n {
            line.iter_mut().zip(sector.column(l)).for_each(|(d, &s)| *d = s);
            dft.inverse(&line, &mut radial, &mut ws);
            for (p, v) in radial.iter().enumerate() {
                out.data[[f, p, l]] = v.re;
            }
        }
    }
    Ok(out)
}

/// Fast 3D discrete Radon transform.
pub fn drt3(volume: ArrayView3<'_, f64>, du: f64) -> Result<RadonSpace4D> {
    let pp = ppft3(volume)?;
    let n = pp.n;
    let m = 3 * n + 1;
    let mut planner = FftPlanner::new();
    let dft = CenteredDft::new(&mut planner, m);
    let mut ws = Workspace::default();
    let mut out = RadonSpace4D::zeros(n, du);
    let mut line = vec![Complex64::default(); m];
    let mut radial = vec![Complex64::default(); m];
    for (f, sector) in pp.sectors.iter().enumerate() {
        for l in 0..=n {
            for j in 0..=n {
                line.iter_mut()
                    .zip(sector.slice(s![.., l, j]))
                    .for_each(|(d, &s)| *d = s);
                dft.inverse(&line, &mut radial, &mut ws);
                for (p, v) in radial.iter().enumerate() {
                    out.data[[f, p, l, j]] = v.re;
                }
            }
        }
    }
    Ok(out)
}

fn check_oracle_size(n: usize) -> Result<()> {
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge {
            n,
            max: ORACLE_MAX_N,
        });
    }
    Ok(())
}

/// Literal evaluation of the 2D line sums. Limited to `n ≤ 16`.
pub fn brute_force_drt2(image: ArrayView2<'_, f64>, du: f64) -> Result<Drt2> {
    let n = check_even_cube(image.shape())?;
    check_oracle_size(n)?;
    check_finite(image.iter())?;
    let m = 2 * n + 1;
    let h = (n / 2) as i64;
    let mut out = Drt2::zeros(n, du);
    for f in 0..2 {
        for l in -h..=h {
            let q = slope(n, l);
            for p in -2 * h..=2 * h {
                let mut acc = 0.0;
                for ((a, b), &x) in image.indexed_iter() {
                    let (u, v) = (a as f64 - h as f64, b as f64 - h as f64);
                    let arg = if f == 0 { q * u + p as f64 - v } else { q * v + p as f64 - u };
                    acc += x * dirichlet_kernel(arg, m);
                }
                out.data[[f, (p + 2 * h) as usize, (l + h) as usize]] = acc;
            }
        }
    }
    Ok(out)
}

/// Literal evaluation of the 3D plane sums. Limited to `n ≤ 16`.
pub fn brute_force_drt3(volume: ArrayView3<'_, f64>, du: f64) -> Result<RadonSpace4D> {
    let n = check_even_cube(volume.shape())?;
    check_oracle_size(n)?;
    check_finite(volume.iter())?;
    let m = 3 * n + 1;
    let h = (n / 2) as i64;
    let mut out = RadonSpace4D::zeros(n, du);
    for f in 0..3 {
        for l in -h..=h {
            let q1 = slope(n, l);
            for j in -h..=h {
                let q2 = slope(n, j);
                for p in -3 * h..=3 * h {
                    let mut acc = 0.0;
                    for ((a, b, c), &x) in volume.indexed_iter() {
                        let x3 = [a as f64 - h as f64, b as f64 - h as f64, c as f64 - h as f64];
                        // main axis f, remaining axes in increasing order
                        let (main, lo, hi) = match f {
                            0 => (x3[0], x3[1], x3[2]),
                            1 => (x3[1], x3[0], x3[2]),
                            _ => (x3[2], x3[0], x3[1]),
                        };
                        acc += x * dirichlet_kernel(q1 * lo + q2 * hi + p as f64 - main, m);
                    }
                    out.data[[f, (p + 3 * h) as usize, (l + h) as usize, (j + h) as usize]] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Inverse 3D discrete Radon transform.
///
/// The radial DFT of each family gives the pseudo-polar sectors. The
/// Cartesian spectrum on `[-3n/2, 3n/2]³` is then recovered shell by shell
/// from the outside in: on the cube face at radial index `κ`, the unknown
/// `n × n` partial transform along the face's two transverse axes is solved
/// in least squares from the `n + 1` pseudo-polar samples per line together
/// with the already recovered Cartesian samples of the outer shells. Where
/// faces of different families overlap, a frequency belongs to the family of
/// its largest component, ties going to the lower family. A 3D inverse DFT
/// and truncation to the central `n³` samples finish the inversion.
pub fn idrt3(radon: &RadonSpace4D) -> Result<Volume> {
    let data = &radon.data;
    let shape = data.shape().to_vec();
    let n = radon.n;
    let expected = vec![3, 3 * n + 1, n + 1, n + 1];
    if shape != expected {
        return Err(Error::ShapeMismatch {
            expected,
            actual: shape,
        });
    }
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddSize(n));
    }
    check_finite(data.iter())?;

    let m = 3 * n + 1;
    let big_h = 3 * n / 2;

    // radial DFT: Radon families to pseudo-polar sectors
    let mut pp = data.mapv(|x| Complex64::new(x, 0.0));
    dft_axis(&mut pp, Axis(1), false);

    let mut planner = FftPlanner::new();
    let dft = CenteredDft::new(&mut planner, m);
    let mut ws = Workspace::default();
    let mut cart = Array3::<Complex64>::zeros((m, m, m));

    for k in (0..=big_h as i64).rev() {
        let kappas: &[i64] = if k == 0 { &[0] } else { &[k, -k] };
        for &kappa in kappas {
            let system = FaceSystem::new(n, kappa);
            for family in 0..3 {
                let partial = solve_face(&system, &pp, &cart, family, kappa, &dft, &mut ws);
                write_face(&system, &partial, &mut cart, family, kappa);
            }
        }
    }

    for axis in 0..3 {
        dft_axis(&mut cart, Axis(axis), true);
    }
    let lo = big_h - n / 2;
    let volume = cart.slice(s![lo..lo + n, lo..lo + n, lo..lo + n]).mapv(|z| z.re);
    Volume::new(volume, radon.du)
}

/// Linear system shared by every face at radial index `κ`.
struct FaceSystem {
    n: usize,
    k: i64,
    /// Integer frequencies of the outer shells, in row order after the
    /// `n + 1` pseudo-polar rows.
    outer: Vec<i64>,
    /// `(n+1) × n` matrix `exp(-2πi·x_l·v/m)` with `x_l = -2κl/n`.
    top: DMatrix<Complex64>,
    /// Pseudo-inverse of the full row set.
    pinv: DMatrix<Complex64>,
    /// `(2k+1) × n` matrix `exp(-2πi·ξ·v/m)` for integer `|ξ| ≤ k`.
    inner: DMatrix<Complex64>,
}

fn phase(x: f64, v: f64, m: usize) -> Complex64 {
    let t = (x * v).rem_euclid(m as f64) / m as f64;
    Complex64::from_polar(1.0, -2.0 * PI * t)
}

impl FaceSystem {
    fn new(n: usize, kappa: i64) -> Self {
        let m = 3 * n + 1;
        let big_h = (3 * n / 2) as i64;
        let h = (n / 2) as i64;
        let k = kappa.abs();
        let outer: Vec<i64> = (k + 1..=big_h).flat_map(|x| [x, -x]).collect();
        let col = |c: usize| c as f64 - h as f64;
        let top = DMatrix::from_fn(n + 1, n, |r, c| {
            let x = -2.0 * kappa as f64 * (r as i64 - h) as f64 / n as f64;
            phase(x, col(c), m)
        });
        let rows = n + 1 + outer.len();
        let full = DMatrix::from_fn(rows, n, |r, c| {
            if r <= n {
                top[(r, c)]
            } else {
                phase(outer[r - n - 1] as f64, col(c), m)
            }
        });
        let pinv = full
            .pseudo_inverse(1e-12)
            .expect("pseudo-inverse with non-negative tolerance");
        let inner = DMatrix::from_fn((2 * k + 1) as usize, n, |r, c| {
            phase((r as i64 - k) as f64, col(c), m)
        });
        Self {
            n,
            k,
            outer,
            top,
            pinv,
            inner,
        }
    }
}

/// Axes `(main, b, c)` of a family's face, `b < c`.
fn face_axes(family: usize) -> [usize; 3] {
    match family {
        0 => [0, 1, 2],
        1 => [1, 0, 2],
        _ => [2, 0, 1],
    }
}

/// Inverse DFT of one Cartesian line, keeping the central `n` samples.
fn line_to_space(
    line: impl Iterator<Item = Complex64>,
    n: usize,
    dft: &CenteredDft,
    ws: &mut Workspace,
) -> Vec<Complex64> {
    let input: Vec<Complex64> = line.collect();
    let mut out = vec![Complex64::default(); input.len()];
    dft.inverse(&input, &mut out, ws);
    truncate_centered(&out, n)
}

/// Recovers the `n × n` partial transform `F(v, w)` of one face.
fn solve_face(
    sys: &FaceSystem,
    pp: &Array4<Complex64>,
    cart: &Array3<Complex64>,
    family: usize,
    kappa: i64,
    dft: &CenteredDft,
    ws: &mut Workspace,
) -> DMatrix<Complex64> {
    let n = sys.n;
    let big_h = (3 * n / 2) as i64;
    let slot = |x: i64| (x + big_h) as usize;
    let face = cart
        .view()
        .permuted_axes(face_axes(family))
        .index_axis_move(Axis(0), slot(kappa));
    let sector = pp.index_axis(Axis(0), family).index_axis_move(Axis(0), slot(kappa));
    let rows = n + 1 + sys.outer.len();

    // stage 1: transverse lines along c at each pseudo-polar b frequency
    let outer_c: Vec<DVector<Complex64>> = sys
        .outer
        .iter()
        .map(|&xc| {
            let g = line_to_space(face.column(slot(xc)).iter().copied(), n, dft, ws);
            &sys.top * DVector::from_vec(g)
        })
        .collect();
    let mut t = DMatrix::<Complex64>::zeros(n + 1, n);
    let mut rhs = DVector::<Complex64>::zeros(rows);
    for l in 0..=n {
        for j in 0..=n {
            rhs[j] = sector[[l, j]];
        }
        for (i, vals) in outer_c.iter().enumerate() {
            rhs[n + 1 + i] = vals[l];
        }
        let row = &sys.pinv * &rhs;
        for w in 0..n {
            t[(l, w)] = row[w];
        }
    }

    // stage 2: recover F(·, w) from T(·, w) and the outer b frequencies
    let outer_b: Vec<Vec<Complex64>> = sys
        .outer
        .iter()
        .map(|&xb| line_to_space(face.row(slot(xb)).iter().copied(), n, dft, ws))
        .collect();
    let mut f = DMatrix::<Complex64>::zeros(n, n);
    for w in 0..n {
        for l in 0..=n {
            rhs[l] = t[(l, w)];
        }
        for (i, vals) in outer_b.iter().enumerate() {
            rhs[n + 1 + i] = vals[w];
        }
        let col = &sys.pinv * &rhs;
        f.set_column(w, &col);
    }
    f
}

/// Writes the integer frequencies `|ξb|, |ξc| ≤ k` of a solved face into the
/// Cartesian spectrum, honoring the family ownership rule.
fn write_face(
    sys: &FaceSystem,
    partial: &DMatrix<Complex64>,
    cart: &mut Array3<Complex64>,
    family: usize,
    kappa: i64,
) {
    let k = sys.k;
    let big_h = (3 * sys.n / 2) as i64;
    let values = &sys.inner * partial * sys.inner.transpose();
    let mut face = cart
        .view_mut()
        .permuted_axes(face_axes(family))
        .index_axis_move(Axis(0), (kappa + big_h) as usize);
    for xb in -k..=k {
        for xc in -k..=k {
            let owned = match family {
                0 => true,
                1 => xb.abs() < k,
                _ => xb.abs() < k && xc.abs() < k,
            };
            if owned {
                face[[(xb + big_h) as usize, (xc + big_h) as usize]] =
                    values[((xb + k) as usize, (xc + k) as usize)];
            }
        }
    }
}

/// Centered forward DFT along `p` of every radial line of a 2D transform;
/// recovers the pseudo-polar sectors.
pub fn drt2_radial_spectrum(radon: &Drt2) -> Array3<Complex64> {
    let mut spec = radon.data.mapv(|x| Complex64::new(x, 0.0));
    dft_axis(&mut spec, Axis(1), false);
    spec
}

/// Centered forward DFT along `p` of every radial line of a 3D transform.
pub fn drt3_radial_spectrum(radon: &RadonSpace4D) -> Array4<Complex64> {
    let mut spec = radon.data.mapv(|x| Complex64::new(x, 0.0));
    dft_axis(&mut spec, Axis(1), false);
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_abs_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
        a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn random_image(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0))
    }

    fn random_volume(n: usize, seed: u64) -> Array3<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array::from_shape_fn((n, n, n), |_| rng.random_range(-1.0..1.0))
    }

    fn rel_l2(a: &Array3<f64>, b: &Array3<f64>) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn drt2_zero_and_row_sum() {
        let zero = drt2(Array2::zeros((8, 8)).view(), 1.0).unwrap();
        assert!(zero.data.iter().all(|&x| x.abs() < 1e-14));
        let ones = drt2(Array2::ones((8, 8)).view(), 1.0).unwrap();
        assert!((ones.get(1, 0, 0) - 8.0).abs() < 1e-10);
        assert!((ones.get(2, 0, 0) - 8.0).abs() < 1e-10);
    }

    #[test]
    fn drt2_matches_oracle() {
        for (n, seed) in [(4usize, 1u64), (8, 2), (16, 3)] {
            let img = random_image(n, seed);
            let fast = drt2(img.view(), 1.0).unwrap();
            let slow = brute_force_drt2(img.view(), 1.0).unwrap();
            let err = max_abs_diff(&fast.data, &slow.data);
            assert!(err <= 1e-8, "n={n} err={err}");
        }
    }

    #[test]
    fn drt2_boundary_support_has_no_wraparound() {
        let n = 8;
        let mut img = Array2::zeros((n, n));
        for i in 0..n {
            img[[0, i]] = 1.0 + i as f64;
            img[[n - 1, i]] = 2.0;
            img[[i, 0]] = -1.0;
            img[[i, n - 1]] = 0.5 * i as f64;
        }
        let fast = drt2(img.view(), 1.0).unwrap();
        let slow = brute_force_drt2(img.view(), 1.0).unwrap();
        assert!(max_abs_diff(&fast.data, &slow.data) <= 1e-8);
    }

    #[test]
    fn oracle_impulse_and_guard() {
        let mut img = Array2::zeros((4, 4));
        img[[2, 2]] = 1.0;
        let r = brute_force_drt2(img.view(), 1.0).unwrap();
        for l in -2..=2 {
            assert!((r.get(1, 0, l) - 1.0).abs() < 1e-14);
        }
        let big = Array2::zeros((18, 18));
        assert!(matches!(
            brute_force_drt2(big.view(), 1.0),
            Err(Error::OracleTooLarge { n: 18, max: 16 })
        ));
    }

    #[test]
    fn drt2_radial_dft_is_ppft2() {
        for n in [4usize, 8] {
            let img = random_image(n, 20 + n as u64);
            let spec = drt2_radial_spectrum(&drt2(img.view(), 1.0).unwrap());
            let pp = ppft2(img.view()).unwrap();
            for f in 0..2 {
                let err = spec
                    .index_axis(Axis(0), f)
                    .iter()
                    .zip(pp.sectors[f].iter())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(err <= 1e-8);
            }
        }
    }

    #[test]
    fn drt3_zero_and_plane_sum() {
        let zero = drt3(Array3::zeros((4, 4, 4)).view(), 1.0).unwrap();
        assert!(zero.data.iter().all(|&x| x.abs() < 1e-14));
        let ones = drt3(Array3::ones((4, 4, 4)).view(), 1.0).unwrap();
        for f in 1..=3 {
            assert!((ones.get(f, 0, 0, 0) - 16.0).abs() < 1e-10);
        }
    }

    #[test]
    fn drt3_matches_oracle() {
        let vol = random_volume(4, 4);
        let fast = drt3(vol.view(), 1.0).unwrap();
        let slow = brute_force_drt3(vol.view(), 1.0).unwrap();
        assert!(max_abs_diff(&fast.data, &slow.data) <= 1e-8);
    }

    #[test]
    fn drt3_radial_dft_is_ppft3() {
        let vol = random_volume(4, 5);
        let spec = drt3_radial_spectrum(&drt3(vol.view(), 1.0).unwrap());
        let pp = ppft3(vol.view()).unwrap();
        for f in 0..3 {
            let err = spec
                .index_axis(Axis(0), f)
                .iter()
                .zip(pp.sectors[f].iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err <= 1e-8);
        }
    }

    #[test]
    fn idrt3_inverts_drt3() {
        for (n, seed) in [(2usize, 6u64), (4, 7), (8, 8)] {
            let vol = random_volume(n, seed);
            let back = idrt3(&drt3(vol.view(), 0.5).unwrap()).unwrap();
            assert_eq!(back.voxel_size, 0.5);
            let err = rel_l2(&back.data, &vol);
            assert!(err <= 1e-6, "n={n} err={err}");
        }
    }

    #[test]
    fn idrt3_zero_and_errors() {
        let back = idrt3(&RadonSpace4D::zeros(4, 1.0)).unwrap();
        assert!(back.data.iter().all(|&x| x == 0.0));
        let bad = RadonSpace4D {
            n: 4,
            du: 1.0,
            data: Array4::zeros((3, 12, 5, 5)),
        };
        assert!(matches!(idrt3(&bad), Err(Error::ShapeMismatch { .. })));
        let mut nan = RadonSpace4D::zeros(2, 1.0);
        nan.data[[0, 0, 0, 0]] = f64::NAN;
        assert!(matches!(idrt3(&nan), Err(Error::NonFinite)));
        assert!(RadonSpace4D::new(Array4::zeros((3, 13, 5, 5)), 1.0).is_ok());
    }
}
