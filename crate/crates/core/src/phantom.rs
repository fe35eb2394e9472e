//! Ellipsoid phantoms and a circular-orbit cone-beam projector.

use ndarray::{Array3, ArrayView3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::geometry::Geometry;
use crate::volume::check_even_cube;
use crate::{Error, Result, Volume};

pub use crate::io::{load_volume, save_volume};

/// Ellipsoid of constant additive density. Lengths in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub center: [f64; 3],
    pub semi_axes: [f64; 3],
    /// Rotation about the z axis in radians.
    pub rotation: f64,
    pub density: f64,
}

impl Ellipsoid {
    /// Point `x` in the ellipsoid frame, scaled so the surface is the unit
    /// sphere.
    fn unit_frame(&self, x: [f64; 3]) -> [f64; 3] {
        let (s, c) = self.rotation.sin_cos();
        let d = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        [
            (c * d[0] + s * d[1]) / self.semi_axes[0],
            (-s * d[0] + c * d[1]) / self.semi_axes[1],
            d[2] / self.semi_axes[2],
        ]
    }

    fn dir_to_unit(&self, v: [f64; 3]) -> [f64; 3] {
        let (s, c) = self.rotation.sin_cos();
        [
            (c * v[0] + s * v[1]) / self.semi_axes[0],
            (-s * v[0] + c * v[1]) / self.semi_axes[1],
            v[2] / self.semi_axes[2],
        ]
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        let u = self.unit_frame(x);
        u[0] * u[0] + u[1] * u[1] + u[2] * u[2] <= 1.0
    }

    /// Chord length of the line `origin + t·dir` (unit `dir`).
    pub fn chord(&self, origin: [f64; 3], dir: [f64; 3]) -> f64 {
        let p = self.unit_frame(origin);
        let d = self.dir_to_unit(dir);
        let a = dot(d, d);
        let b = dot(p, d);
        let c = dot(p, p) - 1.0;
        let disc = b * b - a * c;
        if disc <= 0.0 {
            0.0
        } else {
            2.0 * disc.sqrt() / a
        }
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.semi_axes.iter().product::<f64>()
    }

    /// Half extents of the axis-aligned bounding box.
    fn half_extent(&self) -> [f64; 3] {
        let (s, c) = self.rotation.sin_cos();
        let [a, b, z] = self.semi_axes;
        [(a * c).hypot(b * s), (a * s).hypot(b * c), z]
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Sum of ellipsoids inside a cube of side `sx` centered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phantom {
    pub sx: f64,
    pub ellipsoids: Vec<Ellipsoid>,
}

/// Modified Shepp-Logan table: density, semi-axes, center, rotation in
/// degrees, on the unit cube.
const SHEPP_LOGAN: [[f64; 8]; 10] = [
    [1.0, 0.69, 0.92, 0.81, 0.0, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.874, 0.78, 0.0, -0.0184, 0.0, 0.0],
    [-0.2, 0.11, 0.31, 0.22, 0.22, 0.0, 0.0, -18.0],
    [-0.2, 0.16, 0.41, 0.28, -0.22, 0.0, 0.0, 18.0],
    [0.1, 0.21, 0.25, 0.41, 0.0, 0.35, -0.15, 0.0],
    [0.1, 0.046, 0.046, 0.05, 0.0, 0.1, 0.25, 0.0],
    [0.1, 0.046, 0.046, 0.05, 0.0, -0.1, 0.25, 0.0],
    [0.1, 0.046, 0.023, 0.05, -0.08, -0.605, 0.0, 0.0],
    [0.1, 0.023, 0.023, 0.02, 0.0, -0.606, 0.0, 0.0],
    [0.1, 0.023, 0.046, 0.02, 0.06, -0.605, 0.0, 0.0],
];

/// Procedural head: skull, brain, ventricles, cerebellum, sinus and two
/// lesions.
const HEAD: [[f64; 8]; 9] = [
    [1.0, 0.72, 0.90, 0.80, 0.0, 0.0, 0.0, 0.0],
    [-0.7, 0.66, 0.84, 0.74, 0.0, 0.0, 0.0, 0.0],
    [-0.15, 0.08, 0.22, 0.14, -0.12, 0.05, 0.1, 15.0],
    [-0.15, 0.08, 0.22, 0.14, 0.12, 0.05, 0.1, -15.0],
    [0.1, 0.35, 0.2, 0.18, 0.0, -0.4, -0.3, 0.0],
    [-0.25, 0.15, 0.1, 0.12, 0.0, 0.6, -0.35, 0.0],
    [0.3, 0.1, 0.1, 0.1, 0.25, -0.35, -0.2, 0.0],
    [0.2, 0.05, 0.05, 0.05, -0.3, 0.3, 0.3, 0.0],
    [0.15, 0.2, 0.12, 0.1, 0.2, 0.35, 0.35, 30.0],
];

fn from_table(rows: &[[f64; 8]], sx: f64) -> Phantom {
    let r = sx / 2.0;
    let ellipsoids = rows
        .iter()
        .map(|t| Ellipsoid {
            density: t[0],
            semi_axes: [t[1] * r, t[2] * r, t[3] * r],
            center: [t[4] * r, t[5] * r, t[6] * r],
            rotation: t[7].to_radians(),
        })
        .collect();
    Phantom { sx, ellipsoids }
}

impl Phantom {
    pub fn shepp_logan(sx: f64) -> Self {
        from_table(&SHEPP_LOGAN, sx)
    }

    pub fn head(sx: f64) -> Self {
        from_table(&HEAD, sx)
    }

    /// Builtin phantom by name: `shepp-logan` or `head`.
    pub fn builtin(name: &str, sx: f64) -> Option<Self> {
        match name {
            "shepp-logan" => Some(Self::shepp_logan(sx)),
            "head" => Some(Self::head(sx)),
            _ => None,
        }
    }

    pub fn validated(self) -> Result<Self> {
        if self.sx.is_nan() || self.sx <= 0.0 {
            return Err(Error::InvalidParameter(format!("phantom side {} must be positive", self.sx)));
        }
        let half = self.sx / 2.0;
        for (i, e) in self.ellipsoids.iter().enumerate() {
            if e.semi_axes.iter().any(|&a| a.is_nan() || a <= 0.0) {
                return Err(Error::InvalidParameter(format!("ellipsoid {i}: semi-axes must be positive")));
            }
            let ext = e.half_extent();
            if (0..3).any(|k| (e.center[k].abs() + ext[k]) > half * (1.0 + 1e-12)) {
                return Err(Error::InvalidParameter(format!("ellipsoid {i} leaves the {}-mm cube", self.sx)));
            }
        }
        Ok(self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let phantom: Self = serde_json::from_str(&text).map_err(|e| Error::Header {
            path: path.to_path_buf(),
            source: e,
        })?;
        phantom.validated()
    }

    pub fn value_at(&self, x: [f64; 3]) -> f64 {
        self.ellipsoids
            .iter()
            .filter(|e| e.contains(x))
            .map(|e| e.density)
            .sum()
    }

    /// Samples the phantom at the voxel centers of an `n³` grid.
    pub fn voxelize(&self, n: usize) -> Result<Volume> {
        check_even_cube(&[n])?;
        let h = self.sx / n as f64;
        let c = |i: usize| (i as f64 - (n / 2) as f64) * h;
        let data = Array3::from_shape_fn((n, n, n), |(a, b, k)| self.value_at([c(a), c(b), c(k)]));
        Volume::new(data, h)
    }

    /// Voxel averages of an `n³` grid, each estimated from `sub³` evenly
    /// spaced samples inside the voxel.
    pub fn voxelize_averaged(&self, n: usize, sub: usize) -> Result<Volume> {
        check_even_cube(&[n])?;
        if sub == 0 {
            return Err(Error::InvalidParameter("sub-sample count must be positive".into()));
        }
        let h = self.sx / n as f64;
        let offsets: Vec<f64> = (0..sub).map(|t| ((t as f64 + 0.5) / sub as f64 - 0.5) * h).collect();
        let c = |i: usize| (i as f64 - (n / 2) as f64) * h;
        let values: Vec<f64> = (0..n * n * n)
            .into_par_iter()
            .map(|i| {
                let (a, b, k) = (i / (n * n), (i / n) % n, i % n);
                let mut acc = 0.0;
                for &da in &offsets {
                    for &db in &offsets {
                        for &dk in &offsets {
                            acc += self.value_at([c(a) + da, c(b) + db, c(k) + dk]);
                        }
                    }
                }
                acc / (sub * sub * sub) as f64
            })
            .collect();
        Volume::new(Array3::from_shape_vec((n, n, n), values).expect("n³ values"), h)
    }

    /// Integral of the density over space.
    pub fn total(&self) -> f64 {
        self.ellipsoids.iter().map(|e| e.density * e.volume()).sum()
    }

    /// Maximum density, from the ellipsoid centers and a `samples³` grid.
    pub fn max_density(&self, samples: usize) -> f64 {
        let h = self.sx / samples as f64;
        let grid = (0..samples.pow(3)).into_par_iter().map(|i| {
            let (a, b, c) = (i / (samples * samples), (i / samples) % samples, i % samples);
            let x = |k: usize| (k as f64 + 0.5) * h - self.sx / 2.0;
            self.value_at([x(a), x(b), x(c)])
        });
        let centers = self.ellipsoids.iter().map(|e| self.value_at(e.center)).fold(f64::MIN, f64::max);
        grid.reduce(|| f64::MIN, f64::max).max(centers)
    }
}

/// Voxelized modified Shepp-Logan phantom on an `n³` grid of side `sx` mm.
pub fn shepp_logan_3d(n: usize, sx: f64) -> Result<Volume> {
    Phantom::shepp_logan(sx).voxelize(n)
}

/// Objects whose line integrals can be evaluated.
pub trait LineIntegral: Sync {
    /// Integral along the line `origin + t·dir`, `dir` of unit length.
    fn line_integral(&self, origin: [f64; 3], dir: [f64; 3]) -> f64;
}

impl LineIntegral for Phantom {
    fn line_integral(&self, origin: [f64; 3], dir: [f64; 3]) -> f64 {
        self.ellipsoids.iter().map(|e| e.density * e.chord(origin, dir)).sum()
    }
}

impl LineIntegral for Volume {
    /// Trilinear samples at half-voxel steps over the clipped line.
    fn line_integral(&self, origin: [f64; 3], dir: [f64; 3]) -> f64 {
        let n = self.n();
        let h = self.voxel_size;
        let half = (n / 2) as f64;
        // trilinear support spans indices -1..=n
        let (lo, hi) = ((-half - 1.0) * h, (n as f64 - half) * h);
        let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 0..3 {
            if dir[k].abs() < 1e-300 {
                if origin[k] <= lo || origin[k] >= hi {
                    return 0.0;
                }
                continue;
            }
            let (a, b) = ((lo - origin[k]) / dir[k], (hi - origin[k]) / dir[k]);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        if t1 <= t0 {
            return 0.0;
        }
        let step = h / 2.0;
        let count = ((t1 - t0) / step).ceil() as usize;
        let step = (t1 - t0) / count as f64;
        let data = self.view();
        (0..count)
            .map(|i| {
                let t = t0 + (i as f64 + 0.5) * step;
                let g = [0, 1, 2].map(|k| (origin[k] + t * dir[k]) / h + half);
                trilinear(data, g)
            })
            .sum::<f64>()
            * step
    }
}

fn trilinear(data: ArrayView3<'_, f64>, g: [f64; 3]) -> f64 {
    let n = data.dim().0 as i64;
    let base = g.map(|x| x.floor());
    let frac = [g[0] - base[0], g[1] - base[1], g[2] - base[2]];
    let b = base.map(|x| x as i64);
    let mut acc = 0.0;
    for corner in 0..8 {
        let o = [(corner >> 2) & 1, (corner >> 1) & 1, corner & 1];
        let idx = [b[0] + o[0] as i64, b[1] + o[1] as i64, b[2] + o[2] as i64];
        if idx.iter().any(|&i| i < 0 || i >= n) {
            continue;
        }
        let w: f64 = (0..3)
            .map(|k| if o[k] == 1 { frac[k] } else { 1.0 - frac[k] })
            .product();
        acc += w * data[[idx[0] as usize, idx[1] as usize, idx[2] as usize]];
    }
    acc
}

/// Virtual-detector projections, stored `[psi, a, b]` with `a` along the
/// horizontal detector axis and `b` along z.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet {
    pub data: Array3<f64>,
    /// Virtual detector pixel size in mm.
    pub pixel_size: f64,
    pub psis: Vec<f64>,
}

/// Source position and the unit direction towards virtual-detector pixel
/// `(a, b)` of projection angle `psi`.
pub fn ray(geom: &Geometry, psi: f64, a: usize, b: usize) -> ([f64; 3], [f64; 3]) {
    let du = geom.du_virtual();
    let half = (geom.nu / 2) as f64;
    let (sp, cp) = psi.sin_cos();
    let src = [geom.so * cp, geom.so * sp, 0.0];
    let h = (a as f64 - half) * du;
    let z = (b as f64 - half) * du;
    let det = [-sp * h, cp * h, z];
    let d = [det[0] - src[0], det[1] - src[1], det[2] - src[2]];
    let len = dot(d, d).sqrt();
    (src, d.map(|c| c / len))
}

/// Cone-beam projections of `object` over `geom.n_proj` equally spaced
/// source angles.
pub fn cone_beam_project(object: &dyn LineIntegral, geom: &Geometry) -> Result<ProjectionSet> {
    let geom = geom.validated()?;
    let nu = geom.nu;
    let psis: Vec<f64> = (0..geom.n_proj).map(|i| geom.psi(i)).collect();
    let frames: Vec<Vec<f64>> = psis
        .par_iter()
        .map(|&psi| {
            (0..nu * nu)
                .map(|i| {
                    let (src, dir) = ray(&geom, psi, i / nu, i % nu);
                    object.line_integral(src, dir)
                })
                .collect()
        })
        .collect();
    let flat: Vec<f64> = frames.into_iter().flatten().collect();
    let data = Array3::from_shape_vec((geom.n_proj, nu, nu), flat).expect("frame sizes match");
    Ok(ProjectionSet {
        data,
        pixel_size: geom.du_virtual(),
        psis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ball(r: f64, center: [f64; 3]) -> Phantom {
        Phantom {
            sx: 64.0,
            ellipsoids: vec![Ellipsoid {
                center,
                semi_axes: [r; 3],
                rotation: 0.0,
                density: 1.0,
            }],
        }
    }

    fn small_geometry() -> Geometry {
        Geometry {
            sx: 64.0,
            nx: 16,
            su: 256.0,
            nu: 16,
            sp: 1500.0,
            so: 1000.0,
            n_proj: 8,
        }
    }

    #[test]
    fn shepp_logan_center_and_support() {
        let vol = shepp_logan_3d(64, 64.0).unwrap();
        assert_abs_diff_eq!(vol.data[[32, 32, 32]], 0.2, epsilon = 1e-12);
        assert_eq!(vol.data[[0, 0, 0]], 0.0);
        assert_eq!(vol.voxel_size, 1.0);
        assert!(shepp_logan_3d(7, 64.0).is_err());
    }

    #[test]
    fn shepp_logan_total_matches_analytic_integral() {
        let p = Phantom::shepp_logan(64.0);
        let vol = p.voxelize(64).unwrap();
        let sum: f64 = vol.data.sum() * vol.voxel_size.powi(3);
        let total = p.total();
        assert!(((sum - total) / total).abs() < 0.02, "sum={sum} total={total}");
    }

    #[test]
    fn averaged_voxels_preserve_mass() {
        let p = Phantom::shepp_logan(64.0);
        let vol = p.voxelize_averaged(16, 4).unwrap();
        let sum: f64 = vol.data.sum() * vol.voxel_size.powi(3);
        assert!(((sum - p.total()) / p.total()).abs() < 0.01, "sum={sum}");
        let one = p.voxelize_averaged(16, 1).unwrap();
        assert_eq!(one, p.voxelize(16).unwrap());
        assert!(p.voxelize_averaged(16, 0).is_err());
    }

    #[test]
    fn builtin_phantoms_fit_their_cube() {
        for name in ["shepp-logan", "head"] {
            let p = Phantom::builtin(name, 64.0).unwrap().validated().unwrap();
            let max = p.max_density(64);
            assert!(max > 0.0 && max <= 1.0 + 1e-12, "{name} max={max}");
        }
        assert!(Phantom::builtin("zubal", 64.0).is_none());
        assert_abs_diff_eq!(Phantom::shepp_logan(64.0).max_density(96), 1.0, epsilon = 1e-12);
        assert!(ball(40.0, [0.0; 3]).validated().is_err());
    }

    #[test]
    fn phantom_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let p = Phantom::head(32.0);
        std::fs::write(&path, serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(Phantom::load(&path).unwrap(), p);
    }

    #[test]
    fn ball_chords() {
        let b = ball(10.0, [0.0; 3]);
        assert_abs_diff_eq!(b.line_integral([-100.0, 0.0, 0.0], [1.0, 0.0, 0.0]), 20.0, epsilon = 1e-12);
        let d = 6.0;
        let got = b.line_integral([-100.0, d, 0.0], [1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(got, 2.0 * (100.0f64 - d * d).sqrt(), epsilon = 1e-12);
        assert_eq!(b.line_integral([-100.0, 11.0, 0.0], [1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn projections_of_centered_ball_do_not_depend_on_psi() {
        let geom = small_geometry();
        let proj = cone_beam_project(&ball(12.0, [0.0; 3]), &geom).unwrap();
        let first = proj.data.index_axis(ndarray::Axis(0), 0).to_owned();
        for frame in proj.data.outer_iter() {
            for (a, b) in frame.iter().zip(first.iter()) {
                assert!((a - b).abs() <= 1e-9);
            }
        }
        // central pixel looks straight through the center
        assert_abs_diff_eq!(first[[8, 8]], 24.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_phantom_gives_zero_projections() {
        let empty = Phantom { sx: 64.0, ellipsoids: vec![] };
        let proj = cone_beam_project(&empty, &small_geometry()).unwrap();
        assert!(proj.data.iter().all(|&v| v == 0.0));
        let inside = Geometry { so: 40.0, sp: 80.0, ..small_geometry() };
        assert!(matches!(cone_beam_project(&empty, &inside), Err(Error::SourceInsideObject)));
    }

    #[test]
    fn ray_marching_a_constant_volume() {
        let vol = Volume::new(Array3::from_elem((8, 8, 8), 1.0), 2.0).unwrap();
        // the trilinear extension of a constant cube ramps down over one voxel
        let through = vol.line_integral([-50.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(through, 16.0, epsilon = 1e-9);
        assert_eq!(vol.line_integral([-50.0, 50.0, 0.0], [1.0, 0.0, 0.0]), 0.0);
    }
}
