//! Scanner geometry and coordinate conversions.
//!
//! Conventions:
//!
//! * The source orbits the z axis at `S(ψ) = SO·(cos ψ, sin ψ, 0)`.
//! * The virtual detector passes through the origin, perpendicular to the
//!   source direction, with horizontal axis `e_h = (-sin ψ, cos ψ, 0)` and
//!   vertical axis `e_z`. Detector sample `[a, b]` sits at
//!   `((a - nu/2)·Δu, (b - nu/2)·Δu)` in `(e_h, e_z)` coordinates.
//! * A detector line with polar coordinates `(s, α)` is
//!   `h·cos α + z·sin α = s`.
//! * A 3D plane with Radon coordinates `(ρ, θ, φ)` is `x·n̂ = ρ` with
//!   `n̂ = (sin θ cos φ, sin θ sin φ, cos θ)`.

use ndarray::{Array2, Array4};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;

use crate::{Error, Result};

/// Scanner and sampling parameters. Lengths in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// Object side length.
    pub sx: f64,
    /// Object samples per side.
    pub nx: usize,
    /// Physical detector side length.
    pub su: f64,
    /// Detector samples per side.
    pub nu: usize,
    /// Source to detector distance.
    #[serde(rename = "SP")]
    pub sp: f64,
    /// Source to rotation axis distance.
    #[serde(rename = "SO")]
    pub so: f64,
    pub n_proj: usize,
}

impl Geometry {
    /// Checks the invariants and returns the geometry unchanged.
    pub fn validated(self) -> Result<Self> {
        let fail = |msg: String| Err(Error::InvalidGeometry(msg));
        let lengths = [self.sx, self.su, self.sp, self.so];
        if lengths.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return fail("lengths must be positive and finite".into());
        }
        if self.nx < 2 || !self.nx.is_multiple_of(2) || self.nu < 2 || !self.nu.is_multiple_of(2) {
            return fail(format!("nx={} and nu={} must be even", self.nx, self.nu));
        }
        if self.n_proj == 0 {
            return fail("n_proj must be at least 1".into());
        }
        if self.so >= self.sp {
            return fail(format!("SO={} must be below SP={}", self.so, self.sp));
        }
        if self.so <= self.sx * 3f64.sqrt() / 2.0 {
            return Err(Error::SourceInsideObject);
        }
        Ok(self)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let geom: Self = serde_json::from_str(text).map_err(|e| Error::Header {
            path: "<geometry>".into(),
            source: e,
        })?;
        geom.validated()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let geom: Self = serde_json::from_str(&text).map_err(|e| Error::Header {
            path: path.to_path_buf(),
            source: e,
        })?;
        geom.validated()
    }

    /// Object voxel size Δm.
    pub fn dm(&self) -> f64 {
        self.sx / self.nx as f64
    }

    /// Side length of the virtual detector.
    pub fn virtual_side(&self) -> f64 {
        self.su * self.so / self.sp
    }

    /// Virtual detector pixel size Δu.
    pub fn du_virtual(&self) -> f64 {
        self.virtual_side() / self.nu as f64
    }

    /// Source angle of projection `i`.
    pub fn psi(&self, i: usize) -> f64 {
        TAU * i as f64 / self.n_proj as f64
    }

    /// Angular step between projections.
    pub fn dpsi(&self) -> f64 {
        TAU / self.n_proj as f64
    }
}

/// Point of the 3D Radon space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadonPoint {
    pub rho: f64,
    pub theta: f64,
    pub phi: f64,
}

impl RadonPoint {
    pub fn normal(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Line on the virtual detector of projection `psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorPoint {
    pub s: f64,
    pub alpha: f64,
    pub psi: f64,
}

/// Result of mapping a Radon point onto the detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mapping {
    Detector(DetectorPoint),
    /// The plane meets no source position.
    Shadow,
}

/// Detector image with its pixel size.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorImage {
    pub data: Array2<f64>,
    pub pixel_size: f64,
}

/// Reinterprets a physical `nu × nu` projection on the virtual detector.
pub fn virtualize_detector(proj: Array2<f64>, geom: &Geometry) -> Result<DetectorImage> {
    let dim = proj.dim();
    if dim != (geom.nu, geom.nu) {
        return Err(Error::ShapeMismatch {
            expected: vec![geom.nu, geom.nu],
            actual: vec![dim.0, dim.1],
        });
    }
    Ok(DetectorImage {
        data: proj,
        pixel_size: geom.du_virtual(),
    })
}

/// True when no plane through the source orbit reaches `c`.
pub fn in_shadow(c: &RadonPoint, so: f64) -> bool {
    c.rho.abs() > so * c.theta.sin().abs()
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Maps a Radon point to the detector line seeing its plane.
///
/// Negative `rho` is first canonicalized to the same plane with `rho > 0`.
pub fn radon_to_detector(c: &RadonPoint, geom: &Geometry) -> Result<Mapping> {
    let so = geom.so;
    if c.rho.is_nan() || c.rho.abs() >= so {
        return Err(Error::BeyondSource { rho: c.rho, so });
    }
    let c = if c.rho < 0.0 {
        RadonPoint {
            rho: -c.rho,
            theta: PI - c.theta,
            phi: c.phi + PI,
        }
    } else {
        *c
    };
    if in_shadow(&c, so) {
        return Ok(Mapping::Shadow);
    }
    let sin_t = c.theta.sin();
    let offset = if c.rho == 0.0 {
        FRAC_PI_2
    } else {
        (c.rho / (so * sin_t)).clamp(-1.0, 1.0).acos()
    };
    let psi = wrap_angle(c.phi - offset);

    let n = c.normal();
    let a = -psi.sin() * n[0] + psi.cos() * n[1];
    let b = n[2];
    let scale = (1.0 - (c.rho / so).powi(2)).sqrt();
    Ok(Mapping::Detector(DetectorPoint {
        s: c.rho / scale,
        alpha: b.atan2(a),
        psi,
    }))
}

/// Detector line families of the 2D discrete Radon transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineFamily {
    /// `v = q·u + p`, `|q| ≤ 1`.
    Horizontal,
    /// `u = q·v + p`, `|q| ≤ 1`.
    Vertical,
}

/// Polar form `(s, α)` of a slope/intercept line. `s` is signed so that the
/// pair always describes the same line; it carries the units of `p`.
pub fn line_to_polar(family: LineFamily, q: f64, p: f64) -> (f64, f64) {
    let norm = (1.0 + q * q).sqrt();
    match family {
        LineFamily::Horizontal => {
            if q == 0.0 {
                (p, FRAC_PI_2)
            } else {
                let alpha = (-1.0 / q).atan();
                // atan folds the normal (-q, 1) to the right half-plane when q > 0
                let s = if q > 0.0 { -p / norm } else { p / norm };
                (s, alpha)
            }
        }
        LineFamily::Vertical => (p / norm, (-q).atan()),
    }
}

/// Slope/intercept form of the polar line `(s, α)`, choosing the family that
/// keeps `|q| ≤ 1`.
pub fn polar_to_line(s: f64, alpha: f64) -> (LineFamily, f64, f64) {
    let (sa, ca) = alpha.sin_cos();
    if sa.abs() >= ca.abs() * (1.0 - 1e-14) {
        (LineFamily::Horizontal, -ca / sa, s / sa)
    } else {
        (LineFamily::Vertical, -sa / ca, s / ca)
    }
}

/// Plane families of the 3D discrete Radon transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneFamily {
    /// `x = q1·y + q2·z + p`.
    X,
    /// `y = q1·x + q2·z + p`.
    Y,
    /// `z = q1·x + q2·y + p`.
    Z,
}

impl PlaneFamily {
    pub const ALL: [PlaneFamily; 3] = [PlaneFamily::X, PlaneFamily::Y, PlaneFamily::Z];

    /// Family number `1..=3`.
    pub fn number(self) -> usize {
        match self {
            PlaneFamily::X => 1,
            PlaneFamily::Y => 2,
            PlaneFamily::Z => 3,
        }
    }

    /// Unnormalized plane normal.
    pub fn normal(self, q1: f64, q2: f64) -> [f64; 3] {
        match self {
            PlaneFamily::X => [1.0, -q1, -q2],
            PlaneFamily::Y => [-q1, 1.0, -q2],
            PlaneFamily::Z => [-q1, -q2, 1.0],
        }
    }
}

/// Spherical coordinates of a slope/intercept plane. The returned point has
/// `ρ ≥ 0`; the second value is `+1` when its normal agrees with the
/// family's unnormalized normal and `-1` when it was flipped, so that the
/// signed distance along the family normal is `sign·ρ`.
pub fn plane_to_spherical(family: PlaneFamily, q1: f64, q2: f64, p: f64) -> (RadonPoint, f64) {
    let raw = family.normal(q1, q2);
    let len = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
    let sign = if p < 0.0 { -1.0 } else { 1.0 };
    let n = raw.map(|c| sign * c / len);
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = wrap_angle(n[1].atan2(n[0]));
    (
        RadonPoint {
            rho: p.abs() / len,
            theta,
            phi,
        },
        sign,
    )
}

/// Radon point of grid sample `(family, k, l, j)` of an `n³` object with
/// voxel size `dm`, with its orientation sign.
pub fn grid_point(family: PlaneFamily, n: usize, dm: f64, k: i64, l: i64, j: i64) -> (RadonPoint, f64) {
    let q1 = 2.0 * l as f64 / n as f64;
    let q2 = 2.0 * j as f64 / n as f64;
    plane_to_spherical(family, q1, q2, k as f64 * dm)
}

/// Shadow-zone mask over the `3 × (3n+1) × (n+1) × (n+1)` Radon grid of the
/// object described by `geom`.
pub fn shadow_mask(geom: &Geometry) -> Array4<bool> {
    let n = geom.nx;
    let h = (n / 2) as i64;
    let dm = geom.dm();
    Array4::from_shape_fn((3, 3 * n + 1, n + 1, n + 1), |(f, k, l, j)| {
        let (c, _) = grid_point(
            PlaneFamily::ALL[f],
            n,
            dm,
            k as i64 - 3 * h,
            l as i64 - h,
            j as i64 - h,
        );
        in_shadow(&c, geom.so)
    })
}
