//! Discrete Grangeat formula: from cone-beam projections to the
//! pseudo-polar 3D Radon space.
//!
//! For a plane seen from source angle `ψ` as the virtual-detector line
//! `(s, α)`,
//!
//! ```text
//! ∂ℜ/∂ρ = (1/cos²β) · ∂/∂s ∫ (SO/SA)·X_ψ dt,      cos²β = SO²/(SO² + s²)
//! ```
//!
//! The line integral is `Δt·R` with `R` the 2D discrete Radon transform of
//! the weighted projection and `Δt = Δu·√(1+q²)`; `∂/∂s` is a forward
//! difference along the intercept. Physical Radon values relate to the
//! unitless 3D transform by `ℜ = L·Δm²·R3` with `L = √(1+q1²+q2²)`, so the
//! rebinned radial derivative of `R3` is
//!
//! ```text
//! τ · Δt · ΔR / (Δs · cos²β · L · Δm²)
//! ```
//!
//! where `Δs` is the signed change of `s` per intercept step and `τ = ±1`
//! orients the canonical plane normal along the family normal. Integrating
//! along each radial line with step `Δρ = Δm/L` gives `R3`.

use ndarray::{Array2, Array3, Array4, Axis};
use rayon::prelude::*;
use std::str::FromStr;

use crate::drt::{drt2, Drt2, RadonSpace4D};
use crate::geometry::{
    grid_point, in_shadow, polar_to_line, radon_to_detector, shadow_mask, DetectorImage, Geometry, LineFamily,
    Mapping, PlaneFamily,
};
use crate::phantom::ProjectionSet;
use crate::{Error, Result};

/// Projection multiplied by `SO/SA`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedProjection {
    pub data: Array2<f64>,
    pub psi: f64,
    /// Virtual detector pixel size in mm.
    pub du: f64,
}

/// Radial first differences on the Radon grid, with the shadow zone flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonDerivative4D {
    /// Derivative of the unitless 3D transform with respect to the signed
    /// radial distance in mm.
    pub values: RadonSpace4D,
    pub shadow: Array4<bool>,
}

/// Default for the far-source approximation `SA ≈ SO`.
pub fn far_source_default(geom: &Geometry) -> bool {
    geom.so >= 10.0 * geom.sx
}

/// Applies the `SO/SA` cosine weight, or leaves the samples unchanged when
/// `far_source` is set.
pub fn preweight(proj: &DetectorImage, psi: f64, geom: &Geometry, far_source: bool) -> WeightedProjection {
    let du = proj.pixel_size;
    let half = (proj.data.dim().0 / 2) as f64;
    let so = geom.so;
    let data = if far_source {
        proj.data.clone()
    } else {
        Array2::from_shape_fn(proj.data.dim(), |(a, b)| {
            let u = (a as f64 - half) * du;
            let v = (b as f64 - half) * du;
            proj.data[[a, b]] * so / (u * u + v * v + so * so).sqrt()
        })
    };
    WeightedProjection { data, psi, du }
}

/// Forward difference along the intercept of every line of a 2D transform;
/// the last intercept of each line is 0.
pub fn difference_along_p(radon: &Drt2) -> Drt2 {
    let mut out = radon.clone();
    let last = radon.data.dim().1 - 1;
    for (src, mut dst) in radon.data.lanes(Axis(1)).into_iter().zip(out.data.lanes_mut(Axis(1))) {
        for p in 0..last {
            dst[p] = src[p + 1] - src[p];
        }
        dst[last] = 0.0;
    }
    out
}

/// 2D discrete Radon transform of a weighted projection, differenced along
/// the intercept.
pub fn detector_radon_derivative(wp: &WeightedProjection) -> Result<Drt2> {
    Ok(difference_along_p(&drt2(wp.data.view(), wp.du)?))
}

/// Weighted, differenced detector transforms of every projection.
pub fn detector_derivatives(proj: &ProjectionSet, geom: &Geometry, far_source: bool) -> Result<Vec<Drt2>> {
    (0..proj.psis.len())
        .into_par_iter()
        .map(|i| {
            let psi = proj.psis[i];
            let image = DetectorImage {
                data: proj.data.index_axis(Axis(0), i).to_owned(),
                pixel_size: proj.pixel_size,
            };
            detector_radon_derivative(&preweight(&image, psi, geom, far_source))
        })
        .collect()
}

/// Radial step `Δρ = Δm/√(1+q1²+q2²)` of slope indices `(l, j)`.
pub fn radial_step(n: usize, dm: f64, l: i64, j: i64) -> f64 {
    let q1 = 2.0 * l as f64 / n as f64;
    let q2 = 2.0 * j as f64 / n as f64;
    dm / (1.0 + q1 * q1 + q2 * q2).sqrt()
}

/// Arc length `Δu·√(1+q²)` per unit index step along a detector line.
pub fn line_step(du: f64, q: f64) -> f64 {
    du * (1.0 + q * q).sqrt()
}

/// `cos²β = SO²/(SO² + s²)` for a detector line at distance `s`.
pub fn cos2_beta(s: f64, so: f64) -> f64 {
    so * so / (so * so + s * s)
}

/// Bilinear sample of one family of a differenced detector transform at
/// fractional slope index `lf` and intercept `pf`, both in array slots.
fn sample_line(d: &Drt2, family: usize, lf: f64, pf: f64) -> f64 {
    let n_p = d.data.dim().1;
    let n_l = d.data.dim().2;
    if !(pf >= 0.0 && pf <= (n_p - 1) as f64) {
        return 0.0;
    }
    let lf = lf.clamp(0.0, (n_l - 1) as f64);
    let (p0, l0) = (pf.floor() as usize, lf.floor() as usize);
    let (p1, l1) = ((p0 + 1).min(n_p - 1), (l0 + 1).min(n_l - 1));
    let (wp, wl) = (pf - p0 as f64, lf - l0 as f64);
    let v = |p: usize, l: usize| d.data[[family, p, l]];
    (1.0 - wp) * ((1.0 - wl) * v(p0, l0) + wl * v(p0, l1)) + wp * ((1.0 - wl) * v(p1, l0) + wl * v(p1, l1))
}

/// Resamples the differenced detector transforms onto the pseudo-polar
/// Radon grid of `geom`, applying the Grangeat weights.
pub fn rebin(derivs: &[Drt2], geom: &Geometry) -> Result<RadonDerivative4D> {
    let geom = geom.validated()?;
    if derivs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if derivs.len() != geom.n_proj {
        return Err(Error::InvalidGeometry(format!(
            "{} detector transforms for {} projection angles",
            derivs.len(),
            geom.n_proj
        )));
    }
    if let Some(d) = derivs.iter().find(|d| d.n != geom.nu) {
        return Err(Error::ShapeMismatch {
            expected: vec![2, 2 * geom.nu + 1, geom.nu + 1],
            actual: d.data.shape().to_vec(),
        });
    }

    let n = geom.nx;
    let m = 3 * n + 1;
    let h = (n / 2) as i64;
    let dm = geom.dm();
    let du = derivs[0].du;
    let nu = geom.nu as f64;
    let so = geom.so;
    let dpsi = geom.dpsi();

    let planes: Vec<(Array2<f64>, Array2<bool>)> = (0..3 * m)
        .into_par_iter()
        .map(|idx| {
            let (f, k_slot) = (idx / m, idx % m);
            let family = PlaneFamily::ALL[f];
            let k = k_slot as i64 - 3 * h;
            let mut values = Array2::zeros((n + 1, n + 1));
            let mut shadow = Array2::from_elem((n + 1, n + 1), false);
            for l in -h..=h {
                for j in -h..=h {
                    let slot = ((l + h) as usize, (j + h) as usize);
                    let (c, tau) = grid_point(family, n, dm, k, l, j);
                    if in_shadow(&c, so) {
                        shadow[slot] = true;
                        continue;
                    }
                    if k_slot == 0 {
                        continue;
                    }
                    let Ok(Mapping::Detector(d)) = radon_to_detector(&c, &geom) else {
                        continue;
                    };
                    let (line, q, p) = polar_to_line(d.s, d.alpha);
                    let (line_idx, ds) = match line {
                        LineFamily::Horizontal => (0, d.alpha.sin() * du),
                        LineFamily::Vertical => (1, d.alpha.cos() * du),
                    };
                    let lf = q * nu / 2.0 + nu / 2.0;
                    // the difference at slot p sits at p + 1/2
                    let pf = p / du + nu - 0.5;
                    let x = d.psi / dpsi;
                    let i0 = x.floor();
                    let w = x - i0;
                    let i0 = (i0 as usize) % derivs.len();
                    let i1 = (i0 + 1) % derivs.len();
                    let diff = (1.0 - w) * sample_line(&derivs[i0], line_idx, lf, pf)
                        + w * sample_line(&derivs[i1], line_idx, lf, pf);
                    let big_l = dm / radial_step(n, dm, l, j);
                    values[slot] =
                        tau * line_step(du, q) * diff / (ds * cos2_beta(d.s, so) * big_l * dm * dm);
                }
            }
            (values, shadow)
        })
        .collect();

    let mut values = RadonSpace4D::zeros(n, dm);
    let mut shadow = Array4::from_elem((3, m, n + 1, n + 1), false);
    for (idx, (v, s)) in planes.into_iter().enumerate() {
        let (f, k) = (idx / m, idx % m);
        values.data.index_axis_mut(Axis(0), f).index_axis_mut(Axis(0), k).assign(&v);
        shadow.index_axis_mut(Axis(0), f).index_axis_mut(Axis(0), k).assign(&s);
    }
    Ok(RadonDerivative4D { values, shadow })
}

/// Cumulative trapezoid along each radial line, starting from 0 at the most
/// negative intercept, with step `Δρ` of that line.
pub fn integrate_radial(deriv: &RadonDerivative4D) -> RadonSpace4D {
    let src = &deriv.values;
    let n = src.n;
    let h = (n / 2) as i64;
    let mut out = RadonSpace4D::zeros(n, src.du);
    let m = 3 * n + 1;
    for f in 0..3 {
        for l in 0..=n {
            for j in 0..=n {
                let step = radial_step(n, src.du, l as i64 - h, j as i64 - h);
                let mut acc = 0.0;
                for k in 1..m {
                    acc += step * (src.data[[f, k - 1, l, j]] + src.data[[f, k, l, j]]) / 2.0;
                    out.data[[f, k, l, j]] = acc;
                }
            }
        }
    }
    out
}

/// Shadow-zone filling strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShadowFill {
    Zero,
    /// Linear interpolation along the θ-like slope index.
    #[serde(rename = "linear", alias = "linear_theta")]
    LinearTheta,
    /// Copy from a reference Radon space.
    Oracle,
}

impl FromStr for ShadowFill {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "linear" | "linear_theta" => Ok(Self::LinearTheta),
            "oracle" => Ok(Self::Oracle),
            other => Err(Error::InvalidParameter(format!("unknown shadow strategy {other:?}"))),
        }
    }
}

impl std::fmt::Display for ShadowFill {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Zero => "zero",
            Self::LinearTheta => "linear",
            Self::Oracle => "oracle",
        })
    }
}

/// Replaces the masked entries of `radon`. Unmasked entries are never
/// modified.
pub fn fill_shadow_zone(
    radon: &RadonSpace4D,
    mask: &Array4<bool>,
    strategy: ShadowFill,
    oracle: Option<&RadonSpace4D>,
) -> Result<RadonSpace4D> {
    if mask.shape() != radon.data.shape() {
        return Err(Error::ShapeMismatch {
            expected: radon.data.shape().to_vec(),
            actual: mask.shape().to_vec(),
        });
    }
    let mut out = radon.clone();
    match strategy {
        ShadowFill::Zero => {
            out.data.zip_mut_with(mask, |v, &s| {
                if s {
                    *v = 0.0;
                }
            });
        }
        ShadowFill::Oracle => {
            let reference = oracle.ok_or(Error::MissingOracle)?;
            if reference.data.shape() != radon.data.shape() {
                return Err(Error::ShapeMismatch {
                    expected: radon.data.shape().to_vec(),
                    actual: reference.data.shape().to_vec(),
                });
            }
            ndarray::Zip::from(&mut out.data)
                .and(mask)
                .and(&reference.data)
                .for_each(|v, &s, &r| {
                    if s {
                        *v = r;
                    }
                });
        }
        ShadowFill::LinearTheta => {
            for f in 0..3 {
                // θ follows j for the x and y families and l for the z family
                let axis = if f == 2 { Axis(1) } else { Axis(2) };
                let mut fam = out.data.index_axis_mut(Axis(0), f);
                let fam_mask = mask.index_axis(Axis(0), f);
                for (mut line, line_mask) in fam.lanes_mut(axis).into_iter().zip(fam_mask.lanes(axis)) {
                    let mask_vec: Vec<bool> = line_mask.to_vec();
                    let mut vals: Vec<f64> = line.to_vec();
                    interpolate_masked(&mut vals, &mask_vec);
                    line.iter_mut().zip(vals).for_each(|(d, s)| *d = s);
                }
            }
        }
    }
    Ok(out)
}

/// Linear interpolation of masked samples from the nearest unmasked ones;
/// a single neighbor is copied and none gives 0.
fn interpolate_masked(vals: &mut [f64], mask: &[bool]) {
    let known: Vec<usize> = (0..vals.len()).filter(|&i| !mask[i]).collect();
    for i in (0..vals.len()).filter(|&i| mask[i]) {
        let right = known.partition_point(|&k| k < i);
        let before = right.checked_sub(1).map(|r| known[r]);
        let after = known.get(right).copied();
        vals[i] = match (before, after) {
            (Some(a), Some(b)) => {
                let t = (i - a) as f64 / (b - a) as f64;
                (1.0 - t) * vals[a] + t * vals[b]
            }
            (Some(a), None) => vals[a],
            (None, Some(b)) => vals[b],
            (None, None) => 0.0,
        };
    }
}

/// Entries whose integrated value is unknown: the shadow zone, plus every
/// radial line whose shadow zone contains a plane meeting the object's
/// bounding sphere, since its running sum passes through missing data.
pub fn unrecoverable_mask(shadow: &Array4<bool>, geom: &Geometry) -> Array4<bool> {
    let n = geom.nx;
    let h = (n / 2) as i64;
    let dm = geom.dm();
    let reach = geom.sx * 3f64.sqrt() / 2.0;
    let mut out = shadow.clone();
    for f in 0..3 {
        for l in 0..=n {
            for j in 0..=n {
                let step = radial_step(n, dm, l as i64 - h, j as i64 - h);
                let cut = (0..3 * n + 1)
                    .any(|k| shadow[[f, k, l, j]] && ((k as i64 - 3 * h) as f64 * step).abs() < reach);
                if cut {
                    out.slice_mut(ndarray::s![f, .., l, j]).fill(true);
                }
            }
        }
    }
    out
}

/// Full Grangeat stage: weighted detector derivatives, rebinning and radial
/// integration. Returns the Radon space and the mask of entries left for
/// [`fill_shadow_zone`].
pub fn radon_from_projections(
    proj: &ProjectionSet,
    geom: &Geometry,
    far_source: bool,
) -> Result<(RadonSpace4D, Array4<bool>)> {
    let derivs = detector_derivatives(proj, geom, far_source)?;
    let deriv = rebin(&derivs, geom)?;
    let mask = unrecoverable_mask(&deriv.shadow, geom);
    Ok((integrate_radial(&deriv), mask))
}

/// Mask returned by [`radon_from_projections`] for `geom`.
pub fn mask_for(geom: &Geometry) -> Array4<bool> {
    unrecoverable_mask(&shadow_mask(geom), geom)
}

/// Stacks per-projection detector transforms into one array
/// `[psi, family, p, l]`.
pub fn stack_derivatives(derivs: &[Drt2]) -> Array4<f64> {
    let (a, b, c) = derivs[0].data.dim();
    let mut out = Array4::zeros((derivs.len(), a, b, c));
    for (mut dst, d) in out.outer_iter_mut().zip(derivs) {
        dst.assign(&d.data);
    }
    out
}

/// Inverse of [`stack_derivatives`].
pub fn unstack_derivatives(stack: &Array4<f64>, du: f64) -> Vec<Drt2> {
    stack
        .outer_iter()
        .map(|d| Drt2 {
            n: d.dim().2 - 1,
            du,
            data: Array3::from(d.to_owned()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drt::brute_force_drt2;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geometry() -> Geometry {
        Geometry {
            sx: 64.0,
            nx: 8,
            su: 256.0,
            nu: 64,
            sp: 1500.0,
            so: 1000.0,
            n_proj: 8,
        }
    }

    #[test]
    fn preweight_examples() {
        let g = geometry();
        let img = DetectorImage {
            data: Array2::from_elem((64, 64), 3.0),
            pixel_size: g.du_virtual(),
        };
        assert_eq!(preweight(&img, 0.0, &g, true).data, img.data);
        let w = preweight(&img, 0.0, &g, false);
        assert_eq!(w.data[[32, 32]], 3.0);
        let corner = 85.333_333_333_333_33f64;
        let expected = 3.0 * 1000.0 / (2.0 * corner * corner + 1e6).sqrt();
        assert_abs_diff_eq!(w.data[[0, 0]], expected, epsilon = 1e-12);
        assert!(w.data.iter().all(|&v| v <= 3.0));
        assert!(far_source_default(&g));
        assert!(!far_source_default(&Geometry { sx: 200.0, so: 1000.0, ..g }));
    }

    #[test]
    fn derivative_matches_oracle_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = Array2::from_shape_fn((8, 8), |_| rng.random_range(0.0..1.0));
        let wp = WeightedProjection { data: data.clone(), psi: 0.0, du: 1.0 };
        let fast = detector_radon_derivative(&wp).unwrap();
        let slow = brute_force_drt2(data.view(), 1.0).unwrap();
        for f in 0..2 {
            for l in 0..=8 {
                for p in 0..17 {
                    let expected = if p == 16 { 0.0 } else { slow.data[[f, p + 1, l]] - slow.data[[f, p, l]] };
                    assert!((fast.data[[f, p, l]] - expected).abs() <= 1e-8);
                }
            }
        }
        let zero = WeightedProjection { data: Array2::zeros((8, 8)), psi: 0.0, du: 1.0 };
        assert!(detector_radon_derivative(&zero).unwrap().data.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn constant_lines_have_zero_difference() {
        let wp = WeightedProjection { data: Array2::ones((8, 8)), psi: 0.0, du: 1.0 };
        let d = detector_radon_derivative(&wp).unwrap();
        // q = 0 lines of both families cross 8 unit samples for p in -4..=3
        for f in 1..=2 {
            for p in -4..=2 {
                assert!(d.get(f, p, 0).abs() < 1e-10);
            }
            assert!((d.get(f, 3, 0) + 8.0).abs() < 1e-10);
        }
    }

    #[test]
    fn weight_formulas_on_the_axial_line() {
        assert_eq!(radial_step(16, 4.0, 0, 0), 4.0);
        assert_eq!(line_step(2.5, 0.0), 2.5);
        assert_eq!(cos2_beta(0.0, 1000.0), 1.0);
        assert_abs_diff_eq!(cos2_beta(10.0, 1000.0), 1e6 / (1e6 + 100.0), epsilon = 1e-15);
        assert_abs_diff_eq!(radial_step(8, 1.0, 4, -4), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn rebin_of_zero_and_linearity() {
        let g = geometry();
        let zero: Vec<Drt2> = (0..8).map(|_| Drt2::zeros(64, g.du_virtual())).collect();
        let r = rebin(&zero, &g).unwrap();
        assert!(r.values.data.iter().all(|&v| v == 0.0));
        assert!(r.values.data.index_axis(Axis(1), 0).iter().all(|&v| v == 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut random = || -> Vec<Drt2> {
            (0..8)
                .map(|_| {
                    let mut d = Drt2::zeros(64, g.du_virtual());
                    d.data.mapv_inplace(|_| rng.random_range(-1.0..1.0));
                    d
                })
                .collect()
        };
        let (a, b) = (random(), random());
        let combo: Vec<Drt2> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| Drt2 { data: &x.data * 2.0 - &y.data * 3.0, ..x.clone() })
            .collect();
        let (ra, rb, rc) = (rebin(&a, &g).unwrap(), rebin(&b, &g).unwrap(), rebin(&combo, &g).unwrap());
        for ((x, y), z) in ra.values.data.iter().zip(&rb.values.data).zip(&rc.values.data) {
            assert!((2.0 * x - 3.0 * y - z).abs() <= 1e-9 * (1.0 + z.abs()));
        }
        assert_eq!(ra.shadow, shadow_mask(&g));
        assert!(rebin(&a[..7], &g).is_err());
        assert!(matches!(rebin(&[], &g), Err(Error::EmptyInput)));
    }

    #[test]
    fn trapezoid_examples() {
        let n = 4;
        let zero = RadonDerivative4D {
            values: RadonSpace4D::zeros(n, 2.0),
            shadow: Array4::from_elem((3, 13, 5, 5), false),
        };
        assert!(integrate_radial(&zero).data.iter().all(|&v| v == 0.0));

        let mut constant = zero.clone();
        constant.values.data.fill(1.5);
        let out = integrate_radial(&constant);
        let h = radial_step(n, 2.0, 1, -2);
        assert_abs_diff_eq!(out.get(1, 6, 1, -2), 1.5 * h * 12.0, epsilon = 1e-12);
        assert_eq!(out.get(2, -6, 0, 0), 0.0);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_derivatives() {
        let n = 4;
        let mut d = RadonDerivative4D {
            values: RadonSpace4D::zeros(n, 1.5),
            shadow: Array4::from_elem((3, 13, 5, 5), false),
        };
        let h = 2i64;
        let quad = |r: f64| 0.3 * r * r - 2.0 * r + 1.0;
        for f in 0..3 {
            for l in 0..5 {
                for j in 0..5 {
                    let step = radial_step(n, 1.5, l as i64 - h, j as i64 - h);
                    for k in 0..13 {
                        let r = (k as f64 - 6.0) * step;
                        d.values.data[[f, k, l, j]] = 0.6 * r - 2.0;
                    }
                }
            }
        }
        let out = integrate_radial(&d);
        for f in 0..3 {
            for l in 0..5 {
                for j in 0..5 {
                    let step = radial_step(n, 1.5, l as i64 - h, j as i64 - h);
                    for k in 0..13 {
                        let r = (k as f64 - 6.0) * step;
                        let expected = quad(r) - quad(-6.0 * step);
                        assert!((out.data[[f, k, l, j]] - expected).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn shadow_fill_strategies() {
        let n = 4;
        let mut radon = RadonSpace4D::zeros(n, 1.0);
        radon.data.iter_mut().enumerate().for_each(|(i, v)| *v = 1.0 + i as f64);
        let empty = Array4::from_elem((3, 13, 5, 5), false);
        for s in [ShadowFill::Zero, ShadowFill::LinearTheta] {
            assert_eq!(fill_shadow_zone(&radon, &empty, s, None).unwrap(), radon);
        }

        let mut mask = empty.clone();
        // family 3 line at p = 2, j = 0: mask l = -1..=1
        for l in 1..=3 {
            mask[[2, 8, l, 2]] = true;
        }
        // family 1: mask j = 2 only (the whole line except edges)
        mask[[0, 3, 1, 2]] = true;
        // family 2: mask one end of a line
        mask[[1, 5, 0, 0]] = true;
        mask[[1, 5, 0, 1]] = true;

        let zero = fill_shadow_zone(&radon, &mask, ShadowFill::Zero, None).unwrap();
        for ((z, r), &m) in zero.data.iter().zip(&radon.data).zip(&mask) {
            assert_eq!(*z, if m { 0.0 } else { *r });
        }

        let lin = fill_shadow_zone(&radon, &mask, ShadowFill::LinearTheta, None).unwrap();
        let a = radon.data[[2, 8, 0, 2]];
        let b = radon.data[[2, 8, 4, 2]];
        for l in 1..=3 {
            assert_abs_diff_eq!(lin.data[[2, 8, l, 2]], a + (b - a) * l as f64 / 4.0, epsilon = 1e-12);
        }
        let mid = (radon.data[[0, 3, 1, 1]] + radon.data[[0, 3, 1, 3]]) / 2.0;
        assert_abs_diff_eq!(lin.data[[0, 3, 1, 2]], mid, epsilon = 1e-12);
        assert_eq!(lin.data[[1, 5, 0, 0]], radon.data[[1, 5, 0, 2]]);
        assert_eq!(lin.data[[1, 5, 0, 1]], radon.data[[1, 5, 0, 2]]);
        for ((x, r), &m) in lin.data.iter().zip(&radon.data).zip(&mask) {
            if !m {
                assert_eq!(x, r);
            }
        }

        assert!(matches!(
            fill_shadow_zone(&radon, &mask, ShadowFill::Oracle, None),
            Err(Error::MissingOracle)
        ));
        let oracle = RadonSpace4D { data: radon.data.mapv(|v| -v), ..radon.clone() };
        let copied = fill_shadow_zone(&radon, &mask, ShadowFill::Oracle, Some(&oracle)).unwrap();
        for ((c, r), &m) in copied.data.iter().zip(&radon.data).zip(&mask) {
            assert_eq!(*c, if m { -r } else { *r });
        }
    }

    #[test]
    fn interpolation_without_neighbors_is_zero() {
        let mut v = vec![5.0, 6.0];
        interpolate_masked(&mut v, &[true, true]);
        assert_eq!(v, vec![0.0, 0.0]);
        assert_eq!("linear".parse::<ShadowFill>().unwrap(), ShadowFill::LinearTheta);
        assert!("spline".parse::<ShadowFill>().is_err());
    }
}
