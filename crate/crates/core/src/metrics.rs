//! Image quality metrics.

use ndarray::{s, ArrayView2, ArrayView3, ArrayViewD, Axis};

use crate::{Error, Result};

fn check_same_shape(a: &[usize], b: &[usize]) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch {
            expected: b.to_vec(),
            actual: a.to_vec(),
        });
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB, `+∞` for identical images.
pub fn psnr(recon: ArrayViewD<'_, f64>, reference: ArrayViewD<'_, f64>, mu_max: f64) -> Result<f64> {
    check_same_shape(recon.shape(), reference.shape())?;
    if mu_max.is_nan() || mu_max <= 0.0 {
        return Err(Error::InvalidParameter(format!("mu_max must be positive, got {mu_max}")));
    }
    if recon.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mse = recon
        .iter()
        .zip(reference.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / recon.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (mu_max * mu_max / mse).log10())
}

/// Half-open voxel-index box `start..end` along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Box3 {
    pub start: [usize; 3],
    pub end: [usize; 3],
}

impl Box3 {
    fn is_empty(&self) -> bool {
        (0..3).any(|k| self.end[k] <= self.start[k])
    }

    fn overlaps(&self, other: &Box3) -> bool {
        (0..3).all(|k| self.start[k] < other.end[k] && other.start[k] < self.end[k])
    }

    fn stats(&self, v: ArrayView3<'_, f64>) -> (f64, f64) {
        let region = v.slice(s![
            self.start[0]..self.end[0],
            self.start[1]..self.end[1],
            self.start[2]..self.end[2]
        ]);
        let n = region.len() as f64;
        let mean = region.sum() / n;
        let var = region.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        (mean, var)
    }
}

/// Region of interest and reference background for the contrast-to-noise
/// ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RegionSpec {
    pub roi: Box3,
    pub reference: Box3,
}

/// `|μ_ROI − μ_Ref| / √(σ_ROI² + σ_Ref²)` with population variances.
pub fn cnr(recon: ArrayView3<'_, f64>, regions: &RegionSpec) -> Result<f64> {
    let dim = recon.shape();
    for b in [&regions.roi, &regions.reference] {
        if b.is_empty() || (0..3).any(|k| b.end[k] > dim[k]) {
            return Err(Error::InvalidParameter(format!("region {b:?} is empty or outside {dim:?}")));
        }
    }
    if regions.roi.overlaps(&regions.reference) {
        return Err(Error::InvalidParameter("ROI and reference regions overlap".into()));
    }
    let (m_roi, v_roi) = regions.roi.stats(recon);
    let (m_ref, v_ref) = regions.reference.stats(recon);
    if v_roi == 0.0 && v_ref == 0.0 {
        return Err(Error::DegenerateRegions);
    }
    Ok((m_roi - m_ref).abs() / (v_roi + v_ref).sqrt())
}

/// SSIM window side and stabilizing constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub c1: f64,
    pub c2: f64,
}

impl SsimParams {
    /// 8×8 windows with `C1 = (0.01·μ_max)²`, `C2 = (0.03·μ_max)²`.
    pub fn new(mu_max: f64) -> Self {
        Self {
            window: 8,
            c1: (0.01 * mu_max).powi(2),
            c2: (0.03 * mu_max).powi(2),
        }
    }
}

/// Sum of SSIM over every stride-1 window of a 2D image pair, and the
/// window count.
fn ssim_sum_2d(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, p: &SsimParams) -> (f64, usize) {
    let w = p.window;
    let (rows, cols) = a.dim();
    let count = (w * w) as f64;
    let mut total = 0.0;
    let mut windows = 0;
    for i in 0..=rows - w {
        for j in 0..=cols - w {
            let wa = a.slice(s![i..i + w, j..j + w]);
            let wb = b.slice(s![i..i + w, j..j + w]);
            let ma = wa.sum() / count;
            let mb = wb.sum() / count;
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for (x, y) in wa.iter().zip(wb.iter()) {
                let (dx, dy) = (x - ma, y - mb);
                va += dx * dx;
                vb += dy * dy;
                cov += dx * dy;
            }
            let (va, vb, cov) = (va / count, vb / count, cov / count);
            total += ((2.0 * ma * mb + p.c1) * (2.0 * cov + p.c2)) / ((ma * ma + mb * mb + p.c1) * (va + vb + p.c2));
            windows += 1;
        }
    }
    (total, windows)
}

fn check_window(shape: &[usize], window: usize) -> Result<()> {
    if let Some(&side) = shape.iter().filter(|&&d| d < window).min() {
        return Err(Error::WindowTooLarge { side, window });
    }
    Ok(())
}

/// Mean SSIM of two 2D images.
pub fn mssim_2d(recon: ArrayView2<'_, f64>, reference: ArrayView2<'_, f64>, params: &SsimParams) -> Result<f64> {
    check_same_shape(recon.shape(), reference.shape())?;
    check_window(recon.shape(), params.window)?;
    let (total, windows) = ssim_sum_2d(recon, reference, params);
    Ok(total / windows as f64)
}

/// Mean SSIM of two volumes, averaged over the 2D windows of every slice
/// normal to the last axis.
pub fn mssim(recon: ArrayView3<'_, f64>, reference: ArrayView3<'_, f64>, params: &SsimParams) -> Result<f64> {
    check_same_shape(recon.shape(), reference.shape())?;
    check_window(&recon.shape()[..2], params.window)?;
    let mut total = 0.0;
    let mut windows = 0;
    for (a, b) in recon.axis_iter(Axis(2)).zip(reference.axis_iter(Axis(2))) {
        let (t, w) = ssim_sum_2d(a, b, params);
        total += t;
        windows += w;
    }
    if windows == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(total / windows as f64)
}
