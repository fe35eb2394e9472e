//! Spectral primitives shared by the pseudo-polar and Radon transforms.
//!
//! Every transform here works on *centered* index ranges: a signal of length
//! `N` holds the samples `x[-⌊N/2⌋] .. x[N-1-⌊N/2⌋]` in slots `0..N`. The
//! forward sign convention is `exp(-2πi·…)`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array, ArrayView, Axis, Dimension, RemoveAxis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Periodic sinc `sin(πp) / (m·sin(πp/m))`.
///
/// At integer multiples of `m` this returns the limit of the expression,
/// which is 1 for odd `m`; at every other integer it is exactly zero.
pub fn dirichlet_kernel(p: f64, m: usize) -> f64 {
    let m_f = m as f64;
    let ratio = p / m_f;
    let wraps = ratio.round();
    if (ratio - wraps).abs() < 1e-13 {
        // limit cos(πp)/cos(πp/m) at p = j·m
        let j = wraps as i64;
        return if (j * (m as i64 - 1)).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    }
    if p == p.round() {
        return 0.0;
    }
    // reduce the numerator argument mod 2 so large offsets keep precision
    let reduced = p - 2.0 * (p / 2.0).round();
    (PI * reduced).sin() / (m_f * (PI * p / m_f).sin())
}

/// Scaling of a fractional Fourier transform `y[k] = Σ x[u]·exp(-2πi·α·k·u/m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrftFactor {
    pub alpha: f64,
    pub m: usize,
}

impl FrftFactor {
    pub fn new(alpha: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("frft kernel length must be >= 1".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter("frft factor must be finite".into()));
        }
        Ok(Self { alpha, m })
    }
}

/// Fractional Fourier transform on centered indices, evaluated exactly with
/// the chirp-z factorization. Output length equals input length.
pub fn frft(x: &[Complex64], factor: FrftFactor) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = x.len();
    let offset = -((n / 2) as f64);
    let mut planner = FftPlanner::new();
    let plan = ChirpZ::new(
        &mut planner,
        n,
        n,
        factor.alpha / factor.m as f64,
        offset,
        offset,
    );
    let mut out = vec![Complex64::default(); n];
    plan.process(x, &mut out, &mut Workspace::default());
    Ok(out)
}

/// Reusable scratch buffers for [`ChirpZ`] and [`CenteredDft`].
#[derive(Debug, Default)]
pub struct Workspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// Precomputed Bluestein evaluation of
/// `y[k] = Σ_u x[u]·exp(-2πi·β·(k + k0)·(u + u0))`
/// for `u < n_in`, `k < n_out`, using a power-of-two circular convolution.
pub struct ChirpZ {
    n_in: usize,
    n_out: usize,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    kernel: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ChirpZ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChirpZ")
            .field("n_in", &self.n_in)
            .field("n_out", &self.n_out)
            .field("conv_len", &self.kernel.len())
            .finish()
    }
}

/// `exp(sign·iπ·β·t²)` with the phase reduced mod 2 before scaling by π.
fn chirp(beta: f64, t: f64, sign: f64) -> Complex64 {
    let phase = (beta * t * t).rem_euclid(2.0);
    Complex64::from_polar(1.0, sign * PI * phase)
}

impl ChirpZ {
    pub fn new(
        planner: &mut FftPlanner<f64>,
        n_in: usize,
        n_out: usize,
        beta: f64,
        in_offset: f64,
        out_offset: f64,
    ) -> Self {
        assert!(n_in > 0 && n_out > 0, "chirp-z lengths must be positive");
        let len = (n_in + n_out - 1).next_power_of_two();
        let pre = (0..n_in)
            .map(|u| chirp(beta, u as f64 + in_offset, -1.0))
            .collect();
        let post = (0..n_out)
            .map(|k| chirp(beta, k as f64 + out_offset, -1.0))
            .collect();

        // h[d] = exp(iπβ(d + δ)²) for d in -(n_in-1)..n_out, stored circularly
        let delta = out_offset - in_offset;
        let mut kernel = vec![Complex64::default(); len];
        for d in -(n_in as i64 - 1)..(n_out as i64) {
            kernel[d.rem_euclid(len as i64) as usize] = chirp(beta, d as f64 + delta, 1.0);
        }
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(&mut kernel, &mut scratch);
        let scale = 1.0 / len as f64;
        kernel.iter_mut().for_each(|h| *h *= scale);

        Self {
            n_in,
            n_out,
            pre,
            post,
            kernel,
            fft,
            ifft,
        }
    }

    pub fn input_len(&self) -> usize {
        self.n_in
    }

    pub fn output_len(&self) -> usize {
        self.n_out
    }

    pub fn process(&self, input: &[Complex64], output: &mut [Complex64], ws: &mut Workspace) {
        assert_eq!(input.len(), self.n_in);
        assert_eq!(output.len(), self.n_out);
        let len = self.kernel.len();
        ws.buf.clear();
        ws.buf.resize(len, Complex64::default());
        for ((b, &x), &c) in ws.buf.iter_mut().zip(input).zip(&self.pre) {
            *b = x * c;
        }
        let need = self
            .fft
            .get_inplace_scratch_len()
            .max(self.ifft.get_inplace_scratch_len());
        if ws.scratch.len() < need {
            ws.scratch.resize(need, Complex64::default());
        }
        self.fft.process_with_scratch(&mut ws.buf, &mut ws.scratch);
        for (b, &h) in ws.buf.iter_mut().zip(&self.kernel) {
            *b *= h;
        }
        self.ifft.process_with_scratch(&mut ws.buf, &mut ws.scratch);
        for ((y, &b), &c) in output.iter_mut().zip(&ws.buf).zip(&self.post) {
            *y = b * c;
        }
    }
}

/// Length-`m` DFT between centered index ranges:
/// `y[k] = Σ_u x[u]·exp(∓2πi·k·u/m)`, inverse scaled by `1/m`.
///
/// The input may be shorter than `m`; it is then treated as zero-padded
/// around its centered range.
pub struct CenteredDft {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CenteredDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CenteredDft").field("m", &self.m).finish()
    }
}

impl CenteredDft {
    pub fn new(planner: &mut FftPlanner<f64>, m: usize) -> Self {
        Self {
            m,
            fft: planner.plan_fft_forward(m),
            ifft: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn forward(&self, input: &[Complex64], output: &mut [Complex64], ws: &mut Workspace) {
        self.run(input, output, ws, false);
    }

    pub fn inverse(&self, input: &[Complex64], output: &mut [Complex64], ws: &mut Workspace) {
        self.run(input, output, ws, true);
        let scale = 1.0 / self.m as f64;
        output.iter_mut().for_each(|y| *y *= scale);
    }

    fn run(&self, input: &[Complex64], output: &mut [Complex64], ws: &mut Workspace, inverse: bool) {
        let m = self.m as i64;
        assert!(input.len() <= self.m && output.len() <= self.m);
        ws.buf.clear();
        ws.buf.resize(self.m, Complex64::default());
        let in_half = (input.len() / 2) as i64;
        for (i, &x) in input.iter().enumerate() {
            ws.buf[(i as i64 - in_half).rem_euclid(m) as usize] = x;
        }
        let plan = if inverse { &self.ifft } else { &self.fft };
        let need = plan.get_inplace_scratch_len();
        if ws.scratch.len() < need {
            ws.scratch.resize(need, Complex64::default());
        }
        plan.process_with_scratch(&mut ws.buf, &mut ws.scratch);
        let out_half = (output.len() / 2) as i64;
        for (i, y) in output.iter_mut().enumerate() {
            *y = ws.buf[(i as i64 - out_half).rem_euclid(m) as usize];
        }
    }
}

/// Places `x` on the centered range of a zero vector of length `new_len`.
pub fn pad_centered<T: Copy + Default>(x: &[T], new_len: usize) -> Vec<T> {
    assert!(new_len >= x.len(), "cannot pad to a shorter length");
    let shift = new_len / 2 - x.len() / 2;
    let mut out = vec![T::default(); new_len];
    out[shift..shift + x.len()].copy_from_slice(x);
    out
}

/// Inverse of [`pad_centered`]: keeps the centered `new_len` samples.
pub fn truncate_centered<T: Copy>(x: &[T], new_len: usize) -> Vec<T> {
    assert!(new_len <= x.len(), "cannot truncate to a longer length");
    let shift = x.len() / 2 - new_len / 2;
    x[shift..shift + new_len].to_vec()
}

/// Zero-pads `array` along `axis` to `new_len`, keeping the original samples
/// on the centered index range.
pub fn pad_axis_centered<A, D>(array: ArrayView<'_, A, D>, axis: Axis, new_len: usize) -> Array<A, D>
where
    A: Copy + Default,
    D: Dimension + RemoveAxis,
{
    let old_len = array.len_of(axis);
    assert!(new_len >= old_len, "cannot pad to a shorter length");
    let mut shape = array.raw_dim();
    shape[axis.index()] = new_len;
    let mut out = Array::from_elem(shape, A::default());
    let shift = new_len / 2 - old_len / 2;
    for (i, lane) in array.axis_iter(axis).enumerate() {
        out.index_axis_mut(axis, i + shift).assign(&lane);
    }
    out
}

/// Applies an in-place 1D transform to every lane of `array` along `axis`.
pub(crate) fn for_each_lane<D: Dimension>(
    array: &mut Array<Complex64, D>,
    axis: Axis,
    mut f: impl FnMut(&mut [Complex64]),
) {
    let mut line = Vec::with_capacity(array.len_of(axis));
    for mut lane in array.lanes_mut(axis) {
        line.clear();
        line.extend(lane.iter().copied());
        f(&mut line);
        lane.iter_mut().zip(&line).for_each(|(dst, &src)| *dst = src);
    }
}

/// Centered forward or inverse DFT of length `array.len_of(axis)` applied
/// along `axis`.
pub fn dft_axis<D: Dimension>(array: &mut Array<Complex64, D>, axis: Axis, inverse: bool) {
    let m = array.len_of(axis);
    let mut planner = FftPlanner::new();
    let dft = CenteredDft::new(&mut planner, m);
    let mut ws = Workspace::default();
    let mut out = vec![Complex64::default(); m];
    for_each_lane(array, axis, |line| {
        if inverse {
            dft.inverse(line, &mut out, &mut ws);
        } else {
            dft.forward(line, &mut out, &mut ws);
        }
        line.copy_from_slice(&out);
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    /// Quadratic-time reference for the centered fractional transform.
    fn frft_direct(x: &[Complex64], alpha: f64, m: usize) -> Vec<Complex64> {
        let half = (x.len() / 2) as f64;
        (0..x.len())
            .map(|k| {
                let kk = k as f64 - half;
                x.iter()
                    .enumerate()
                    .map(|(u, &xu)| {
                        let uu = u as f64 - half;
                        xu * Complex64::from_polar(1.0, -2.0 * PI * alpha * kk * uu / m as f64)
                    })
                    .sum()
            })
            .collect()
    }

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn dirichlet_limits_and_zeros() {
        assert_eq!(dirichlet_kernel(0.0, 17), 1.0);
        assert_eq!(dirichlet_kernel(3.0, 17), 0.0);
        assert_eq!(dirichlet_kernel(17.0, 17), 1.0);
        assert_eq!(dirichlet_kernel(-34.0, 17), 1.0);
    }

    #[test]
    fn dirichlet_half_offset_matches_formula() {
        // sin(π/2) / (17·sin(π/34)) from a 40-digit evaluation
        let expected = 0.637_526_555_732_907_1;
        assert_relative_eq!(dirichlet_kernel(0.5, 17), expected, epsilon = 1e-15);
    }

    #[test]
    fn dirichlet_is_interpolating_on_integers() {
        for m in [5usize, 9, 17, 25] {
            for p in -(m as i64 - 1)..(m as i64) {
                let expected = if p == 0 { 1.0 } else { 0.0 };
                assert_eq!(dirichlet_kernel(p as f64, m), expected, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn frft_zero_factor_sums_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_signal(&mut rng, 11);
        let total: Complex64 = x.iter().sum();
        let y = frft(&x, FrftFactor::new(0.0, 23).unwrap()).unwrap();
        for v in y {
            assert!((v - total).norm() < 1e-12);
        }
    }

    #[test]
    fn frft_unit_factor_is_centered_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = 17;
        let x = random_signal(&mut rng, m);
        let y = frft(&x, FrftFactor::new(1.0, m).unwrap()).unwrap();
        let mut planner = FftPlanner::new();
        let dft = CenteredDft::new(&mut planner, m);
        let mut expected = vec![Complex64::default(); m];
        dft.forward(&x, &mut expected, &mut Workspace::default());
        assert!(max_abs_diff(&y, &expected) < 1e-12);
    }

    #[test]
    fn frft_matches_direct_sum_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_signal(&mut rng, 9);
        let y = frft(&x, FrftFactor::new(2.0 / 3.0, 19).unwrap()).unwrap();
        assert!(max_abs_diff(&y, &frft_direct(&x, 2.0 / 3.0, 19)) <= 1e-10);
    }

    #[test]
    fn frft_matches_direct_sum_all_short_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=32 {
            let x = random_signal(&mut rng, n);
            let alpha = rng.random_range(-3.0..3.0);
            let m = 2 * n + 1;
            let y = frft(&x, FrftFactor::new(alpha, m).unwrap()).unwrap();
            assert!(max_abs_diff(&y, &frft_direct(&x, alpha, m)) <= 1e-9, "n={n}");
        }
    }

    #[test]
    fn frft_rejects_empty_input() {
        assert!(matches!(
            frft(&[], FrftFactor::new(1.0, 3).unwrap()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn chirp_z_with_distinct_lengths_and_offsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_signal(&mut rng, 7);
        let (beta, u0, k0) = (0.037, -3.0, -5.0);
        let mut planner = FftPlanner::new();
        let plan = ChirpZ::new(&mut planner, 7, 11, beta, u0, k0);
        let mut y = vec![Complex64::default(); 11];
        plan.process(&x, &mut y, &mut Workspace::default());
        for (k, yk) in y.iter().enumerate() {
            let expected: Complex64 = x
                .iter()
                .enumerate()
                .map(|(u, &xu)| {
                    xu * Complex64::from_polar(
                        1.0,
                        -2.0 * PI * beta * (k as f64 + k0) * (u as f64 + u0),
                    )
                })
                .sum();
            assert!((yk - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn centered_dft_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut planner = FftPlanner::new();
        for m in [1usize, 2, 7, 16, 25, 49] {
            let x = random_signal(&mut rng, m);
            let dft = CenteredDft::new(&mut planner, m);
            let mut ws = Workspace::default();
            let mut spec = vec![Complex64::default(); m];
            let mut back = vec![Complex64::default(); m];
            dft.forward(&x, &mut spec, &mut ws);
            dft.inverse(&spec, &mut back, &mut ws);
            let err: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let norm: f64 = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!(err / norm <= 1e-10, "m={m}");
        }
    }

    #[test]
    fn centered_dft_of_short_input_is_padded_sum() {
        let x = vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        let mut planner = FftPlanner::new();
        let dft = CenteredDft::new(&mut planner, 5);
        let mut y = vec![Complex64::default(); 5];
        dft.forward(&x, &mut y, &mut Workspace::default());
        // x[-1] = 1, x[0] = 2
        for (i, yk) in y.iter().enumerate() {
            let k = i as f64 - 2.0;
            let expected = Complex64::from_polar(1.0, 2.0 * PI * k / 5.0) + 2.0;
            assert!((yk - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn padding_examples() {
        let x: Vec<f64> = (1..=8).map(f64::from).collect();
        assert_eq!(pad_centered(&x, 8), x);
        let padded = pad_centered(&x, 17);
        assert_eq!(padded.len(), 17);
        assert_eq!(&padded[4..12], &x[..]);
        assert!(padded[..4].iter().chain(&padded[12..]).all(|&v| v == 0.0));
        assert_eq!(truncate_centered(&padded, 8), x);

        let short = [1.0, 2.0, 3.0, 4.0];
        let p13 = pad_centered(&short, 13);
        assert_eq!(p13.len(), 13);
        // centered index 0 (value 3.0) lands on the middle slot
        assert_eq!(p13[6], 3.0);
    }

    #[test]
    fn pad_axis_keeps_centered_slices() {
        let a = Array2::from_shape_fn((4, 3), |(i, j)| (i * 3 + j) as f64 + 1.0);
        let p = pad_axis_centered(a.view(), Axis(0), 9);
        assert_eq!(p.dim(), (9, 3));
        assert_eq!(p.row(4 - 2 + 2), a.row(2));
        assert_eq!(p.row(2), a.row(0));
        assert!(p.row(0).iter().all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn frft_is_linear(
            seed in 0u64..1000,
            n in 1usize..20,
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
            alpha in -2.0f64..2.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_signal(&mut rng, n);
            let y = random_signal(&mut rng, n);
            let f = FrftFactor::new(alpha, 2 * n + 1).unwrap();
            let combo: Vec<_> = x.iter().zip(&y).map(|(p, q)| p * a + q * b).collect();
            let lhs = frft(&combo, f).unwrap();
            let fx = frft(&x, f).unwrap();
            let fy = frft(&y, f).unwrap();
            let rhs: Vec<_> = fx.iter().zip(&fy).map(|(p, q)| p * a + q * b).collect();
            prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-10);
        }
    }
}
