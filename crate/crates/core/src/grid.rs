//! Periodic spatial grid, Fourier transforms, the geometric scale axis and
//! fields over the discretized index set `X = R x ((0,1) u {inf})`.
//!
//! Fourier convention: `f^(xi) = (2 pi)^{-1/2} \int e^{-i x xi} f(x) dx`,
//! approximated on the torus `[-L/2, L/2)` by a Riemann sum. Spectra are
//! stored in FFT order, frequency node `k` being `2 pi k / L` for the signed
//! index `k in {-n/2, ..., n/2 - 1}`.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = plans.lock().unwrap();
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Unnormalized forward DFT, `X_k = sum_j x_j e^{-2 pi i jk/n}`.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    fft_plan(buf.len(), false).process(buf);
}

/// Unnormalized inverse DFT, `x_j = sum_k X_k e^{2 pi i jk/n}`.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    fft_plan(buf.len(), true).process(buf);
}

/// Uniform periodic grid on `[-L/2, L/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    n: usize,
    period: f64,
}

impl SpatialGrid {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two >= 8")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period {period} must be positive")));
        }
        Ok(Self { n, period })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn step(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -0.5 * self.period + i as f64 * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Signed frequency index of FFT slot `k`.
    pub fn signed_index(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Frequency node of FFT slot `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        2.0 * PI * self.signed_index(k) as f64 / self.period
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.frequency(k)).collect()
    }

    /// Quadrature weight of one frequency node, `2 pi / L`.
    pub fn frequency_weight(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Largest representable frequency magnitude, `pi / h`.
    pub fn nyquist(&self) -> f64 {
        PI / self.step()
    }

    /// Index distance on the torus.
    pub fn index_distance(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        d.min(self.n - d)
    }

    pub fn torus_distance(&self, i: usize, j: usize) -> f64 {
        self.index_distance(i, j) as f64 * self.step()
    }

    /// Grid refined by `factor` (a power of two) on the same torus.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.n * factor, self.period)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: len });
        }
        Ok(())
    }
}

/// Complex samples of a function on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl GridSignal {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        grid.check_len(values.len())?;
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self { grid, values: vec![ZERO; grid.n] }
    }

    pub fn from_real(grid: SpatialGrid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn<F: FnMut(f64) -> Complex64>(grid: SpatialGrid, mut f: F) -> Self {
        let values = (0..grid.n).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Discrete `L_2` norm `(sum |f|^2 h)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step()).sqrt()
    }

    /// `<self, other> = sum f conj(g) h`.
    pub fn inner(&self, other: &GridSignal) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.step())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &GridSignal) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn sub(&self, other: &GridSignal) -> Result<Self> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }
}

/// Frequency samples `f^(xi_k)` in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// `sum |f^|^2 (2 pi / L)`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.frequency_weight()
    }

    /// Pointwise product with a filter sampled in FFT order.
    pub fn multiply(&self, filter: &[Complex64]) -> Result<Self> {
        self.grid.check_len(filter.len())?;
        let values = self.values.iter().zip(filter).map(|(a, b)| a * b).collect();
        Ok(Self { grid: self.grid, values })
    }
}

/// Unitary transform to frequency samples.
pub fn to_frequency(s: &GridSignal) -> Spectrum {
    let grid = s.grid;
    let mut buf = s.values.clone();
    fft_forward(&mut buf);
    let c = grid.step() / (2.0 * PI).sqrt();
    for (k, v) in buf.iter_mut().enumerate() {
        // x_0 = -L/2 contributes the phase (-1)^k
        let sign = if k % 2 == 0 { c } else { -c };
        *v *= sign;
    }
    Spectrum { grid, values: buf }
}

/// Inverse of [`to_frequency`].
pub fn to_space(spec: &Spectrum) -> GridSignal {
    let grid = spec.grid;
    let mut buf: Vec<Complex64> = spec
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 0 { *v } else { -*v })
        .collect();
    fft_inverse(&mut buf);
    let c = (2.0 * PI).sqrt() / grid.period();
    for v in buf.iter_mut() {
        *v *= c;
    }
    GridSignal { grid, values: buf }
}

/// Continuous convolution `Phi * f` of band-limited periodic functions, given
/// the samples `Phi^(xi_k)` in FFT order.
pub fn convolve(filter_hat: &[Complex64], s: &GridSignal) -> Result<GridSignal> {
    s.grid.check_len(filter_hat.len())?;
    let spec = to_frequency(s);
    Ok(convolve_spectrum(filter_hat, &spec))
}

/// Same as [`convolve`] for a signal already in the frequency domain.
pub fn convolve_spectrum(filter_hat: &[Complex64], spec: &Spectrum) -> GridSignal {
    let c = (2.0 * PI).sqrt();
    let values = spec.values.iter().zip(filter_hat).map(|(a, b)| a * b * c).collect();
    to_space(&Spectrum { grid: spec.grid, values })
}

/// Scale parameter: a point of `(0, 1]` or the isolated point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    Finite(f64),
    Infinity,
}

/// Dilation normalization: `L1` keeps `Phi^(0)`, `L2` keeps the `L_2` norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    L1,
    L2,
}

/// Samples of `Phi^(t xi)` (times `t^{1/2}` for [`Normalization::L2`]) on the
/// frequency nodes. At `t = inf` the profile is sampled at unit scale.
pub fn dilate_filter<F>(phi_hat: F, t: Scale, grid: &SpatialGrid, norm: Normalization) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    let (t, amp) = match t {
        Scale::Infinity => (1.0, 1.0),
        Scale::Finite(t) => {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidScale(t));
            }
            let amp = match norm {
                Normalization::L1 => 1.0,
                Normalization::L2 => t.sqrt(),
            };
            (t, amp)
        }
    };
    Ok((0..grid.n).map(|k| phi_hat(t * grid.frequency(k)) * amp).collect())
}

/// Geometric scale axis for `(0,1)` with midpoint cells in `log t`.
///
/// Slot `m` (0-based) carries `t_m = base^{-(m + 1/2)/M}` and covers the cell
/// `[base^{-(m+1)/M}, base^{-m/M})`; an extra slot holds `t = inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleAxis {
    base: f64,
    per_octave: usize,
    octaves: usize,
    scales: Vec<f64>,
    delta: f64,
}

impl ScaleAxis {
    pub fn new(base: f64, per_octave: usize, octaves: usize) -> Result<Self> {
        if !(base.is_finite() && base > 1.0) {
            return Err(Error::InvalidParameter(format!("scale base {base} must exceed 1")));
        }
        if per_octave == 0 || octaves == 0 {
            return Err(Error::InvalidParameter("per_octave and octaves must be >= 1".into()));
        }
        let m_total = per_octave * octaves;
        let scales = (0..m_total)
            .map(|m| base.powf(-(m as f64 + 0.5) / per_octave as f64))
            .collect();
        Ok(Self { base, per_octave, octaves, scales, delta: base.ln() / per_octave as f64 })
    }

    /// Dyadic axis with `per_octave` subscales.
    pub fn dyadic(per_octave: usize, octaves: usize) -> Result<Self> {
        Self::new(2.0, per_octave, octaves)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn per_octave(&self) -> usize {
        self.per_octave
    }

    pub fn octaves(&self) -> usize {
        self.octaves
    }

    /// Finite scales, strictly decreasing.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Number of finite scale slots.
    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Number of slots including infinity.
    pub fn slots(&self) -> usize {
        self.scales.len() + 1
    }

    /// Index of the infinity slot.
    pub fn infinity_slot(&self) -> usize {
        self.scales.len()
    }

    pub fn scale(&self, slot: usize) -> Scale {
        if slot == self.scales.len() {
            Scale::Infinity
        } else {
            Scale::Finite(self.scales[slot])
        }
    }

    /// Log-scale quadrature weight `ln(base) / M`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn log_weights(&self) -> Vec<f64> {
        vec![self.delta; self.scales.len()]
    }

    /// Cell `[lo, hi)` in `t` represented by finite slot `m`.
    pub fn cell(&self, m: usize) -> (f64, f64) {
        let mf = self.per_octave as f64;
        (self.base.powf(-(m as f64 + 1.0) / mf), self.base.powf(-(m as f64) / mf))
    }

    /// Smallest represented scale `base^{-J}`.
    pub fn min_scale(&self) -> f64 {
        self.base.powf(-(self.octaves as f64))
    }

    /// Axis with twice as many subscales per octave.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.base, self.per_octave * 2, self.octaves)
    }

    /// Smallest number of dyadic octaves such that a band profile supported
    /// in `|xi| >= lower` covers frequencies up to `max_freq`.
    pub fn octaves_to_cover(max_freq: f64, lower: f64) -> usize {
        let r = (max_freq / lower).max(1.0);
        (r.ln() / LN_2).ceil().max(1.0) as usize
    }
}

/// `int_0^1 g(t) dt/t` on the axis by the log-midpoint rule.
pub fn scale_integral(axis: &ScaleAxis, g: &[f64]) -> Result<f64> {
    if g.len() != axis.len() {
        return Err(Error::LengthMismatch { expected: axis.len(), actual: g.len() });
    }
    let mut s = 0.0;
    for (m, v) in g.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(m));
        }
        s += v * axis.delta;
    }
    Ok(s)
}

/// Complex field over (grid node, scale slot), infinity slot last.
#[derive(Debug, Clone, PartialEq)]
pub struct XField {
    grid: SpatialGrid,
    axis: ScaleAxis,
    values: Vec<Complex64>,
}

impl XField {
    pub fn zeros(grid: SpatialGrid, axis: ScaleAxis) -> Self {
        let len = grid.n * axis.slots();
        Self { grid, axis, values: vec![ZERO; len] }
    }

    pub fn new(grid: SpatialGrid, axis: ScaleAxis, values: Vec<Complex64>) -> Result<Self> {
        let len = grid.n * axis.slots();
        if values.len() != len {
            return Err(Error::LengthMismatch { expected: len, actual: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, axis, values })
    }

    pub fn from_real(grid: SpatialGrid, axis: ScaleAxis, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, axis, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn axis(&self) -> &ScaleAxis {
        &self.axis
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_index(&self, node: usize, slot: usize) -> usize {
        slot * self.grid.n + node
    }

    pub fn get(&self, node: usize, slot: usize) -> Complex64 {
        self.values[slot * self.grid.n + node]
    }

    pub fn set(&mut self, node: usize, slot: usize, v: Complex64) {
        let n = self.grid.n;
        self.values[slot * n + node] = v;
    }

    pub fn slot(&self, slot: usize) -> &[Complex64] {
        let n = self.grid.n;
        &self.values[slot * n..(slot + 1) * n]
    }

    pub fn slot_mut(&mut self, slot: usize) -> &mut [Complex64] {
        let n = self.grid.n;
        &mut self.values[slot * n..(slot + 1) * n]
    }

    /// Measure weight of a cell in `slot`: `h * Delta / t` or `h` at infinity.
    pub fn mu_weight(&self, slot: usize) -> f64 {
        mu_weight(&self.grid, &self.axis, slot)
    }

    pub fn mu_weights(&self) -> Vec<f64> {
        let n = self.grid.n;
        (0..self.values.len()).map(|c| self.mu_weight(c / n)).collect()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// `(sum |F|^2 mu)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let n = self.grid.n;
        let mut s = 0.0;
        for slot in 0..self.axis.slots() {
            let w = self.mu_weight(slot);
            s += w * self.values[slot * n..(slot + 1) * n].iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        s.sqrt()
    }

    /// `<F, G>_mu = sum F conj(G) mu`.
    pub fn inner(&self, other: &XField) -> Result<Complex64> {
        self.check_same(other)?;
        let n = self.grid.n;
        let mut s = ZERO;
        for slot in 0..self.axis.slots() {
            let w = self.mu_weight(slot);
            let part: Complex64 = self.slot(slot).iter().zip(other.slot(slot)).map(|(a, b)| a * b.conj()).sum();
            s += part * w;
        }
        let _ = n;
        Ok(s)
    }

    pub fn check_same(&self, other: &XField) -> Result<()> {
        if self.grid != other.grid || self.axis != other.axis {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid, axis: self.axis.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &XField) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, axis: self.axis.clone(), values })
    }

    pub fn sub(&self, other: &XField) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, axis: self.axis.clone(), values })
    }
}

pub(crate) fn mu_weight(grid: &SpatialGrid, axis: &ScaleAxis, slot: usize) -> f64 {
    match axis.scale(slot) {
        Scale::Infinity => grid.step(),
        Scale::Finite(t) => grid.step() * axis.delta() / t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(grid: SpatialGrid, seed: u64) -> GridSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridSignal::from_fn(grid, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(SpatialGrid::new(4, 1.0).is_err());
        assert!(SpatialGrid::new(100, 1.0).is_err());
        assert!(SpatialGrid::new(64, 0.0).is_err());
        let g = SpatialGrid::new(64, 64.0).unwrap();
        assert_eq!(g.step() * 64.0, 64.0);
        assert_eq!(g.frequency(32), -2.0 * PI * 32.0 / 64.0);
    }

    #[test]
    fn constant_maps_to_dc_spike() {
        let g = SpatialGrid::new(64, 64.0).unwrap();
        let s = GridSignal::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let spec = to_frequency(&s);
        let dc = g.period() / (2.0 * PI).sqrt();
        assert!((spec.values()[0] - Complex64::new(dc, 0.0)).norm() < 1e-12);
        for v in &spec.values()[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut n = 64;
        while n <= 8192 {
            let g = SpatialGrid::new(n, 64.0).unwrap();
            let s = random_signal(g, n as u64);
            let spec = to_frequency(&s);
            let back = to_space(&spec);
            let err = s.values().iter().zip(back.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n} err={err}");
            // direct two-sided sums
            let lhs: f64 = s.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * g.step();
            let rhs: f64 = spec.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * g.frequency_weight();
            assert!((lhs - rhs).abs() / lhs < 1e-12);
            n *= 2;
        }
    }

    #[test]
    fn to_frequency_matches_direct_sum() {
        let g = SpatialGrid::new(32, 8.0).unwrap();
        let s = random_signal(g, 3);
        let spec = to_frequency(&s);
        for k in 0..g.n() {
            let xi = g.frequency(k);
            let direct: Complex64 = (0..g.n())
                .map(|i| s.values()[i] * Complex64::from_polar(1.0, -g.node(i) * xi))
                .sum::<Complex64>()
                * (g.step() / (2.0 * PI).sqrt());
            assert!((direct - spec.values()[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_identity_filter() {
        let g = SpatialGrid::new(128, 16.0).unwrap();
        let s = random_signal(g, 1);
        let delta = vec![Complex64::new((2.0 * PI).powf(-0.5), 0.0); g.n()];
        let out = convolve(&delta, &s).unwrap();
        for (a, b) in out.values().iter().zip(s.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(convolve(&delta[..10], &s).is_err());
    }

    #[test]
    fn gaussian_convolution_matches_quadrature() {
        // Gaussians of width ~1 on a torus of length 32 are periodic to machine precision.
        let g = SpatialGrid::new(256, 32.0).unwrap();
        let sa = 0.7f64;
        let sb = 1.1f64;
        let f = GridSignal::from_fn(g, |x| Complex64::new((-(x - 1.0).powi(2) / (2.0 * sb * sb)).exp(), 0.0));
        let kernel = |x: f64| (-x * x / (2.0 * sa * sa)).exp();
        // hat of exp(-x^2/2s^2) is s exp(-s^2 xi^2 / 2)
        let filter: Vec<Complex64> =
            g.frequencies().iter().map(|&xi| Complex64::new(sa * (-sa * sa * xi * xi / 2.0).exp(), 0.0)).collect();
        let fast = convolve(&filter, &f).unwrap();
        let mut err2 = 0.0;
        let mut ref2 = 0.0;
        for i in 0..g.n() {
            let mut acc = 0.0;
            for j in 0..g.n() {
                let mut d = g.node(i) - g.node(j);
                d -= g.period() * (d / g.period()).round();
                acc += kernel(d) * f.values()[j].re * g.step();
            }
            err2 += (fast.values()[i].re - acc).powi(2) + fast.values()[i].im.powi(2);
            ref2 += acc * acc;
        }
        assert!((err2 / ref2).sqrt() < 1e-8);
    }

    #[test]
    fn convolution_is_linear() {
        let g = SpatialGrid::new(64, 8.0).unwrap();
        let a = random_signal(g, 10);
        let b = random_signal(g, 11);
        let filt: Vec<Complex64> = g.frequencies().iter().map(|&xi| Complex64::new((-xi * xi).exp(), xi)).collect();
        let ca = Complex64::new(0.3, -2.0);
        let cb = Complex64::new(-1.5, 0.25);
        let lhs = convolve(&filt, &a.scaled(ca).add(&b.scaled(cb)).unwrap()).unwrap();
        let rhs = convolve(&filt, &a).unwrap().scaled(ca).add(&convolve(&filt, &b).unwrap().scaled(cb)).unwrap();
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn dilation_behaviour() {
        let g = SpatialGrid::new(64, 8.0).unwrap();
        let prof = |xi: f64| Complex64::new((-xi * xi).exp(), 0.0);
        let unit = dilate_filter(prof, Scale::Finite(1.0), &g, Normalization::L1).unwrap();
        for (k, v) in unit.iter().enumerate() {
            assert_eq!(*v, prof(g.frequency(k)));
        }
        for t in [1.0, 0.5, 0.1] {
            let d = dilate_filter(prof, Scale::Finite(t), &g, Normalization::L1).unwrap();
            assert_eq!(d[0], prof(0.0));
        }
        assert!(dilate_filter(prof, Scale::Finite(0.0), &g, Normalization::L1).is_err());
        assert!(dilate_filter(prof, Scale::Finite(-1.0), &g, Normalization::L2).is_err());
    }

    #[test]
    fn scale_integral_rules() {
        let axis = ScaleAxis::dyadic(16, 5).unwrap();
        let ones = vec![1.0; axis.len()];
        let v = scale_integral(&axis, &ones).unwrap();
        assert!((v - 5.0 * LN_2).abs() / (5.0 * LN_2) < 1e-12);
        // g(t) = t integrates to 1 - 2^-J; midpoint error is O(Delta^2)
        let exact = 1.0 - 2f64.powi(-5);
        let e16 = (scale_integral(&axis, axis.scales()).unwrap() - exact).abs();
        let axis32 = axis.refined().unwrap();
        let e32 = (scale_integral(&axis32, axis32.scales()).unwrap() - exact).abs();
        assert!(e16 < axis.delta().powi(2));
        assert!((e16 / e32 - 4.0).abs() < 0.1, "ratio {}", e16 / e32);
        let bad = vec![f64::NAN; axis.len()];
        assert!(scale_integral(&axis, &bad).is_err());
    }

    #[test]
    fn axis_invariants() {
        let axis = ScaleAxis::new(2.0, 4, 3).unwrap();
        let s = axis.scales();
        assert!(s.windows(2).all(|w| w[0] > w[1]));
        assert!(s.iter().all(|&t| t > 0.0 && t < 1.0));
        assert_eq!(axis.slots(), 13);
        assert_eq!(axis.scale(12), Scale::Infinity);
        let (lo, hi) = axis.cell(0);
        assert!((hi - 1.0).abs() < 1e-15 && (lo - 2f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn mu_weights_are_positive() {
        let g = SpatialGrid::new(16, 4.0).unwrap();
        let axis = ScaleAxis::dyadic(2, 2).unwrap();
        let f = XField::zeros(g, axis.clone());
        for slot in 0..axis.len() {
            let t = axis.scales()[slot];
            assert!((f.mu_weight(slot) - g.step() * axis.delta() / t).abs() < 1e-15);
        }
        assert_eq!(f.mu_weight(axis.infinity_slot()), g.step());
        // int_{2^-J}^1 t^{-2} dt computed with t^{d} integrand
        let mass: f64 = (0..axis.len()).map(|m| f.mu_weight(m) / g.step()).sum();
        let exact = 2f64.powi(2) - 1.0;
        assert!((mass - exact).abs() / exact < axis.delta().powi(2));
    }
}
