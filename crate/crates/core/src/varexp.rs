//! Variable exponent Lebesgue spaces on the grid: modular, Luxemburg norm,
//! log-Hoelder diagnostics, the Hardy-Littlewood maximal operator and the
//! `eta_{nu,m}` convolution family.

use std::f64::consts::E;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{fft_forward, fft_inverse, GridSignal, SpatialGrid};

/// Exponent `p(.)` sampled on the grid; `f64::INFINITY` marks `p(x) = inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    grid: SpatialGrid,
    values: Vec<f64>,
    p_minus: f64,
    p_plus: f64,
}

impl ExponentField {
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        let mut p_minus = f64::INFINITY;
        let mut p_plus = 0.0f64;
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!("exponent {v} at node {i} must be positive")));
            }
            p_minus = p_minus.min(v);
            if v.is_finite() {
                p_plus = p_plus.max(v);
            }
        }
        Ok(Self { grid, values, p_minus, p_plus })
    }

    pub fn constant(grid: SpatialGrid, p0: f64) -> Result<Self> {
        Self::new(grid, vec![p0; grid.n()])
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: SpatialGrid, f: F) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    /// `p0 + amp * sin(x)^2`.
    pub fn sin_perturbed(grid: SpatialGrid, p0: f64, amp: f64) -> Result<Self> {
        Self::from_fn(grid, |x| p0 + amp * x.sin().powi(2))
    }

    /// `left` on `x < 0`, `right` on `x >= 0`.
    pub fn two_level(grid: SpatialGrid, left: f64, right: f64) -> Result<Self> {
        Self::from_fn(grid, |x| if x < 0.0 { left } else { right })
    }

    /// Exponent with `1/p(x) = 1/log(e + |x|)`.
    pub fn log_decay(grid: SpatialGrid) -> Result<Self> {
        Self::from_fn(grid, |x| (E + x.abs()).ln())
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    /// Supremum over the finite-valued nodes (0 if every node is infinite).
    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn infinity_mask(&self) -> Vec<bool> {
        self.values.iter().map(|v| v.is_infinite()).collect()
    }

    /// Pointwise dual exponent `p'` with `1/p + 1/p' = 1`; requires `p >= 1`.
    pub fn conjugate(&self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.values.len());
        for &p in &self.values {
            if p < 1.0 {
                return Err(Error::InvalidParameter(format!("conjugate exponent needs p >= 1, got {p}")));
            }
            out.push(if p == 1.0 {
                f64::INFINITY
            } else if p.is_infinite() {
                1.0
            } else {
                p / (p - 1.0)
            });
        }
        Self::new(self.grid, out)
    }

    /// Restriction to every `stride`-th node (a coarser grid on the same torus).
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let grid = SpatialGrid::new(self.grid.n() / stride, self.grid.period())?;
        Self::new(grid, self.values.iter().step_by(stride).copied().collect())
    }
}

/// Named exponent generator, parsed from `constant[:p0]`,
/// `sin-perturbed[:p0[:amp]]`, `cos-perturbed[:p0[:amp]]`,
/// `two-level[:left[:right]]` or `log-decay`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentSpec {
    Constant(f64),
    SinPerturbed { p0: f64, amp: f64 },
    CosPerturbed { p0: f64, amp: f64 },
    TwoLevel { left: f64, right: f64 },
    LogDecay,
}

impl ExponentSpec {
    pub fn generate(&self, grid: SpatialGrid) -> Result<ExponentField> {
        match *self {
            ExponentSpec::Constant(p0) => ExponentField::constant(grid, p0),
            ExponentSpec::SinPerturbed { p0, amp } => ExponentField::sin_perturbed(grid, p0, amp),
            ExponentSpec::CosPerturbed { p0, amp } => ExponentField::from_fn(grid, |x| p0 + amp * x.cos().powi(2)),
            ExponentSpec::TwoLevel { left, right } => ExponentField::two_level(grid, left, right),
            ExponentSpec::LogDecay => ExponentField::log_decay(grid),
        }
    }
}

impl std::str::FromStr for ExponentSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default().trim();
        let args = parts
            .map(|a| a.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{a}' in exponent '{s}'"))))
            .collect::<Result<Vec<f64>>>()?;
        let arg = |i: usize, default: f64| args.get(i).copied().unwrap_or(default);
        Ok(match name {
            "constant" => ExponentSpec::Constant(arg(0, 2.0)),
            "sin-perturbed" => ExponentSpec::SinPerturbed { p0: arg(0, 2.0), amp: arg(1, 1.0) },
            "cos-perturbed" => ExponentSpec::CosPerturbed { p0: arg(0, 2.0), amp: arg(1, 1.0) },
            "two-level" => ExponentSpec::TwoLevel { left: arg(0, 2.0), right: arg(1, 3.0) },
            "log-decay" => ExponentSpec::LogDecay,
            _ => return Err(Error::Parse(format!("unknown exponent '{name}'"))),
        })
    }
}

fn check_grid(p: &ExponentField, f: &GridSignal) -> Result<()> {
    if p.grid != *f.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Modular of `|f| / exp(log_lambda)` from log-magnitudes.
fn modular_log(p: &ExponentField, log_abs: &[f64], log_lambda: f64, h: f64) -> f64 {
    let mut sum = 0.0;
    let mut sup = 0.0f64;
    for (&pi, &la) in p.values.iter().zip(log_abs) {
        if la == f64::NEG_INFINITY {
            continue;
        }
        let r = la - log_lambda;
        if pi.is_infinite() {
            sup = sup.max(r.exp());
        } else {
            sum += (pi * r).exp();
        }
    }
    sum * h + sup
}

fn log_abs(f: &[f64]) -> Vec<f64> {
    f.iter().map(|v| if *v == 0.0 { f64::NEG_INFINITY } else { v.abs().ln() }).collect()
}

/// `rho_p(f) = sum_{p<inf} |f|^p h + max_{p=inf} |f|`.
pub fn modular(p: &ExponentField, f: &GridSignal) -> Result<f64> {
    check_grid(p, f)?;
    Ok(modular_abs(p, &f.abs()))
}

pub(crate) fn modular_abs(p: &ExponentField, abs: &[f64]) -> f64 {
    modular_log(p, &log_abs(abs), 0.0, p.grid.step())
}

/// Luxemburg quasi-norm `inf{lambda > 0 : rho_p(f / lambda) <= 1}`.
pub fn luxemburg_norm(p: &ExponentField, f: &GridSignal) -> Result<f64> {
    check_grid(p, f)?;
    Ok(luxemburg_abs(p, &f.abs()))
}

/// Luxemburg norm of nonnegative samples on `p`'s grid.
pub(crate) fn luxemburg_abs(p: &ExponentField, abs: &[f64]) -> f64 {
    debug_assert_eq!(abs.len(), p.values.len());
    let la = log_abs(abs);
    let top = la.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    let h = p.grid.step();
    let rho = |t: f64| modular_log(p, &la, t, h);
    // bracket ln(lambda) with rho(lo) > 1 >= rho(hi)
    let mut lo = top;
    let mut hi = top;
    let mut step = 1.0;
    let mut guard = 0;
    while rho(hi) > 1.0 && guard < 2000 {
        hi += step;
        step *= 2.0;
        guard += 1;
    }
    step = 1.0;
    guard = 0;
    while rho(lo) <= 1.0 && guard < 2000 {
        lo -= step;
        step *= 2.0;
        guard += 1;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rho(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.exp()
}

/// Empirical log-Hoelder constants of `1/p`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogHolderReport {
    pub local_constant: f64,
    pub tail_constant: f64,
    pub g_infinity: f64,
    /// Local constant along the nested subgrids, coarsest first.
    pub refinement: Vec<f64>,
    /// Set when the local constant keeps growing under refinement.
    pub fails: bool,
}

fn reciprocal(p: &ExponentField) -> Vec<f64> {
    p.values.iter().map(|v| 1.0 / v).collect()
}

fn local_log_holder(grid: &SpatialGrid, g: &[f64]) -> f64 {
    let n = grid.n();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = grid.torus_distance(i, j);
            best = best.max((g[i] - g[j]).abs() * (E + 1.0 / d).ln());
        }
    }
    best
}

/// Local and decay constants of `g = 1/p`, plus a refinement study over the
/// nested subgrids obtained by dropping every other node.
pub fn log_holder_report(p: &ExponentField) -> LogHolderReport {
    let grid = p.grid;
    let g = reciprocal(p);
    let local = local_log_holder(&grid, &g);

    let mut far: Vec<f64> = (0..grid.n())
        .filter(|&i| grid.node(i).abs() >= 0.25 * grid.period())
        .map(|i| g[i])
        .collect();
    far.sort_by(|a, b| a.total_cmp(b));
    let g_inf = if far.is_empty() {
        0.0
    } else if far.len() % 2 == 1 {
        far[far.len() / 2]
    } else {
        0.5 * (far[far.len() / 2 - 1] + far[far.len() / 2])
    };
    let tail = (0..grid.n())
        .map(|i| (g[i] - g_inf).abs() * (E + grid.node(i).abs()).ln())
        .fold(0.0, f64::max);

    let mut refinement = Vec::new();
    let mut stride = 8usize;
    while stride >= 1 {
        if grid.n() / stride >= 8 {
            if let Ok(sub) = p.subsample(stride) {
                refinement.push(local_log_holder(&sub.grid, &reciprocal(&sub)));
            }
        }
        stride /= 2;
    }
    let growth: Vec<f64> = refinement.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 1.0 }).collect();
    let fails = growth.len() >= 2 && growth[growth.len() - 2..].iter().all(|&r| r > 1.05);

    LogHolderReport { local_constant: local, tail_constant: tail, g_infinity: g_inf, refinement, fails }
}

/// Centered maximal function, `O(n^2)` reference.
pub fn hl_maximal_reference(f: &GridSignal) -> GridSignal {
    let n = f.grid().n();
    let a = f.abs();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut sum = a[i];
        let mut best = sum;
        for r in 1..n / 2 {
            sum += a[(i + r) % n] + a[(i + n - r) % n];
            best = best.max(sum / (2 * r + 1) as f64);
        }
        *o = Complex64::new(best, 0.0);
    }
    GridSignal::new(*f.grid(), out).expect("finite averages")
}

/// Centered maximal function `Mf(x) = max_r (2r+1)^{-1} sum_{|j|<=r} |f(x + jh)|`
/// over all radii `r < n/2`, using prefix sums with an early exit once no
/// larger window can beat the running maximum.
pub fn hl_maximal(f: &GridSignal) -> GridSignal {
    let n = f.grid().n();
    let a = f.abs();
    let mut prefix = vec![0.0; 3 * n + 1];
    for k in 0..3 * n {
        prefix[k + 1] = prefix[k] + a[k % n];
    }
    let total = prefix[n];
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, o) in out.iter_mut().enumerate() {
        let c = i + n;
        let mut best = a[i];
        for r in 1..n / 2 {
            if total / (2 * r + 1) as f64 <= best {
                break;
            }
            let s = prefix[c + r + 1] - prefix[c - r];
            best = best.max(s / (2 * r + 1) as f64);
        }
        *o = Complex64::new(best, 0.0);
    }
    GridSignal::new(*f.grid(), out).expect("finite averages")
}

/// `int |f g| / (||f||_{p} ||g||_{p'})`.
pub fn holder_defect(p: &ExponentField, f: &GridSignal, g: &GridSignal) -> Result<f64> {
    check_grid(p, f)?;
    check_grid(p, g)?;
    let h = p.grid.step();
    let num: f64 = f.values().iter().zip(g.values()).map(|(a, b)| a.norm() * b.norm()).sum::<f64>() * h;
    if num == 0.0 {
        return Ok(0.0);
    }
    let q = p.conjugate()?;
    let den = luxemburg_norm(p, f)? * luxemburg_norm(&q, g)?;
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// Number of periodic images summed exactly before the analytic tail.
const ETA_IMAGES: i64 = 64;

/// Cell masses of the periodized kernel `eta_{nu,m}(x) = 2^nu (1 + 2^nu |x|)^{-m}`,
/// indexed by node offset in FFT order. The masses add up to `2/(m-1)`.
pub fn eta_weights(nu: i32, m: f64, grid: &SpatialGrid) -> Result<Vec<f64>> {
    if !(m > 1.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("decay order m = {m} must exceed 1")));
    }
    let s = 2f64.powi(nu);
    // odd antiderivative of eta
    let anti = |x: f64| x.signum() * (1.0 - (1.0 + s * x.abs()).powf(1.0 - m)) / (m - 1.0);
    let n = grid.n();
    let h = grid.step();
    let l = grid.period();
    let reach = (ETA_IMAGES as f64 + 0.5) * l;
    let tail = 2.0 * (1.0 + s * reach).powf(1.0 - m) / (m - 1.0);
    let mut w = vec![0.0; n];
    for (k, wk) in w.iter_mut().enumerate() {
        let d = grid.signed_index(k) as f64 * h;
        let mut acc = 0.0;
        for j in -ETA_IMAGES..=ETA_IMAGES {
            let c = d + j as f64 * l;
            acc += anti(c + 0.5 * h) - anti(c - 0.5 * h);
        }
        *wk = acc + tail / n as f64;
    }
    Ok(w)
}

/// Periodic convolution `eta_{nu,m} * f` with cell-integrated kernel masses.
pub fn eta_convolve(nu: i32, m: f64, f: &GridSignal) -> Result<GridSignal> {
    let grid = *f.grid();
    let w = eta_weights(nu, m, &grid)?;
    let n = grid.n();
    let mut kw: Vec<Complex64> = w.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fv = f.values().to_vec();
    fft_forward(&mut kw);
    fft_forward(&mut fv);
    for (a, b) in fv.iter_mut().zip(&kw) {
        *a *= b;
    }
    fft_inverse(&mut fv);
    let inv = 1.0 / n as f64;
    for v in fv.iter_mut() {
        *v *= inv;
    }
    GridSignal::new(grid, fv)
}
