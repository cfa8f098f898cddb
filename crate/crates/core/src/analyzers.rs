//! Frequency-domain generators: smooth ramps, dyadic partitions of unity,
//! the Meyer scaling function and wavelet, Tauberian and moment checks, and
//! admissible pairs `(Phi_0, Phi)` for the continuous wavelet frame.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ScaleAxis;
use crate::quadrature::{gauss_legendre, CompositeRule};

/// Frequency profile `xi -> Phi^(xi)`.
pub type Profile = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Monotone transition `nu: R -> [0,1]`, 0 below 0, 1 above 1, with
/// `nu(u) + nu(1-u) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ramp {
    /// `e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)})`, infinitely smooth.
    Exponential,
    /// `u^4 (35 - 84u + 70u^2 - 20u^3)`, three times differentiable.
    Polynomial,
}

impl Ramp {
    pub fn eval(self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match self {
            Ramp::Exponential => {
                let a = (-1.0 / u).exp();
                let b = (-1.0 / (1.0 - u)).exp();
                a / (a + b)
            }
            Ramp::Polynomial => u.powi(4) * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u.powi(3)),
        }
    }
}

// ---------------------------------------------------------------------------
// dyadic partition of unity

/// `phi_0 = 1` on `|xi| <= 1`, `0` on `|xi| >= 2`; `phi(xi) = phi_0(xi) - phi_0(2 xi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicPU {
    ramp: Ramp,
}

impl DyadicPU {
    pub fn ramp(&self) -> Ramp {
        self.ramp
    }

    pub fn phi0(&self, xi: f64) -> f64 {
        // 1 - nu(|xi| - 1), written without cancellation
        self.ramp.eval(2.0 - xi.abs())
    }

    pub fn phi(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a <= 0.5 || a >= 2.0 {
            0.0
        } else if a <= 1.0 {
            self.ramp.eval(2.0 * a - 1.0)
        } else {
            self.ramp.eval(2.0 - a)
        }
    }

    /// `phi_j(xi)`: `phi_0` for `j = 0`, `phi(2^{-j} xi)` otherwise.
    pub fn phi_j(&self, j: usize, xi: f64) -> f64 {
        if j == 0 {
            self.phi0(xi)
        } else {
            self.phi(xi * 2f64.powi(-(j as i32)))
        }
    }

    /// `sum_{j <= J} phi_j(xi)`, which telescopes to `phi_0(2^{-J} xi)`.
    pub fn partial_sum(&self, j_max: usize, xi: f64) -> f64 {
        (0..=j_max).map(|j| self.phi_j(j, xi)).sum()
    }

    /// Band profile of `phi`, supported in `1/2 <= |xi| <= 2`.
    pub fn band(&self) -> BandProfile {
        let pu = *self;
        BandProfile::new(Arc::new(move |xi| real(pu.phi(xi))), 0.5, 2.0).expect("valid band")
    }

    pub fn phi0_profile(&self) -> Profile {
        let pu = *self;
        Arc::new(move |xi| real(pu.phi0(xi)))
    }
}

pub fn dyadic_partition() -> DyadicPU {
    DyadicPU { ramp: Ramp::Exponential }
}

/// Partition built from a chosen ramp.
pub fn dyadic_partition_with(ramp: Ramp) -> DyadicPU {
    DyadicPU { ramp }
}

// ---------------------------------------------------------------------------
// Meyer system

/// Meyer scaling function and wavelet in the frequency domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeyerSystem {
    ramp: Ramp,
}

const TWO_PI_3: f64 = 2.0 * PI / 3.0;
const FOUR_PI_3: f64 = 4.0 * PI / 3.0;
const EIGHT_PI_3: f64 = 8.0 * PI / 3.0;

impl MeyerSystem {
    pub fn ramp(&self) -> Ramp {
        self.ramp
    }

    pub fn psi0_hat(&self, xi: f64) -> Complex64 {
        let a = xi.abs();
        let c = (2.0 * PI).powf(-0.5);
        if a <= TWO_PI_3 {
            real(c)
        } else if a <= FOUR_PI_3 {
            real(c * (FRAC_PI_2 * self.ramp.eval(3.0 * a / (2.0 * PI) - 1.0)).cos())
        } else {
            real(0.0)
        }
    }

    pub fn psi1_hat(&self, xi: f64) -> Complex64 {
        let a = xi.abs();
        let c = (2.0 * PI).powf(-0.5);
        let m = if a <= TWO_PI_3 || a >= EIGHT_PI_3 {
            0.0
        } else if a <= FOUR_PI_3 {
            (FRAC_PI_2 * self.ramp.eval(3.0 * a / (2.0 * PI) - 1.0)).sin()
        } else {
            (FRAC_PI_2 * self.ramp.eval(3.0 * a / (4.0 * PI) - 1.0)).cos()
        };
        Complex64::from_polar(c * m, 0.5 * xi)
    }

    pub fn psi0_profile(&self) -> Profile {
        let m = *self;
        Arc::new(move |xi| m.psi0_hat(xi))
    }

    pub fn psi1_profile(&self) -> Profile {
        let m = *self;
        Arc::new(move |xi| m.psi1_hat(xi))
    }

    /// The wavelet as a band profile on `2pi/3 <= |xi| <= 8pi/3`.
    pub fn band(&self) -> BandProfile {
        BandProfile::with_breaks(self.psi1_profile(), TWO_PI_3, EIGHT_PI_3, vec![FOUR_PI_3]).expect("valid band")
    }

    /// `psi^c(x)` for `c in {0, 1}`, by quadrature of the inverse transform.
    pub fn eval(&self, c: u8, x: f64) -> f64 {
        // psi is real: psi(x) = 2 (2pi)^{-1/2} Re int_0^inf psi^(xi) e^{i x xi} dxi
        let f = |xi: f64| {
            let v = if c == 0 { self.psi0_hat(xi) } else { self.psi1_hat(xi) };
            (v * Complex64::from_polar(1.0, x * xi)).re
        };
        let rule = CompositeRule::new(16, 48);
        let s = if c == 0 {
            rule.integrate_split(f, 0.0, FOUR_PI_3, &[TWO_PI_3])
        } else {
            rule.integrate_split(f, TWO_PI_3, EIGHT_PI_3, &[FOUR_PI_3])
        };
        2.0 * s / (2.0 * PI).sqrt()
    }
}

pub fn meyer_generators(ramp: Ramp) -> MeyerSystem {
    MeyerSystem { ramp }
}

/// `psi^c(x) = prod_i psi^{c_i}(x_i)`.
pub fn tensor_wavelet(system: &MeyerSystem, c: &[u8], point: &[f64]) -> Result<f64> {
    if c.is_empty() || c.len() != point.len() {
        return Err(Error::InvalidParameter("pattern and point need equal positive length".into()));
    }
    if c.iter().any(|&ci| ci > 1) {
        return Err(Error::InvalidParameter("pattern entries must be 0 or 1".into()));
    }
    Ok(c.iter().zip(point).map(|(&ci, &xi)| system.eval(ci, xi)).product())
}

// ---------------------------------------------------------------------------
// band profiles and scale energies

const TABLE_PANELS: usize = 2048;
const TABLE_ORDER: usize = 10;

/// Profile supported in `lo <= |xi| <= hi`, with the tabulated scale energy
/// `E_pm(u) = int_0^u |Phi^(pm v)|^2 dv/v`.
#[derive(Clone)]
pub struct BandProfile {
    f: Profile,
    lo: f64,
    hi: f64,
    /// cumulative energies at the panel ends in `log u`, for `+` and `-`.
    cum: [Vec<f64>; 2],
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl fmt::Debug for BandProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandProfile").field("lo", &self.lo).field("hi", &self.hi).finish()
    }
}

impl BandProfile {
    pub fn new(f: Profile, lo: f64, hi: f64) -> Result<Self> {
        Self::with_breaks(f, lo, hi, Vec::new())
    }

    /// `breaks` are points where the profile is less smooth; they only
    /// serve as a hint and may be omitted.
    pub fn with_breaks(f: Profile, lo: f64, hi: f64, _breaks: Vec<f64>) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("band [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        let (nodes, weights) = gauss_legendre(TABLE_ORDER);
        let mut out = Self { f, lo, hi, cum: [Vec::new(), Vec::new()], nodes, weights };
        let ds = (hi / lo).ln() / TABLE_PANELS as f64;
        for (side, sign) in [(0usize, 1.0f64), (1, -1.0)] {
            let mut cum = Vec::with_capacity(TABLE_PANELS + 1);
            cum.push(0.0);
            let mut acc = 0.0;
            for k in 0..TABLE_PANELS {
                let a = lo.ln() + k as f64 * ds;
                acc += out.panel(sign, a, a + ds);
                cum.push(acc);
            }
            out.cum[side] = cum;
        }
        Ok(out)
    }

    fn panel(&self, sign: f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let u = (mid + half * x).exp();
            s += w * (self.f)(sign * u).norm_sqr();
        }
        s * half
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        (self.f)(xi)
    }

    pub fn profile(&self) -> Profile {
        self.f.clone()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// `int_0^1 |Phi^(t xi)|^2 dt/t`.
    pub fn scale_energy(&self, xi: f64) -> f64 {
        let u = xi.abs();
        let side = if xi >= 0.0 { 0 } else { 1 };
        let sign = if xi >= 0.0 { 1.0 } else { -1.0 };
        if u <= self.lo {
            return 0.0;
        }
        if u >= self.hi {
            return self.cum[side][TABLE_PANELS];
        }
        let ds = (self.hi / self.lo).ln() / TABLE_PANELS as f64;
        let s = u.ln() - self.lo.ln();
        let k = ((s / ds) as usize).min(TABLE_PANELS - 1);
        let a = self.lo.ln() + k as f64 * ds;
        self.cum[side][k] + self.panel(sign, a, u.ln())
    }

    /// `int_0^inf |Phi^(pm u)|^2 du/u` for both signs.
    pub fn total_energy(&self) -> (f64, f64) {
        (self.cum[0][TABLE_PANELS], self.cum[1][TABLE_PANELS])
    }

    pub fn scaled(&self, a: f64) -> Self {
        let f = self.f.clone();
        let mut out = self.clone();
        out.f = Arc::new(move |xi| f(xi) * a);
        for side in 0..2 {
            for v in out.cum[side].iter_mut() {
                *v *= a * a;
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// analyzer pairs

/// Order `R` of the moment conditions `D^k Phi^(0) = 0`, `k <= R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MomentOrder {
    Finite(i32),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairNormalization {
    Raw,
    Parseval,
}

/// Generators `(Phi_0, Phi)` of a continuous wavelet frame.
#[derive(Clone)]
pub struct AnalyzerPair {
    phi0: Profile,
    phi: BandProfile,
    /// `Phi_0^` vanishes for `|xi| >= phi0_radius`.
    phi0_radius: f64,
    pub epsilon0: f64,
    pub epsilon: f64,
    pub moment_order: MomentOrder,
    /// Constant of the admissibility identity, if the pair satisfies one.
    pub admissibility_constant: Option<f64>,
    pub normalization: PairNormalization,
}

impl fmt::Debug for AnalyzerPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyzerPair")
            .field("phi", &self.phi)
            .field("phi0_radius", &self.phi0_radius)
            .field("epsilon0", &self.epsilon0)
            .field("epsilon", &self.epsilon)
            .field("moment_order", &self.moment_order)
            .field("admissibility_constant", &self.admissibility_constant)
            .field("normalization", &self.normalization)
            .finish()
    }
}

impl AnalyzerPair {
    /// Pair from explicit generators, without an admissibility identity.
    pub fn from_parts(phi0: Profile, phi0_radius: f64, phi: BandProfile, epsilon0: f64, epsilon: f64) -> Self {
        Self {
            phi0,
            phi,
            phi0_radius,
            epsilon0,
            epsilon,
            moment_order: MomentOrder::Infinite,
            admissibility_constant: None,
            normalization: PairNormalization::Raw,
        }
    }

    /// `(psi^0, psi^1)` of the Meyer system.
    pub fn meyer_raw(system: &MeyerSystem) -> Self {
        Self::from_parts(system.psi0_profile(), FOUR_PI_3, system.band(), TWO_PI_3, FOUR_PI_3)
    }

    /// `(phi_0, phi)` of a dyadic partition of unity.
    pub fn dyadic(pu: &DyadicPU) -> Self {
        Self::from_parts(pu.phi0_profile(), 2.0, pu.band(), 0.5, 1.0)
    }

    pub fn phi0_hat(&self, xi: f64) -> Complex64 {
        (self.phi0)(xi)
    }

    pub fn phi_hat(&self, xi: f64) -> Complex64 {
        self.phi.eval(xi)
    }

    pub fn phi0_profile(&self) -> Profile {
        self.phi0.clone()
    }

    pub fn phi_profile(&self) -> Profile {
        self.phi.profile()
    }

    pub fn band(&self) -> &BandProfile {
        &self.phi
    }

    pub fn phi0_radius(&self) -> f64 {
        self.phi0_radius
    }

    /// `|Phi_0^(xi)|^2 + int_0^1 |Phi^(t xi)|^2 dt/t`.
    pub fn coverage(&self, xi: f64) -> f64 {
        self.phi0_hat(xi).norm_sqr() + self.phi.scale_energy(xi)
    }

    /// Rescale both generators by `((2 pi) C)^{-1/2}` so the frame is Parseval.
    pub fn parseval(&self) -> Result<Self> {
        let c = self
            .admissibility_constant
            .ok_or_else(|| Error::InvalidParameter("pair has no admissibility constant".into()))?;
        let k = 1.0 / (2.0 * PI * c).sqrt();
        let phi0 = self.phi0.clone();
        let mut out = self.clone();
        out.phi0 = Arc::new(move |xi| phi0(xi) * k);
        out.phi = self.phi.scaled(k);
        out.admissibility_constant = Some(1.0 / (2.0 * PI));
        out.normalization = PairNormalization::Parseval;
        Ok(out)
    }

    /// `max_xi | |Phi_0^|^2 + sum_m Delta |Phi^(t_m xi)|^2 - C | / C` over `freqs`.
    pub fn discrete_admissibility_defect(&self, axis: &ScaleAxis, freqs: &[f64]) -> Result<f64> {
        let c = self
            .admissibility_constant
            .ok_or_else(|| Error::InvalidParameter("pair has no admissibility constant".into()))?;
        let mut worst = 0.0f64;
        for &xi in freqs {
            let mut s = self.phi0_hat(xi).norm_sqr();
            for &t in axis.scales() {
                s += axis.delta() * self.phi_hat(t * xi).norm_sqr();
            }
            worst = worst.max((s - c).abs() / c);
        }
        Ok(worst)
    }

    pub fn moment_check(&self, order: i32) -> MomentReport {
        moment_check(&self.phi, order)
    }

    pub fn tauberian_check(&self, band_limit: f64) -> TauberianReport {
        tauberian_check(self, band_limit)
    }
}

/// Builds `Phi_0^(xi) = (C - int_0^1 |Phi^(t xi)|^2 dt/t)^{1/2}`; `C` defaults
/// to the total scale energy of `phi`.
pub fn make_admissible_pair(phi: BandProfile, c: Option<f64>) -> Result<AnalyzerPair> {
    let (ep, em) = phi.total_energy();
    let c = c.unwrap_or(ep.max(em));
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("admissibility constant {c} must be positive")));
    }
    let (lo, hi) = phi.support();
    // radicand is monotone in |xi|; its minimum sits at the top of the band
    for (sign, e) in [(1.0, ep), (-1.0, em)] {
        let r = c - e;
        if r < -1e-12 * c {
            // locate the first offending frequency
            let mut a = lo;
            let mut b = hi;
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if c - phi.scale_energy(sign * m) < -1e-12 * c {
                    b = m;
                } else {
                    a = m;
                }
            }
            return Err(Error::NegativeRadicand { xi: sign * b, value: c - phi.scale_energy(sign * b) });
        }
    }
    let tail = (c - ep.min(em)).max(0.0);
    let band = phi.clone();
    let phi0: Profile = Arc::new(move |xi| real((c - band.scale_energy(xi)).max(0.0).sqrt()));
    // positivity radius of Phi_0^: it vanishes only past the band when C is the full energy
    let radius = if tail > 1e-12 * c { f64::INFINITY } else { hi };
    let moment = moment_check(&phi, 0).order;
    Ok(AnalyzerPair {
        phi0,
        phi,
        phi0_radius: radius,
        epsilon0: 0.25 * (lo + hi),
        epsilon: (lo * hi).sqrt(),
        moment_order: moment,
        admissibility_constant: Some(c),
        normalization: PairNormalization::Raw,
    })
}

/// Admissible Meyer pair, Parseval-normalized.
pub fn meyer_pair(ramp: Ramp) -> AnalyzerPair {
    make_admissible_pair(meyer_generators(ramp).band(), None)
        .and_then(|p| p.parseval())
        .expect("Meyer band is admissible")
}

/// Real bump `exp(1 - 1/(1 - r^2))`, `r = log2 |xi|`, on `1/2 < |xi| < 2`.
pub fn bump_band() -> BandProfile {
    let f: Profile = Arc::new(|xi: f64| {
        let a = xi.abs();
        if a <= 0.5 || a >= 2.0 {
            return real(0.0);
        }
        let r = a.log2();
        real((1.0 - 1.0 / (1.0 - r * r)).exp())
    });
    BandProfile::new(f, 0.5, 2.0).expect("valid band")
}

// ---------------------------------------------------------------------------
// Tauberian and moment checks

#[derive(Debug, Clone, PartialEq)]
pub struct TauberianReport {
    pub epsilon0: f64,
    pub epsilon: f64,
    /// `|Phi_0^| > 0` on `|xi| < 2 eps0`.
    pub phi0_ok: bool,
    pub phi0_witness: Option<f64>,
    /// `|Phi^| > 0` on `eps/2 < |xi| < 2 eps`.
    pub phi_ok: bool,
    pub phi_witness: Option<f64>,
    /// `inf_xi |Phi_0^|^2 + int_0^1 |Phi^(t xi)|^2 dt/t` over the working band.
    pub coverage_inf: f64,
    pub coverage_witness: f64,
}

impl TauberianReport {
    pub fn passes(&self) -> bool {
        self.phi0_ok && self.phi_ok && self.coverage_inf > 0.0
    }
}

/// Samples per open interval; the interior spacing keeps the smooth ramps
/// above the floating point underflow threshold.
const TAUBER_SAMPLES: usize = 400;

fn first_zero<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Option<f64> {
    for k in 0..TAUBER_SAMPLES {
        let x = a + (b - a) * (k as f64 + 0.5) / TAUBER_SAMPLES as f64;
        for s in [x, -x] {
            if !(f(s) > 0.0) {
                return Some(s);
            }
        }
    }
    None
}

/// Dense-sample check of the Tauberian conditions with separate radii, plus
/// the coverage infimum over `|xi| <= band_limit`.
pub fn tauberian_check(pair: &AnalyzerPair, band_limit: f64) -> TauberianReport {
    let e0 = pair.epsilon0;
    let e = pair.epsilon;
    let phi0_witness = first_zero(|x| pair.phi0_hat(x).norm(), 0.0, 2.0 * e0);
    let phi_witness = first_zero(|x| pair.phi_hat(x).norm(), 0.5 * e, 2.0 * e);
    let mut inf = f64::INFINITY;
    let mut witness = 0.0;
    let samples = 4001;
    for k in 0..samples {
        let xi = -band_limit + 2.0 * band_limit * k as f64 / (samples - 1) as f64;
        let v = pair.coverage(xi);
        if v < inf {
            inf = v;
            witness = xi;
        }
    }
    TauberianReport {
        epsilon0: e0,
        epsilon: e,
        phi0_ok: phi0_witness.is_none(),
        phi0_witness,
        phi_ok: phi_witness.is_none(),
        phi_witness,
        coverage_inf: inf,
        coverage_witness: witness,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    /// Requested order `R`.
    pub requested: i32,
    /// `|D^k Phi^(0)|` for `k = 0..=R`, empty for `R < 0`.
    pub derivatives: Vec<f64>,
    pub passes: bool,
    /// Largest order satisfied (checked up to [`MAX_MOMENT_ORDER`]).
    pub order: MomentOrder,
}

pub const MAX_MOMENT_ORDER: i32 = 6;
const MOMENT_TOL: f64 = 1e-8;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn central_derivative<F: Fn(f64) -> Complex64>(f: &F, k: usize, h: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..=k {
        let x = (0.5 * k as f64 - i as f64) * h;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        s += f(x) * (sign * binomial(k, i));
    }
    s / h.powi(k as i32)
}

/// `k`-th derivative at 0 by Richardson-extrapolated central differences.
fn derivative_at_zero<F: Fn(f64) -> Complex64>(f: &F, k: usize) -> f64 {
    if k == 0 {
        return f(0.0).norm();
    }
    let h = f64::EPSILON.powf(1.0 / (k as f64 + 4.0)) * 2.0;
    let d1 = central_derivative(f, k, h);
    let d2 = central_derivative(f, k, 0.5 * h);
    ((d2 * 4.0 - d1) / 3.0).norm()
}

fn vanishes_near_zero<F: Fn(f64) -> Complex64>(f: &F) -> bool {
    (0..=200).all(|k| {
        let x = 1e-2 * k as f64 / 200.0;
        f(x).norm() == 0.0 && f(-x).norm() == 0.0
    })
}

/// Moment conditions `D^k Phi^(0) = 0` for `k <= order` of a profile.
pub fn moment_check_profile<F: Fn(f64) -> Complex64>(f: F, order: i32) -> MomentReport {
    if vanishes_near_zero(&f) {
        let derivatives = vec![0.0; (order + 1).max(0) as usize];
        return MomentReport { requested: order, derivatives, passes: true, order: MomentOrder::Infinite };
    }
    let scale = (0..=100).map(|k| f(0.05 * k as f64).norm()).fold(1.0, f64::max);
    let top = order.max(MAX_MOMENT_ORDER);
    let all: Vec<f64> = (0..=top.max(0) as usize).map(|k| derivative_at_zero(&f, k)).collect();
    let mut achieved = -1;
    for (k, d) in all.iter().enumerate() {
        if *d <= MOMENT_TOL * scale {
            achieved = k as i32;
        } else {
            break;
        }
    }
    let derivatives: Vec<f64> = all.iter().take((order + 1).max(0) as usize).copied().collect();
    MomentReport { requested: order, passes: achieved >= order, derivatives, order: MomentOrder::Finite(achieved) }
}

pub fn moment_check(phi: &BandProfile, order: i32) -> MomentReport {
    moment_check_profile(|x| phi.eval(x), order)
}
