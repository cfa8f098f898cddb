//! Admissible 2-microlocal weights `w(x, t)` on `X` and the associated
//! reservoir weight `nu` with its comparison weight `m_nu`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Scale, SpatialGrid};

/// Evaluator of a user-supplied weight.
pub type WeightFn = Arc<dyn Fn(f64, Scale) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum WeightKind {
    /// `t^{-s} (1 + |x - x0| / t)^{s'}`, and `(1 + |x - x0|)^{s'}` at infinity.
    Builtin { s: f64, sprime: f64, x0: f64 },
    User(WeightFn),
}

impl fmt::Debug for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Builtin { s, sprime, x0 } => {
                f.debug_struct("Builtin").field("s", s).field("sprime", sprime).field("x0", x0).finish()
            }
            WeightKind::User(_) => f.write_str("User"),
        }
    }
}

/// Weight in the class `W^{alpha3}_{alpha1, alpha2}` with declared parameters.
#[derive(Debug, Clone)]
pub struct Weight2ML {
    kind: WeightKind,
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
    /// Extra factor `t^{-shift}` on the finite sheet.
    shift: f64,
}

impl Weight2ML {
    pub fn builtin(s: f64, sprime: f64, x0: f64) -> Self {
        Self {
            kind: WeightKind::Builtin { s, sprime, x0 },
            alpha1: s + sprime.min(0.0),
            alpha2: s + sprime.max(0.0),
            alpha3: sprime.abs(),
            shift: 0.0,
        }
    }

    /// `w = 1`.
    pub fn unit() -> Self {
        Self::builtin(0.0, 0.0, 0.0)
    }

    /// Weight with caller-declared class parameters.
    pub fn user(f: WeightFn, alpha1: f64, alpha2: f64, alpha3: f64) -> Self {
        Self { kind: WeightKind::User(f), alpha1, alpha2, alpha3, shift: 0.0 }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn alphas(&self) -> (f64, f64, f64) {
        (self.alpha1, self.alpha2, self.alpha3)
    }

    pub fn eval(&self, x: f64, t: Scale) -> f64 {
        let base = match &self.kind {
            WeightKind::Builtin { s, sprime, x0 } => match t {
                Scale::Finite(t) => t.powf(-s) * (1.0 + (x - x0).abs() / t).powf(*sprime),
                Scale::Infinity => (1.0 + (x - x0).abs()).powf(*sprime),
            },
            WeightKind::User(f) => f(x, t),
        };
        match t {
            Scale::Finite(t) if self.shift != 0.0 => base * t.powf(-self.shift),
            _ => base,
        }
    }

    /// Samples of `w(., t)` on the grid nodes.
    pub fn sample(&self, grid: &SpatialGrid, t: Scale) -> Vec<f64> {
        grid.nodes().into_iter().map(|x| self.eval(x, t)).collect()
    }
}

/// `w_0 = w(., inf)`, `w_j = w(., 2^{-j})` for `1 <= j <= j_max`.
pub fn weight_sequence(w: &Weight2ML, grid: &SpatialGrid, j_max: usize) -> Vec<Vec<f64>> {
    (0..=j_max)
        .map(|j| {
            let t = if j == 0 { Scale::Infinity } else { Scale::Finite(2f64.powi(-(j as i32))) };
            w.sample(grid, t)
        })
        .collect()
}

/// `t^{-1/2} w(x, t)` on `(0,1)`, unchanged at infinity.
pub fn wtilde(w: &Weight2ML) -> Weight2ML {
    let mut out = w.clone();
    out.shift += 0.5;
    out.alpha1 += 0.5;
    out.alpha2 += 0.5;
    out
}

/// Largest relative violations found by [`check_admissible`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdmissibilityReport {
    pub samples: usize,
    pub w1_lower: f64,
    pub w1_upper: f64,
    pub w1_infinity: f64,
    pub w2: f64,
    pub w1_tilde: f64,
    pub st1: f64,
    pub st2: f64,
    /// Extremes of `w(x,t)/w(x,s)` over sampled pairs with `s/t` in `[1/2, 2]`.
    pub comparable_min: f64,
    pub comparable_max: f64,
}

impl AdmissibilityReport {
    pub fn max_violation(&self) -> f64 {
        [self.w1_lower, self.w1_upper, self.w1_infinity, self.w2, self.w1_tilde, self.st1, self.st2]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

/// Relative amount by which `lhs <= rhs` fails.
fn excess(lhs: f64, rhs: f64) -> f64 {
    ((lhs - rhs) / rhs.abs().max(f64::MIN_POSITIVE)).max(0.0)
}

fn sample_scale(rng: &mut ChaCha8Rng) -> f64 {
    // log-uniform on (1e-4, 1)
    10f64.powf(-4.0 * rng.gen::<f64>()).min(1.0 - 1e-12)
}

fn sample_position(rng: &mut ChaCha8Rng) -> f64 {
    // log-uniform distance from the origin in (1e-6, 20)
    let r = 10f64.powf(rng.gen_range(-6.0..1.3));
    if rng.gen::<bool>() {
        r
    } else {
        -r
    }
}

/// Random tuples `(x, y, s, t)` tested against the class inequalities with
/// the weight's declared parameters.
pub fn check_admissible(w: &Weight2ML, sample_budget: usize, seed: u64) -> AdmissibilityReport {
    check_with(w, w.alpha1, w.alpha2, w.alpha3, sample_budget, seed)
}

/// As [`check_admissible`] with explicit class parameters.
pub fn check_with(w: &Weight2ML, a1: f64, a2: f64, a3: f64, sample_budget: usize, seed: u64) -> AdmissibilityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = AdmissibilityReport {
        samples: sample_budget,
        comparable_min: f64::INFINITY,
        comparable_max: 0.0,
        ..Default::default()
    };
    for _ in 0..sample_budget {
        let x = sample_position(&mut rng);
        let y = sample_position(&mut rng);
        let a = sample_scale(&mut rng);
        let b = sample_scale(&mut rng);
        let (s, t) = if a >= b { (a, b) } else { (b, a) };
        let wt = w.eval(x, Scale::Finite(t));
        let ws = w.eval(x, Scale::Finite(s));
        let winf = w.eval(x, Scale::Infinity);
        let q = s / t;
        r.w1_lower = r.w1_lower.max(excess(q.powf(a1) * ws, wt));
        r.w1_upper = r.w1_upper.max(excess(wt, q.powf(a2) * ws));
        r.w1_infinity = r.w1_infinity.max(excess(t.powf(-a1) * winf, wt)).max(excess(wt, t.powf(-a2) * winf));

        let wyt = w.eval(y, Scale::Finite(t));
        r.w2 = r.w2.max(excess(wt, wyt * (1.0 + (x - y).abs() / t).powf(a3)));
        let wyi = w.eval(y, Scale::Infinity);
        r.w2 = r.w2.max(excess(winf, wyi * (1.0 + (x - y).abs()).powf(a3)));

        // roles swapped: s' = t <= t' = s
        let (sl, tl) = (t, s);
        let wsl = w.eval(x, Scale::Finite(sl));
        let wtl = w.eval(x, Scale::Finite(tl));
        let ql = sl / tl;
        r.w1_tilde = r.w1_tilde.max(excess(ql.powf(a2) * wsl, wtl)).max(excess(wtl, ql.powf(a1) * wsl));

        // scale-transfer bounds for arbitrary ordered pairs and a random c below the ratio
        let (u, v) = if rng.gen::<bool>() { (s, t) } else { (t, s) };
        let wu = w.eval(x, Scale::Finite(u));
        let wv = w.eval(x, Scale::Finite(v));
        let c1 = rng.gen::<f64>() * (u / v);
        let c2 = rng.gen::<f64>() * (v / u);
        let k = |c: f64| 1f64.max(c.powf(a1 - a2));
        r.st1 = r.st1.max(excess(wv / wu, k(c1) * (u / v).powf(a2)));
        r.st2 = r.st2.max(excess(wv / wu, k(c2) * (u / v).powf(a1)));

        let tc = sample_scale(&mut rng).max(1e-3);
        let sc = (tc * 2f64.powf(rng.gen_range(-1.0..1.0))).min(1.0 - 1e-12);
        let ratio = w.eval(x, Scale::Finite(tc)) / w.eval(x, Scale::Finite(sc));
        r.comparable_min = r.comparable_min.min(ratio);
        r.comparable_max = r.comparable_max.max(ratio);
    }
    r
}

/// Smallest class parameters consistent with sampled log-ratios.
pub fn empirical_class(w: &Weight2ML, sample_budget: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a1 = f64::INFINITY;
    let mut a2 = f64::NEG_INFINITY;
    let mut a3 = 0.0f64;
    for _ in 0..sample_budget {
        let x = sample_position(&mut rng);
        let y = sample_position(&mut rng);
        let a = sample_scale(&mut rng);
        let b = sample_scale(&mut rng);
        let (s, t) = if a >= b { (a, b) } else { (b, a) };
        if s / t > 1.0 + 1e-9 {
            let e = (w.eval(x, Scale::Finite(t)) / w.eval(x, Scale::Finite(s))).ln() / (s / t).ln();
            a1 = a1.min(e);
            a2 = a2.max(e);
        }
        let e = (w.eval(x, Scale::Finite(t)) / w.eval(x, Scale::Infinity)).ln() / (1.0 / t).ln();
        a1 = a1.min(e);
        a2 = a2.max(e);
        if (x - y).abs() > 1e-9 {
            let e = (w.eval(x, Scale::Finite(t)) / w.eval(y, Scale::Finite(t))).ln() / (1.0 + (x - y).abs() / t).ln();
            let ei = (w.eval(x, Scale::Infinity) / w.eval(y, Scale::Infinity)).ln() / (1.0 + (x - y).abs()).ln();
            a3 = a3.max(e).max(ei);
        }
    }
    (a1, a2, a3)
}

/// Point of `X`.
pub type XPoint = (f64, Scale);

/// `nu(x,t) = c t^{alpha1 - 1/p^-} (1+|x|)^{alpha3}`, `nu(x,inf) = c (1+|x|)^{alpha3}`,
/// with `c` chosen so that `nu >= 1` on the working window.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirWeight {
    exponent: f64,
    alpha3: f64,
    constant: f64,
}

impl ReservoirWeight {
    /// `t_min` is the smallest scale of the window.
    pub fn new(w: &Weight2ML, p_minus: f64, t_min: f64) -> Self {
        let exponent = w.alpha1 - 1.0 / p_minus;
        let low = if exponent >= 0.0 { t_min.powf(exponent) } else { 1.0 };
        Self { exponent, alpha3: w.alpha3, constant: 1.0 / low.min(1.0) }
    }

    pub fn eval(&self, x: f64, t: Scale) -> f64 {
        let spatial = (1.0 + x.abs()).powf(self.alpha3);
        match t {
            Scale::Finite(t) => self.constant * t.powf(self.exponent) * spatial,
            Scale::Infinity => self.constant * spatial,
        }
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }
}

/// `m_nu(x, y) = max(nu(x)/nu(y), nu(y)/nu(x))`.
pub fn m_nu(nu: &ReservoirWeight, x: XPoint, y: XPoint) -> f64 {
    let a = nu.eval(x.0, x.1);
    let b = nu.eval(y.0, y.1);
    (a / b).max(b / a)
}
