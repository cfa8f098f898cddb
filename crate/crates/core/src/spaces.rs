//! Besov and Triebel-Lizorkin type quasi-norms with variable exponents and
//! 2-microlocal weights: the Littlewood-Paley definition, the four
//! continuous characterizations by local means, the Peetre-Wiener spaces on
//! `X`, the sequence spaces of a covering and the decomposition-space norm.

use rayon::prelude::*;
use serde::Serialize;

use crate::analyzers::{AnalyzerPair, DyadicPU};
use crate::coorbit::Covering;
use crate::error::{Error, Result};
use crate::grid::{convolve_spectrum, dilate_filter, to_frequency, GridSignal, Normalization, Scale, ScaleAxis, SpatialGrid, Spectrum, XField};
use crate::signals::spectral_tail;
use crate::transform::{peetre_slice, peetre_wiener_maximal, wiener_window, VoiceTransform};
use crate::varexp::{luxemburg_abs, ExponentField};
use crate::weights::{wtilde, Weight2ML};

/// Spectral mass fraction above which a truncated scale sum is flagged.
pub const TRUNCATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    F,
    B,
    P,
    L,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    Def,
    Norm1,
    Norm2,
    Norm3,
    Norm4,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Def, Variant::Norm1, Variant::Norm2, Variant::Norm3, Variant::Norm4];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Def => "def",
            Variant::Norm1 => "norm1",
            Variant::Norm2 => "norm2",
            Variant::Norm3 => "norm3",
            Variant::Norm4 => "norm4",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown variant '{s}'")))
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" | "f" => Ok(Family::F),
            "B" | "b" => Ok(Family::B),
            "P" | "p" => Ok(Family::P),
            "L" | "l" => Ok(Family::L),
            _ => Err(Error::Parse(format!("unknown family '{s}'"))),
        }
    }
}

/// Fine index `q(.)` or a constant `q~ in (0, inf]`.
#[derive(Debug, Clone, PartialEq)]
pub enum QIndex {
    Field(ExponentField),
    Constant(f64),
}

impl QIndex {
    fn at(&self, i: usize) -> f64 {
        match self {
            QIndex::Field(q) => q.values()[i],
            QIndex::Constant(q) => *q,
        }
    }

    fn minus(&self) -> f64 {
        match self {
            QIndex::Field(q) => q.p_minus(),
            QIndex::Constant(q) => *q,
        }
    }

    fn plus(&self) -> f64 {
        match self {
            QIndex::Field(q) => {
                if q.values().iter().any(|v| v.is_infinite()) {
                    f64::INFINITY
                } else {
                    q.p_plus()
                }
            }
            QIndex::Constant(q) => *q,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpaceSpec {
    pub family: Family,
    pub p: ExponentField,
    pub q: QIndex,
    pub w: Weight2ML,
    pub a: f64,
    pub variant: Variant,
    /// Number of dyadic levels for [`Variant::Def`]; `None` covers the grid.
    pub levels: Option<usize>,
}

impl SpaceSpec {
    pub fn new(family: Family, p: ExponentField, q: QIndex, w: Weight2ML, a: f64, variant: Variant) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("Peetre exponent a = {a} must be positive")));
        }
        if p.values().iter().any(|v| v.is_infinite()) {
            return Err(Error::InvalidParameter("p must be finite everywhere".into()));
        }
        match (&q, family) {
            (QIndex::Field(qf), _) if qf.grid() != p.grid() => return Err(Error::GridMismatch),
            (QIndex::Constant(c), _) if !(*c > 0.0) => {
                return Err(Error::InvalidParameter(format!("q = {c} must be positive")));
            }
            (QIndex::Field(_), Family::B | Family::L) => {
                return Err(Error::InvalidParameter("B and L need a constant q".into()));
            }
            _ => {}
        }
        if matches!(family, Family::F | Family::P) && q.plus().is_infinite() {
            return Err(Error::InvalidParameter("F and P need q+ < inf".into()));
        }
        Ok(Self { family, p, q, w, a, variant, levels: None })
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        Self { variant, ..self.clone() }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = Some(levels);
        self
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.p.grid()
    }

    /// Lower bound on `a` required by the characterization theorem.
    pub fn a_threshold(&self) -> f64 {
        let (_, _, a3) = self.w.alphas();
        match self.family {
            Family::B | Family::L => 1.0 / self.p.p_minus() + a3,
            Family::F | Family::P => (1.0 / self.p.p_minus()).max(1.0 / self.q.minus()) + a3,
        }
    }

    fn hypothesis_flags(&self) -> Vec<String> {
        let mut flags = Vec::new();
        if self.variant != Variant::Def && self.a <= self.a_threshold() {
            flags.push(format!("a = {} does not exceed {}", self.a, self.a_threshold()));
        }
        flags
    }

    fn check_signal(&self, f: &GridSignal) -> Result<()> {
        if f.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub family: Family,
    pub variant: Variant,
    pub value: f64,
    pub flags: Vec<String>,
}

/// Pointwise `(sum_m w_m g_m(x)^{q(x)})^{1/q(x)}`, factored by the row
/// maximum so that small `q` cannot overflow.
fn pointwise_lq(q: &QIndex, rows: &[Vec<f64>], weights: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let qi = q.at(i);
            let top = rows.iter().map(|r| r[i]).fold(0.0, f64::max);
            if top == 0.0 {
                return 0.0;
            }
            if qi.is_infinite() {
                return top;
            }
            let s: f64 = rows.iter().zip(weights).map(|(r, w)| w * (qi * (r[i] / top).ln()).exp()).sum();
            top * s.powf(1.0 / qi)
        })
        .collect()
}

/// `|| (sum_m w_m g_m^{q(.)})^{1/q(.)} | L_p ||`.
pub fn lp_lq_norm(p: &ExponentField, q: &QIndex, rows: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    check_rows(p, rows, weights)?;
    Ok(luxemburg_abs(p, &pointwise_lq(q, rows, weights, p.grid().n())))
}

/// `(sum_m w_m || g_m | L_p ||^q)^{1/q}`, a maximum when `q = inf`.
pub fn lq_lp_norm(p: &ExponentField, q: f64, rows: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    check_rows(p, rows, weights)?;
    let norms: Vec<f64> = rows.par_iter().map(|r| luxemburg_abs(p, r)).collect();
    Ok(combine_scalars(q, &norms, weights))
}

fn combine_scalars(q: f64, values: &[f64], weights: &[f64]) -> f64 {
    let top = values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return top;
    }
    let s: f64 = values.iter().zip(weights).map(|(v, w)| w * (q * (v / top).ln()).exp()).sum();
    top * s.powf(1.0 / q)
}

fn check_rows(p: &ExponentField, rows: &[Vec<f64>], weights: &[f64]) -> Result<()> {
    if rows.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: rows.len(), actual: weights.len() });
    }
    for r in rows {
        p.grid().check_len(r.len())?;
    }
    Ok(())
}

/// Infinity term plus the scale part, with `F`/`P` or `B`/`L` structure.
fn assemble(spec: &SpaceSpec, inf_row: &[f64], rows: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    let head = luxemburg_abs(&spec.p, inf_row);
    let tail = match spec.family {
        Family::F | Family::P => lp_lq_norm(&spec.p, &spec.q, rows, weights)?,
        Family::B | Family::L => lq_lp_norm(&spec.p, spec.q.minus(), rows, weights)?,
    };
    Ok(head + tail)
}

fn weighted(w: &Weight2ML, grid: &SpatialGrid, t: Scale, row: &[f64]) -> Vec<f64> {
    w.sample(grid, t).iter().zip(row).map(|(a, b)| a * b).collect()
}

/// Littlewood-Paley levels needed so that the partition sums to one on the
/// whole grid.
pub fn default_levels(grid: &SpatialGrid) -> usize {
    grid.nyquist().log2().ceil().max(1.0) as usize
}

/// `|Phi_j * f|` for `j = 0..=levels` with `Phi_j^ = phi_j`.
pub fn littlewood_paley(pu: &DyadicPU, f: &GridSignal, levels: usize) -> Vec<Vec<f64>> {
    let spec = to_frequency(f);
    let freqs = f.grid().frequencies();
    (0..=levels)
        .into_par_iter()
        .map(|j| {
            let filt: Vec<_> = freqs.iter().map(|&xi| num_complex::Complex64::new(pu.phi_j(j, xi), 0.0)).collect();
            convolve_spectrum(&filt, &spec).abs()
        })
        .collect()
}

fn def_norm(spec: &SpaceSpec, f: &GridSignal, pu: &DyadicPU) -> Result<NormReport> {
    spec.check_signal(f)?;
    let grid = *spec.grid();
    let levels = spec.levels.unwrap_or_else(|| default_levels(&grid));
    let mut flags = spec.hypothesis_flags();
    let tail = spectral_tail(f, 2f64.powi(levels as i32));
    if tail > TRUNCATION_TOL {
        flags.push(format!("truncated: {tail:.3e} of the spectral mass lies beyond level {levels}"));
    }
    let lp = littlewood_paley(pu, f, levels);
    let rows: Vec<Vec<f64>> = lp
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let t = if j == 0 { Scale::Infinity } else { Scale::Finite(2f64.powi(-(j as i32))) };
            weighted(&spec.w, &grid, t, r)
        })
        .collect();
    let ones = vec![1.0; rows.len()];
    let value = match spec.family {
        Family::F => lp_lq_norm(&spec.p, &spec.q, &rows, &ones)?,
        Family::B => lq_lp_norm(&spec.p, spec.q.minus(), &rows, &ones)?,
        _ => return Err(Error::InvalidParameter("Littlewood-Paley norms need family F or B".into())),
    };
    Ok(NormReport { family: spec.family, variant: Variant::Def, value, flags })
}

/// Triebel-Lizorkin norm by the dyadic partition of unity.
pub fn f_norm(spec: &SpaceSpec, f: &GridSignal, pu: &DyadicPU) -> Result<NormReport> {
    if spec.family != Family::F {
        return Err(Error::InvalidParameter("f_norm needs family F".into()));
    }
    def_norm(spec, f, pu)
}

/// Besov norm by the dyadic partition of unity.
pub fn b_norm(spec: &SpaceSpec, f: &GridSignal, pu: &DyadicPU) -> Result<NormReport> {
    if spec.family != Family::B {
        return Err(Error::InvalidParameter("b_norm needs family B".into()));
    }
    def_norm(spec, f, pu)
}

/// `|Phi_t * f|` on every slot of `axis` (`Phi_0` on the infinity slot).
pub fn local_means(pair: &AnalyzerPair, axis: &ScaleAxis, f: &GridSignal) -> Result<Vec<Vec<f64>>> {
    let grid = *f.grid();
    let spec = to_frequency(f);
    let phi = pair.phi_profile();
    let phi0 = pair.phi0_profile();
    (0..axis.slots())
        .into_par_iter()
        .map(|slot| {
            let filt = match axis.scale(slot) {
                Scale::Infinity => dilate_filter(|xi| phi0(xi), Scale::Infinity, &grid, Normalization::L1)?,
                t => dilate_filter(|xi| phi(xi), t, &grid, Normalization::L1)?,
            };
            Ok(convolve_spectrum(&filt, &spec).abs())
        })
        .collect()
}

fn local_mean_at(pair: &AnalyzerPair, spec: &Spectrum, t: Scale) -> Result<Vec<f64>> {
    let grid = *spec.grid();
    let filt = match t {
        Scale::Infinity => {
            let phi0 = pair.phi0_profile();
            dilate_filter(|xi| phi0(xi), t, &grid, Normalization::L1)?
        }
        _ => {
            let phi = pair.phi_profile();
            dilate_filter(|xi| phi(xi), t, &grid, Normalization::L1)?
        }
    };
    Ok(convolve_spectrum(&filt, spec).abs())
}

fn scale_value(axis: &ScaleAxis, slot: usize) -> f64 {
    match axis.scale(slot) {
        Scale::Finite(t) => t,
        Scale::Infinity => 1.0,
    }
}

/// Frequencies at or below which every `xi` meets the band of some scale.
fn covered_frequency(pair: &AnalyzerPair, axis: &ScaleAxis) -> f64 {
    pair.band().support().0 / axis.min_scale()
}

/// The characterizations by local means: plain convolutions (`Norm1`),
/// Peetre maximal functions (`Norm2`), Peetre-Wiener maximal functions
/// (`Norm3`), and the dyadic Peetre sum (`Norm4`).
pub fn norm_variant(spec: &SpaceSpec, f: &GridSignal, pair: &AnalyzerPair, axis: &ScaleAxis) -> Result<NormReport> {
    spec.check_signal(f)?;
    if !matches!(spec.family, Family::F | Family::B) {
        return Err(Error::InvalidParameter("norm variants need family F or B".into()));
    }
    let grid = *spec.grid();
    let mut flags = spec.hypothesis_flags();
    let (_, a2, _) = spec.w.alphas();
    let moments = pair.moment_check(crate::analyzers::MAX_MOMENT_ORDER);
    let order = match moments.order {
        crate::analyzers::MomentOrder::Finite(r) => r as f64,
        crate::analyzers::MomentOrder::Infinite => f64::INFINITY,
    };
    if order + 1.0 <= a2 {
        flags.push(format!("moment order R = {order} with R + 1 <= alpha2 = {a2}"));
    }
    let cover = covered_frequency(pair, axis);
    let tail = spectral_tail(f, cover);
    if tail > TRUNCATION_TOL {
        flags.push(format!("truncated: {tail:.3e} of the spectral mass lies above {cover:.3}"));
    }
    let a = spec.a;
    let value = match spec.variant {
        Variant::Def => {
            return Err(Error::InvalidParameter("use f_norm or b_norm for the definition".into()));
        }
        Variant::Norm1 | Variant::Norm2 | Variant::Norm3 => {
            let mut rows = local_means(pair, axis, f)?;
            if spec.variant != Variant::Norm1 {
                rows = rows
                    .par_iter()
                    .enumerate()
                    .map(|(slot, r)| peetre_slice(&grid, r, scale_value(axis, slot), a))
                    .collect();
            }
            if spec.variant == Variant::Norm3 {
                let n = grid.n();
                let mut wiener = rows.clone();
                for (slot, out) in wiener.iter_mut().enumerate().take(axis.len()) {
                    out.iter_mut().for_each(|v| *v = 0.0);
                    for m in wiener_window(axis, slot) {
                        for i in 0..n {
                            out[i] = out[i].max(rows[m][i]);
                        }
                    }
                }
                rows = wiener;
            }
            let inf = axis.infinity_slot();
            let inf_row = weighted(&spec.w, &grid, Scale::Infinity, &rows[inf]);
            let finite: Vec<Vec<f64>> = (0..axis.len())
                .map(|m| weighted(&spec.w, &grid, axis.scale(m), &rows[m]))
                .collect();
            assemble(spec, &inf_row, &finite, &axis.log_weights())?
        }
        Variant::Norm4 => {
            let levels = (-axis.min_scale().log2()).round().max(1.0) as usize;
            let sp = to_frequency(f);
            let inf_row = {
                let r = local_mean_at(pair, &sp, Scale::Infinity)?;
                weighted(&spec.w, &grid, Scale::Infinity, &peetre_slice(&grid, &r, 1.0, a))
            };
            let rows: Vec<Vec<f64>> = (1..=levels)
                .into_par_iter()
                .map(|j| {
                    let t = 2f64.powi(-(j as i32));
                    let r = local_mean_at(pair, &sp, Scale::Finite(t))?;
                    Ok(weighted(&spec.w, &grid, Scale::Finite(t), &peetre_slice(&grid, &r, t, a)))
                })
                .collect::<Result<_>>()?;
            assemble(spec, &inf_row, &rows, &vec![1.0; levels])?
        }
    };
    Ok(NormReport { family: spec.family, variant: spec.variant, value, flags })
}

/// Any variant: `Def` through the partition of unity, the others through
/// the analyzer pair on `axis`.
pub fn evaluate(spec: &SpaceSpec, f: &GridSignal, pu: &DyadicPU, pair: &AnalyzerPair, axis: &ScaleAxis) -> Result<NormReport> {
    match spec.variant {
        Variant::Def => def_norm(spec, f, pu),
        _ => norm_variant(spec, f, pair, axis),
    }
}

fn check_field(spec: &SpaceSpec, field: &XField) -> Result<()> {
    if field.grid() != spec.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn pl_norm(spec: &SpaceSpec, field: &XField) -> Result<f64> {
    check_field(spec, field)?;
    let grid = *field.grid();
    let axis = field.axis();
    let pw = peetre_wiener_maximal(field, spec.a)?;
    let inf = axis.infinity_slot();
    let row = |slot: usize| -> Vec<f64> {
        let r: Vec<f64> = pw.slot(slot).iter().map(|v| v.re).collect();
        weighted(&spec.w, &grid, axis.scale(slot), &r)
    };
    let finite: Vec<Vec<f64>> = (0..axis.len()).map(row).collect();
    assemble(spec, &row(inf), &finite, &axis.log_weights())
}

/// Quasi-norm of the Peetre-Wiener space `P^w_{p,q,a}` on `X`.
pub fn pw_norm(spec: &SpaceSpec, field: &XField) -> Result<f64> {
    if spec.family != Family::P {
        return Err(Error::InvalidParameter("pw_norm needs family P".into()));
    }
    pl_norm(spec, field)
}

/// Quasi-norm of the Peetre-Wiener space `L^w_{p,q~,a}` on `X`.
pub fn lw_norm(spec: &SpaceSpec, field: &XField) -> Result<f64> {
    if spec.family != Family::L {
        return Err(Error::InvalidParameter("lw_norm needs family L".into()));
    }
    pl_norm(spec, field)
}

/// The `X`-side space matching `spec`: `F -> P`, `B -> L`.
pub fn x_space(spec: &SpaceSpec) -> SpaceSpec {
    let family = match spec.family {
        Family::F | Family::P => Family::P,
        Family::B | Family::L => Family::L,
    };
    SpaceSpec { family, ..spec.clone() }
}

/// `P^{w~}` or `L^{w~}` counterpart used for the coorbit identification.
pub fn coorbit_space(spec: &SpaceSpec) -> SpaceSpec {
    let mut out = x_space(spec);
    out.w = wtilde(&spec.w);
    out
}

/// Norm of a field in the `X`-side space of `spec` (`P` or `L`).
pub fn y_norm(spec: &SpaceSpec, field: &XField) -> Result<f64> {
    pl_norm(&x_space(spec), field)
}

/// Coefficients `lambda_i` over the boxes of a covering.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqCoeffs {
    pub entries: Vec<num_complex::Complex64>,
}

impl SeqCoeffs {
    pub fn new(covering: &Covering, entries: Vec<num_complex::Complex64>) -> Result<Self> {
        if entries.len() != covering.len() {
            return Err(Error::LengthMismatch { expected: covering.len(), actual: entries.len() });
        }
        if let Some(i) = entries.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { entries })
    }

    pub fn zeros(covering: &Covering) -> Self {
        Self { entries: vec![num_complex::Complex64::new(0.0, 0.0); covering.len()] }
    }

    pub fn delta(covering: &Covering, i: usize) -> Self {
        let mut s = Self::zeros(covering);
        s.entries[i] = num_complex::Complex64::new(1.0, 0.0);
        s
    }
}

/// `sum_i c_i chi_{U_i}` as a field on the covering's cells.
pub fn box_field(covering: &Covering, values: &[f64]) -> Result<XField> {
    if values.len() != covering.len() {
        return Err(Error::LengthMismatch { expected: covering.len(), actual: values.len() });
    }
    let cells: Vec<f64> = covering.cell_boxes().iter().map(|&b| values[b]).collect();
    XField::from_real(*covering.grid(), covering.axis().clone(), cells)
}

/// `(||sum |lambda_i| chi_{U_i}||_Y, ||sum |lambda_i| mu(U_i)^{-1} chi_{U_i}||_Y)`.
pub fn seq_norms(spec: &SpaceSpec, covering: &Covering, lambda: &SeqCoeffs) -> Result<(f64, f64)> {
    if lambda.entries.len() != covering.len() {
        return Err(Error::LengthMismatch { expected: covering.len(), actual: lambda.entries.len() });
    }
    let flat: Vec<f64> = lambda.entries.iter().map(|v| v.norm()).collect();
    let natural: Vec<f64> = flat.iter().enumerate().map(|(i, v)| v / covering.mu(i)).collect();
    Ok((y_norm(spec, &box_field(covering, &flat)?)?, y_norm(spec, &box_field(covering, &natural)?)?))
}

/// `||sum_i sup_{U_i} |F| chi_{U_i}||_Y`.
pub fn decomposition_norm(spec: &SpaceSpec, field: &XField, covering: &Covering) -> Result<f64> {
    if field.grid() != covering.grid() || field.axis() != covering.axis() {
        return Err(Error::GridMismatch);
    }
    let sups: Vec<f64> = (0..covering.len())
        .map(|i| covering.cells(i).iter().map(|&c| field.values()[c].norm()).fold(0.0, f64::max))
        .collect();
    y_norm(spec, &box_field(covering, &sups)?)
}

/// `G_l = sum_k 2^{-|l-k| delta} g_k`.
pub fn geometric_smoothing(delta: f64, g: &[f64]) -> Result<Vec<f64>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    Ok((0..g.len())
        .map(|l| g.iter().enumerate().map(|(k, v)| 2f64.powf(-(l.abs_diff(k) as f64) * delta) * v).sum())
        .collect())
}

/// [`geometric_smoothing`] applied pointwise to a sequence of functions.
pub fn geometric_smoothing_rows(delta: f64, g: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    let n = g.first().map_or(0, Vec::len);
    if g.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("rows differ in length".into()));
    }
    Ok((0..g.len())
        .map(|l| {
            let mut out = vec![0.0; n];
            for (k, r) in g.iter().enumerate() {
                let c = 2f64.powf(-(l.abs_diff(k) as f64) * delta);
                for (o, v) in out.iter_mut().zip(r) {
                    *o += c * v;
                }
            }
            out
        })
        .collect())
}

/// `||V f | P^{w~}||` or `||V f | L^{w~}||`.
pub fn coorbit_norm(vt: &VoiceTransform, spec: &SpaceSpec, f: &GridSignal) -> Result<f64> {
    spec.check_signal(f)?;
    let field = vt.apply(f)?;
    pl_norm(&coorbit_space(spec), &field)
}

/// Smallest and largest ratio `num_k / den_k` over pairs with `den_k > 0`.
pub fn ratio_band(num: &[f64], den: &[f64]) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (a, b) in num.iter().zip(den) {
        if *b > 0.0 {
            let r = a / b;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo.is_finite()).then_some((lo, hi))
}

/// Width `hi / lo` of a ratio band.
pub fn band_width(band: (f64, f64)) -> f64 {
    band.1 / band.0
}
