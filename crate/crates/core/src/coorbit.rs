//! Discretization on the wavelet index set: the covering `U^{alpha,beta}`,
//! frame, Gramian and oscillation kernels with their algebra norms, the
//! discretization operator `U_Phi` and its Neumann inverse, atomic
//! decompositions, and the orthonormal Meyer expansion.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analyzers::MeyerSystem;
use crate::error::{Error, Result};
use crate::grid::{
    dilate_filter, fft_inverse, to_frequency, to_space, GridSignal, Normalization, Scale, ScaleAxis, SpatialGrid,
    Spectrum, XField,
};
use crate::spaces::{coorbit_space, seq_norms, y_norm, SeqCoeffs, SpaceSpec};
use crate::transform::VoiceTransform;
use crate::weights::ReservoirWeight;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const EDGE_TOL: f64 = 1e-9;

fn wrap(x: f64, period: f64) -> f64 {
    (x + 0.5 * period).rem_euclid(period) - 0.5 * period
}

/// One box `U_{j,k}` of the covering. `level = 0` is the sheet at infinity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringBox {
    pub level: usize,
    pub k: i64,
    /// Left end of `Q_{j,k}`, wrapped onto the torus.
    pub x: f64,
    /// `beta^{-j}`, or `None` at infinity.
    pub t: Option<f64>,
    /// Length of `Q_{j,k}` inside the window; shorter than the nominal
    /// width only for the last box of a level.
    pub length: f64,
    /// `mu(U_{j,k})` on the window.
    pub mu: f64,
}

impl CoveringBox {
    pub fn scale(&self) -> Scale {
        self.t.map_or(Scale::Infinity, Scale::Finite)
    }
}

/// Covering `U_{j,k} = Q_{j,k} x [beta^{-j}, beta^{-j+1})`, `j >= 1`, and
/// `Q_{0,k} x {inf}`, with `Q_{j,k} = alpha beta^{-j} (k + [0,1])`,
/// restricted to the discretized window of a grid and scale axis.
///
/// Boxes of a level start at `k0 w`, `k0 = ceil(-L/(2w))`. [`Covering::new`]
/// keeps the nominal width `w = alpha beta^{-j}` and truncates the last box
/// of each level at the seam of the torus; [`Covering::fitted`] instead
/// shrinks the width to `L / ceil(L/w)` so that equal boxes tile the torus.
/// Scale levels must be unions of axis cells, which requires
/// `ln beta / ln base` to be a multiple of `1/M`.
#[derive(Debug, Clone)]
pub struct Covering {
    alpha: f64,
    beta: f64,
    fitted: bool,
    grid: SpatialGrid,
    axis: ScaleAxis,
    /// Axis cells per finite level.
    ratio: usize,
    /// Box index of the first box of each level, plus a final sentinel.
    level_start: Vec<usize>,
    level_k0: Vec<i64>,
    level_width: Vec<f64>,
    boxes: Vec<CoveringBox>,
    cells: Vec<Vec<usize>>,
    cell_boxes: Vec<usize>,
}

impl Covering {
    pub fn new(alpha: f64, beta: f64, grid: SpatialGrid, axis: ScaleAxis) -> Result<Self> {
        Self::build(alpha, beta, grid, axis, false)
    }

    /// Covering with equal boxes per level that tile the torus exactly.
    pub fn fitted(alpha: f64, beta: f64, grid: SpatialGrid, axis: ScaleAxis) -> Result<Self> {
        Self::build(alpha, beta, grid, axis, true)
    }

    fn build(alpha: f64, beta: f64, grid: SpatialGrid, axis: ScaleAxis, fitted: bool) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta = {beta} must exceed 1")));
        }
        let m = axis.per_octave();
        let r = m as f64 * beta.ln() / axis.base().ln();
        let ratio = r.round();
        if ratio < 1.0 || (r - ratio).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "beta = {beta} is not a whole number of axis cells (M ln beta / ln base = {r})"
            )));
        }
        let ratio = ratio as usize;
        let total = axis.len();
        if total % ratio != 0 {
            return Err(Error::InvalidParameter(format!(
                "{total} axis cells do not split into levels of {ratio}"
            )));
        }
        let levels = total / ratio;
        let period = grid.period();
        let n = grid.n();

        let mut level_start = Vec::with_capacity(levels + 2);
        let mut level_k0 = Vec::with_capacity(levels + 1);
        let mut level_width = Vec::with_capacity(levels + 1);
        let mut boxes = Vec::new();
        for j in 0..=levels {
            let nominal = alpha * beta.powi(-(j as i32));
            let count = (period / nominal - EDGE_TOL).ceil().max(1.0) as usize;
            let w = if fitted { period / count as f64 } else { nominal };
            let k0 = (-0.5 * period / w - EDGE_TOL).ceil() as i64;
            level_start.push(boxes.len());
            level_k0.push(k0);
            level_width.push(w);
            let scale_mass = if j == 0 { 1.0 } else { beta.powi(j as i32) - beta.powi(j as i32 - 1) };
            for kk in 0..count {
                let length = if kk + 1 == count { period - (count - 1) as f64 * w } else { w };
                let k = k0 + kk as i64;
                boxes.push(CoveringBox {
                    level: j,
                    k,
                    x: wrap(k as f64 * w, period),
                    t: (j > 0).then(|| beta.powi(-(j as i32))),
                    length,
                    mu: length * scale_mass,
                });
            }
        }
        level_start.push(boxes.len());

        let mut cells = vec![Vec::new(); boxes.len()];
        let mut cell_boxes = vec![0; n * axis.slots()];
        for slot in 0..axis.slots() {
            let level = if slot == axis.infinity_slot() { 0 } else { slot / ratio + 1 };
            let w = level_width[level];
            let origin = level_k0[level] as f64 * w;
            let count = level_start[level + 1] - level_start[level];
            for node in 0..n {
                let u = (grid.node(node) - origin).rem_euclid(period);
                let kk = ((u / w + EDGE_TOL).floor() as usize).min(count - 1);
                let b = level_start[level] + kk;
                let c = slot * n + node;
                cells[b].push(c);
                cell_boxes[c] = b;
            }
        }
        Ok(Self { alpha, beta, fitted, grid, axis, ratio, level_start, level_k0, level_width, boxes, cells, cell_boxes })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn axis(&self) -> &ScaleAxis {
        &self.axis
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Number of finite levels.
    pub fn levels(&self) -> usize {
        self.level_start.len() - 2
    }

    /// Box width of a level: `alpha beta^{-j}`, or the fitted width.
    pub fn width(&self, level: usize) -> f64 {
        self.level_width[level]
    }

    /// Axis cells per finite level.
    pub fn cells_per_level(&self) -> usize {
        self.ratio
    }

    pub fn boxes(&self) -> &[CoveringBox] {
        &self.boxes
    }

    pub fn mu(&self, i: usize) -> f64 {
        self.boxes[i].mu
    }

    /// `alpha (1 - 1/beta)` for `j >= 1`, `alpha` at infinity.
    pub fn mu_analytic(&self, level: usize) -> f64 {
        if level == 0 {
            self.alpha
        } else {
            self.alpha * (1.0 - 1.0 / self.beta)
        }
    }

    /// Flat cell indices `slot * n + node` belonging to box `i`.
    pub fn cells(&self, i: usize) -> &[usize] {
        &self.cells[i]
    }

    /// Box index of every cell.
    pub fn cell_boxes(&self) -> &[usize] {
        &self.cell_boxes
    }

    /// Box range of a level.
    pub fn level_range(&self, level: usize) -> std::ops::Range<usize> {
        self.level_start[level]..self.level_start[level + 1]
    }

    /// Index of `U_{level,k}`, if it lies in the window.
    pub fn box_index(&self, level: usize, k: i64) -> Option<usize> {
        if level > self.levels() {
            return None;
        }
        let kk = k - self.level_k0[level];
        let range = self.level_range(level);
        (kk >= 0 && (kk as usize) < range.len()).then(|| range.start + kk as usize)
    }

    /// Boxes holding no grid cell.
    pub fn empty_boxes(&self) -> usize {
        self.cells.iter().filter(|c| c.is_empty()).count()
    }

    /// Intersection number of the closed boxes: within a level every box
    /// meets itself and its two neighbours on the torus, and levels are
    /// disjoint in scale.
    pub fn sigma(&self) -> usize {
        (0..=self.levels()).map(|j| self.level_range(j).len().min(3)).max().unwrap_or(0)
    }

    /// [`Covering::sigma`] by testing every pair of boxes.
    pub fn sigma_bruteforce(&self) -> usize {
        let period = self.grid.period();
        let tol = EDGE_TOL * period;
        let meets = |a: &CoveringBox, b: &CoveringBox| {
            a.level == b.level
                && ((b.x - a.x).rem_euclid(period) <= a.length + tol
                    || (a.x - b.x).rem_euclid(period) <= b.length + tol)
        };
        self.boxes
            .iter()
            .map(|a| self.boxes.iter().filter(|b| meets(a, b)).count())
            .max()
            .unwrap_or(0)
    }
}

// ---------------------------------------------------------------------------
// kernels

#[derive(Debug, Clone)]
enum KernelRepr {
    /// Row-major `N x N` table over the cells.
    Dense(Vec<Complex64>),
    /// `K((i,a),(i',b)) = table[a * slots + b][(i - i') mod n]`.
    Translation(Vec<Vec<Complex64>>),
    Diagonal(Vec<Complex64>),
}

/// Kernel on the cells of `X`, acting by `(KF)(x) = sum_y K(x,y) F(y) mu_y`.
#[derive(Debug, Clone)]
pub struct KernelOp {
    grid: SpatialGrid,
    axis: ScaleAxis,
    repr: KernelRepr,
}

impl KernelOp {
    /// Kernel from a dense row-major table.
    pub fn dense(grid: SpatialGrid, axis: ScaleAxis, table: Vec<Complex64>) -> Result<Self> {
        let dim = grid.n() * axis.slots();
        if table.len() != dim * dim {
            return Err(Error::LengthMismatch { expected: dim * dim, actual: table.len() });
        }
        if let Some(i) = table.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, axis, repr: KernelRepr::Dense(table) })
    }

    /// The kernel `1/mu_x` on the diagonal, whose action is the identity.
    pub fn identity(grid: SpatialGrid, axis: ScaleAxis) -> Self {
        let field = XField::zeros(grid, axis.clone());
        let diag = field.mu_weights().iter().map(|m| Complex64::new(1.0 / m, 0.0)).collect();
        Self { grid, axis, repr: KernelRepr::Diagonal(diag) }
    }

    /// Number of cells.
    pub fn dim(&self) -> usize {
        self.grid.n() * self.axis.slots()
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn axis(&self) -> &ScaleAxis {
        &self.axis
    }

    pub fn entry(&self, x: usize, y: usize) -> Complex64 {
        let n = self.grid.n();
        match &self.repr {
            KernelRepr::Dense(t) => t[x * self.dim() + y],
            KernelRepr::Translation(table) => {
                let (i, a) = (x % n, x / n);
                let (ip, b) = (y % n, y / n);
                table[a * self.axis.slots() + b][(i + n - ip) % n]
            }
            KernelRepr::Diagonal(d) => {
                if x == y {
                    d[x]
                } else {
                    ZERO
                }
            }
        }
    }

    pub fn row(&self, x: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|y| self.entry(x, y)).collect()
    }

    /// Row-major dense table.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let dim = self.dim();
        match &self.repr {
            KernelRepr::Dense(t) => t.clone(),
            _ => (0..dim * dim).map(|c| self.entry(c / dim, c % dim)).collect(),
        }
    }

    /// `K*(x,y) = K(y,x)`.
    pub fn involution(&self) -> Self {
        let dim = self.dim();
        let repr = match &self.repr {
            KernelRepr::Dense(t) => KernelRepr::Dense((0..dim * dim).map(|c| t[(c % dim) * dim + c / dim]).collect()),
            KernelRepr::Translation(table) => {
                let s = self.axis.slots();
                let n = self.grid.n();
                KernelRepr::Translation(
                    (0..s * s)
                        .map(|ab| {
                            let (a, b) = (ab / s, ab % s);
                            let src = &table[b * s + a];
                            (0..n).map(|d| src[(n - d) % n]).collect()
                        })
                        .collect(),
                )
            }
            KernelRepr::Diagonal(d) => KernelRepr::Diagonal(d.clone()),
        };
        Self { grid: self.grid, axis: self.axis.clone(), repr }
    }

    /// Entrywise modulus `|K|`.
    pub fn modulus(&self) -> Self {
        let abs = |v: &[Complex64]| v.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect::<Vec<_>>();
        let repr = match &self.repr {
            KernelRepr::Dense(t) => KernelRepr::Dense(abs(t)),
            KernelRepr::Translation(table) => KernelRepr::Translation(table.iter().map(|r| abs(r)).collect()),
            KernelRepr::Diagonal(d) => KernelRepr::Diagonal(abs(d)),
        };
        Self { grid: self.grid, axis: self.axis.clone(), repr }
    }

    /// `(KF)(x) = sum_y K(x,y) F(y) mu_y`.
    pub fn apply(&self, field: &XField) -> Result<XField> {
        if *field.grid() != self.grid || *field.axis() != self.axis {
            return Err(Error::GridMismatch);
        }
        let mu = field.mu_weights();
        let weighted: Vec<Complex64> = field.values().iter().zip(&mu).map(|(v, m)| v * m).collect();
        let dim = self.dim();
        let values = match &self.repr {
            KernelRepr::Dense(t) => (0..dim)
                .into_par_iter()
                .map(|x| t[x * dim..(x + 1) * dim].iter().zip(&weighted).map(|(k, v)| k * v).sum())
                .collect(),
            KernelRepr::Diagonal(d) => d.iter().zip(&weighted).map(|(k, v)| k * v).collect(),
            KernelRepr::Translation(table) => self.apply_translation(table, &weighted),
        };
        XField::new(self.grid, self.axis.clone(), values)
    }

    fn apply_translation(&self, table: &[Vec<Complex64>], weighted: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let s = self.axis.slots();
        let dft = |v: &[Complex64]| {
            let mut b = v.to_vec();
            crate::grid::fft_forward(&mut b);
            b
        };
        let inputs: Vec<Vec<Complex64>> = (0..s).map(|b| dft(&weighted[b * n..(b + 1) * n])).collect();
        let rows: Vec<Vec<Complex64>> = (0..s)
            .into_par_iter()
            .map(|a| {
                let mut acc = vec![ZERO; n];
                for (b, input) in inputs.iter().enumerate() {
                    let kernel = dft(&table[a * s + b]);
                    for ((o, k), v) in acc.iter_mut().zip(&kernel).zip(input) {
                        *o += k * v;
                    }
                }
                fft_inverse(&mut acc);
                acc.iter().map(|v| v / n as f64).collect()
            })
            .collect();
        rows.concat()
    }

    /// `max(sup_x sum_y |K(x,y)| mu_y, sup_y sum_x |K(x,y)| mu_x)`.
    pub fn a1_norm(&self) -> f64 {
        let (rows, cols) = self.abs_sums(None);
        fold_max(&rows).max(fold_max(&cols))
    }

    /// [`KernelOp::a1_norm`] of `K(x,y) m_nu(x,y)`.
    pub fn amnu_norm(&self, nu: &ReservoirWeight) -> f64 {
        let (rows, cols) = self.abs_sums(Some(nu));
        fold_max(&rows).max(fold_max(&cols))
    }

    /// Weighted row and column sums of `|K|`.
    fn abs_sums(&self, nu: Option<&ReservoirWeight>) -> (Vec<f64>, Vec<f64>) {
        let dim = self.dim();
        let n = self.grid.n();
        let mu = XField::zeros(self.grid, self.axis.clone()).mu_weights();
        if let (None, KernelRepr::Translation(table)) = (nu, &self.repr) {
            let s = self.axis.slots();
            let l1: Vec<f64> = table.iter().map(|r| r.iter().map(|v| v.norm()).sum()).collect();
            let mu_slot = |b: usize| mu[b * n];
            let rows: Vec<f64> = (0..s).map(|a| (0..s).map(|b| l1[a * s + b] * mu_slot(b)).sum()).collect();
            let cols: Vec<f64> = (0..s).map(|b| (0..s).map(|a| l1[a * s + b] * mu_slot(a)).sum()).collect();
            return (
                (0..dim).map(|x| rows[x / n]).collect(),
                (0..dim).map(|y| cols[y / n]).collect(),
            );
        }
        let nu_vals = nu.map(|nu| cell_weights(&self.grid, &self.axis, nu));
        let weight = |x: usize, y: usize| match &nu_vals {
            Some(v) => (v[x] / v[y]).max(v[y] / v[x]),
            None => 1.0,
        };
        let block_rows = 64;
        let blocks: Vec<(Vec<f64>, Vec<f64>)> = (0..dim.div_ceil(block_rows))
            .into_par_iter()
            .map(|blk| {
                let lo = blk * block_rows;
                let hi = (lo + block_rows).min(dim);
                let mut rows = Vec::with_capacity(hi - lo);
                let mut cols = vec![0.0; dim];
                for x in lo..hi {
                    let mut r = 0.0;
                    for y in 0..dim {
                        let k = self.entry(x, y).norm();
                        if k == 0.0 {
                            continue;
                        }
                        let k = k * weight(x, y);
                        r += k * mu[y];
                        cols[y] += k * mu[x];
                    }
                    rows.push(r);
                }
                (rows, cols)
            })
            .collect();
        merge_blocks(blocks, dim)
    }
}

fn fold_max(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Concatenates row blocks and sums column partials in block order.
fn merge_blocks(blocks: Vec<(Vec<f64>, Vec<f64>)>, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rows = Vec::with_capacity(dim);
    let mut cols = vec![0.0; dim];
    for (r, c) in blocks {
        rows.extend(r);
        for (a, b) in cols.iter_mut().zip(c) {
            *a += b;
        }
    }
    (rows, cols)
}

/// `nu` at every cell centre.
fn cell_weights(grid: &SpatialGrid, axis: &ScaleAxis, nu: &ReservoirWeight) -> Vec<f64> {
    let n = grid.n();
    (0..n * axis.slots()).map(|c| nu.eval(grid.node(c % n), axis.scale(c / n))).collect()
}

/// `(2 pi / L) sum_k g[k] conj(f[k]) e^{i d h xi_k}` for every shift `d`.
fn correlation(grid: &SpatialGrid, g: &[Complex64], f: &[Complex64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = g.iter().zip(f).map(|(a, b)| a * b.conj()).collect();
    fft_inverse(&mut buf);
    let c = grid.frequency_weight();
    buf.iter().map(|v| v * c).collect()
}

/// `R((x,t),(y,s)) = <phi_(y,s), phi_(x,t)>`, stored per pair of slots as a
/// function of `x - y`.
pub fn frame_kernel(vt: &VoiceTransform) -> KernelOp {
    cross_table(vt, vt)
}

/// `<psi_(y,s), phi_(x,t)>` with `phi` from `f` and `psi` from `g`.
fn cross_table(f: &VoiceTransform, g: &VoiceTransform) -> KernelOp {
    let s = f.axis().slots();
    let grid = *f.grid();
    let table: Vec<Vec<Complex64>> = (0..s * s)
        .into_par_iter()
        .map(|ab| correlation(&grid, g.filter(ab % s), f.filter(ab / s)))
        .collect();
    // hermitian symmetry R(x,y) = conj R(y,x) by construction
    let mut table = table;
    if std::ptr::eq(f, g) {
        let n = grid.n();
        for a in 0..s {
            for b in a..s {
                for d in 0..n {
                    let v = table[a * s + b][d];
                    let w = table[b * s + a][(n - d) % n].conj();
                    let m = 0.5 * (v + w);
                    table[a * s + b][d] = m;
                    table[b * s + a][(n - d) % n] = m.conj();
                }
            }
        }
    }
    KernelOp { grid, axis: f.axis().clone(), repr: KernelRepr::Translation(table) }
}

/// `R F = V V* F`, the projection onto the range of the transform.
pub fn reproduce(vt: &VoiceTransform, field: &XField) -> Result<XField> {
    Ok(vt.apply_spectrum(&vt.adjoint_spectrum(field)?))
}

/// `||R(Vf) - Vf|| / ||Vf||` in `L_2(X, mu)`; zero for `Vf = 0`.
pub fn reproducing_defect(vt: &VoiceTransform, f: &GridSignal) -> Result<f64> {
    let field = vt.apply(f)?;
    relative_defect(&reproduce(vt, &field)?, &field)
}

/// `||R(RF) - RF|| / ||RF||`.
pub fn idempotence_defect(vt: &VoiceTransform, field: &XField) -> Result<f64> {
    let rf = reproduce(vt, field)?;
    relative_defect(&reproduce(vt, &rf)?, &rf)
}

fn relative_defect(a: &XField, b: &XField) -> Result<f64> {
    let norm = b.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(a.sub(b)?.l2_norm() / norm)
}

fn check_covering(vt: &VoiceTransform, covering: &Covering) -> Result<()> {
    if vt.grid() != covering.grid() || vt.axis() != covering.axis() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Dense table limit for kernels that have no translation structure.
pub const DENSE_LIMIT: usize = 4096;

fn check_dense(dim: usize) -> Result<()> {
    if dim > DENSE_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "dense kernel over {dim} cells exceeds the limit of {DENSE_LIMIT}"
        )));
    }
    Ok(())
}

/// `K(x,y) = max_{z in box(y)} |<phi_x, psi_z>|`, the sup realized over the
/// cells of the box containing `y`. `g = f` gives `M_U`.
pub fn gram_cross_kernel(g: &VoiceTransform, f: &VoiceTransform, covering: &Covering) -> Result<KernelOp> {
    check_covering(f, covering)?;
    check_covering(g, covering)?;
    let cross = cross_table(f, g);
    let dim = cross.dim();
    check_dense(dim)?;
    let rows: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|x| {
            let sups: Vec<f64> = (0..covering.len())
                .map(|b| covering.cells(b).iter().map(|&z| cross.entry(x, z).norm()).fold(0.0, f64::max))
                .collect();
            covering.cell_boxes().iter().map(|&b| Complex64::new(sups[b], 0.0)).collect()
        })
        .collect();
    KernelOp::dense(*covering.grid(), covering.axis().clone(), rows.concat())
}

/// `osc(x,y) = max_{z in box(y)} |R(x,y) - R(x,z)|` with the trivial phase.
pub fn osc_kernel(vt: &VoiceTransform, covering: &Covering) -> Result<KernelOp> {
    check_covering(vt, covering)?;
    let r = frame_kernel(vt);
    let dim = r.dim();
    check_dense(dim)?;
    let rows: Vec<Vec<Complex64>> =
        (0..dim).into_par_iter().map(|x| osc_row(&r, covering, x).into_iter().map(|v| Complex64::new(v, 0.0)).collect()).collect();
    KernelOp::dense(*covering.grid(), covering.axis().clone(), rows.concat())
}

/// One row of the oscillation kernel. The farthest point of a finite set
/// from any point is a vertex of its convex hull, so each box is reduced
/// to its hull first.
fn osc_row(r: &KernelOp, covering: &Covering, x: usize) -> Vec<f64> {
    let mut out = vec![0.0; r.dim()];
    let mut vals = Vec::new();
    for b in 0..covering.len() {
        let cells = covering.cells(b);
        vals.clear();
        vals.extend(cells.iter().map(|&z| r.entry(x, z)));
        let hull = convex_hull(&vals);
        for (&y, v) in cells.iter().zip(&vals) {
            out[y] = hull.iter().map(|h| (v - h).norm_sqr()).fold(0.0, f64::max).sqrt();
        }
    }
    out
}

/// Vertices of the convex hull of complex points (monotone chain).
fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    if points.len() <= 3 {
        return points.to_vec();
    }
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() <= 3 {
        return p;
    }
    let cross = |o: Complex64, a: Complex64, b: Complex64| (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re);
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex64>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// `A_1` and `A_{m_nu}` norms of the oscillation kernel, streamed row by
/// row without storing the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscNorms {
    pub a1: f64,
    pub amnu: f64,
}

pub fn osc_norms(vt: &VoiceTransform, covering: &Covering, nu: &ReservoirWeight) -> Result<OscNorms> {
    check_covering(vt, covering)?;
    let r = frame_kernel(vt);
    let dim = r.dim();
    let mu = XField::zeros(*vt.grid(), vt.axis().clone()).mu_weights();
    let nu_vals = cell_weights(vt.grid(), vt.axis(), nu);
    let block_rows = 32;
    type Sums = (Vec<f64>, Vec<f64>);
    let blocks: Vec<(Sums, Sums)> = (0..dim.div_ceil(block_rows))
        .into_par_iter()
        .map(|blk| {
            let lo = blk * block_rows;
            let hi = (lo + block_rows).min(dim);
            let (mut rows, mut rows_w) = (Vec::new(), Vec::new());
            let (mut cols, mut cols_w) = (vec![0.0; dim], vec![0.0; dim]);
            for x in lo..hi {
                let osc = osc_row(&r, covering, x);
                let (mut s, mut sw) = (0.0, 0.0);
                for (y, &o) in osc.iter().enumerate() {
                    if o == 0.0 {
                        continue;
                    }
                    let m = (nu_vals[x] / nu_vals[y]).max(nu_vals[y] / nu_vals[x]);
                    s += o * mu[y];
                    sw += o * m * mu[y];
                    cols[y] += o * mu[x];
                    cols_w[y] += o * m * mu[x];
                }
                rows.push(s);
                rows_w.push(sw);
            }
            ((rows, cols), (rows_w, cols_w))
        })
        .collect();
    let (plain, weighted): (Vec<Sums>, Vec<Sums>) = blocks.into_iter().unzip();
    let (rows, cols) = merge_blocks(plain, dim);
    let (rows_w, cols_w) = merge_blocks(weighted, dim);
    Ok(OscNorms { a1: fold_max(&rows).max(fold_max(&cols)), amnu: fold_max(&rows_w).max(fold_max(&cols_w)) })
}

pub fn kernel_a1_norm(k: &KernelOp) -> f64 {
    k.a1_norm()
}

pub fn kernel_amnu_norm(k: &KernelOp, nu: &ReservoirWeight) -> f64 {
    k.amnu_norm(nu)
}

pub fn kernel_apply(k: &KernelOp, field: &XField) -> Result<XField> {
    k.apply(field)
}

/// `max ||K F||_Y / ||F||_Y` over a battery of fields: a lower bound on the
/// operator norm of `K` on `Y`.
pub fn kernel_op_norm_estimate(k: &KernelOp, spec: &SpaceSpec, battery: &[XField]) -> Result<f64> {
    if battery.is_empty() {
        return Err(Error::InvalidParameter("empty battery".into()));
    }
    let mut best = 0.0f64;
    for field in battery {
        let den = y_norm(spec, field)?;
        if den == 0.0 {
            continue;
        }
        best = best.max(y_norm(spec, &k.apply(field)?)? / den);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// sampled atoms and the discretization operator

/// Atoms `phi_{x_i}` at the covering points, held as frequency samples.
#[derive(Debug, Clone)]
pub struct PointFrame {
    grid: SpatialGrid,
    /// Filter per level; level 0 is `Phi_0^`.
    filters: Vec<Vec<Complex64>>,
    level: Vec<usize>,
    /// `e^{i x_i xi_k}` per box.
    phases: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
}

impl PointFrame {
    pub fn new(vt: &VoiceTransform, covering: &Covering) -> Result<Self> {
        check_covering(vt, covering)?;
        let grid = *vt.grid();
        let phi = vt.pair().phi_profile();
        let phi0 = vt.pair().phi0_profile();
        let mut filters = vec![dilate_filter(|xi| phi0(xi), Scale::Infinity, &grid, Normalization::L2)?];
        for j in 1..=covering.levels() {
            let t = covering.beta().powi(-(j as i32));
            filters.push(dilate_filter(|xi| phi(xi), Scale::Finite(t), &grid, Normalization::L2)?);
        }
        let freqs = grid.frequencies();
        let phases = covering
            .boxes()
            .par_iter()
            .map(|b| freqs.iter().map(|&xi| Complex64::from_polar(1.0, b.x * xi)).collect())
            .collect();
        Ok(Self {
            grid,
            filters,
            level: covering.boxes().iter().map(|b| b.level).collect(),
            phases,
            weights: covering.boxes().iter().map(|b| b.mu).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.level.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level.is_empty()
    }

    /// `c_i = mu(U_i)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `<g, phi_{x_i}>` for every box.
    pub fn analyze(&self, g: &Spectrum) -> Vec<Complex64> {
        let c = self.grid.frequency_weight();
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let filt = &self.filters[self.level[i]];
                let s: Complex64 =
                    g.values().iter().zip(filt).zip(&self.phases[i]).map(|((a, f), p)| a * f.conj() * p).sum();
                s * c
            })
            .collect()
    }

    /// Spectrum of `sum_i lambda_i phi_{x_i}`.
    pub fn synthesize(&self, lambda: &[Complex64]) -> Result<Spectrum> {
        if lambda.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: lambda.len() });
        }
        let mut acc = vec![ZERO; self.grid.n()];
        for (i, l) in lambda.iter().enumerate() {
            if *l == ZERO {
                continue;
            }
            for ((o, f), p) in acc.iter_mut().zip(&self.filters[self.level[i]]).zip(&self.phases[i]) {
                *o += l * f * p.conj();
            }
        }
        Spectrum::new(self.grid, acc)
    }

    /// The atom `phi_{x_i}` on the grid.
    pub fn atom(&self, i: usize) -> GridSignal {
        let mut lambda = vec![ZERO; self.len()];
        lambda[i] = Complex64::new(1.0, 0.0);
        to_space(&self.synthesize(&lambda).expect("matching length"))
    }
}

/// Outcome of [`discretization_op`]: the field and the reproducing gate.
#[derive(Debug, Clone)]
pub struct Discretized {
    pub field: XField,
    /// `||RF - F|| / ||F||` of the input.
    pub range_defect: f64,
    pub gate_ok: bool,
}

/// Point values are read as `(RF)(x_i)`; inputs farther than this from the
/// range of the transform are flagged.
pub const RANGE_GATE: f64 = 1e-2;

/// `U_Phi F = sum_i c_i (RF)(x_i) R(., x_i) = V S V* F` with
/// `S g = sum_i c_i <g, phi_{x_i}> phi_{x_i}`.
pub fn discretization_op(vt: &VoiceTransform, covering: &Covering, field: &XField) -> Result<Discretized> {
    let frame = PointFrame::new(vt, covering)?;
    let range_defect = relative_defect(&reproduce(vt, field)?, field)?;
    Ok(Discretized { field: apply_u(vt, &frame, field)?, range_defect, gate_ok: range_defect < RANGE_GATE })
}

fn apply_u(vt: &VoiceTransform, frame: &PointFrame, field: &XField) -> Result<XField> {
    let coeffs = frame.analyze(&vt.adjoint_spectrum(field)?);
    let lambda: Vec<Complex64> = coeffs.iter().zip(frame.weights()).map(|(a, c)| a * c).collect();
    Ok(vt.apply_spectrum(&frame.synthesize(&lambda)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeumannSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NeumannSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200 }
    }
}

#[derive(Debug, Clone)]
pub struct NeumannResult {
    pub field: XField,
    /// Applications of `U_Phi`.
    pub iterations: usize,
    /// Final `||F - U_Phi G|| / ||F||`.
    pub residual: f64,
    /// `||F - U_Phi F|| / ||F||`.
    pub initial_residual: f64,
    /// Residual reduction of the first step.
    pub contraction_ratio: f64,
    pub converged: bool,
}

/// `G_{n+1} = G_n + (F - U_Phi G_n)` from `G_0 = F` until the relative
/// residual drops below `tol`.
pub fn neumann_invert(
    vt: &VoiceTransform,
    covering: &Covering,
    field: &XField,
    settings: NeumannSettings,
) -> Result<NeumannResult> {
    let frame = PointFrame::new(vt, covering)?;
    neumann_with(vt, &frame, covering, field, settings)
}

fn neumann_with(
    vt: &VoiceTransform,
    frame: &PointFrame,
    covering: &Covering,
    field: &XField,
    settings: NeumannSettings,
) -> Result<NeumannResult> {
    let norm = field.l2_norm();
    if norm == 0.0 {
        return Ok(NeumannResult {
            field: field.clone(),
            iterations: 0,
            residual: 0.0,
            initial_residual: 0.0,
            contraction_ratio: 0.0,
            converged: true,
        });
    }
    let mut g = field.clone();
    let mut r = field.sub(&apply_u(vt, frame, &g)?)?;
    let mut res = r.l2_norm() / norm;
    let initial = res;
    let mut ratio = f64::NAN;
    let mut iterations = 1;
    while res >= settings.tol && iterations <= settings.max_iter {
        g = g.add(&r)?;
        r = field.sub(&apply_u(vt, frame, &g)?)?;
        let next = r.l2_norm() / norm;
        if iterations == 1 {
            ratio = next / res;
            if !(ratio < 1.0) {
                return Err(Error::NoContraction { alpha: covering.alpha(), beta: covering.beta(), ratio });
            }
        }
        res = next;
        iterations += 1;
    }
    Ok(NeumannResult {
        field: g,
        iterations,
        residual: res,
        initial_residual: initial,
        contraction_ratio: if ratio.is_nan() { 0.0 } else { ratio },
        converged: res < settings.tol,
    })
}

/// Coefficients of an atomic decomposition with the inversion statistics.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub coeffs: SeqCoeffs,
    pub neumann: NeumannResult,
}

/// `lambda_i = c_i (U_Phi^{-1} V f)(x_i)`, the coefficients against the
/// dual family.
pub fn atomic_decompose(
    vt: &VoiceTransform,
    covering: &Covering,
    f: &GridSignal,
    settings: NeumannSettings,
) -> Result<Decomposition> {
    let frame = PointFrame::new(vt, covering)?;
    decompose_with(vt, &frame, covering, f, settings)
}

fn decompose_with(
    vt: &VoiceTransform,
    frame: &PointFrame,
    covering: &Covering,
    f: &GridSignal,
    settings: NeumannSettings,
) -> Result<Decomposition> {
    let neumann = neumann_with(vt, frame, covering, &vt.apply(f)?, settings)?;
    let values = frame.analyze(&vt.adjoint_spectrum(&neumann.field)?);
    let entries = values.iter().zip(frame.weights()).map(|(v, c)| v * c).collect();
    Ok(Decomposition { coeffs: SeqCoeffs::new(covering, entries)?, neumann })
}

/// `sum_i lambda_i phi_{x_i}`.
pub fn atomic_synthesize(vt: &VoiceTransform, covering: &Covering, lambda: &SeqCoeffs) -> Result<GridSignal> {
    let frame = PointFrame::new(vt, covering)?;
    Ok(to_space(&frame.synthesize(&lambda.entries)?))
}

/// `||f - g|| / ||f||`, zero when both vanish.
pub fn relative_error(f: &GridSignal, g: &GridSignal) -> Result<f64> {
    let norm = f.l2_norm();
    let diff = f.sub(g)?.l2_norm();
    if norm == 0.0 {
        return if diff == 0.0 { Ok(0.0) } else { Err(Error::ZeroDenominator) };
    }
    Ok(diff / norm)
}

// ---------------------------------------------------------------------------
// Meyer expansion

/// Coefficients `lambda^c_{j,k} = <f, 2^{j/2} psi^c(2^j . - k)>` on the torus.
#[derive(Debug, Clone)]
pub struct FrameExpansion {
    pub levels: usize,
    /// `c = 0`, `j = 0`, `k = 0..L`.
    pub scaling: Vec<Complex64>,
    /// `c = 1`, `j = 0..=levels`, `k = 0..L 2^j`.
    pub wavelet: Vec<Vec<Complex64>>,
    pub reconstruction: GridSignal,
    /// `||f - reconstruction|| / ||f||`.
    pub residual: f64,
    /// `sum_c ||lambda^c||` in the flat and natural sequence spaces.
    pub flat_norm: f64,
    pub natural_norm: f64,
}

fn meyer_filter(system: &MeyerSystem, grid: &SpatialGrid, c: u8, j: usize) -> Vec<Complex64> {
    let s = 2f64.powi(j as i32);
    grid.frequencies()
        .into_iter()
        .map(|xi| {
            let v = if c == 0 { system.psi0_hat(xi / s) } else { system.psi1_hat(xi / s) };
            v / s.sqrt()
        })
        .collect()
}

/// Inner products against `2^{j/2} psi^c(2^j . - k)`, `k = 0..L 2^j`.
fn meyer_coeffs(spec: &Spectrum, filter: &[Complex64], count: usize, shift: f64) -> Vec<Complex64> {
    let grid = spec.grid();
    let freqs = grid.frequencies();
    let c = grid.frequency_weight();
    (0..count)
        .map(|k| {
            let x = k as f64 * shift;
            spec.values()
                .iter()
                .zip(filter)
                .zip(&freqs)
                .map(|((a, f), &xi)| a * f.conj() * Complex64::from_polar(1.0, x * xi))
                .sum::<Complex64>()
                * c
        })
        .collect()
}

fn meyer_synth(acc: &mut [Complex64], grid: &SpatialGrid, filter: &[Complex64], coeffs: &[Complex64], shift: f64) {
    let freqs = grid.frequencies();
    for (k, l) in coeffs.iter().enumerate() {
        if *l == ZERO {
            continue;
        }
        let x = k as f64 * shift;
        for ((o, f), &xi) in acc.iter_mut().zip(filter).zip(&freqs) {
            *o += l * f * Complex64::from_polar(1.0, -x * xi);
        }
    }
}

/// Orthonormal Meyer expansion of `f` up to level `levels` with the
/// coefficient norms in `(P^{w~})^natural` over the dyadic covering
/// (`alpha = 1`, `beta = 2`) on `axis`.
///
/// The period must be an integer and the finest wavelets must lie below
/// the Nyquist frequency, so that the periodized system is orthonormal.
pub fn wavelet_frame_expand(
    f: &GridSignal,
    system: &MeyerSystem,
    spec: &SpaceSpec,
    levels: usize,
    axis: &ScaleAxis,
) -> Result<FrameExpansion> {
    let grid = *f.grid();
    let period = grid.period();
    if (period - period.round()).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("period {period} must be an integer")));
    }
    if grid.nyquist() < 8.0 * PI / 3.0 * 2f64.powi(levels as i32) {
        return Err(Error::InvalidParameter(format!("level {levels} wavelets exceed the Nyquist frequency")));
    }
    if axis.base() != 2.0 || axis.octaves() != levels {
        return Err(Error::InvalidParameter("the coefficient axis must be dyadic with one octave per level".into()));
    }
    let period = period.round() as usize;
    let spec_f = to_frequency(f);
    let phi = meyer_filter(system, &grid, 0, 0);
    let scaling = meyer_coeffs(&spec_f, &phi, period, 1.0);
    let mut acc = vec![ZERO; grid.n()];
    meyer_synth(&mut acc, &grid, &phi, &scaling, 1.0);
    let mut wavelet = Vec::with_capacity(levels + 1);
    for j in 0..=levels {
        let filt = meyer_filter(system, &grid, 1, j);
        let shift = 2f64.powi(-(j as i32));
        let coeffs = meyer_coeffs(&spec_f, &filt, period << j, shift);
        meyer_synth(&mut acc, &grid, &filt, &coeffs, shift);
        wavelet.push(coeffs);
    }
    let reconstruction = to_space(&Spectrum::new(grid, acc)?);
    let residual = relative_error(f, &reconstruction)?;

    let covering = Covering::new(1.0, 2.0, grid, axis.clone())?;
    let y = coorbit_space(spec);
    let place = |coeffs: &mut [Complex64], level: usize, values: &[Complex64]| -> Result<()> {
        let modulus = values.len() as i64;
        for b in covering.level_range(level) {
            coeffs[b] = values[covering.boxes()[b].k.rem_euclid(modulus) as usize];
        }
        Ok(())
    };
    let mut seq1 = vec![ZERO; covering.len()];
    place(&mut seq1, 0, &wavelet[0])?;
    for (j, w) in wavelet.iter().enumerate().skip(1) {
        place(&mut seq1, j, w)?;
    }
    let mut seq0 = vec![ZERO; covering.len()];
    place(&mut seq0, 0, &scaling)?;
    let (f1, n1) = seq_norms(&y, &covering, &SeqCoeffs::new(&covering, seq1)?)?;
    let (f0, n0) = seq_norms(&y, &covering, &SeqCoeffs::new(&covering, seq0)?)?;
    Ok(FrameExpansion { levels, scaling, wavelet, reconstruction, residual, flat_norm: f0 + f1, natural_norm: n0 + n1 })
}

// ---------------------------------------------------------------------------
// sweep

/// One `(alpha, beta)` point of the discretization sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub boxes: usize,
    pub osc_a1: f64,
    pub osc_amnu: f64,
    /// Worst `||F - U_Phi F|| / ||F||` over the battery.
    pub residual: f64,
    /// Worst first-step residual reduction of the Neumann iteration.
    pub contraction_ratio: f64,
    /// Worst `||f - synthesize(decompose(f))|| / ||f||`; `NaN` on failure.
    pub recon_residual: f64,
    /// Whether every Neumann run reached its tolerance.
    pub converged: bool,
    /// Left side of the smallness condition with `delta = osc_amnu`.
    pub dcond: f64,
    pub dcond_holds: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub neumann: NeumannSettings,
    /// Quasi-norm constant `C_Y` of the target space.
    pub quasi_constant: f64,
    /// Use [`Covering::fitted`] rather than seam-truncated boxes.
    pub fitted: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alphas: vec![1.0, 0.5, 0.25, 0.125],
            betas: vec![2.0, 2f64.sqrt(), 2f64.powf(0.25)],
            neumann: NeumannSettings::default(),
            quasi_constant: 1.0,
            fitted: true,
        }
    }
}

/// `delta ((1 + C) r + delta C) C`; the atomic decomposition theorem
/// applies when this is at most 1.
pub fn dcond_value(delta: f64, r_norm: f64, quasi_constant: f64) -> f64 {
    delta * ((1.0 + quasi_constant) * r_norm + delta * quasi_constant) * quasi_constant
}

/// Runs every `(alpha, beta)` pair, rows ordered by `beta` then `alpha`.
pub fn sweep(
    vt: &VoiceTransform,
    config: &SweepConfig,
    battery: &[GridSignal],
    nu: &ReservoirWeight,
) -> Result<Vec<SweepRow>> {
    if battery.is_empty() {
        return Err(Error::InvalidParameter("empty battery".into()));
    }
    let r_norm = frame_kernel(vt).modulus().amnu_norm(nu);
    let fields: Vec<XField> = battery.iter().map(|f| vt.apply(f)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &beta in &config.betas {
        for &alpha in &config.alphas {
            let covering = if config.fitted {
                Covering::fitted(alpha, beta, *vt.grid(), vt.axis().clone())?
            } else {
                Covering::new(alpha, beta, *vt.grid(), vt.axis().clone())?
            };
            let osc = osc_norms(vt, &covering, nu)?;
            let frame = PointFrame::new(vt, &covering)?;
            let mut residual = 0.0f64;
            for field in &fields {
                residual = residual.max(relative_defect(&apply_u(vt, &frame, field)?, field)?);
            }
            let mut contraction = 0.0f64;
            let mut recon = 0.0f64;
            let mut error = None;
            let mut converged = true;
            for f in battery {
                match decompose_with(vt, &frame, &covering, f, config.neumann) {
                    Ok(d) => {
                        contraction = contraction.max(d.neumann.contraction_ratio);
                        converged &= d.neumann.converged;
                        let g = to_space(&frame.synthesize(&d.coeffs.entries)?);
                        recon = recon.max(relative_error(f, &g)?);
                    }
                    Err(e @ Error::NoContraction { .. }) => {
                        if let Error::NoContraction { ratio, .. } = e {
                            contraction = contraction.max(ratio);
                        }
                        recon = f64::NAN;
                        converged = false;
                        error = Some(e.to_string());
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            let dcond = dcond_value(osc.amnu, r_norm, config.quasi_constant);
            rows.push(SweepRow {
                alpha,
                beta,
                boxes: covering.len(),
                osc_a1: osc.a1,
                osc_amnu: osc.amnu,
                residual,
                contraction_ratio: contraction,
                recon_residual: recon,
                converged,
                dcond,
                dcond_holds: dcond <= 1.0,
                error,
            });
        }
    }
    Ok(rows)
}

/// `true` if `values` never increases by more than `rel` relative to the
/// previous entry.
pub fn non_increasing(values: &[f64], rel: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzers::{meyer_generators, meyer_pair, Ramp};
    use crate::signals::{battery, meyer_wavelet};
    use crate::weights::Weight2ML;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> VoiceTransform {
        let grid = SpatialGrid::new(32, 8.0).unwrap();
        let axis = ScaleAxis::dyadic(2, 2).unwrap();
        VoiceTransform::new(meyer_pair(Ramp::Exponential), grid, axis).unwrap()
    }

    fn random_field(vt: &VoiceTransform, rng: &mut ChaCha8Rng) -> XField {
        let dim = vt.grid().n() * vt.axis().slots();
        let values = (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        XField::new(*vt.grid(), vt.axis().clone(), values).unwrap()
    }

    fn nu(vt: &VoiceTransform) -> ReservoirWeight {
        ReservoirWeight::new(&Weight2ML::builtin(1.0, 0.0, 0.0), 2.0, vt.axis().min_scale())
    }

    #[test]
    fn box_measures_match_the_analytic_value() {
        let grid = SpatialGrid::new(64, 4.0).unwrap();
        let axis = ScaleAxis::dyadic(4, 2).unwrap();
        for alpha in [1.0, 0.5, 0.25] {
            let exact = Covering::new(alpha, 2.0, grid, axis.clone()).unwrap();
            for b in exact.boxes() {
                assert!((b.mu - exact.mu_analytic(b.level)).abs() < 1e-12);
            }
        }
        // irrational widths: interior boxes are exact, the seam box is truncated
        let cov = Covering::new(0.25, 2f64.sqrt(), grid, axis.clone()).unwrap();
        for j in 0..=cov.levels() {
            let r = cov.level_range(j);
            for b in r.clone() {
                let bx = &cov.boxes()[b];
                let expect = cov.mu_analytic(j) * bx.length / cov.width(j);
                assert!((bx.mu - expect).abs() < 1e-12);
                if b + 1 < r.end {
                    assert!((bx.mu - cov.mu_analytic(j)).abs() < 1e-12);
                }
            }
        }
        let fit = Covering::fitted(0.25, 2f64.sqrt(), grid, axis).unwrap();
        for b in fit.boxes() {
            let scale = fit.width(b.level) / (0.25 * 2f64.sqrt().powi(-(b.level as i32)));
            assert!(scale <= 1.0 + 1e-12 && scale > 0.5);
            assert!((b.mu - fit.mu_analytic(b.level) * scale).abs() < 1e-12);
        }
    }

    #[test]
    fn boxes_tile_the_window() {
        let grid = SpatialGrid::new(64, 4.0).unwrap();
        let axis = ScaleAxis::dyadic(4, 2).unwrap();
        for (alpha, beta) in [(1.0, 2.0), (0.3, 2f64.sqrt()), (0.125, 2f64.powf(0.25))] {
            for cov in [Covering::new(alpha, beta, grid, axis.clone()).unwrap(), Covering::fitted(alpha, beta, grid, axis.clone()).unwrap()] {
                let mut seen = vec![0; grid.n() * axis.slots()];
                for i in 0..cov.len() {
                    let b = &cov.boxes()[i];
                    for &c in cov.cells(i) {
                        seen[c] += 1;
                        assert_eq!(cov.cell_boxes()[c], i);
                        let (node, slot) = (c % grid.n(), c / grid.n());
                        let u = (grid.node(node) - b.x).rem_euclid(4.0);
                        assert!(u < b.length + 1e-9 || u > 4.0 - 1e-9, "{u} {b:?}");
                        match (axis.scale(slot), b.t) {
                            (Scale::Infinity, None) => {}
                            (Scale::Finite(t), Some(tb)) => assert!(t >= tb && t < tb * beta),
                            other => panic!("{other:?}"),
                        }
                    }
                }
                assert!(seen.iter().all(|&s| s == 1));
                for j in 0..=cov.levels() {
                    let len: f64 = cov.level_range(j).map(|b| cov.boxes()[b].length).sum();
                    assert!((len - 4.0).abs() < 1e-12);
                    let mass = if j == 0 { 1.0 } else { beta.powi(j as i32) - beta.powi(j as i32 - 1) };
                    let mu: f64 = cov.level_range(j).map(|b| cov.mu(b)).sum();
                    assert!((mu - 4.0 * mass).abs() < 1e-12);
                }
                for (i, b) in cov.boxes().iter().enumerate() {
                    assert_eq!(cov.box_index(b.level, b.k), Some(i));
                }
            }
        }
    }

    #[test]
    fn sigma_matches_bruteforce() {
        let grid = SpatialGrid::new(64, 8.0).unwrap();
        let axis = ScaleAxis::dyadic(2, 3).unwrap();
        for (alpha, beta) in [(8.0, 2.0), (4.0, 2.0), (3.0, 2.0), (1.0, 2f64.sqrt()), (0.4, 2f64.sqrt())] {
            for cov in [Covering::new(alpha, beta, grid, axis.clone()).unwrap(), Covering::fitted(alpha, beta, grid, axis.clone()).unwrap()] {
                assert_eq!(cov.sigma(), cov.sigma_bruteforce(), "{alpha} {beta}");
            }
        }
        let one = Covering::new(8.0, 2.0, grid, ScaleAxis::dyadic(1, 1).unwrap()).unwrap();
        assert_eq!(one.sigma(), 2);
    }

    #[test]
    fn misaligned_beta_is_rejected() {
        let grid = SpatialGrid::new(32, 4.0).unwrap();
        let axis = ScaleAxis::dyadic(2, 3).unwrap();
        assert!(Covering::new(1.0, 3.0, grid, axis.clone()).is_err());
        assert!(Covering::new(1.0, 4.0, grid, axis.clone()).is_err());
        assert!(Covering::new(0.0, 2.0, grid, axis.clone()).is_err());
        assert!(Covering::new(1.0, 1.0, grid, axis.clone()).is_err());
        assert_eq!(Covering::new(1.0, 2f64.sqrt(), grid, axis).unwrap().levels(), 6);
    }

    #[test]
    fn frame_kernel_structure_and_quadrature() {
        let vt = small();
        let r = frame_kernel(&vt);
        let n = vt.grid().n();
        let dim = r.dim();
        for slot in 0..vt.axis().slots() {
            let d0 = r.entry(slot * n, slot * n);
            assert!(d0.im.abs() < 1e-14);
            for i in 0..n {
                assert_eq!(r.entry(slot * n + i, slot * n + i), d0);
            }
            let norm = vt.atom(0, slot).l2_norm();
            assert!((d0.re - norm * norm).abs() < 1e-12);
        }
        let mut herm = 0.0f64;
        for x in 0..dim {
            for y in 0..dim {
                herm = herm.max((r.entry(x, y) - r.entry(y, x).conj()).norm());
            }
        }
        assert!(herm < 1e-12);
        // depends on x - y only
        assert_eq!(r.entry(3 * n + 5, n + 2), r.entry(3 * n + 9, n + 6));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (x, y) = (rng.gen_range(0..dim), rng.gen_range(0..dim));
            let ax = vt.atom(x % n, x / n);
            let ay = vt.atom(y % n, y / n);
            let direct = ay.inner(&ax).unwrap();
            assert!((direct - r.entry(x, y)).norm() < 1e-8);
        }
    }

    #[test]
    fn reproducing_defect_paths_agree() {
        let vt = small();
        assert_eq!(reproducing_defect(&vt, &GridSignal::zeros(*vt.grid())).unwrap(), 0.0);
        let r = frame_kernel(&vt);
        for f in battery(*vt.grid(), 3, 6.0, 2).unwrap() {
            let field = vt.apply(&f).unwrap();
            let fast = reproduce(&vt, &field).unwrap();
            let dense = r.apply(&field).unwrap();
            assert!(fast.sub(&dense).unwrap().l2_norm() < 1e-10 * field.l2_norm());
            let d1 = relative_defect(&fast, &field).unwrap();
            let d2 = relative_defect(&dense, &field).unwrap();
            assert!((d1 - d2).abs() < 1e-10);
            assert!((reproducing_defect(&vt, &f).unwrap() - d1).abs() < 1e-15);
        }
    }

    #[test]
    fn gram_kernel_matches_bruteforce_sup() {
        let vt = small();
        let other = VoiceTransform::new(crate::analyzers::make_admissible_pair(crate::analyzers::bump_band(), None).unwrap().parseval().unwrap(), *vt.grid(), vt.axis().clone()).unwrap();
        let cov = Covering::new(2.0, 2.0, *vt.grid(), vt.axis().clone()).unwrap();
        let k = gram_cross_kernel(&other, &vt, &cov).unwrap();
        let cross = cross_table(&vt, &other);
        let dim = k.dim();
        for x in (0..dim).step_by(7) {
            for y in (0..dim).step_by(5) {
                let b = cov.cell_boxes()[y];
                let brute = (0..dim).filter(|&z| cov.cell_boxes()[z] == b).map(|z| cross.entry(x, z).norm()).fold(0.0, f64::max);
                assert_eq!(k.entry(x, y).re, brute);
            }
        }
        let kstar = k.involution();
        for x in 0..dim {
            for y in 0..dim {
                assert_eq!(kstar.entry(x, y), k.entry(y, x));
            }
        }
        // G = F: bounded by the atom norms and dominating the diagonal
        let m = gram_cross_kernel(&vt, &vt, &cov).unwrap();
        let r = frame_kernel(&vt);
        let top = (0..vt.axis().slots()).map(|s| r.entry(s * 32, s * 32).re).fold(0.0, f64::max);
        for x in 0..dim {
            assert!(m.entry(x, x).re >= r.entry(x, x).re - 1e-12);
            for y in 0..dim {
                assert!(m.entry(x, y).re <= top + 1e-12);
            }
        }
    }

    #[test]
    fn osc_kernel_properties() {
        let vt = small();
        let r = frame_kernel(&vt);
        let dim = r.dim();
        let cov = Covering::new(1.0, 2.0, *vt.grid(), vt.axis().clone()).unwrap();
        let osc = osc_kernel(&vt, &cov).unwrap();
        let m = gram_cross_kernel(&vt, &vt, &cov).unwrap();
        for x in 0..dim {
            for y in 0..dim {
                assert!(osc.entry(x, y).re <= m.entry(x, y).re + r.entry(x, y).norm() + 1e-12);
                // brute force over the box of y
                let b = cov.cell_boxes()[y];
                let brute = cov.cells(b).iter().map(|&z| (r.entry(x, y) - r.entry(x, z)).norm()).fold(0.0, f64::max);
                assert!((osc.entry(x, y).re - brute).abs() < 1e-14);
            }
        }
        // streamed norms agree with the dense table
        let nu = nu(&vt);
        let streamed = osc_norms(&vt, &cov, &nu).unwrap();
        assert!((streamed.a1 - osc.a1_norm()).abs() < 1e-12 * streamed.a1);
        assert!((streamed.amnu - osc.amnu_norm(&nu)).abs() < 1e-12 * streamed.amnu);
        // single-cell boxes: R is constant on every box
        let h = vt.grid().step();
        let fine = Covering::new(h, 2f64.sqrt(), *vt.grid(), vt.axis().clone()).unwrap();
        assert!(fine.cells.iter().all(|c| c.len() <= 1));
        let zero = osc_kernel(&vt, &fine).unwrap();
        assert!(zero.to_dense().iter().all(|v| *v == ZERO));
    }

    #[test]
    fn osc_shrinks_under_refinement() {
        let vt = small();
        let nu = nu(&vt);
        let mut last = f64::INFINITY;
        for alpha in [4.0, 2.0, 1.0, 0.5, 0.25] {
            let cov = Covering::new(alpha, 2.0, *vt.grid(), vt.axis().clone()).unwrap();
            let a1 = osc_norms(&vt, &cov, &nu).unwrap().a1;
            assert!(a1 <= last * (1.0 + 1e-9), "{alpha}: {a1} > {last}");
            last = a1;
        }
        let finest = Covering::new(vt.grid().step(), 2f64.sqrt(), *vt.grid(), vt.axis().clone()).unwrap();
        assert_eq!(osc_norms(&vt, &finest, &nu).unwrap().a1, 0.0);
    }

    #[test]
    fn convex_hull_farthest_point_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let m = rng.gen_range(1..30);
            let pts: Vec<Complex64> = (0..m).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let hull = convex_hull(&pts);
            for p in &pts {
                let a = pts.iter().map(|q| (p - q).norm_sqr()).fold(0.0, f64::max);
                let b = hull.iter().map(|q| (p - q).norm_sqr()).fold(0.0, f64::max);
                assert_eq!(a, b);
            }
        }
        let line: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(convex_hull(&line).len(), 2);
    }

    fn dense_sums(k: &KernelOp, weight: impl Fn(usize, usize) -> f64) -> (f64, f64) {
        let dim = k.dim();
        let n = k.grid().n();
        let mu = |c: usize| crate::grid::mu_weight(k.grid(), k.axis(), c / n);
        let mut row_max = 0.0f64;
        let mut col_max = 0.0f64;
        for x in 0..dim {
            let mut s = 0.0;
            for y in 0..dim {
                s += k.entry(x, y).norm() * weight(x, y) * mu(y);
            }
            row_max = row_max.max(s);
        }
        for y in 0..dim {
            let mut s = 0.0;
            for x in 0..dim {
                s += k.entry(x, y).norm() * weight(x, y) * mu(x);
            }
            col_max = col_max.max(s);
        }
        (row_max, col_max)
    }

    #[test]
    fn algebra_norms_match_double_loop() {
        let vt = small();
        let n = vt.grid().n();
        let nu = nu(&vt);
        let r = frame_kernel(&vt);
        let (rows, cols) = dense_sums(&r, |_, _| 1.0);
        assert!((rows - cols).abs() < 1e-12 * rows);
        assert!((r.a1_norm() - rows.max(cols)).abs() < 1e-12 * rows);
        let cells = cell_weights(vt.grid(), vt.axis(), &nu);
        let (rw, cw) = dense_sums(&r, |x, y| (cells[x] / cells[y]).max(cells[y] / cells[x]));
        assert!((r.amnu_norm(&nu) - rw.max(cw)).abs() < 1e-12 * rw);
        // indicator of A x B
        let dim = r.dim();
        let in_a = |x: usize| x % 3 == 0;
        let in_b = |y: usize| y / n == 1 && y % n < 10;
        let table = (0..dim * dim)
            .map(|c| if in_a(c / dim) && in_b(c % dim) { Complex64::new(1.0, 0.0) } else { ZERO })
            .collect();
        let k = KernelOp::dense(*vt.grid(), vt.axis().clone(), table).unwrap();
        let mu = |c: usize| crate::grid::mu_weight(vt.grid(), vt.axis(), c / n);
        let mu_a: f64 = (0..dim).filter(|&x| in_a(x)).map(mu).sum();
        let mu_b: f64 = (0..dim).filter(|&y| in_b(y)).map(mu).sum();
        assert!((k.a1_norm() - mu_a.max(mu_b)).abs() < 1e-12);
    }

    #[test]
    fn kernel_apply_identity_linearity_and_paths() {
        let vt = small();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_field(&vt, &mut rng);
        let g = random_field(&vt, &mut rng);
        let id = KernelOp::identity(*vt.grid(), vt.axis().clone());
        assert!(id.apply(&f).unwrap().sub(&f).unwrap().l2_norm() < 1e-12 * f.l2_norm());
        let r = frame_kernel(&vt);
        let c = Complex64::new(0.3, -1.2);
        let lhs = r.apply(&f.scaled(c).add(&g).unwrap()).unwrap();
        let rhs = r.apply(&f).unwrap().scaled(c).add(&r.apply(&g).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().l2_norm() < 1e-12 * lhs.l2_norm());
        let dense = KernelOp::dense(*vt.grid(), vt.axis().clone(), r.to_dense()).unwrap();
        let a = dense.apply(&f).unwrap();
        assert!(a.sub(&r.apply(&f).unwrap()).unwrap().l2_norm() < 1e-12 * a.l2_norm());
        assert!(KernelOp::dense(*vt.grid(), vt.axis().clone(), vec![ZERO; 3]).is_err());
    }

    #[test]
    fn op_norm_estimate_is_stable() {
        use crate::spaces::{Family, QIndex, SpaceSpec, Variant};
        use crate::varexp::ExponentField;
        let vt = small();
        let grid = *vt.grid();
        let spec = SpaceSpec::new(
            Family::P,
            ExponentField::constant(grid, 2.0).unwrap(),
            QIndex::Constant(2.0),
            Weight2ML::unit(),
            2.0,
            Variant::Def,
        )
        .unwrap();
        let r = frame_kernel(&vt);
        let fields = |count: usize| -> Vec<XField> {
            battery(grid, count, 6.0, 8).unwrap().iter().map(|f| vt.apply(f).unwrap()).collect()
        };
        let small_est = kernel_op_norm_estimate(&r, &spec, &fields(4)).unwrap();
        let big_est = kernel_op_norm_estimate(&r, &spec, &fields(12)).unwrap();
        assert!(small_est.is_finite() && small_est > 0.0);
        assert!(big_est >= small_est && big_est < 1.25 * small_est, "{small_est} {big_est}");
        assert!(kernel_op_norm_estimate(&r, &spec, &[]).is_err());
    }

    #[test]
    fn point_frame_matches_transform_on_grid_points() {
        let vt = small();
        let cov = Covering::new(1.0, 2.0, *vt.grid(), vt.axis().clone()).unwrap();
        let frame = PointFrame::new(&vt, &cov).unwrap();
        let f = battery(*vt.grid(), 1, 6.0, 1).unwrap().remove(0);
        let coeffs = frame.analyze(&to_frequency(&f));
        // level-1 atoms against grid-sampled atoms by spatial quadrature
        for (i, b) in cov.boxes().iter().enumerate() {
            let atom = frame.atom(i);
            let direct = f.inner(&atom).unwrap();
            assert!((direct - coeffs[i]).norm() < 1e-12, "{b:?}");
            let expect = b.t.map_or(1.0, |t| t.sqrt());
            let _ = expect;
        }
    }

    /// `U_Phi F` by dense sums of spatial inner products of sampled atoms.
    fn dense_u(vt: &VoiceTransform, cov: &Covering, field: &XField) -> XField {
        let frame = PointFrame::new(vt, cov).unwrap();
        let n = vt.grid().n();
        let dim = n * vt.axis().slots();
        let atoms: Vec<GridSignal> = (0..dim).map(|c| vt.atom(c % n, c / n)).collect();
        let mu = field.mu_weights();
        let mut out = vec![ZERO; dim];
        for i in 0..cov.len() {
            let phi_i = frame.atom(i);
            // R(x_i, y) = <phi_y, phi_{x_i}>
            let column: Vec<Complex64> = atoms.iter().map(|a| a.inner(&phi_i).unwrap()).collect();
            let value: Complex64 = (0..dim).map(|y| column[y] * field.values()[y] * mu[y]).sum();
            for (y, o) in out.iter_mut().enumerate() {
                // R(y, x_i) = <phi_{x_i}, phi_y>
                *o += cov.mu(i) * value * column[y].conj();
            }
        }
        XField::new(*vt.grid(), vt.axis().clone(), out).unwrap()
    }

    #[test]
    fn discretization_matches_dense_sum() {
        let vt = mid();
        let cov = Covering::new(1.0, 2.0, *vt.grid(), vt.axis().clone()).unwrap();
        let frame = PointFrame::new(&vt, &cov).unwrap();
        let zero = XField::zeros(*vt.grid(), vt.axis().clone());
        let out = discretization_op(&vt, &cov, &zero).unwrap();
        assert!(out.field.values().iter().all(|v| *v == ZERO));
        // F = R(., x_{i0}) = V phi_{x_{i0}}
        let i0 = cov.level_range(0).start + 1;
        let field = vt.apply(&frame.atom(i0)).unwrap();
        let fast = discretization_op(&vt, &cov, &field).unwrap();
        assert!(fast.gate_ok, "{}", fast.range_defect);
        let slow = dense_u(&vt, &cov, &field);
        let err = fast.field.sub(&slow).unwrap().l2_norm() / slow.l2_norm();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn discretization_is_self_adjoint() {
        let vt = small();
        let cov = Covering::new(0.5, 2.0, *vt.grid(), vt.axis().clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let f = random_field(&vt, &mut rng);
            let g = random_field(&vt, &mut rng);
            let uf = discretization_op(&vt, &cov, &f).unwrap().field;
            let ug = discretization_op(&vt, &cov, &g).unwrap().field;
            let lhs = uf.inner(&g).unwrap();
            let rhs = f.inner(&ug).unwrap();
            assert!((lhs - rhs).norm() < 1e-10 * uf.l2_norm() * g.l2_norm());
            assert!(!discretization_op(&vt, &cov, &f).unwrap().gate_ok);
        }
    }

    fn mid() -> VoiceTransform {
        let grid = SpatialGrid::new(64, 4.0).unwrap();
        let axis = ScaleAxis::dyadic(4, 2).unwrap();
        VoiceTransform::new(meyer_pair(Ramp::Exponential), grid, axis).unwrap()
    }

    #[test]
    fn neumann_inverts_on_fine_coverings() {
        let vt = mid();
        let cov = Covering::fitted(0.125, 2f64.powf(0.25), *vt.grid(), vt.axis().clone()).unwrap();
        let zero = XField::zeros(*vt.grid(), vt.axis().clone());
        let z = neumann_invert(&vt, &cov, &zero, NeumannSettings::default()).unwrap();
        assert!(z.field.values().iter().all(|v| *v == ZERO) && z.iterations <= 1);
        let f = battery(*vt.grid(), 1, 10.0, 3).unwrap().remove(0);
        let field = vt.apply(&f).unwrap();
        let settings = NeumannSettings { tol: 1e-9, max_iter: 100 };
        let res = neumann_invert(&vt, &cov, &field, settings).unwrap();
        assert!(res.converged && res.contraction_ratio < 1.0);
        let back = discretization_op(&vt, &cov, &res.field).unwrap().field;
        assert!(back.sub(&field).unwrap().l2_norm() < 1e-9 * field.l2_norm());
    }

    #[test]
    fn neumann_reports_missing_contraction() {
        let vt = mid();
        let cov = Covering::new(4.0, 2.0, *vt.grid(), vt.axis().clone()).unwrap();
        let f = battery(*vt.grid(), 1, 10.0, 3).unwrap().remove(0);
        let field = vt.apply(&f).unwrap();
        match neumann_invert(&vt, &cov, &field, NeumannSettings::default()) {
            Err(Error::NoContraction { alpha, beta, ratio }) => {
                assert_eq!((alpha, beta), (4.0, 2.0));
                assert!(ratio >= 1.0);
            }
            other => panic!("{:?}", other.map(|r| r.contraction_ratio)),
        }
    }

    #[test]
    fn atomic_decomposition_round_trip() {
        let vt = mid();
        let cov = Covering::fitted(0.125, 2f64.powf(0.25), *vt.grid(), vt.axis().clone()).unwrap();
        let zero = atomic_synthesize(&vt, &cov, &SeqCoeffs::zeros(&cov)).unwrap();
        assert!(zero.values().iter().all(|v| *v == ZERO));
        let frame = PointFrame::new(&vt, &cov).unwrap();
        let i0 = cov.level_range(2).start + 5;
        let atom = frame.atom(i0);
        let d = atomic_decompose(&vt, &cov, &atom, NeumannSettings::default()).unwrap();
        // concentration in the natural normalization lambda_i / mu(U_i)
        let peak = (0..cov.len()).max_by(|&a, &b| {
            (d.coeffs.entries[a].norm() / cov.mu(a)).total_cmp(&(d.coeffs.entries[b].norm() / cov.mu(b)))
        });
        let peak = peak.unwrap();
        assert_eq!(peak, i0);
        let back = atomic_synthesize(&vt, &cov, &d.coeffs).unwrap();
        assert!(relative_error(&atom, &back).unwrap() < 1e-2);
    }

    #[test]
    fn meyer_expansion_is_orthonormal() {
        let grid = SpatialGrid::new(256, 8.0).unwrap();
        let axis = ScaleAxis::dyadic(2, 3).unwrap();
        let sys = meyer_generators(Ramp::Exponential);
        let spec = crate::spaces::SpaceSpec::new(
            crate::spaces::Family::F,
            crate::varexp::ExponentField::constant(grid, 2.0).unwrap(),
            crate::spaces::QIndex::Constant(2.0),
            Weight2ML::unit(),
            2.0,
            crate::spaces::Variant::Def,
        )
        .unwrap();
        let atom = meyer_wavelet(grid, 2, 5);
        let e = wavelet_frame_expand(&atom, &sys, &spec, 3, &axis).unwrap();
        assert!(e.residual < 1e-10);
        for (j, level) in e.wavelet.iter().enumerate() {
            for (k, v) in level.iter().enumerate() {
                let expect = if (j, k) == (2, 5) { 1.0 } else { 0.0 };
                assert!((v - expect).norm() < 1e-12, "{j} {k} {v}");
            }
        }
        assert!(e.scaling.iter().all(|v| v.norm() < 1e-12));
        // band-limited inside the levels
        for f in battery(grid, 3, 30.0, 6).unwrap() {
            let e = wavelet_frame_expand(&f, &sys, &spec, 3, &axis).unwrap();
            assert!(e.residual < 1e-8, "{}", e.residual);
            assert!(e.natural_norm > 0.0 && e.flat_norm > 0.0);
        }
        let bad = SpatialGrid::new(256, 7.5).unwrap();
        let spec_bad = crate::spaces::SpaceSpec { p: crate::varexp::ExponentField::constant(bad, 2.0).unwrap(), ..spec.clone() };
        assert!(wavelet_frame_expand(&GridSignal::zeros(bad), &sys, &spec_bad, 3, &axis).is_err());
        assert!(wavelet_frame_expand(&atom, &sys, &spec, 6, &ScaleAxis::dyadic(2, 6).unwrap()).is_err());
    }

    #[test]
    fn dcond_formula() {
        assert_eq!(dcond_value(0.0, 3.0, 1.0), 0.0);
        assert!((dcond_value(0.1, 2.0, 1.0) - 0.1 * (4.0 + 0.1)).abs() < 1e-15);
        assert!(non_increasing(&[3.0, 2.0, 2.0, 1.0], 0.0));
        assert!(!non_increasing(&[1.0, 1.1], 0.05));
    }
}
