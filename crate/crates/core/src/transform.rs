//! Continuous wavelet transform on the discretized index set, its adjoint,
//! tightness diagnostics, and the Peetre / Peetre-Wiener maximal operators.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analyzers::AnalyzerPair;
use crate::error::{Error, Result};
use crate::grid::{dilate_filter, to_frequency, to_space, GridSignal, Normalization, Scale, ScaleAxis, SpatialGrid, Spectrum, XField};

/// Transform `f -> <f, phi_(x,t)>` with `phi_(x,inf) = T_x Phi_0` and
/// `phi_(x,t) = T_x D_t^{L2} Phi`.
#[derive(Debug, Clone)]
pub struct VoiceTransform {
    pair: AnalyzerPair,
    grid: SpatialGrid,
    axis: ScaleAxis,
    /// `t^{1/2} Phi^(t xi)` per finite slot, `Phi_0^(xi)` in the last slot.
    filters: Vec<Vec<Complex64>>,
}

impl VoiceTransform {
    pub fn new(pair: AnalyzerPair, grid: SpatialGrid, axis: ScaleAxis) -> Result<Self> {
        let mut filters = Vec::with_capacity(axis.slots());
        let phi = pair.phi_profile();
        for &t in axis.scales() {
            filters.push(dilate_filter(|xi| phi(xi), Scale::Finite(t), &grid, Normalization::L2)?);
        }
        let phi0 = pair.phi0_profile();
        filters.push(dilate_filter(|xi| phi0(xi), Scale::Infinity, &grid, Normalization::L2)?);
        Ok(Self { pair, grid, axis, filters })
    }

    pub fn pair(&self) -> &AnalyzerPair {
        &self.pair
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn axis(&self) -> &ScaleAxis {
        &self.axis
    }

    /// Frequency samples of the atom at node 0's translate for `slot`.
    pub fn filter(&self, slot: usize) -> &[Complex64] {
        &self.filters[slot]
    }

    /// `mu` weight divided by `h`: `Delta / t` or 1 at infinity.
    pub fn slot_weight(&self, slot: usize) -> f64 {
        match self.axis.scale(slot) {
            Scale::Finite(t) => self.axis.delta() / t,
            Scale::Infinity => 1.0,
        }
    }

    /// The atom `phi_(x_node, t_slot)` sampled on the grid.
    pub fn atom(&self, node: usize, slot: usize) -> GridSignal {
        let x = self.grid.node(node);
        let freqs = self.grid.frequencies();
        let values = self.filters[slot]
            .iter()
            .zip(&freqs)
            .map(|(v, &xi)| v * Complex64::from_polar(1.0, -x * xi))
            .collect();
        to_space(&Spectrum::new(self.grid, values).expect("grid length"))
    }

    pub fn apply(&self, f: &GridSignal) -> Result<XField> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.apply_spectrum(&to_frequency(f)))
    }

    pub fn apply_spectrum(&self, spec: &Spectrum) -> XField {
        let c = (2.0 * PI).sqrt();
        let n = self.grid.n();
        let slots: Vec<Vec<Complex64>> = self
            .filters
            .par_iter()
            .map(|filt| {
                let values = spec.values().iter().zip(filt).map(|(a, b)| a * b.conj() * c).collect();
                to_space(&Spectrum::new(self.grid, values).expect("grid length")).into_values()
            })
            .collect();
        let mut out = Vec::with_capacity(n * self.axis.slots());
        for s in slots {
            out.extend(s);
        }
        XField::new(self.grid, self.axis.clone(), out).expect("finite transform")
    }

    /// Spectrum of `V* F = sum_cells F(x,t) phi_(x,t) mu(x,t)`.
    pub fn adjoint_spectrum(&self, field: &XField) -> Result<Spectrum> {
        if *field.grid() != self.grid || *field.axis() != self.axis {
            return Err(Error::GridMismatch);
        }
        let c = (2.0 * PI).sqrt();
        let n = self.grid.n();
        let parts: Vec<Vec<Complex64>> = (0..self.axis.slots())
            .into_par_iter()
            .map(|slot| {
                let s = GridSignal::new(self.grid, field.slot(slot).to_vec()).expect("finite field");
                let spec = to_frequency(&s);
                let w = self.slot_weight(slot) * c;
                spec.values().iter().zip(&self.filters[slot]).map(|(a, b)| a * b * w).collect()
            })
            .collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for p in parts {
            for (a, b) in acc.iter_mut().zip(p) {
                *a += b;
            }
        }
        Spectrum::new(self.grid, acc)
    }

    pub fn adjoint(&self, field: &XField) -> Result<GridSignal> {
        Ok(to_space(&self.adjoint_spectrum(field)?))
    }

    /// `A(xi) = 2 pi (|Phi_0^|^2 + sum_m Delta |Phi^(t_m xi)|^2)`; the frame
    /// operator `V*V` is the Fourier multiplier `A`.
    pub fn frame_multiplier(&self) -> Vec<f64> {
        let n = self.grid.n();
        let mut a = vec![0.0; n];
        for slot in 0..self.axis.slots() {
            let w = self.slot_weight(slot);
            for (k, v) in self.filters[slot].iter().enumerate() {
                a[k] += 2.0 * PI * w * v.norm_sqr();
            }
        }
        a
    }

    /// `max |A(xi) - 1|` over frequency nodes with `|xi| <= band`.
    pub fn frame_bound_defect(&self, band: f64) -> f64 {
        self.frame_multiplier()
            .iter()
            .zip(self.grid.frequencies())
            .filter(|(_, xi)| xi.abs() <= band)
            .map(|(a, _)| (a - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `sum |Vf|^2 mu / ||f||^2`.
    pub fn energy_ratio(&self, f: &GridSignal) -> Result<f64> {
        let norm = f.l2_norm();
        if norm == 0.0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(self.apply(f)?.l2_norm().powi(2) / (norm * norm))
    }
}

/// `max_f | sum |Vf|^2 mu / ||f||^2 - 1 |` over the battery.
pub fn tightness_defect(vt: &VoiceTransform, battery: &[GridSignal]) -> Result<f64> {
    if battery.is_empty() {
        return Err(Error::InvalidParameter("empty battery".into()));
    }
    let ratios: Vec<Result<f64>> = battery.par_iter().map(|f| vt.energy_ratio(f)).collect();
    let mut worst = 0.0f64;
    for r in ratios {
        worst = worst.max((r? - 1.0).abs());
    }
    Ok(worst)
}

fn check_exponent(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("Peetre exponent a = {a} must be positive")));
    }
    Ok(())
}

/// `max_z |g(x+z)| (1 + |z|/t)^{-a}` on the torus, searching outward from
/// `z = 0` and stopping once the penalty bound falls below the running best.
pub fn peetre_slice(grid: &SpatialGrid, abs: &[f64], t: f64, a: f64) -> Vec<f64> {
    let n = grid.n();
    let h = grid.step();
    let half = n / 2;
    let pen: Vec<f64> = (0..=half).map(|d| (1.0 + d as f64 * h / t).powf(-a)).collect();
    let top = abs.iter().copied().fold(0.0, f64::max);
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut best = abs[i];
        for d in 1..=half {
            if top * pen[d] <= best {
                break;
            }
            let l = abs[(i + n - d) % n];
            let r = abs[(i + d) % n];
            best = best.max(l.max(r) * pen[d]);
        }
        *o = best;
    }
    out
}

/// Exhaustive `O(n^2)` version of [`peetre_slice`].
pub fn peetre_slice_reference(grid: &SpatialGrid, abs: &[f64], t: f64, a: f64) -> Vec<f64> {
    let n = grid.n();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| abs[j] * (1.0 + grid.torus_distance(i, j) / t).powf(-a))
                .fold(0.0, f64::max)
        })
        .collect()
}

fn slot_scale(axis: &ScaleAxis, slot: usize) -> f64 {
    match axis.scale(slot) {
        Scale::Finite(t) => t,
        Scale::Infinity => 1.0,
    }
}

/// Peetre maximal function of every slot; the infinity slot uses `t = 1`.
pub fn peetre_maximal(field: &XField, a: f64) -> Result<XField> {
    check_exponent(a)?;
    let grid = *field.grid();
    let axis = field.axis().clone();
    let slots: Vec<Vec<f64>> = (0..axis.slots())
        .into_par_iter()
        .map(|s| {
            let abs: Vec<f64> = field.slot(s).iter().map(|v| v.norm()).collect();
            peetre_slice(&grid, &abs, slot_scale(&axis, s), a)
        })
        .collect();
    XField::from_real(grid, axis, slots.concat())
}

/// Finite slots whose scale lies in `[t/2, 2t]` (all are below 1).
pub fn wiener_window(axis: &ScaleAxis, slot: usize) -> Vec<usize> {
    let t = axis.scales()[slot];
    let tol = 1e-12;
    axis.scales()
        .iter()
        .enumerate()
        .filter(|(_, &tau)| tau >= 0.5 * t * (1.0 - tol) && tau <= 2.0 * t * (1.0 + tol) && tau < 1.0)
        .map(|(m, _)| m)
        .collect()
}

/// Peetre maximal function additionally maximized over the scale window
/// `t/2 <= tau <= 2t`, `tau < 1`; unchanged on the infinity slot.
pub fn peetre_wiener_maximal(field: &XField, a: f64) -> Result<XField> {
    let p = peetre_maximal(field, a)?;
    let grid = *field.grid();
    let axis = field.axis().clone();
    let n = grid.n();
    let mut out = vec![0.0f64; n * axis.slots()];
    for slot in 0..axis.len() {
        let dst = &mut out[slot * n..(slot + 1) * n];
        for m in wiener_window(&axis, slot) {
            for (d, v) in dst.iter_mut().zip(p.slot(m)) {
                *d = d.max(v.re);
            }
        }
    }
    let inf = axis.infinity_slot();
    for (d, v) in out[inf * n..].iter_mut().zip(p.slot(inf)) {
        *d = v.re;
    }
    XField::from_real(grid, axis, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzers::{meyer_pair, Ramp};
    use crate::signals::random_bandlimited;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, m: usize) -> VoiceTransform {
        let grid = SpatialGrid::new(n, 32.0).unwrap();
        let octaves = ScaleAxis::octaves_to_cover(grid.nyquist(), 2.0 * PI / 3.0);
        VoiceTransform::new(meyer_pair(Ramp::Exponential), grid, ScaleAxis::dyadic(m, octaves).unwrap()).unwrap()
    }

    fn random_field(grid: SpatialGrid, axis: ScaleAxis, rng: &mut ChaCha8Rng) -> XField {
        let len = grid.n() * axis.slots();
        XField::new(grid, axis, (0..len).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .unwrap()
    }

    #[test]
    fn zero_and_linearity() {
        let vt = setup(128, 4);
        let z = vt.apply(&GridSignal::zeros(*vt.grid())).unwrap();
        assert!(z.values().iter().all(|v| v.norm() == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let f = random_bandlimited(*vt.grid(), 6.0, rng.gen());
            let g = random_bandlimited(*vt.grid(), 6.0, rng.gen());
            let (a, b) = (Complex64::new(rng.gen(), rng.gen()), Complex64::new(rng.gen(), -1.0));
            let lhs = vt.apply(&f.scaled(a).add(&g.scaled(b)).unwrap()).unwrap();
            let rhs = vt.apply(&f).unwrap().scaled(a).add(&vt.apply(&g).unwrap().scaled(b)).unwrap();
            let err = lhs.values().iter().zip(rhs.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn transform_of_an_atom_is_its_kernel_diagonal() {
        let vt = setup(256, 4);
        for (node, slot) in [(100, 3), (17, 0), (200, vt.axis().infinity_slot())] {
            let atom = vt.atom(node, slot);
            let v = vt.apply(&atom).unwrap();
            let direct = atom.inner(&atom).unwrap();
            assert!((v.get(node, slot) - direct).norm() < 1e-10 * direct.norm());
        }
    }

    #[test]
    fn adjointness() {
        let vt = setup(128, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let field = random_field(*vt.grid(), vt.axis().clone(), &mut rng);
            let g = random_bandlimited(*vt.grid(), 10.0, rng.gen());
            let lhs = vt.adjoint(&field).unwrap().inner(&g).unwrap();
            let rhs = field.inner(&vt.apply(&g).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn single_cell_adjoint_is_scaled_atom() {
        let vt = setup(128, 4);
        let mut field = XField::zeros(*vt.grid(), vt.axis().clone());
        field.set(40, 5, Complex64::new(2.0, 0.0));
        let out = vt.adjoint(&field).unwrap();
        let atom = vt.atom(40, 5).scaled(Complex64::new(2.0 * field.mu_weight(5), 0.0));
        for (a, b) in out.values().iter().zip(atom.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_within_tightness_defect() {
        let vt = setup(256, 16);
        let battery: Vec<GridSignal> = (0..20).map(|s| random_bandlimited(*vt.grid(), 12.0, s)).collect();
        let defect = tightness_defect(&vt, &battery).unwrap();
        assert!(defect < 1e-3, "{defect}");
        let bound = vt.frame_bound_defect(12.0);
        assert!(defect <= bound && bound < 1e-3, "{bound}");
        for f in &battery {
            let back = vt.adjoint(&vt.apply(f).unwrap()).unwrap();
            let err = back.sub(f).unwrap().l2_norm() / f.l2_norm();
            // energy averages the signed quadrature error; the L2 error is
            // governed by the frame bounds instead
            assert!(err <= bound * (1.0 + 1e-9), "{err} > {bound}");
            assert!(err < 1e-3);
        }
        let vt2 = setup(256, 32);
        let d2 = tightness_defect(&vt2, &battery).unwrap();
        let r = defect / d2;
        assert!(r > 3.0 && r < 5.0, "ratio {r}");
    }

    #[test]
    fn peetre_trivial_cases() {
        let grid = SpatialGrid::new(64, 8.0).unwrap();
        let axis = ScaleAxis::dyadic(2, 2).unwrap();
        let ones = XField::from_real(grid, axis.clone(), vec![1.0; 64 * axis.slots()]).unwrap();
        let p = peetre_maximal(&ones, 2.0).unwrap();
        assert!(p.values().iter().all(|v| (v.re - 1.0).abs() < 1e-15));
        let mut spike = XField::zeros(grid, axis.clone());
        spike.set(5, 1, Complex64::new(1.0, 0.0));
        let p = peetre_maximal(&spike, 1.5).unwrap();
        let t = axis.scales()[1];
        for i in 0..64 {
            let expect = (1.0 + grid.torus_distance(i, 5) / t).powf(-1.5);
            assert!((p.get(i, 1).re - expect).abs() < 1e-15);
        }
        assert!(peetre_maximal(&spike, 0.0).is_err());
        assert!(peetre_wiener_maximal(&spike, -1.0).is_err());
    }

    #[test]
    fn singleton_window() {
        let grid = SpatialGrid::new(32, 8.0).unwrap();
        // one scale 2^{-1/2} in (1/2, 1)
        let axis = ScaleAxis::dyadic(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_field(grid, axis, &mut rng);
        assert_eq!(peetre_wiener_maximal(&f, 1.0).unwrap(), peetre_maximal(&f, 1.0).unwrap());
    }

    #[test]
    fn maximal_functions_match_exhaustive_oracles() {
        let grid = SpatialGrid::new(256, 16.0).unwrap();
        let axis = ScaleAxis::new(2.0, 2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..4 {
            let f = random_field(grid, axis.clone(), &mut rng);
            let a = rng.gen_range(0.5..4.0);
            let p = peetre_maximal(&f, a).unwrap();
            let pw = peetre_wiener_maximal(&f, a).unwrap();
            for s in 0..axis.slots() {
                let t = slot_scale(&axis, s);
                let abs: Vec<f64> = f.slot(s).iter().map(|v| v.norm()).collect();
                let r = peetre_slice_reference(&grid, &abs, t, a);
                for i in 0..256 {
                    assert!((p.get(i, s).re - r[i]).abs() <= 1e-10 * r[i]);
                }
            }
            for s in 0..axis.len() {
                let t = axis.scales()[s];
                for i in 0..256 {
                    let mut best = 0.0f64;
                    for (m, &tau) in axis.scales().iter().enumerate() {
                        if tau >= t / 2.0 * (1.0 - 1e-12) && tau <= 2.0 * t * (1.0 + 1e-12) {
                            for j in 0..256 {
                                best = best.max(f.get(j, m).norm() / (1.0 + grid.torus_distance(i, j) / tau).powf(a));
                            }
                        }
                    }
                    assert!((pw.get(i, s).re - best).abs() <= 1e-10 * best);
                }
            }
        }
    }

    #[test]
    fn schwartz_decay_of_transform() {
        // |Vf(x,t)| <= C_N t^N (1+|x|)^{-N}: the constant stays put when M doubles
        let grid = SpatialGrid::new(512, 32.0).unwrap();
        let f = GridSignal::from_fn(grid, |x| Complex64::new((-x * x / 2.0).exp() * (1.5 * x).cos(), 0.0));
        let octaves = ScaleAxis::octaves_to_cover(grid.nyquist(), 2.0 * PI / 3.0);
        let mut consts = Vec::new();
        // the sup creeps up as the top slot approaches t = 1, by O(1/M)
        for m in [16, 32] {
            let vt = VoiceTransform::new(meyer_pair(Ramp::Exponential), grid, ScaleAxis::dyadic(m, octaves).unwrap()).unwrap();
            let v = vt.apply(&f).unwrap();
            let mut c = [0.0f64; 3];
            for (slot, &t) in vt.axis().scales().iter().enumerate() {
                for i in 0..grid.n() {
                    let x = grid.node(i);
                    for (k, ck) in c.iter_mut().enumerate() {
                        let nn = (k + 1) as i32;
                        let bound = t.powi(nn) * (1.0 + x.abs()).powi(-nn);
                        *ck = ck.max(v.get(i, slot).norm() / bound);
                    }
                }
            }
            consts.push(c);
        }
        for k in 0..3 {
            assert!(consts[0][k].is_finite());
            assert!((consts[1][k] / consts[0][k] - 1.0).abs() < 0.1, "{consts:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn peetre_monotone_and_shift_bound(seed in 0u64..1000, a1 in 0.3f64..3.0, da in 0.0f64..2.0) {
            let grid = SpatialGrid::new(64, 8.0).unwrap();
            let axis = ScaleAxis::dyadic(2, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_field(grid, axis.clone(), &mut rng);
            let p1 = peetre_maximal(&f, a1).unwrap();
            let p2 = peetre_maximal(&f, a1 + da).unwrap();
            for (x, y) in p1.values().iter().zip(p2.values()) {
                prop_assert!(y.re <= x.re * (1.0 + 1e-14));
            }
            for s in 0..axis.slots() {
                let t = slot_scale(&axis, s);
                for i in 0..64 {
                    for j in 0..64 {
                        let bound = p1.get(i, s).re * (1.0 + grid.torus_distance(i, j) / t).powf(a1);
                        prop_assert!(p1.get(j, s).re <= bound * (1.0 + 1e-12));
                    }
                }
            }
            let pw = peetre_wiener_maximal(&f, a1).unwrap();
            for (x, y) in p1.values().iter().zip(pw.values()) {
                prop_assert!(x.re <= y.re);
            }
            // solidity
            let shrunk = XField::new(grid, axis.clone(), f.values().iter().map(|v| v * 0.7).collect()).unwrap();
            let ps = peetre_wiener_maximal(&shrunk, a1).unwrap();
            for (x, y) in ps.values().iter().zip(pw.values()) {
                prop_assert!(x.re <= y.re);
            }
        }
    }
}
