//! Named analytic test signals and seeded band-limited batteries.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analyzers::{meyer_generators, Ramp};
use crate::error::{Error, Result};
use crate::grid::{to_space, GridSignal, SpatialGrid, Spectrum};

/// Generator selectable by name from configuration files.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    Zero,
    Gaussian { sigma: f64 },
    ModulatedGaussian { sigma: f64, omega: f64 },
    Bump { radius: f64 },
    MeyerWavelet { j: u32, k: i64 },
    RandomBandlimited { band: f64, seed: u64 },
}

impl SignalSpec {
    pub fn generate(&self, grid: SpatialGrid) -> Result<GridSignal> {
        match *self {
            SignalSpec::Zero => Ok(GridSignal::zeros(grid)),
            SignalSpec::Gaussian { sigma } => {
                positive("sigma", sigma)?;
                Ok(gaussian(grid, sigma))
            }
            SignalSpec::ModulatedGaussian { sigma, omega } => {
                positive("sigma", sigma)?;
                Ok(modulated_gaussian(grid, sigma, omega))
            }
            SignalSpec::Bump { radius } => {
                positive("radius", radius)?;
                Ok(bump(grid, radius))
            }
            SignalSpec::MeyerWavelet { j, k } => Ok(meyer_wavelet(grid, j, k)),
            SignalSpec::RandomBandlimited { band, seed } => {
                positive("band", band)?;
                Ok(random_bandlimited(grid, band, seed))
            }
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Parses `zero`, `gaussian[:sigma]`, `modulated-gaussian[:sigma[:omega]]`,
/// `bump[:radius]`, `meyer-wavelet[:j[:k]]`, `random-bandlimited[:seed[:band]]`.
impl FromStr for SignalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default().trim();
        let args: Vec<&str> = parts.collect();
        let num = |i: usize, default: f64| -> Result<f64> {
            match args.get(i) {
                Some(a) => a.trim().parse().map_err(|_| Error::Parse(format!("bad number '{a}' in signal '{s}'"))),
                None => Ok(default),
            }
        };
        let int = |i: usize, default: i64| -> Result<i64> {
            match args.get(i) {
                Some(a) => a.trim().parse().map_err(|_| Error::Parse(format!("bad integer '{a}' in signal '{s}'"))),
                None => Ok(default),
            }
        };
        let spec = match name {
            "zero" => SignalSpec::Zero,
            "gaussian" => SignalSpec::Gaussian { sigma: num(0, 1.0)? },
            "modulated-gaussian" => SignalSpec::ModulatedGaussian { sigma: num(0, 1.0)?, omega: num(1, 4.0)? },
            "bump" => SignalSpec::Bump { radius: num(0, 2.0)? },
            "meyer-wavelet" => {
                let j = int(0, 2)?;
                if j < 0 {
                    return Err(Error::Parse(format!("negative level in signal '{s}'")));
                }
                SignalSpec::MeyerWavelet { j: j as u32, k: int(1, 0)? }
            }
            "random-bandlimited" => {
                let seed = int(0, 0)?;
                SignalSpec::RandomBandlimited { seed: seed as u64, band: num(1, 8.0)? }
            }
            _ => return Err(Error::Parse(format!("unknown signal '{name}'"))),
        };
        Ok(spec)
    }
}

pub fn gaussian(grid: SpatialGrid, sigma: f64) -> GridSignal {
    GridSignal::from_fn(grid, |x| Complex64::new((-0.5 * (x / sigma).powi(2)).exp(), 0.0))
}

pub fn modulated_gaussian(grid: SpatialGrid, sigma: f64, omega: f64) -> GridSignal {
    GridSignal::from_fn(grid, |x| Complex64::from_polar((-0.5 * (x / sigma).powi(2)).exp(), omega * x))
}

/// `exp(-1/(1 - (x/r)^2))` on `|x| < r`.
pub fn bump(grid: SpatialGrid, radius: f64) -> GridSignal {
    GridSignal::from_fn(grid, |x| {
        let u = x / radius;
        let v = if u.abs() < 1.0 { (-1.0 / (1.0 - u * u)).exp() } else { 0.0 };
        Complex64::new(v, 0.0)
    })
}

/// `2^{j/2} psi^1(2^j x - k)` with the exponential-ramp Meyer wavelet,
/// periodized onto the grid.
pub fn meyer_wavelet(grid: SpatialGrid, j: u32, k: i64) -> GridSignal {
    let sys = meyer_generators(Ramp::Exponential);
    let s = 2f64.powi(j as i32);
    let values = grid
        .frequencies()
        .into_iter()
        .map(|xi| sys.psi1_hat(xi / s) * Complex64::from_polar(s.powf(-0.5), -xi * k as f64 / s))
        .collect();
    to_space(&Spectrum::new(grid, values).expect("grid length"))
}

/// Complex signal with seeded uniform random Fourier coefficients on
/// `|xi| <= band`, scaled to unit `L_2` norm. Coefficients are drawn in
/// order of the signed frequency index, so refining the grid at fixed
/// period reproduces the same function.
pub fn random_bandlimited(grid: SpatialGrid, band: f64, seed: u64) -> GridSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let dk = 2.0 * PI / grid.period();
    let kmax = ((band / dk).floor() as i64).min(n as i64 / 2 - 1);
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    for k in -kmax..=kmax {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        values[k.rem_euclid(n as i64) as usize] = c;
    }
    let f = to_space(&Spectrum::new(grid, values).expect("grid length"));
    let norm = f.l2_norm();
    if norm == 0.0 {
        f
    } else {
        f.scaled(Complex64::new(1.0 / norm, 0.0))
    }
}

/// `count` band-limited signals with seeds derived from `seed`.
pub fn battery(grid: SpatialGrid, count: usize, band: f64, seed: u64) -> Result<Vec<GridSignal>> {
    if count == 0 {
        return Err(Error::InvalidParameter("empty battery".into()));
    }
    positive("band", band)?;
    if band < 2.0 * PI / grid.period() {
        return Err(Error::InvalidParameter(format!("band {band} holds no nonzero frequency")));
    }
    Ok((0..count as u64)
        .map(|i| random_bandlimited(grid, band, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i)))
        .collect())
}

/// Fraction of spectral energy strictly above `|xi| > cutoff`.
pub fn spectral_tail(f: &GridSignal, cutoff: f64) -> f64 {
    let spec = crate::grid::to_frequency(f);
    let total = spec.energy();
    if total == 0.0 {
        return 0.0;
    }
    let grid = f.grid();
    let tail: f64 = spec
        .values()
        .iter()
        .enumerate()
        .filter(|(k, _)| grid.frequency(*k).abs() > cutoff)
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        * grid.frequency_weight();
    tail / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::to_frequency;

    #[test]
    fn parse_and_generate() {
        let grid = SpatialGrid::new(256, 32.0).unwrap();
        for s in ["zero", "gaussian:0.5", "modulated-gaussian:1:3", "bump", "meyer-wavelet:2:3", "random-bandlimited:7:6"] {
            let spec: SignalSpec = s.parse().unwrap();
            spec.generate(grid).unwrap();
        }
        assert!("nope".parse::<SignalSpec>().is_err());
        assert!("gaussian:x".parse::<SignalSpec>().is_err());
        assert!(SignalSpec::Gaussian { sigma: -1.0 }.generate(grid).is_err());
    }

    #[test]
    fn random_signals_are_bandlimited_and_seeded() {
        let grid = SpatialGrid::new(512, 32.0).unwrap();
        let f = random_bandlimited(grid, 5.0, 11);
        assert!((f.l2_norm() - 1.0).abs() < 1e-12);
        assert!(spectral_tail(&f, 5.0) < 1e-28);
        assert_eq!(f, random_bandlimited(grid, 5.0, 11));
        assert_ne!(f, random_bandlimited(grid, 5.0, 12));
        let fine = random_bandlimited(grid.refined(2).unwrap(), 5.0, 11);
        for (i, v) in f.values().iter().enumerate() {
            assert!((fine.values()[2 * i] - v).norm() < 1e-12);
        }
        assert!(battery(grid, 0, 5.0, 1).is_err());
        assert_eq!(battery(grid, 3, 5.0, 1).unwrap().len(), 3);
    }

    #[test]
    fn meyer_wavelet_has_unit_norm_and_band() {
        let grid = SpatialGrid::new(1024, 32.0).unwrap();
        let f = meyer_wavelet(grid, 3, 5);
        assert!((f.l2_norm() - 1.0).abs() < 1e-10);
        let spec = to_frequency(&f);
        for (k, v) in spec.values().iter().enumerate() {
            let xi = grid.frequency(k).abs();
            if xi < 8.0 * 2.0 * PI / 3.0 - 1e-9 || xi > 8.0 * 8.0 * PI / 3.0 + 1e-9 {
                assert!(v.norm() < 1e-14);
            }
        }
        // spatial samples agree with quadrature of the generator
        let sys = meyer_generators(Ramp::Exponential);
        for i in [500, 520, 530] {
            let x = grid.node(i);
            let direct = 8f64.sqrt() * sys.eval(1, 8.0 * x - 5.0);
            assert!((f.values()[i].re - direct).abs() < 1e-8, "{} {direct}", f.values()[i]);
        }
    }
}
