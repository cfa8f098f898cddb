//! Experiment configuration: a TOML file of flat sections, every key
//! optional, with the defaults printed by `--print-defaults`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use coorbit_core::analyzers::{
    bump_band, dyadic_partition_with, make_admissible_pair, meyer_generators, meyer_pair, AnalyzerPair, DyadicPU, Ramp,
};
use coorbit_core::grid::{GridSignal, ScaleAxis, SpatialGrid};
use coorbit_core::io::{read_exponent_csv, read_signal_csv};
use coorbit_core::signals::SignalSpec;
use coorbit_core::spaces::{Family, QIndex, SpaceSpec, Variant};
use coorbit_core::varexp::{ExponentField, ExponentSpec};
use coorbit_core::weights::Weight2ML;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed for every battery and randomized check.
    pub seed: u64,
    pub output: OutputConfig,
    pub grid: GridConfig,
    pub axis: AxisConfig,
    pub space: SpaceConfig,
    pub analyzer: AnalyzerConfig,
    pub signal: SignalConfig,
    pub battery: BatteryConfig,
    pub sweep: SweepSection,
    pub recon: ReconSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxisConfig {
    pub base: f64,
    pub per_octave: usize,
    pub octaves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceConfig {
    /// `F` or `B`.
    pub family: String,
    /// Any of `def`, `norm1` .. `norm4`.
    pub variants: Vec<String>,
    /// Exponent generator (`constant:2`, `sin-perturbed:2:1`, `cos-perturbed:2:1`,
    /// `two-level:2:3`, `log-decay`) or `csv:PATH`.
    pub p: String,
    /// Same forms as `p`; `constant:inf` is allowed for `B`.
    pub q: String,
    /// `w2ml` or `unit`.
    pub weight: String,
    pub s: f64,
    pub sprime: f64,
    pub x0: f64,
    /// Peetre exponent.
    pub a: f64,
    /// Littlewood-Paley levels for `def`; 0 covers the grid.
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzerConfig {
    /// `meyer`, `dyadic-pu` or `bump-band`.
    pub analyzer: String,
    /// `exponential` or `polynomial`.
    pub ramp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    /// Named generator (`gaussian:1`, `meyer-wavelet:2:3`, ...) or `csv:PATH`.
    pub signal: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub count: usize,
    /// Frequency cutoff of the random band-limited signals.
    pub band: f64,
    /// Add the coorbit norm as an extra column of `equiv`.
    pub coorbit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub n: usize,
    pub period: f64,
    pub per_octave: usize,
    pub octaves: usize,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// `true` for equal boxes that tile the torus, `false` for a truncated seam box.
    pub fitted: bool,
    pub quasi_constant: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub count: usize,
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconSection {
    /// `meyer` or `atomic`.
    pub system: String,
    /// Finest Meyer level `J`.
    pub levels: usize,
    /// Grid for the Meyer expansion; `n` is raised to the next power of two
    /// that resolves level `J`, the period must be an integer.
    pub n: usize,
    pub period: f64,
    pub per_octave: usize,
    /// Covering of the atomic reconstruction (on the sweep grid).
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output: OutputConfig::default(),
            grid: GridConfig::default(),
            axis: AxisConfig::default(),
            space: SpaceConfig::default(),
            analyzer: AnalyzerConfig::default(),
            signal: SignalConfig::default(),
            battery: BatteryConfig::default(),
            sweep: SweepSection::default(),
            recon: ReconSection::default(),
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 1024, period: 16.0 }
    }
}

impl Default for AxisConfig {
    fn default() -> Self {
        Self { base: 2.0, per_octave: 8, octaves: 5 }
    }
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self {
            family: "F".into(),
            variants: Variant::ALL.iter().map(|v| v.name().to_string()).collect(),
            p: "constant:2".into(),
            q: "constant:2".into(),
            weight: "w2ml".into(),
            s: 0.0,
            sprime: 0.0,
            x0: 0.0,
            a: 2.0,
            levels: 0,
        }
    }
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self { analyzer: "meyer".into(), ramp: "exponential".into() }
    }
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self { signal: "gaussian:1".into() }
    }
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self { count: 20, band: 12.0, coorbit: true }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            n: 256,
            period: 4.0,
            per_octave: 4,
            octaves: 3,
            alphas: vec![1.0, 0.5, 0.25, 0.125],
            betas: vec![2.0, 2f64.sqrt(), 2f64.powf(0.25)],
            fitted: true,
            quasi_constant: 1.0,
            tol: 1e-10,
            max_iter: 200,
            count: 3,
            band: 24.0,
        }
    }
}

impl Default for ReconSection {
    fn default() -> Self {
        Self {
            system: "meyer".into(),
            levels: 6,
            n: 2048,
            period: 8.0,
            per_octave: 2,
            alpha: 0.125,
            beta: 2f64.powf(0.25),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn defaults_text() -> String {
        let body = toml::to_string_pretty(&Self::default()).expect("defaults serialize");
        format!("# coorbit experiment defaults; every key is optional\n\n{body}")
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.grid.n, self.grid.period).context("[grid]")
    }

    pub fn axis(&self) -> Result<ScaleAxis> {
        ScaleAxis::new(self.axis.base, self.axis.per_octave, self.axis.octaves).context("[axis]")
    }

    pub fn sweep_grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.sweep.n, self.sweep.period).context("[sweep] n, period")
    }

    pub fn sweep_axis(&self) -> Result<ScaleAxis> {
        ScaleAxis::dyadic(self.sweep.per_octave, self.sweep.octaves).context("[sweep] per_octave, octaves")
    }

    pub fn ramp(&self) -> Result<Ramp> {
        match self.analyzer.ramp.as_str() {
            "exponential" => Ok(Ramp::Exponential),
            "polynomial" => Ok(Ramp::Polynomial),
            other => bail!("[analyzer] ramp: unknown ramp '{other}'"),
        }
    }

    pub fn partition(&self) -> Result<DyadicPU> {
        Ok(dyadic_partition_with(self.ramp()?))
    }

    pub fn pair(&self) -> Result<AnalyzerPair> {
        let ramp = self.ramp()?;
        match self.analyzer.analyzer.as_str() {
            "meyer" => Ok(meyer_pair(ramp)),
            "dyadic-pu" => make_admissible_pair(dyadic_partition_with(ramp).band(), None)
                .and_then(|p| p.parseval())
                .context("[analyzer] dyadic-pu"),
            "bump-band" => make_admissible_pair(bump_band(), None).and_then(|p| p.parseval()).context("[analyzer] bump-band"),
            other => bail!("[analyzer] analyzer: unknown analyzer '{other}'"),
        }
    }

    /// Band profile support of the chosen analyzer's wavelet generator.
    pub fn analyzer_support(&self) -> Result<(f64, f64)> {
        let ramp = self.ramp()?;
        Ok(match self.analyzer.analyzer.as_str() {
            "meyer" => meyer_generators(ramp).band().support(),
            "dyadic-pu" => dyadic_partition_with(ramp).band().support(),
            "bump-band" => bump_band().support(),
            other => bail!("[analyzer] analyzer: unknown analyzer '{other}'"),
        })
    }

    pub fn family(&self) -> Result<Family> {
        let f: Family = self.space.family.parse().context("[space] family")?;
        if !matches!(f, Family::F | Family::B) {
            bail!("[space] family: expected F or B, got '{}'", self.space.family);
        }
        Ok(f)
    }

    pub fn variants(&self) -> Result<Vec<Variant>> {
        if self.space.variants.is_empty() {
            bail!("[space] variants: empty list");
        }
        self.space.variants.iter().map(|v| v.parse::<Variant>().context("[space] variants")).collect()
    }

    pub fn weight(&self) -> Result<Weight2ML> {
        match self.space.weight.as_str() {
            "w2ml" => Ok(Weight2ML::builtin(self.space.s, self.space.sprime, self.space.x0)),
            "unit" => Ok(Weight2ML::unit()),
            other => bail!("[space] weight: unknown weight '{other}'"),
        }
    }

    pub fn exponent(&self, key: &str, text: &str, grid: SpatialGrid) -> Result<ExponentField> {
        if let Some(path) = text.strip_prefix("csv:") {
            let file = std::fs::File::open(path).with_context(|| format!("[space] {key}: opening {path}"))?;
            return read_exponent_csv(file, grid).with_context(|| format!("[space] {key}: reading {path}"));
        }
        let spec: ExponentSpec = text.parse().with_context(|| format!("[space] {key}"))?;
        spec.generate(grid).with_context(|| format!("[space] {key}"))
    }

    /// Space on `grid` with the configured family, exponents and weight.
    pub fn space(&self, grid: SpatialGrid, family: Family) -> Result<SpaceSpec> {
        let p = self.exponent("p", &self.space.p, grid)?;
        let q = self.exponent("q", &self.space.q, grid)?;
        let q = if q.values().windows(2).all(|w| w[0] == w[1]) {
            QIndex::Constant(q.values()[0])
        } else {
            QIndex::Field(q)
        };
        let first = self.variants()?[0];
        let mut spec = SpaceSpec::new(family, p, q, self.weight()?, self.space.a, first).context("[space]")?;
        if self.space.levels > 0 {
            spec = spec.with_levels(self.space.levels);
        }
        Ok(spec)
    }

    pub fn signal(&self, grid: SpatialGrid) -> Result<GridSignal> {
        let text = &self.signal.signal;
        if let Some(path) = text.strip_prefix("csv:") {
            let file = std::fs::File::open(path).with_context(|| format!("[signal] opening {path}"))?;
            return read_signal_csv(file, grid).with_context(|| format!("[signal] reading {path}"));
        }
        let spec: SignalSpec = text.parse().context("[signal] signal")?;
        spec.generate(grid).context("[signal] signal")
    }
}
