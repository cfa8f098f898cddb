//! The subcommands. Each one writes its tables under the output directory
//! and returns a JSON summary for stdout.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use coorbit_core::analyzers::{meyer_generators, MAX_MOMENT_ORDER};
use coorbit_core::coorbit::{
    atomic_decompose, atomic_synthesize, frame_kernel, kernel_op_norm_estimate, non_increasing, osc_norms, relative_error,
    sweep, wavelet_frame_expand, Covering, NeumannSettings, SweepConfig, SweepRow, DENSE_LIMIT,
};
use coorbit_core::grid::{GridSignal, ScaleAxis, SpatialGrid, XField};
use coorbit_core::io::{write_kernel_bin, write_xy_csv};
use coorbit_core::signals::{battery, meyer_wavelet};
use coorbit_core::spaces::{
    band_width, coorbit_norm, evaluate, f_norm, b_norm, ratio_band, x_space, Family, SpaceSpec, Variant,
};
use coorbit_core::transform::{tightness_defect, VoiceTransform};
use coorbit_core::varexp::log_holder_report;
use coorbit_core::weights::{check_admissible, empirical_class, ReservoirWeight};

use crate::config::ExperimentConfig;

/// Relative slack allowed by the monotonicity verdicts of `discretize`.
pub const MONOTONE_SLACK: f64 = 1e-9;

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    fn table(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.create(name)?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn xy(&self, name: &str, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
        write_xy_csv(self.create(name)?, header, rows).with_context(|| format!("writing {name}"))
    }

    fn json(&self, name: &str, value: &Value) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        use std::io::Write;
        writeln!(w)?;
        Ok(())
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

/// JSON numbers cannot hold `inf` or `NaN`; those become strings.
fn jnum(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn one_norm(spec: &SpaceSpec, f: &GridSignal, cfg: &ExperimentConfig, variant: Variant) -> Result<coorbit_core::spaces::NormReport> {
    let axis = cfg.axis()?;
    let pu = cfg.partition()?;
    let pair = cfg.pair()?;
    evaluate(&spec.with_variant(variant), f, &pu, &pair, &axis).with_context(|| format!("variant {}", variant.name()))
}

pub fn norm(cfg: &ExperimentConfig, out: &Output) -> Result<Value> {
    let grid = cfg.grid()?;
    let family = cfg.family()?;
    let spec = cfg.space(grid, family)?;
    let f = cfg.signal(grid)?;
    let mut reports = Vec::new();
    for v in cfg.variants()? {
        let r = one_norm(&spec, &f, cfg, v)?;
        reports.push(json!({
            "family": format!("{:?}", r.family),
            "variant": r.variant.name(),
            "value": jnum(r.value),
            "flags": r.flags,
        }));
    }
    let value = json!({ "signal": cfg.signal.signal, "reports": reports });
    out.json("norm.json", &value)?;
    Ok(value)
}

pub fn equiv(cfg: &ExperimentConfig, out: &Output) -> Result<Value> {
    let grid = cfg.grid()?;
    let axis = cfg.axis()?;
    let family = cfg.family()?;
    let spec = cfg.space(grid, family)?;
    let signals = battery(grid, cfg.battery.count, cfg.battery.band, cfg.seed).context("[battery]")?;
    let pu = cfg.partition()?;
    let pair = cfg.pair()?;
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let mut flagged = 0usize;
    for v in cfg.variants()? {
        let mut values = Vec::with_capacity(signals.len());
        for f in &signals {
            let r = evaluate(&spec.with_variant(v), f, &pu, &pair, &axis).with_context(|| format!("variant {}", v.name()))?;
            flagged += usize::from(!r.flags.is_empty());
            values.push(r.value);
        }
        columns.push((v.name().to_string(), values));
    }
    if cfg.battery.coorbit {
        let vt = VoiceTransform::new(pair.clone(), grid, axis.clone())?;
        let values = signals.iter().map(|f| coorbit_norm(&vt, &spec, f)).collect::<coorbit_core::Result<Vec<_>>>()?;
        columns.push(("coorbit".into(), values));
    }

    let mut value_rows = Vec::new();
    for (i, _) in signals.iter().enumerate() {
        for (name, vals) in &columns {
            value_rows.push(vec![i.to_string(), name.clone(), num(vals[i])]);
        }
    }
    out.table("equiv_values.csv", &["signal_id", "variant", "value"], &value_rows)?;

    let mut band_rows = Vec::new();
    let mut bands = Vec::new();
    let mut worst = 1.0f64;
    for a in 0..columns.len() {
        for b in a + 1..columns.len() {
            let band = ratio_band(&columns[a].1, &columns[b].1)
                .with_context(|| format!("no ratio between {} and {}", columns[a].0, columns[b].0))?;
            let width = band_width(band);
            worst = worst.max(width);
            band_rows.push(vec![columns[a].0.clone(), columns[b].0.clone(), num(band.0), num(band.1), num(width)]);
            bands.push(json!({ "num": columns[a].0, "den": columns[b].0, "lo": jnum(band.0), "hi": jnum(band.1), "width": jnum(width) }));
        }
    }
    band_rows.push(vec!["all".into(), "all".into(), String::new(), String::new(), num(worst)]);
    out.table("equiv_bands.csv", &["num", "den", "lo", "hi", "width"], &band_rows)?;

    let (base_name, base) = &columns[0];
    for (name, vals) in columns.iter().skip(1) {
        let xy: Vec<(f64, f64)> = vals.iter().zip(base).enumerate().map(|(i, (v, b))| (i as f64, v / b)).collect();
        out.xy(&format!("ratio_{name}_over_{base_name}.csv"), ["signal_id", "ratio"], &xy)?;
    }
    let value = json!({
        "signals": signals.len(),
        "columns": columns.iter().map(|c| c.0.clone()).collect::<Vec<_>>(),
        "bands": bands,
        "max_width": jnum(worst),
        "flagged_reports": flagged,
    });
    out.json("equiv.json", &value)?;
    Ok(value)
}

fn sweep_setup(cfg: &ExperimentConfig) -> Result<(VoiceTransform, Vec<GridSignal>, ReservoirWeight)> {
    let grid = cfg.sweep_grid()?;
    let axis = cfg.sweep_axis()?;
    let vt = VoiceTransform::new(cfg.pair()?, grid, axis.clone())?;
    let signals = battery(grid, cfg.sweep.count, cfg.sweep.band, cfg.seed).context("[sweep] count, band")?;
    let p = cfg.exponent("p", &cfg.space.p, grid)?;
    let nu = ReservoirWeight::new(&cfg.weight()?, p.p_minus(), axis.min_scale());
    Ok((vt, signals, nu))
}

pub fn discretize(cfg: &ExperimentConfig, out: &Output) -> Result<Value> {
    let (vt, signals, nu) = sweep_setup(cfg)?;
    let config = SweepConfig {
        alphas: cfg.sweep.alphas.clone(),
        betas: cfg.sweep.betas.clone(),
        neumann: NeumannSettings { tol: cfg.sweep.tol, max_iter: cfg.sweep.max_iter },
        quasi_constant: cfg.sweep.quasi_constant,
        fitted: cfg.sweep.fitted,
    };
    let rows = sweep(&vt, &config, &signals, &nu).context("[sweep]")?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.alpha),
                num(r.beta),
                num(r.osc_a1),
                num(r.osc_amnu),
                num(r.contraction_ratio),
                num(r.recon_residual),
                num(r.residual),
                r.boxes.to_string(),
                r.converged.to_string(),
                num(r.dcond),
                r.dcond_holds.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    out.table(
        "sweep.csv",
        &[
            "alpha",
            "beta",
            "osc_a1",
            "osc_amnu",
            "contraction_ratio",
            "recon_residual",
            "residual",
            "boxes",
            "converged",
            "dcond",
            "dcond_holds",
            "error",
        ],
        &table,
    )?;
    let residuals: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    let osc: Vec<f64> = rows.iter().map(|r| r.osc_a1).collect();
    let monotone = monotone_grid(&rows, &config, |r| r.residual);
    let monotone_osc = monotone_grid(&rows, &config, |r| r.osc_a1);
    for (b, &beta) in config.betas.iter().enumerate() {
        let xy: Vec<(f64, f64)> = rows.iter().filter(|r| r.beta == beta).map(|r| (r.alpha, r.residual)).collect();
        out.xy(&format!("residual_beta{b}.csv"), ["alpha", "residual"], &xy)?;
    }
    let finest = rows.last().context("empty sweep")?;
    let value = json!({
        "rows": rows.len(),
        "residual_monotone": monotone,
        "osc_a1_monotone": monotone_osc,
        "residual_path": residuals.iter().map(|v| jnum(*v)).collect::<Vec<_>>(),
        "osc_a1_path": osc.iter().map(|v| jnum(*v)).collect::<Vec<_>>(),
        "finest": {
            "alpha": finest.alpha,
            "beta": finest.beta,
            "contraction_ratio": jnum(finest.contraction_ratio),
            "converged": finest.converged,
            "recon_residual": jnum(finest.recon_residual),
            "dcond": jnum(finest.dcond),
            "dcond_holds": finest.dcond_holds,
        },
    });
    out.json("discretize.json", &value)?;
    Ok(value)
}

/// Non-increasing along every `alpha` line and every `beta` line of rows
/// ordered by `beta` then `alpha`.
pub fn monotone_grid<F: Fn(&SweepRow) -> f64>(
    rows: &[SweepRow],
    config: &SweepConfig,
    key: F,
) -> bool {
    let na = config.alphas.len();
    let value = |b: usize, a: usize| key(&rows[b * na + a]);
    let along_alpha = (0..config.betas.len()).all(|b| non_increasing(&(0..na).map(|a| value(b, a)).collect::<Vec<_>>(), MONOTONE_SLACK));
    let along_beta =
        (0..na).all(|a| non_increasing(&(0..config.betas.len()).map(|b| value(b, a)).collect::<Vec<_>>(), MONOTONE_SLACK));
    along_alpha && along_beta
}

/// Smallest power of two `n >= min_n` whose Nyquist frequency resolves
/// Meyer level `levels` on a torus of length `period`.
pub fn meyer_grid_size(min_n: usize, period: f64, levels: usize) -> usize {
    let need = 8.0 / 3.0 * 2f64.powi(levels as i32) * period;
    let mut n = min_n.next_power_of_two().max(8);
    while (n as f64) < need {
        n *= 2;
    }
    n
}

pub fn recon(cfg: &ExperimentConfig, out: &Output) -> Result<Value> {
    match cfg.recon.system.as_str() {
        "meyer" => recon_meyer(cfg, out),
        "atomic" => recon_atomic(cfg, out),
        other => bail!("[recon] system: unknown system '{other}'"),
    }
}

fn recon_meyer(cfg: &ExperimentConfig, out: &Output) -> Result<Value> {
    let levels = cfg.recon.levels;
    let n = meyer_grid_size(cfg.recon.n, cfg.recon.period, levels);
    let grid = SpatialGrid::new(n, cfg.recon.period).context("[recon] n, period")?;
    let axis = ScaleAxis::dyadic(cfg.recon.per_octave, levels).context("[recon] per_octave, levels")?;
    let family = cfg.family()?;
    let spec = cfg.space(grid, family)?;
    let system = meyer_generators(cfg.ramp()?);
    let pu = cfg.partition()?;
    let signals = battery(grid, cfg.battery.count, cfg.battery.band, cfg.seed).context("[battery]")?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut natural = Vec::new();
    let mut function = Vec::new();
    for (i, f) in signals.iter().enumerate() {
        let e = wavelet_frame_expand(f, &system, &spec, levels, &axis).context("[recon]")?;
        let fnorm = match family {
            Family::F => f_norm(&spec, f, &pu)?.value,
            _ => b_norm(&spec, f, &pu)?.value,
        };
        worst = worst.max(e.residual);
        natural.push(e.natural_norm);
        function.push(fnorm);
        rows.push(vec![i.to_string(), num(e.residual), num(e.flat_norm), num(e.natural_norm), num(fnorm)]);
    }
    out.table("recon.csv", &["signal_id", "residual", "flat_norm", "natural_norm", "function_norm"], &rows)?;
    let band = ratio_band(&natural, &function).context("no nonzero function norm")?;
    out.xy(
        "recon_ratio.csv",
        ["signal_id", "ratio"],
        &natural.iter().zip(&function).enumerate().map(|(i, (a, b))| (i as f64, a / b)).collect::<Vec<_>>(),
    )?;
    // a single orthonormal atom must come back as a delta sequence
    let (j0, k0) = (levels.min(2), 3usize);
    let atom = meyer_wavelet(grid, j0 as u32, k0 as i64);
    let e = wavelet_frame_expand(&atom, &system, &spec, levels, &axis)?;
    let mut delta_defect = e.scaling.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (j, level) in e.wavelet.iter().enumerate() {
        for (k, v) in level.iter().enumerate() {
            let expect = if (j, k) == (j0, k0) { 1.0 } else { 0.0 };
            delta_defect = delta_defect.max((v.re - expect).hypot(v.im));
        }
    }
    let value = json!({
        "system": "meyer",
        "levels": levels,
        "n": n,
        "period": cfg.recon.period,
        "signals": signals.len(),
        "max_residual": jnum(worst),
        "ratio_band": [jnum(band.0), jnum(band.1)],
        "ratio_width": jnum(band_width(band)),
        "atom": { "j": j0, "k": k0, "delta_defect": jnum(delta_defect) },
    });
    out.json("recon.json", &value)?;
    Ok(value)
}

fn recon_atomic(cfg: &ExperimentConfig, out: &Output) -> Result<Value> {
    let (vt, signals, _) = sweep_setup(cfg)?;
    let covering = if cfg.sweep.fitted {
        Covering::fitted(cfg.recon.alpha, cfg.recon.beta, *vt.grid(), vt.axis().clone())
    } else {
        Covering::new(cfg.recon.alpha, cfg.recon.beta, *vt.grid(), vt.axis().clone())
    }
    .context("[recon] alpha, beta")?;
    let settings = NeumannSettings { tol: cfg.sweep.tol, max_iter: cfg.sweep.max_iter };
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (i, f) in signals.iter().enumerate() {
        let d = atomic_decompose(&vt, &covering, f, settings).context("[recon] atomic decomposition")?;
        let g = atomic_synthesize(&vt, &covering, &d.coeffs)?;
        let err = relative_error(f, &g)?;
        worst = worst.max(err);
        rows.push(vec![
            i.to_string(),
            num(err),
            d.neumann.iterations.to_string(),
            num(d.neumann.contraction_ratio),
            d.neumann.converged.to_string(),
        ]);
    }
    out.table("recon.csv", &["signal_id", "residual", "iterations", "contraction_ratio", "converged"], &rows)?;
    let value = json!({
        "system": "atomic",
        "alpha": cfg.recon.alpha,
        "beta": cfg.recon.beta,
        "boxes": covering.len(),
        "signals": signals.len(),
        "max_residual": jnum(worst),
    });
    out.json("recon.json", &value)?;
    Ok(value)
}

pub fn kernels(cfg: &ExperimentConfig, out: &Output, binary: bool) -> Result<Value> {
    let (vt, signals, nu) = sweep_setup(cfg)?;
    let r = frame_kernel(&vt);
    let family = cfg.family()?;
    let y = x_space(&cfg.space(*vt.grid(), family)?);
    let fields: Vec<XField> = signals.iter().map(|f| vt.apply(f)).collect::<coorbit_core::Result<_>>()?;
    let op = kernel_op_norm_estimate(&r, &y, &fields)?;
    let modulus = r.modulus();
    let mut rows = vec![vec![
        "frame".to_string(),
        String::new(),
        String::new(),
        num(modulus.a1_norm()),
        num(modulus.amnu_norm(&nu)),
        num(op),
    ]];
    for &beta in &cfg.sweep.betas {
        for &alpha in &cfg.sweep.alphas {
            let cov = if cfg.sweep.fitted {
                Covering::fitted(alpha, beta, *vt.grid(), vt.axis().clone())
            } else {
                Covering::new(alpha, beta, *vt.grid(), vt.axis().clone())
            }
            .context("[sweep] alphas, betas")?;
            let o = osc_norms(&vt, &cov, &nu)?;
            rows.push(vec!["osc".into(), num(alpha), num(beta), num(o.a1), num(o.amnu), String::new()]);
        }
    }
    out.table("kernels.csv", &["kernel", "alpha", "beta", "a1", "amnu", "op_norm_estimate"], &rows)?;
    let mut files = Vec::new();
    if binary {
        let dim = r.dim();
        if dim > DENSE_LIMIT {
            bail!("frame kernel has {dim} cells, above the dense export limit {DENSE_LIMIT}");
        }
        write_kernel_bin(out.create("frame_kernel.bin")?, dim, dim, &r.to_dense())?;
        files.push("frame_kernel.bin");
    }
    let value = json!({
        "dim": r.dim(),
        "frame_a1": jnum(modulus.a1_norm()),
        "frame_amnu": jnum(modulus.amnu_norm(&nu)),
        "frame_op_norm_estimate": jnum(op),
        "osc_rows": rows.len() - 1,
        "files": files,
    });
    out.json("kernels.json", &value)?;
    Ok(value)
}

pub fn check(cfg: &ExperimentConfig, out: &Output) -> Result<Value> {
    let grid = cfg.grid()?;
    let axis = cfg.axis()?;
    let pair = cfg.pair()?;
    let support = cfg.analyzer_support()?;
    let band_limit = cfg.battery.band;
    let tauber = pair.tauberian_check(band_limit);
    let moments = pair.moment_check(MAX_MOMENT_ORDER);
    let freqs: Vec<f64> = grid.frequencies().into_iter().filter(|xi| xi.abs() <= band_limit).collect();
    let admissibility = pair.discrete_admissibility_defect(&axis, &freqs)?;
    let vt = VoiceTransform::new(pair.clone(), grid, axis.clone())?;
    let signals = battery(grid, cfg.battery.count, cfg.battery.band, cfg.seed).context("[battery]")?;
    let tightness = tightness_defect(&vt, &signals)?;
    let w = cfg.weight()?;
    let weight_report = check_admissible(&w, 2000, cfg.seed);
    let class = empirical_class(&w, 2000, cfg.seed);
    let (a1, a2, a3) = w.alphas();
    let p = cfg.exponent("p", &cfg.space.p, grid)?;
    let holder = log_holder_report(&p);

    let xi_max = 4.0 * support.1;
    let samples: Vec<f64> = (0..=800).map(|k| -xi_max + 2.0 * xi_max * k as f64 / 800.0).collect();
    out.xy("profile_phi0.csv", ["xi", "abs"], &samples.iter().map(|&x| (x, pair.phi0_hat(x).norm())).collect::<Vec<_>>())?;
    out.xy("profile_phi.csv", ["xi", "abs"], &samples.iter().map(|&x| (x, pair.phi_hat(x).norm())).collect::<Vec<_>>())?;

    let value = json!({
        "analyzer": {
            "name": cfg.analyzer.analyzer,
            "support": [support.0, support.1],
            "tauberian": {
                "epsilon0": jnum(tauber.epsilon0),
                "epsilon": jnum(tauber.epsilon),
                "phi0_ok": tauber.phi0_ok,
                "phi_ok": tauber.phi_ok,
                "coverage_inf": jnum(tauber.coverage_inf),
                "passes": tauber.passes(),
            },
            "moments": { "order": format!("{:?}", moments.order) },
            "admissibility_defect": jnum(admissibility),
            "tightness_defect": jnum(tightness),
            "frame_bound_defect": jnum(vt.frame_bound_defect(band_limit)),
        },
        "weight": {
            "declared_class": [jnum(a1), jnum(a2), jnum(a3)],
            "empirical_class": [jnum(class.0), jnum(class.1), jnum(class.2)],
            "max_violation": jnum(weight_report.max_violation()),
            "passes": weight_report.passes(1e-9),
        },
        "exponent": {
            "p_minus": jnum(p.p_minus()),
            "p_plus": jnum(p.p_plus()),
            "log_holder_local": jnum(holder.local_constant),
            "log_holder_tail": jnum(holder.tail_constant),
            "log_holder_fails": holder.fails,
        },
    });
    out.json("check.json", &value)?;
    Ok(value)
}
