use std::fs;
use std::path::{Path, PathBuf};

use floquet_pt::effective::{
    bessel_j, double_drive_effective_chain, effective_spectrum, fold_into_zone, hf_effective_chain,
};
use floquet_pt::floquet::{converged_spectrum, SpectrumOptions};
use floquet_pt::linalg::sort_order;
use floquet_pt::spectral::{
    diagnose_spectrum, find_threshold, gamma_total, sigma_p_trace, ThresholdOptions, ThresholdStatus,
};
use floquet_pt::topology::{chiral_expectation_scan, floquet_windings, static_winding};
use floquet_pt::{Error, Frame, ModelConfig};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{AxisName, EngineSpec, Grid, JobConfig, Quantity};
use crate::error::CliError;
use crate::output::{heatmap_svg, num, write_atomic, Table};

const SPECTRUM_MAX_STEPS: usize = 1 << 20;
const THRESHOLD_MAX_STEPS: usize = 1 << 16;
// Even, so that the zone edge q = π is sampled and a closing there is caught.
const STATIC_N_K: usize = 402;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Spectrum,
    Threshold,
    ThresholdMap,
    WindingScan,
    ChiralScan,
    EdgeTrace,
    EffectiveCompare,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Spectrum => "spectrum",
            Subcommand::Threshold => "threshold",
            Subcommand::ThresholdMap => "threshold-map",
            Subcommand::WindingScan => "winding-scan",
            Subcommand::ChiralScan => "chiral-scan",
            Subcommand::EdgeTrace => "edge-trace",
            Subcommand::EffectiveCompare => "effective-compare",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Failure {
    pub index: usize,
    pub point: Vec<(String, f64)>,
    pub error: String,
}

#[derive(Debug, Default)]
pub struct JobOutput {
    pub csv: String,
    pub svg: Option<String>,
    pub summary: Value,
    pub failures: Vec<Failure>,
    pub computed: usize,
    pub cached: usize,
}

/// Per-point results on disk, keyed by config hash and grid index.
struct Cache {
    dir: PathBuf,
}

impl Cache {
    fn open(out: &Path, hash: &str) -> Result<Self, CliError> {
        let dir = out.join("cache").join(hash);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir })
    }

    fn path(&self, index: usize) -> PathBuf {
        self.dir.join(format!("{index}.json"))
    }

    fn load<T: DeserializeOwned>(&self, index: usize) -> Option<T> {
        let bytes = fs::read(self.path(index)).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    fn store<T: Serialize>(&self, index: usize, value: &T) -> Result<(), CliError> {
        let bytes = serde_json::to_vec(value).expect("point result serializes");
        write_atomic(&self.path(index), &bytes)
    }
}

pub struct Context<'a> {
    pub out: &'a Path,
    pub hash: &'a str,
    pub pool: &'a rayon::ThreadPool,
}

struct Sweep<T> {
    results: Vec<Result<T, String>>,
    computed: usize,
    cached: usize,
}

fn run_points<T, F>(ctx: &Context, n: usize, eval: F) -> Result<Sweep<T>, CliError>
where
    T: Serialize + DeserializeOwned + Send,
    F: Fn(usize) -> Result<T, Error> + Sync,
{
    let cache = Cache::open(ctx.out, ctx.hash)?;
    let raw: Vec<Result<(Result<T, String>, bool), CliError>> = ctx.pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                if let Some(v) = cache.load(i) {
                    return Ok((Ok(v), true));
                }
                match eval(i) {
                    Ok(v) => {
                        cache.store(i, &v)?;
                        Ok((Ok(v), false))
                    }
                    Err(e) => Ok((Err(e.to_string()), false)),
                }
            })
            .collect()
    });
    let mut sweep = Sweep {
        results: Vec::with_capacity(n),
        computed: 0,
        cached: 0,
    };
    for r in raw {
        let (v, hit) = r?;
        if hit {
            sweep.cached += 1;
        } else {
            sweep.computed += 1;
        }
        sweep.results.push(v);
    }
    Ok(sweep)
}

fn threshold_options(engine: &EngineSpec) -> ThresholdOptions {
    ThresholdOptions {
        gamma_max: engine.gamma_max,
        coarse_step: engine.coarse_step,
        refine_tol: engine.refine_tol,
        cutoff: engine.cutoff,
        frame: Frame::Rotated,
        spectrum: SpectrumOptions {
            tol: engine.qe_tol,
            max_steps: engine.max_steps.unwrap_or(THRESHOLD_MAX_STEPS),
            ..SpectrumOptions::default()
        },
    }
}

fn spectrum_max_steps(engine: &EngineSpec) -> usize {
    engine.max_steps.unwrap_or(SPECTRUM_MAX_STEPS)
}

fn point_label(assign: &[(AxisName, f64)]) -> Vec<(String, f64)> {
    assign.iter().map(|(n, v)| (n.to_string(), *v)).collect()
}

fn axis_value(name: AxisName, v: f64) -> String {
    match name {
        AxisName::M0 => format!("{}", v as usize),
        _ => num(v),
    }
}

fn require_no_grid(job: &JobConfig, sub: Subcommand) -> Result<(), CliError> {
    if job.grid.is_some() {
        return Err(CliError::Schema(format!("`{}` does not take a sweep", sub.name())));
    }
    Ok(())
}

fn require_grid(job: &JobConfig, sub: Subcommand) -> Result<&Grid, CliError> {
    job.grid
        .as_ref()
        .ok_or_else(|| CliError::Schema(format!("`{}` needs a `sweep` block", sub.name())))
}

pub fn run(sub: Subcommand, job: &JobConfig, ctx: &Context) -> Result<JobOutput, CliError> {
    match sub {
        Subcommand::Spectrum => spectrum(job),
        Subcommand::Threshold => threshold(job),
        Subcommand::ThresholdMap => threshold_map(job, ctx),
        Subcommand::WindingScan => winding_scan(job, ctx),
        Subcommand::ChiralScan => chiral_scan(job, ctx),
        Subcommand::EdgeTrace => edge_trace(job),
        Subcommand::EffectiveCompare => effective_compare(job),
    }
}

fn spectrum(job: &JobConfig) -> Result<JobOutput, CliError> {
    require_no_grid(job, Subcommand::Spectrum)?;
    let (m, tau) = job.model_at(&[])?;
    let s = converged_spectrum(&m, Frame::Rotated, tau * m.period(), job.engine.qe_tol, spectrum_max_steps(&job.engine))?;
    let diags = diagnose_spectrum(&m, &s)?;
    let order = sort_order(&s.quasienergies, 1e-12);
    let mut t = Table::new(&["mode_index", "re_eps", "im_eps", "ipr", "left_weight", "defect_weight"]);
    for (rank, &j) in order.iter().enumerate() {
        let d = &diags[j];
        t.row([
            (rank + 1).to_string(),
            num(d.quasienergy.re),
            num(d.quasienergy.im),
            num(d.ipr),
            num(d.left_weight),
            num(d.defect_weight),
        ]);
    }
    Ok(JobOutput {
        csv: t.finish(),
        summary: json!({
            "n_steps": s.n_steps,
            "converged": s.converged,
            "drift": s.drift,
            "near_defective": s.near_defective,
            "gamma_total": gamma_total(&s),
        }),
        computed: 1,
        ..JobOutput::default()
    })
}

fn threshold(job: &JobConfig) -> Result<JobOutput, CliError> {
    require_no_grid(job, Subcommand::Threshold)?;
    let (m, _) = job.model_at(&[])?;
    let r = find_threshold(&m, &threshold_options(&job.engine))?;
    let mut t = Table::new(&[
        "gamma_c",
        "bracket_low",
        "bracket_high",
        "gamma_total_low",
        "gamma_total_high",
        "status",
        "evaluations",
    ]);
    let status = serde_json::to_value(r.status).expect("status serializes");
    t.row([
        num(r.gamma_c),
        num(r.bracket.0),
        num(r.bracket.1),
        num(r.gamma_total_at_bracket.0),
        num(r.gamma_total_at_bracket.1),
        status.as_str().unwrap_or_default().to_string(),
        r.evaluations.to_string(),
    ]);
    Ok(JobOutput {
        csv: t.finish(),
        summary: serde_json::to_value(r).expect("threshold serializes"),
        computed: 1,
        ..JobOutput::default()
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Cell {
    value: f64,
    status: String,
}

fn eval_cell(q: Quantity, m: &ModelConfig, tau: f64, engine: &EngineSpec) -> Result<Cell, Error> {
    let ok = |value| Cell {
        value,
        status: "ok".into(),
    };
    match q {
        Quantity::GammaC => {
            let r = find_threshold(m, &threshold_options(engine))?;
            Ok(match r.status {
                ThresholdStatus::Zero => Cell {
                    value: 0.0,
                    status: "zero".into(),
                },
                ThresholdStatus::Found => Cell {
                    value: r.gamma_c,
                    status: "found".into(),
                },
                ThresholdStatus::UnbrokenUpToMax => Cell {
                    value: -1.0,
                    status: "unbroken_up_to_max".into(),
                },
            })
        }
        Quantity::GammaTotal => {
            let s = converged_spectrum(m, Frame::Rotated, tau * m.period(), engine.qe_tol, spectrum_max_steps(engine))?;
            Ok(Cell {
                value: gamma_total(&s),
                status: if s.converged { "ok" } else { "not_converged" }.into(),
            })
        }
        Quantity::Winding => Ok(ok(floquet_windings(m, engine.n_k)?.nu0.value())),
        Quantity::SigmaZMax => Ok(ok(chiral_expectation_scan(m, tau * m.period(), engine.n_k)?.max_abs)),
    }
}

fn threshold_map(job: &JobConfig, ctx: &Context) -> Result<JobOutput, CliError> {
    let grid = require_grid(job, Subcommand::ThresholdMap)?;
    let q = grid.quantity.unwrap_or(Quantity::GammaC);
    let sweep = run_points(ctx, grid.len(), |i| {
        let (m, tau) = job.model_at(&grid.point(i)).expect("grid validated at parse time");
        eval_cell(q, &m, tau, &job.engine)
    })?;
    let mut header = vec![grid.x.name.to_string()];
    if let Some(y) = &grid.y {
        header.push(y.name.to_string());
    }
    header.push(q.to_string());
    header.push("status".into());
    let mut t = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    let mut failures = Vec::new();
    let mut values = Vec::with_capacity(grid.len());
    for (i, r) in sweep.results.iter().enumerate() {
        let assign = grid.point(i);
        match r {
            Ok(cell) => {
                let mut row: Vec<String> = assign.iter().map(|&(n, v)| axis_value(n, v)).collect();
                row.push(num(cell.value));
                row.push(cell.status.clone());
                t.row(row);
                values.push(Some(cell.value));
            }
            Err(e) => {
                failures.push(Failure {
                    index: i,
                    point: point_label(&assign),
                    error: e.clone(),
                });
                values.push(None);
            }
        }
    }
    let nx = grid.x.values.len();
    let ny = grid.len() / nx;
    let y_label = grid.y.as_ref().map_or(String::new(), |y| y.name.to_string());
    let sentinel = (q == Quantity::GammaC).then_some(-1.0);
    let svg = heatmap_svg(&q.to_string(), &grid.x.name.to_string(), &y_label, nx, ny, &values, sentinel);
    Ok(JobOutput {
        csv: t.finish(),
        svg: Some(svg),
        summary: json!({ "quantity": q, "sentinel_unbroken": -1.0 }),
        failures,
        computed: sweep.computed,
        cached: sweep.cached,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct WindingRow {
    nu1: Option<i64>,
    nu2: Option<i64>,
    nu0: Option<f64>,
    nu_pi: Option<f64>,
    static_nu: Option<i64>,
    status: String,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

fn winding_scan(job: &JobConfig, ctx: &Context) -> Result<JobOutput, CliError> {
    let grid = require_grid(job, Subcommand::WindingScan)?;
    if grid.y.is_some() {
        return Err(CliError::Schema("`winding-scan` takes only an x_axis".into()));
    }
    let sweep = run_points(ctx, grid.len(), |i| {
        let (m, _) = job.model_at(&grid.point(i)).expect("grid validated at parse time");
        let lat = m.lattice;
        let r = m.drive.amplitude / m.drive.omega;
        let j1 = lat.j_hop * bessel_j(0, r * lat.a)?;
        let j2 = lat.j_hop * bessel_j(0, r * lat.b)?;
        let static_nu = match static_winding(j1, j2, lat.a, lat.b, STATIC_N_K) {
            Ok(w) => Some(w.nu),
            Err(Error::Gapless { .. }) => None,
            Err(e) => return Err(e),
        };
        let mut row = WindingRow {
            nu1: None,
            nu2: None,
            nu0: None,
            nu_pi: None,
            static_nu,
            status: "ok".into(),
        };
        match floquet_windings(&m, job.engine.n_k) {
            Ok(w) => {
                row.nu1 = Some(w.nu1.nu);
                row.nu2 = Some(w.nu2.nu);
                row.nu0 = Some(w.nu0.value());
                row.nu_pi = Some(w.nu_pi.value());
            }
            Err(Error::Gapless { .. }) => row.status = "gapless".into(),
            Err(Error::ChiralSymmetryViolated { .. }) => row.status = "chiral_violated".into(),
            Err(e) => return Err(e),
        }
        Ok(row)
    })?;
    let name = grid.x.name.to_string();
    let mut t = Table::new(&[name.as_str(), "nu1", "nu2", "nu0", "nu_pi", "static_nu", "status"]);
    let mut failures = Vec::new();
    for (i, r) in sweep.results.iter().enumerate() {
        let assign = grid.point(i);
        match r {
            Ok(w) => t.row([
                axis_value(assign[0].0, assign[0].1),
                opt(w.nu1),
                opt(w.nu2),
                opt(w.nu0),
                opt(w.nu_pi),
                opt(w.static_nu),
                w.status.clone(),
            ]),
            Err(e) => failures.push(Failure {
                index: i,
                point: point_label(&assign),
                error: e.clone(),
            }),
        }
    }
    Ok(JobOutput {
        csv: t.finish(),
        summary: json!({ "n_k": job.engine.n_k }),
        failures,
        computed: sweep.computed,
        cached: sweep.cached,
        ..JobOutput::default()
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ChiralRows {
    /// `(k, ⟨σz⟩)`, with `None` where the bands touch.
    rows: Vec<(f64, Option<f64>)>,
    max_abs: f64,
}

fn chiral_scan(job: &JobConfig, ctx: &Context) -> Result<JobOutput, CliError> {
    let taus: Vec<f64> = match &job.grid {
        None => vec![0.0, 0.25, 0.5, 0.75],
        Some(g) if g.x.name == AxisName::Tau && g.y.is_none() => g.x.values.clone(),
        Some(_) => return Err(CliError::Schema("`chiral-scan` sweeps only a `tau` x_axis".into())),
    };
    let (m, _) = job.model_at(&[])?;
    let sweep = run_points(ctx, taus.len(), |i| {
        let scan = chiral_expectation_scan(&m, taus[i] * m.period(), job.engine.n_k)?;
        let mut rows: Vec<(f64, Option<f64>)> = scan.points.iter().map(|&(k, s)| (k, Some(s))).collect();
        rows.extend(scan.omitted.iter().map(|&k| (k, None)));
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(ChiralRows {
            rows,
            max_abs: scan.max_abs,
        })
    })?;
    let mut t = Table::new(&["tau", "k", "sigma_z", "status"]);
    let mut failures = Vec::new();
    let mut maxima = Vec::new();
    for (i, r) in sweep.results.iter().enumerate() {
        match r {
            Ok(scan) => {
                for &(k, s) in &scan.rows {
                    let (val, status) = match s {
                        Some(s) => (num(s), "ok"),
                        None => (String::new(), "band_touching"),
                    };
                    t.row([num(taus[i]), num(k), val, status.to_string()]);
                }
                maxima.push(json!({ "tau": taus[i], "max_abs": scan.max_abs }));
            }
            Err(e) => failures.push(Failure {
                index: i,
                point: vec![("tau".into(), taus[i])],
                error: e.clone(),
            }),
        }
    }
    Ok(JobOutput {
        csv: t.finish(),
        summary: json!({ "certificates": maxima, "n_k": job.engine.n_k }),
        failures,
        computed: sweep.computed,
        cached: sweep.cached,
        ..JobOutput::default()
    })
}

fn edge_trace(job: &JobConfig) -> Result<JobOutput, CliError> {
    require_no_grid(job, Subcommand::EdgeTrace)?;
    let (m, _) = job.model_at(&[])?;
    let trace = sigma_p_trace(&m, job.engine.n_samples)?;
    let mut t = Table::new(&["t", "sigma_p"]);
    for (&time, &p) in trace.times.iter().zip(&trace.sigma_p) {
        t.row([num(time), num(p)]);
    }
    let max = trace.sigma_p.iter().copied().fold(0.0, f64::max);
    Ok(JobOutput {
        csv: t.finish(),
        summary: json!({ "max_sigma_p": max, "period": m.period() }),
        computed: 1,
        ..JobOutput::default()
    })
}

fn effective_compare(job: &JobConfig) -> Result<JobOutput, CliError> {
    require_no_grid(job, Subcommand::EffectiveCompare)?;
    let (m, _) = job.model_at(&[])?;
    let period = m.period();
    let (chain, kind) = if m.defect.co_driven {
        (double_drive_effective_chain(&m, None)?, "double_drive")
    } else {
        (hf_effective_chain(&m)?, "single_drive")
    };
    let effective: Vec<Complex64> = effective_spectrum(&chain)?
        .into_iter()
        .map(|e| fold_into_zone(e, period))
        .collect();
    let s = converged_spectrum(&m, Frame::Rotated, 0.0, job.engine.qe_tol, spectrum_max_steps(&job.engine))?;
    let exact: Vec<Complex64> = s.quasienergies.iter().map(|&e| fold_into_zone(e, period)).collect();
    let oe = sort_order(&exact, 1e-9);
    let of = sort_order(&effective, 1e-9);
    let mut t = Table::new(&["index", "exact_re", "exact_im", "effective_re", "effective_im", "deviation"]);
    let mut worst = 0.0f64;
    for (rank, (&i, &j)) in oe.iter().zip(&of).enumerate() {
        let dev = (exact[i] - effective[j]).norm();
        worst = worst.max(dev);
        t.row([
            (rank + 1).to_string(),
            num(exact[i].re),
            num(exact[i].im),
            num(effective[j].re),
            num(effective[j].im),
            num(dev),
        ]);
    }
    Ok(JobOutput {
        csv: t.finish(),
        summary: json!({
            "effective_model": kind,
            "max_deviation": worst,
            "max_abs_im_effective": effective.iter().map(|e| e.im.abs()).fold(0.0, f64::max),
            "exact_converged": s.converged,
        }),
        computed: 1,
        ..JobOutput::default()
    })
}
