use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{converged_spectrum_with, evolve_state_with, FloquetSpectrum, Framed, Scheme, SpectrumOptions};
use crate::lattice::{Frame, ModelConfig};
use crate::linalg::{inner, vec_norm, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeDiagnostics {
    pub index: usize,
    pub quasienergy: C64,
    pub ipr: f64,
    /// Probability on sites 1..⌊N/2⌋.
    pub left_weight: f64,
    /// Probability on the gain and loss sites together.
    pub defect_weight: f64,
    /// Probability on even (1-based) sites.
    pub even_weight: f64,
}

pub fn ipr(mode: &[C64]) -> Result<f64> {
    let p2: f64 = mode.iter().map(|z| z.norm_sqr()).sum();
    if p2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let p4: f64 = mode.iter().map(|z| z.norm_sqr().powi(2)).sum();
    Ok(p4 / (p2 * p2))
}

fn probabilities(mode: &[C64]) -> Vec<f64> {
    let total: f64 = mode.iter().map(|z| z.norm_sqr()).sum();
    mode.iter().map(|z| z.norm_sqr() / total).collect()
}

pub fn diagnose_mode(model: &ModelConfig, index: usize, quasienergy: C64, mode: &[C64]) -> Result<ModeDiagnostics> {
    let ipr = ipr(mode)?;
    let p = probabilities(mode);
    let n = p.len();
    let (gain, loss) = model.defect_sites();
    Ok(ModeDiagnostics {
        index,
        quasienergy,
        ipr,
        left_weight: p[..n / 2].iter().sum(),
        defect_weight: p[gain] + p[loss],
        even_weight: p.iter().skip(1).step_by(2).sum(),
    })
}

pub fn diagnose_spectrum(model: &ModelConfig, spectrum: &FloquetSpectrum) -> Result<Vec<ModeDiagnostics>> {
    (0..spectrum.len())
        .map(|j| diagnose_mode(model, j, spectrum.quasienergies[j], &spectrum.mode(j)))
        .collect()
}

/// `Σ_j |Im ε_j|`.
pub fn gamma_total(spectrum: &FloquetSpectrum) -> f64 {
    spectrum.quasienergies.iter().map(|e| e.im.abs()).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdStatus {
    /// Broken already at the smallest probed γ.
    Zero,
    Found,
    UnbrokenUpToMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub gamma_c: f64,
    /// `(γ_low, γ_high)`: Γ_total ≤ cutoff at γ_low and > cutoff at γ_high.
    /// For `UnbrokenUpToMax` both ends equal the largest probed γ.
    pub bracket: (f64, f64),
    pub gamma_total_at_bracket: (f64, f64),
    pub status: ThresholdStatus,
    pub gamma_max_probed: f64,
    pub cutoff: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub gamma_max: f64,
    pub coarse_step: f64,
    pub refine_tol: f64,
    pub cutoff: f64,
    pub frame: Frame,
    pub spectrum: SpectrumOptions,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            gamma_max: 2.0,
            coarse_step: 0.02,
            refine_tol: 1e-3,
            cutoff: 1e-7,
            frame: Frame::Rotated,
            spectrum: SpectrumOptions {
                max_steps: 1 << 16,
                ..SpectrumOptions::default()
            },
        }
    }
}

impl ThresholdOptions {
    fn validate(&self) -> Result<()> {
        let ok = self.gamma_max > 0.0
            && self.coarse_step > self.refine_tol
            && self.refine_tol > 0.0
            && self.cutoff > 0.0
            && self.gamma_max.is_finite();
        if !ok {
            return Err(Error::InvalidConfig(
                "threshold search needs gamma_max > 0, coarse_step > refine_tol > 0, cutoff > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Γ_total of the converged Floquet spectrum at a given γ.
pub fn gamma_total_at(model: &ModelConfig, gamma: f64, frame: Frame, opts: &SpectrumOptions) -> Result<f64> {
    let m = model.with_gamma(gamma);
    let s = converged_spectrum_with(&Framed::new(&m, frame), 0.0, opts)?;
    Ok(gamma_total(&s))
}

/// First onset of PT breaking for the Floquet spectrum of `model_base` (its γ is ignored).
pub fn find_threshold(model_base: &ModelConfig, opts: &ThresholdOptions) -> Result<ThresholdResult> {
    find_threshold_by(|g| gamma_total_at(model_base, g, opts.frame, &opts.spectrum), opts)
}

/// Ascending coarse scan followed by bisection, for any γ ↦ Γ_total map.
///
/// Coarse points are evaluated in parallel batches of the pool size and
/// consumed in ascending order, so the result does not depend on the pool.
pub fn find_threshold_by<F>(gamma_total_of: F, opts: &ThresholdOptions) -> Result<ThresholdResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    opts.validate()?;
    let cutoff = opts.cutoff;
    let n_coarse = ((opts.gamma_max / opts.coarse_step) * (1.0 + 1e-12)).floor() as usize;
    let n_coarse = n_coarse.max(1);
    let batch = rayon::current_num_threads().max(1);
    let mut evaluations = 0;
    let mut low = (0.0, 0.0);
    let mut high = None;
    let mut first_broken_index = None;
    let mut k = 1;
    'scan: while k <= n_coarse {
        let end = (k + batch - 1).min(n_coarse);
        let values: Vec<Result<f64>> = (k..=end)
            .into_par_iter()
            .map(|i| gamma_total_of(i as f64 * opts.coarse_step))
            .collect();
        for (offset, v) in values.into_iter().enumerate() {
            let i = k + offset;
            let g = i as f64 * opts.coarse_step;
            let v = v?;
            evaluations += 1;
            if v > cutoff {
                high = Some((g, v));
                first_broken_index = Some(i);
                break 'scan;
            }
            low = (g, v);
        }
        k = end + 1;
    }

    let Some(mut high) = high else {
        return Ok(ThresholdResult {
            gamma_c: low.0,
            bracket: (low.0, low.0),
            gamma_total_at_bracket: (low.1, low.1),
            status: ThresholdStatus::UnbrokenUpToMax,
            gamma_max_probed: low.0,
            cutoff,
            evaluations,
        });
    };
    let gamma_max_probed = high.0;

    if first_broken_index == Some(1) {
        let probe = opts.refine_tol;
        let v = gamma_total_of(probe)?;
        evaluations += 1;
        if v > cutoff {
            return Ok(ThresholdResult {
                gamma_c: 0.0,
                bracket: (0.0, probe),
                gamma_total_at_bracket: (0.0, v),
                status: ThresholdStatus::Zero,
                gamma_max_probed,
                cutoff,
                evaluations,
            });
        }
        low = (probe, v);
    }

    while high.0 - low.0 > opts.refine_tol {
        let mid = 0.5 * (low.0 + high.0);
        let v = gamma_total_of(mid)?;
        evaluations += 1;
        if v > cutoff {
            high = (mid, v);
        } else {
            low = (mid, v);
        }
    }
    Ok(ThresholdResult {
        gamma_c: 0.5 * (low.0 + high.0),
        bracket: (low.0, high.0),
        gamma_total_at_bracket: (low.1, high.1),
        status: ThresholdStatus::Found,
        gamma_max_probed,
        cutoff,
        evaluations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub struct ZeroMode {
    pub diagnostics: ModeDiagnostics,
    pub side: Side,
    /// Unit-norm mode profile; for a degenerate defect-free pair this is the
    /// sublattice-polarized recombination rather than the raw eigenvector.
    pub vector: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeOptions {
    pub eps_tol: f64,
    pub ipr_min: f64,
}

impl ZeroModeOptions {
    pub fn defaults_for(model: &ModelConfig) -> Self {
        Self {
            eps_tol: 1e-5 * model.lattice.j_hop.max(1.0),
            ipr_min: 3.0 / model.n_sites() as f64,
        }
    }
}

fn normalized(v: &[C64]) -> Vec<C64> {
    let n = vec_norm(v);
    v.iter().map(|z| z / n).collect()
}

/// Splits a two-dimensional zero-energy subspace into its sublattice-polarized
/// basis by diagonalizing the chiral operator (+1 on odd sites, −1 on even
/// sites) inside the subspace.
fn sublattice_pair(u: &[C64], v: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let e1 = normalized(u);
    let proj = inner(&e1, v);
    let e2: Vec<C64> = v.iter().zip(&e1).map(|(x, y)| x - proj * y).collect();
    let e2 = normalized(&e2);
    let chiral = |a: &[C64], b: &[C64]| -> C64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                x.conj() * y * s
            })
            .sum()
    };
    let g11 = chiral(&e1, &e1).re;
    let g22 = chiral(&e2, &e2).re;
    let g12 = chiral(&e1, &e2);
    // Eigenvectors of [[g11, g12], [g12*, g22]].
    let half = 0.5 * (g11 - g22);
    let root = (half * half + g12.norm_sqr()).sqrt();
    let combine = |lambda: f64| -> Vec<C64> {
        let (c1, c2) = if g12.norm() > 1e-300 {
            (g12, C64::new(lambda - g11, 0.0))
        } else if (lambda - g11).abs() <= (lambda - g22).abs() {
            (C64::new(1.0, 0.0), ZERO)
        } else {
            (ZERO, C64::new(1.0, 0.0))
        };
        let w: Vec<C64> = e1.iter().zip(&e2).map(|(a, b)| c1 * a + c2 * b).collect();
        normalized(&w)
    };
    let mean = 0.5 * (g11 + g22);
    (combine(mean + root), combine(mean - root))
}

/// Zero-energy localized modes, labeled left or right by their weight on the left half.
pub fn zero_modes(model: &ModelConfig, spectrum: &FloquetSpectrum, opts: &ZeroModeOptions) -> Result<Vec<ZeroMode>> {
    let mut found = Vec::new();
    for j in 0..spectrum.len() {
        let eps = spectrum.quasienergies[j];
        if eps.norm() >= opts.eps_tol {
            continue;
        }
        let v = normalized(&spectrum.mode(j));
        let d = diagnose_mode(model, j, eps, &v)?;
        if d.ipr > opts.ipr_min {
            found.push((d, v));
        }
    }
    if model.defect.gamma == 0.0 && found.len() == 2 {
        let (a, b) = sublattice_pair(&found[0].1, &found[1].1);
        let mut pair = Vec::new();
        for (slot, v) in [a, b].into_iter().enumerate() {
            let (idx, eps) = (found[slot].0.index, found[slot].0.quasienergy);
            let d = diagnose_mode(model, idx, eps, &v)?;
            pair.push((d, v));
        }
        if pair[0].0.left_weight < pair[1].0.left_weight {
            pair.swap(0, 1);
        }
        found = pair;
    }
    Ok(found
        .into_iter()
        .map(|(d, v)| ZeroMode {
            side: if d.left_weight > 0.5 { Side::Left } else { Side::Right },
            diagnostics: d,
            vector: v,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeTrace {
    pub times: Vec<f64>,
    pub sigma_p: Vec<f64>,
}

/// Probability on even sites n ≤ N/2 together with their reflection partners.
pub fn sigma_p(state: &[C64]) -> f64 {
    let n = state.len();
    let p = probabilities(state);
    (2..=n / 2).step_by(2).map(|site| p[site - 1] + p[n - site]).sum()
}

/// Σ_P over one period for the left zero mode of a defect-free even chain,
/// evolved in the rotating frame from τ = 0. Samples are evenly spaced on [0, T].
pub fn sigma_p_trace(model: &ModelConfig, n_samples: usize) -> Result<EdgeTrace> {
    if model.defect.gamma != 0.0 {
        return Err(Error::InvalidConfig("Σ_P trace needs a defect-free model (gamma = 0)".into()));
    }
    if model.n_sites() % 2 != 0 {
        return Err(Error::InvalidConfig("Σ_P trace needs an even number of sites".into()));
    }
    if n_samples < 16 {
        return Err(Error::InvalidConfig("n_samples must be at least 16".into()));
    }
    let framed = Framed::new(model, Frame::Rotated);
    let spectrum = converged_spectrum_with(&framed, 0.0, &SpectrumOptions::default())?;
    let modes = zero_modes(model, &spectrum, &ZeroModeOptions::defaults_for(model))?;
    let Some(left) = modes.into_iter().find(|m| m.side == Side::Left) else {
        return Err(Error::NoZeroMode(format!(
            "topologically trivial phase at A/omega = {}, omega = {}: no left zero mode",
            model.drive.amplitude / model.drive.omega,
            model.drive.omega
        )));
    };
    let period = model.period();
    let intervals = n_samples - 1;
    let steps = spectrum.n_steps.max(1024).div_ceil(intervals).max(1);
    let mut psi = left.vector;
    let mut times = Vec::with_capacity(n_samples);
    let mut trace = Vec::with_capacity(n_samples);
    times.push(0.0);
    trace.push(sigma_p(&psi));
    for k in 1..=intervals {
        let t0 = period * (k - 1) as f64 / intervals as f64;
        let t1 = period * k as f64 / intervals as f64;
        psi = evolve_state_with(&framed, &psi, t0, t1, steps, Scheme::Magnus4)?;
        times.push(t1);
        trace.push(sigma_p(&psi));
    }
    Ok(EdgeTrace { times, sigma_p: trace })
}
