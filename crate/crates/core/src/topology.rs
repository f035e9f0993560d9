use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{converged_spectrum_with, PeriodicHamiltonian, SpectrumOptions};
use crate::lattice::ModelConfig;
use crate::linalg::{Tridiagonal, C64};

pub const WINDING_RESIDUAL_MAX: f64 = 0.01;
pub const CHIRAL_TOL: f64 = 1e-6;
/// Quasienergies within this distance of 0 or π/T (in units of 1/T) count as band touching.
pub const BAND_TOUCH_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochHamiltonian2 {
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
    /// `hx − i·hy`.
    pub off_diag: C64,
}

impl BlochHamiltonian2 {
    pub fn from_off_diag(off_diag: C64) -> Self {
        Self {
            hx: off_diag.re,
            hy: -off_diag.im,
            hz: 0.0,
            off_diag,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    pub nu: i64,
    pub raw: f64,
    pub residual: f64,
    pub chiral_certificate: f64,
}

/// An integer multiple of one half, kept exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Halves(pub i64);

impl Halves {
    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn as_integer(self) -> Option<i64> {
        self.is_integer().then_some(self.0 / 2)
    }
}

impl fmt::Display for Halves {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_integer() {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "{}/2", self.0),
        }
    }
}

fn bz_grid(a: f64, b: f64, n_k: usize) -> Vec<f64> {
    let width = 2.0 * PI / (a + b);
    (0..n_k).map(|i| width * i as f64 / n_k as f64).collect()
}

/// Winding of a closed loop of samples, by summing principal-branch phase
/// increments. The sign is chosen so that `j1 + j2·e^{−iq}` with `|j2| > |j1|`
/// winds `+1`.
fn loop_winding(samples: &[(f64, C64)], certificate: f64) -> Result<WindingResult> {
    for &(k, f) in samples {
        if !(f.norm() >= 1e-12) {
            return Err(Error::Gapless { k });
        }
    }
    let n = samples.len();
    let total: f64 = (0..n)
        .map(|i| (samples[(i + 1) % n].1 / samples[i].1).arg())
        .sum();
    let raw = -total / (2.0 * PI);
    let nu = raw.round();
    let residual = (raw - nu).abs();
    if residual >= WINDING_RESIDUAL_MAX {
        return Err(Error::WindingResidual { raw, residual });
    }
    Ok(WindingResult {
        nu: nu as i64,
        raw,
        residual,
        chiral_certificate: certificate,
    })
}

/// Winding number of the static dimerized chain with intra-cell hopping `j1`
/// (spacing `a`) and inter-cell hopping `j2` (spacing `b`).
///
/// The off-diagonal Bloch amplitude is `Δ(k) = j1·e^{ika} + j2·e^{−ikb}`; the
/// phase is accumulated on its cell-periodic part `e^{−ika}·Δ(k)`.
pub fn static_winding(j1: f64, j2: f64, a: f64, b: f64, n_k: usize) -> Result<WindingResult> {
    if n_k < 201 {
        return Err(Error::InvalidConfig(format!("n_k = {n_k} below 201")));
    }
    if j1 == 0.0 && j2 == 0.0 {
        return Err(Error::InvalidConfig("both couplings vanish".into()));
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidConfig("spacings must be positive".into()));
    }
    let samples: Vec<(f64, C64)> = bz_grid(a, b, n_k)
        .into_iter()
        .map(|k| (k, C64::new(j1, 0.0) + C64::from_polar(j2, -k * (a + b))))
        .collect();
    loop_winding(&samples, 0.0)
}

fn bloch_off_diag(model: &ModelConfig, k: f64, t: f64) -> C64 {
    let lat = &model.lattice;
    let w = model.drive.omega;
    let phi = model.drive.amplitude / w * (w * t).cos();
    C64::from_polar(lat.j_hop, (phi + k) * lat.a) + C64::from_polar(lat.j_hop, -(phi + k) * lat.b)
}

/// Rotating-frame Bloch Hamiltonian of the defect-free bulk at `(k, t)`.
pub fn bloch_hamiltonian_t(model: &ModelConfig, k: f64, t: f64) -> BlochHamiltonian2 {
    BlochHamiltonian2::from_off_diag(bloch_off_diag(model, k, t))
}

/// Two-band driven Bloch problem at fixed `k`.
#[derive(Clone, Copy, Debug)]
pub struct BlochDrive {
    pub model: ModelConfig,
    pub k: f64,
}

impl PeriodicHamiltonian for BlochDrive {
    fn dim(&self) -> usize {
        2
    }

    fn period(&self) -> f64 {
        self.model.period()
    }

    fn bands_at(&self, t: f64) -> Tridiagonal {
        let d = bloch_off_diag(&self.model, self.k, t);
        Tridiagonal {
            diag: vec![C64::new(0.0, 0.0); 2],
            upper: vec![d],
            lower: vec![d.conj()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveBloch {
    pub h: BlochHamiltonian2,
    pub eps_plus: f64,
    pub eps_minus: f64,
    /// `⟨u₊|σz|u₊⟩`.
    pub sigma_z: f64,
}

/// Floquet effective Bloch Hamiltonian at `(k, τ)` from the converged
/// one-period propagator.
pub fn effective_bloch(model: &ModelConfig, k: f64, tau: f64) -> Result<EffectiveBloch> {
    effective_bloch_with(model, k, tau, &SpectrumOptions::default())
}

pub fn effective_bloch_with(model: &ModelConfig, k: f64, tau: f64, opts: &SpectrumOptions) -> Result<EffectiveBloch> {
    let drive = BlochDrive { model: *model, k };
    let s = converged_spectrum_with(&drive, tau, opts)?;
    let t = model.period();
    let edge = PI / t;
    // Quasienergies come in ±ε pairs; the upper band is the larger one.
    let plus = if s.quasienergies[0].re >= s.quasienergies[1].re { 0 } else { 1 };
    let eps_plus = s.quasienergies[plus].re;
    if eps_plus * t <= BAND_TOUCH_TOL || (edge - eps_plus) * t <= BAND_TOUCH_TOL {
        return Err(Error::BandTouching { k, eps: eps_plus });
    }
    let u = s.mode(plus);
    let norm = u[0].norm_sqr() + u[1].norm_sqr();
    let cross = u[0].conj() * u[1] / norm;
    let sx = 2.0 * cross.re;
    let sy = 2.0 * cross.im;
    let sz = (u[0].norm_sqr() - u[1].norm_sqr()) / norm;
    let h = BlochHamiltonian2 {
        hx: eps_plus * sx,
        hy: eps_plus * sy,
        hz: eps_plus * sz,
        off_diag: C64::new(eps_plus * sx, -eps_plus * sy),
    };
    Ok(EffectiveBloch {
        h,
        eps_plus,
        eps_minus: -eps_plus,
        sigma_z: sz,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiralScan {
    pub tau: f64,
    /// `(k, ⟨u₊|σz|u₊⟩)` for every grid point without band touching.
    pub points: Vec<(f64, f64)>,
    /// Grid points skipped because the bands touch there.
    pub omitted: Vec<f64>,
    pub max_abs: f64,
}

pub fn chiral_expectation_scan(model: &ModelConfig, tau: f64, n_k: usize) -> Result<ChiralScan> {
    if n_k < 64 {
        return Err(Error::InvalidConfig(format!("n_k = {n_k} below 64")));
    }
    let lat = &model.lattice;
    let results: Vec<(f64, Result<EffectiveBloch>)> = bz_grid(lat.a, lat.b, n_k)
        .into_par_iter()
        .map(|k| (k, effective_bloch(model, k, tau)))
        .collect();
    let mut points = Vec::with_capacity(n_k);
    let mut omitted = Vec::new();
    for (k, r) in results {
        match r {
            Ok(e) => points.push((k, e.sigma_z)),
            Err(Error::BandTouching { .. }) => omitted.push(k),
            Err(e) => return Err(e),
        }
    }
    let max_abs = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    Ok(ChiralScan {
        tau,
        points,
        omitted,
        max_abs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloquetWindings {
    pub nu1: WindingResult,
    pub nu2: WindingResult,
    pub nu0: Halves,
    pub nu_pi: Halves,
}

fn frame_winding(model: &ModelConfig, tau: f64, n_k: usize) -> Result<WindingResult> {
    let lat = &model.lattice;
    let results: Vec<(f64, Result<EffectiveBloch>)> = bz_grid(lat.a, lat.b, n_k)
        .into_par_iter()
        .map(|k| (k, effective_bloch(model, k, tau)))
        .collect();
    let mut samples = Vec::with_capacity(n_k);
    let mut certificate: f64 = 0.0;
    for (k, r) in results {
        let e = match r {
            Ok(e) => e,
            Err(Error::BandTouching { k, .. }) => return Err(Error::Gapless { k }),
            Err(e) => return Err(e),
        };
        certificate = certificate.max(e.sigma_z.abs());
        samples.push((k, C64::from_polar(1.0, -k * lat.a) * e.h.off_diag));
    }
    if certificate >= CHIRAL_TOL {
        return Err(Error::ChiralSymmetryViolated { tau, certificate });
    }
    loop_winding(&samples, certificate)
}

/// Windings of the effective Floquet Hamiltonian in the chiral frames τ = 0
/// and τ = T/2, and their combinations `ν₀ = (ν₁+ν₂)/2`, `ν_π = (ν₁−ν₂)/2`.
pub fn floquet_windings(model: &ModelConfig, n_k: usize) -> Result<FloquetWindings> {
    if n_k < 64 {
        return Err(Error::InvalidConfig(format!("n_k = {n_k} below 64")));
    }
    let nu1 = frame_winding(model, 0.0, n_k)?;
    let nu2 = frame_winding(model, model.period() / 2.0, n_k)?;
    Ok(FloquetWindings {
        nu1,
        nu2,
        nu0: Halves(nu1.nu + nu2.nu),
        nu_pi: Halves(nu1.nu - nu2.nu),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halves_display() {
        assert_eq!(Halves(2).to_string(), "1");
        assert_eq!(Halves(-3).to_string(), "-3/2");
        assert_eq!(Halves(0).as_integer(), Some(0));
        assert_eq!(Halves(1).as_integer(), None);
    }
}
