use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{framed_bands, Frame, ModelConfig};
use crate::linalg::{eig_general, sort_order, vec_norm, ComplexMatrix, Tridiagonal, C64, I};

/// A time-periodic Hamiltonian with tridiagonal structure at every instant.
pub trait PeriodicHamiltonian: Sync {
    fn dim(&self) -> usize;
    fn period(&self) -> f64;
    fn bands_at(&self, t: f64) -> Tridiagonal;
}

/// A lattice model viewed in a particular frame.
#[derive(Clone, Copy, Debug)]
pub struct Framed {
    pub model: ModelConfig,
    pub frame: Frame,
}

impl Framed {
    pub fn new(model: &ModelConfig, frame: Frame) -> Self {
        Self { model: *model, frame }
    }
}

impl PeriodicHamiltonian for Framed {
    fn dim(&self) -> usize {
        self.model.n_sites()
    }

    fn period(&self) -> f64 {
        self.model.period()
    }

    fn bands_at(&self, t: f64) -> Tridiagonal {
        framed_bands(&self.model, self.frame, t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// One exponential of `H` at the step midpoint; second order.
    #[default]
    Midpoint,
    /// Two-exponential commutator-free Magnus scheme on Gauss nodes; fourth order.
    Magnus4,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Midpoint => 2,
            Scheme::Magnus4 => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Propagator {
    pub u: ComplexMatrix,
    pub tau: f64,
    pub n_steps: usize,
    pub scheme: Scheme,
}

const MIN_STEPS: usize = 16;

fn magnus4_weights() -> ([f64; 2], [f64; 2]) {
    let r3 = 3f64.sqrt();
    ([0.5 - r3 / 6.0, 0.5 + r3 / 6.0], [(3.0 - 2.0 * r3) / 12.0, (3.0 + 2.0 * r3) / 12.0])
}

/// Advances the row-major block `x` (with `dim` rows) from `t0` to `t1`.
fn advance<H: PeriodicHamiltonian + ?Sized>(
    h: &H,
    x: &mut [C64],
    t0: f64,
    t1: f64,
    n_steps: usize,
    scheme: Scheme,
) -> Result<()> {
    let dt = (t1 - t0) / n_steps as f64;
    let step = -I * dt;
    let (c, alpha) = magnus4_weights();
    for s in 0..n_steps {
        let start = t0 + s as f64 * dt;
        match scheme {
            Scheme::Midpoint => {
                let hm = h.bands_at(start + 0.5 * dt);
                if !hm.is_finite() {
                    return Err(Error::NonFinite("Hamiltonian"));
                }
                hm.exp_apply(step, x);
            }
            Scheme::Magnus4 => {
                let h1 = h.bands_at(start + c[0] * dt);
                let h2 = h.bands_at(start + c[1] * dt);
                if !h1.is_finite() || !h2.is_finite() {
                    return Err(Error::NonFinite("Hamiltonian"));
                }
                h1.combine(alpha[1], &h2, alpha[0]).exp_apply(step, x);
                h1.combine(alpha[0], &h2, alpha[1]).exp_apply(step, x);
            }
        }
    }
    Ok(())
}

/// One-period propagator `U(τ+T, τ)` of a periodic Hamiltonian.
pub fn propagate_period_with<H: PeriodicHamiltonian + ?Sized>(
    h: &H,
    tau: f64,
    n_steps: usize,
    scheme: Scheme,
) -> Result<Propagator> {
    if n_steps < MIN_STEPS {
        return Err(Error::InvalidConfig(format!(
            "n_steps = {n_steps} below the minimum {MIN_STEPS}"
        )));
    }
    let mut u = ComplexMatrix::identity(h.dim());
    advance(h, u.as_mut_slice(), tau, tau + h.period(), n_steps, scheme)?;
    if !u.is_finite() {
        return Err(Error::NonFinite("propagator"));
    }
    Ok(Propagator {
        u,
        tau,
        n_steps,
        scheme,
    })
}

/// Midpoint-rule propagator over one period starting at `tau`.
pub fn propagate_period(model: &ModelConfig, frame: Frame, tau: f64, n_steps: usize) -> Result<Propagator> {
    propagate_period_with(&Framed::new(model, frame), tau, n_steps, Scheme::Midpoint)
}

#[derive(Clone, Debug)]
pub struct FloquetSpectrum {
    /// Sorted by ascending real part, ties by imaginary part.
    pub quasienergies: Vec<C64>,
    /// Propagator eigenvalues in the same order.
    pub multipliers: Vec<C64>,
    /// Column `j` is the unit-norm Floquet mode of `quasienergies[j]`.
    pub modes: ComplexMatrix,
    pub tau: f64,
    pub period: f64,
    pub n_steps: usize,
    pub converged: bool,
    pub drift: f64,
    pub near_defective: bool,
}

impl FloquetSpectrum {
    pub fn mode(&self, j: usize) -> Vec<C64> {
        self.modes.column(j)
    }

    pub fn len(&self) -> usize {
        self.quasienergies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quasienergies.is_empty()
    }
}

/// `ε = (i/T) Log λ`, folded so that `Re ε ∈ (−π/T, π/T]`.
pub fn quasienergy(lambda: C64, period: f64) -> C64 {
    let mut eps = I * lambda.ln() / period;
    if eps.re <= -PI / period {
        eps.re += 2.0 * PI / period;
    }
    eps
}

/// Distance between quasienergies with the real part taken modulo `2π/T`.
pub fn zone_distance(a: C64, b: C64, period: f64) -> f64 {
    let w = 2.0 * PI / period;
    let mut dr = (a.re - b.re).rem_euclid(w);
    if dr > w / 2.0 {
        dr = w - dr;
    }
    dr.hypot(a.im - b.im)
}

/// Diagonalizes a propagator into a sorted quasienergy spectrum.
pub fn spectrum_of(prop: &Propagator, period: f64) -> Result<FloquetSpectrum> {
    let eig = eig_general(&prop.u)?;
    let raw: Vec<C64> = eig.values.iter().map(|&l| quasienergy(l, period)).collect();
    let scale = PI / period;
    let order = sort_order(&raw, 1e-12 * scale.max(1.0));
    let n = raw.len();
    let mut modes = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        modes.set_column(dst, &eig.vectors.column(src));
    }
    Ok(FloquetSpectrum {
        quasienergies: order.iter().map(|&k| raw[k]).collect(),
        multipliers: order.iter().map(|&k| eig.values[k]).collect(),
        modes,
        tau: prop.tau,
        period,
        n_steps: prop.n_steps,
        converged: false,
        drift: f64::INFINITY,
        near_defective: eig.near_defective,
    })
}

/// Largest distance from any quasienergy in one spectrum to the nearest in the other.
pub fn spectral_drift(a: &[C64], b: &[C64], period: f64) -> f64 {
    let one_way = |x: &[C64], y: &[C64]| {
        x.iter()
            .map(|p| y.iter().map(|q| zone_distance(*p, *q, period)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub tol: f64,
    pub min_steps: usize,
    pub max_steps: usize,
    pub scheme: Scheme,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            min_steps: 256,
            max_steps: 1 << 20,
            scheme: Scheme::Magnus4,
        }
    }
}

/// Doubles the step count until the quasienergies move by less than `tol`.
///
/// Stops early with `converged = false` when the cap is reached or when a
/// doubling no longer reduces the drift (round-off floor, e.g. near an
/// exceptional point).
pub fn converged_spectrum_with<H: PeriodicHamiltonian + ?Sized>(
    h: &H,
    tau: f64,
    opts: &SpectrumOptions,
) -> Result<FloquetSpectrum> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidConfig("tol must be positive".into()));
    }
    let period = h.period();
    let mut steps = opts.min_steps.max(MIN_STEPS);
    let mut prev = spectrum_of(&propagate_period_with(h, tau, steps, opts.scheme)?, period)?;
    let mut prev_drift = f64::INFINITY;
    let mut stalls = 0;
    while steps * 2 <= opts.max_steps {
        steps *= 2;
        let mut cur = spectrum_of(&propagate_period_with(h, tau, steps, opts.scheme)?, period)?;
        let drift = spectral_drift(&prev.quasienergies, &cur.quasienergies, period);
        cur.drift = drift;
        if drift < opts.tol {
            cur.converged = true;
            return Ok(cur);
        }
        if drift > 0.5 * prev_drift {
            stalls += 1;
            if stalls >= 2 {
                return Ok(cur);
            }
        } else {
            stalls = 0;
        }
        prev_drift = drift;
        prev = cur;
    }
    Ok(prev)
}

pub fn converged_spectrum(
    model: &ModelConfig,
    frame: Frame,
    tau: f64,
    tol: f64,
    max_steps: usize,
) -> Result<FloquetSpectrum> {
    let opts = SpectrumOptions {
        tol,
        max_steps,
        ..SpectrumOptions::default()
    };
    converged_spectrum_with(&Framed::new(model, frame), tau, &opts)
}

pub fn evolve_state_with<H: PeriodicHamiltonian + ?Sized>(
    h: &H,
    psi0: &[C64],
    t0: f64,
    t1: f64,
    n_steps: usize,
    scheme: Scheme,
) -> Result<Vec<C64>> {
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: h.dim(),
            right: psi0.len(),
        });
    }
    if vec_norm(psi0) == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !(t1 > t0) {
        return Err(Error::InvalidConfig("t1 must exceed t0".into()));
    }
    if n_steps == 0 {
        return Err(Error::InvalidConfig("n_steps must be positive".into()));
    }
    let mut psi = psi0.to_vec();
    advance(h, &mut psi, t0, t1, n_steps, scheme)?;
    Ok(psi)
}

/// Midpoint-rule evolution of a state from `t0` to `t1`.
pub fn evolve_state(
    model: &ModelConfig,
    frame: Frame,
    psi0: &[C64],
    t0: f64,
    t1: f64,
    n_steps: usize,
) -> Result<Vec<C64>> {
    evolve_state_with(&Framed::new(model, frame), psi0, t0, t1, n_steps, Scheme::Midpoint)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_includes_upper_zone_edge() {
        let t = 2.0;
        let eps = quasienergy(C64::new(-1.0, 0.0), t);
        assert!((eps.re - PI / t).abs() < 1e-15);
        let eps = quasienergy(C64::new(-1.0, -1e-300), t);
        assert!((eps.re - PI / t).abs() < 1e-12);
    }

    #[test]
    fn zone_distance_wraps() {
        let t = 1.0;
        let a = C64::new(PI - 1e-3, 0.0);
        let b = C64::new(-PI + 1e-3, 0.0);
        assert!((zone_distance(a, b, t) - 2e-3).abs() < 1e-12);
    }
}
