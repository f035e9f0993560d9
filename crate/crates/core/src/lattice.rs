use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tridiagonal, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_sites: usize,
    /// Spacing of odd bonds (1-based bond index).
    pub a: f64,
    /// Spacing of even bonds.
    pub b: f64,
    pub j_hop: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub amplitude: f64,
    pub omega: f64,
}

impl DriveSpec {
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec {
    /// Gain site, 1-based. The loss site is its reflection partner.
    pub m0: usize,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub co_driven: bool,
    #[serde(default)]
    pub theta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub lattice: LatticeSpec,
    #[serde(flatten)]
    pub drive: DriveSpec,
    #[serde(flatten)]
    pub defect: DefectSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Lab,
    Rotated,
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 4 {
            return Err(Error::InvalidConfig(format!("n_sites = {} < 4", self.n_sites)));
        }
        if !(self.a.is_finite() && self.a > 0.0 && self.b.is_finite() && self.b > 0.0) {
            return Err(Error::InvalidConfig("bond spacings a, b must be positive".into()));
        }
        if !(self.j_hop.is_finite() && self.j_hop > 0.0) {
            return Err(Error::InvalidConfig("j_hop must be positive".into()));
        }
        Ok(())
    }

    /// Spacing of bond `n` (0-based; bond `n` joins sites `n` and `n+1`).
    pub fn bond_length(&self, n: usize) -> f64 {
        if n % 2 == 0 {
            self.a
        } else {
            self.b
        }
    }
}

impl ModelConfig {
    pub fn new(lattice: LatticeSpec, drive: DriveSpec, defect: DefectSpec) -> Result<Self> {
        let m = Self { lattice, drive, defect };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        let d = &self.drive;
        if !(d.omega.is_finite() && d.omega > 0.0) {
            return Err(Error::InvalidConfig("omega must be positive".into()));
        }
        if !(d.amplitude.is_finite() && d.amplitude >= 0.0) {
            return Err(Error::InvalidConfig("amplitude must be non-negative".into()));
        }
        let n = self.lattice.n_sites;
        let f = &self.defect;
        if f.m0 < 1 || f.m0 > n.div_ceil(2) {
            return Err(Error::InvalidConfig(format!(
                "m0 = {} outside [1, {}]",
                f.m0,
                n.div_ceil(2)
            )));
        }
        if f.m0 == n + 1 - f.m0 {
            return Err(Error::InvalidConfig(format!(
                "m0 = {} is the central site of an odd lattice; gain and loss would coincide",
                f.m0
            )));
        }
        if !(f.gamma.is_finite() && f.gamma >= 0.0) {
            return Err(Error::InvalidConfig("gamma must be non-negative".into()));
        }
        if !f.theta.is_finite() {
            return Err(Error::InvalidConfig("theta must be finite".into()));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites
    }

    pub fn period(&self) -> f64 {
        self.drive.period()
    }

    /// 0-based gain and loss sites.
    pub fn defect_sites(&self) -> (usize, usize) {
        let m0 = self.defect.m0;
        (m0 - 1, self.lattice.n_sites - m0)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.defect.gamma = gamma;
        self
    }

    /// Sign pattern of the defect pair: +1 on the gain site, -1 on the loss site.
    fn defect_signs(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.lattice.n_sites];
        let (g, l) = self.defect_sites();
        s[g] = 1.0;
        s[l] = -1.0;
        s
    }
}

/// Site coordinates with `x₁ = 0`.
pub fn site_positions(lattice: &LatticeSpec) -> Vec<f64> {
    let mut x = Vec::with_capacity(lattice.n_sites);
    let mut cur = 0.0;
    for n in 0..lattice.n_sites {
        x.push(cur);
        cur += lattice.bond_length(n);
    }
    x
}

/// Lab-frame Hamiltonian in banded form.
pub fn hamiltonian_bands(model: &ModelConfig, t: f64) -> Tridiagonal {
    let lat = &model.lattice;
    let n = lat.n_sites;
    let x = site_positions(lat);
    let w = model.drive.omega;
    let mut h = Tridiagonal::zeros(n);
    let ramp = model.drive.amplitude * (w * t).sin();
    for i in 0..n {
        h.diag[i] = C64::new(ramp * x[i], 0.0);
    }
    let j = C64::new(lat.j_hop, 0.0);
    h.upper.fill(j);
    h.lower.fill(j);
    let f = &model.defect;
    let g = if f.co_driven {
        f.gamma * (w * t - f.theta).cos()
    } else {
        f.gamma
    };
    let (gain, loss) = model.defect_sites();
    h.diag[gain] += C64::new(0.0, g);
    h.diag[loss] -= C64::new(0.0, g);
    h
}

pub fn hamiltonian(model: &ModelConfig, t: f64) -> ComplexMatrix {
    hamiltonian_bands(model, t).to_dense()
}

/// Rotating-frame Hamiltonian in banded form.
///
/// The linear drive is gauged into Peierls phases on the bonds. For a static
/// defect pair the ±iγ terms stay on the diagonal; for a co-driven pair they
/// are gauged into real factors `r_n` on the bonds adjacent to the defects,
/// with `r_n` above the diagonal and `1/r_n` below.
pub fn rotated_hamiltonian_bands(model: &ModelConfig, t: f64) -> Tridiagonal {
    let lat = &model.lattice;
    let n = lat.n_sites;
    let w = model.drive.omega;
    let phi = model.drive.amplitude / w * (w * t).cos();
    let f = &model.defect;
    let mut h = Tridiagonal::zeros(n);
    let signs = model.defect_signs();
    let damp = if f.co_driven {
        -f.gamma / w * (w * t - f.theta).sin()
    } else {
        0.0
    };
    for bond in 0..n - 1 {
        let d = lat.bond_length(bond);
        let peierls = C64::from_polar(lat.j_hop, phi * d);
        let s = signs[bond] - signs[bond + 1];
        let r = (damp * s).exp();
        h.upper[bond] = peierls * r;
        h.lower[bond] = peierls.conj() / r;
    }
    if !f.co_driven {
        let (gain, loss) = model.defect_sites();
        h.diag[gain] = C64::new(0.0, f.gamma);
        h.diag[loss] = C64::new(0.0, -f.gamma);
    }
    h
}

pub fn rotated_hamiltonian(model: &ModelConfig, t: f64) -> ComplexMatrix {
    rotated_hamiltonian_bands(model, t).to_dense()
}

pub fn framed_bands(model: &ModelConfig, frame: Frame, t: f64) -> Tridiagonal {
    match frame {
        Frame::Lab => hamiltonian_bands(model, t),
        Frame::Rotated => rotated_hamiltonian_bands(model, t),
    }
}

/// Largest relative violation of `H*(t0 + t) = H(t0 - t)` for the lab-frame
/// Hamiltonian over `n_samples` times in `(0, T/2]`.
pub fn time_reversal_residual(model: &ModelConfig, t0: f64, n_samples: usize) -> Result<f64> {
    if !model.defect.co_driven {
        return Err(Error::InvalidConfig(
            "time-reversal residual requires a co-driven defect pair".into(),
        ));
    }
    if n_samples < 2 {
        return Err(Error::InvalidConfig("n_samples must be at least 2".into()));
    }
    let half = model.period() / 2.0;
    let mut worst: f64 = 0.0;
    for s in 1..=n_samples {
        let t = half * s as f64 / n_samples as f64;
        let fwd = hamiltonian(model, t0 + t);
        let bwd = hamiltonian(model, t0 - t);
        let diff = fwd.conj().sub(&bwd)?.frobenius_norm();
        let norm = fwd.frobenius_norm();
        if norm > 0.0 {
            worst = worst.max(diff / norm);
        }
    }
    Ok(worst)
}

/// Reflection asymmetry of the amplitudes on even and on odd sites.
///
/// For a site class `S`, the residual is
/// `Σ_S (|ψ_n| − |ψ_{N+1−n}|)² / Σ_S (|ψ_n|² + |ψ_{N+1−n}|²)`, which is 0 for a
/// reflection-symmetric profile and 1 for a state on a single site.
pub fn hidden_symmetry_residual(state: &[C64], lattice: &LatticeSpec) -> Result<(f64, f64)> {
    let n = lattice.n_sites;
    if state.len() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: state.len(),
        });
    }
    if state.iter().all(|z| *z == ZERO) {
        return Err(Error::ZeroVector);
    }
    let mut num = [0.0f64; 2];
    let mut den = [0.0f64; 2];
    for i in 0..n {
        // 1-based site i+1 is even when i is odd.
        let class = if i % 2 == 1 { 0 } else { 1 };
        let p = state[i].norm();
        let q = state[n - 1 - i].norm();
        num[class] += (p - q).powi(2);
        den[class] += p * p + q * q;
    }
    let r = |k: usize| if den[k] > 0.0 { num[k] / den[k] } else { 0.0 };
    Ok((r(0), r(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_lengths_alternate() {
        let lat = LatticeSpec {
            n_sites: 5,
            a: 1.0,
            b: 2.0,
            j_hop: 1.0,
        };
        assert_eq!(lat.bond_length(0), 1.0);
        assert_eq!(lat.bond_length(1), 2.0);
    }
}
