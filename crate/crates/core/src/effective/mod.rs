mod bessel;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use bessel::{bessel_i, bessel_j, bessel_j0_zeros, I_ARG_LIMIT, J_ARG_LIMIT, MAX_ORDER};

use crate::error::{Error, Result};
use crate::lattice::ModelConfig;
use crate::linalg::{eig_general, ComplexMatrix, Tridiagonal, C64, ZERO};

/// Time-independent tight-binding chain with Hermitian hopping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveChain {
    pub n_sites: usize,
    /// Upper off-diagonal; the lower one is its conjugate.
    pub hoppings: Vec<C64>,
    pub onsite: Vec<C64>,
}

impl EffectiveChain {
    pub fn bands(&self) -> Tridiagonal {
        Tridiagonal {
            diag: self.onsite.clone(),
            upper: self.hoppings.clone(),
            lower: self.hoppings.iter().map(|h| h.conj()).collect(),
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.bands().to_dense()
    }
}

/// Zeroth-order high-frequency chain: odd bonds `J·J₀(A·a/ω)`, even bonds
/// `J·J₀(A·b/ω)`, with the defect pair on the diagonal.
pub fn hf_effective_chain(model: &ModelConfig) -> Result<EffectiveChain> {
    if model.defect.co_driven {
        return Err(Error::InvalidConfig(
            "high-frequency chain needs a static defect pair".into(),
        ));
    }
    let lat = &model.lattice;
    let n = lat.n_sites;
    let ratio = model.drive.amplitude / model.drive.omega;
    let j1 = lat.j_hop * bessel_j(0, ratio * lat.a)?;
    let j2 = lat.j_hop * bessel_j(0, ratio * lat.b)?;
    let hoppings = (0..n - 1)
        .map(|bond| C64::new(if bond % 2 == 0 { j1 } else { j2 }, 0.0))
        .collect();
    let mut onsite = vec![ZERO; n];
    let (gain, loss) = model.defect_sites();
    onsite[gain] = C64::new(0.0, model.defect.gamma);
    onsite[loss] = C64::new(0.0, -model.defect.gamma);
    Ok(EffectiveChain {
        n_sites: n,
        hoppings,
        onsite,
    })
}

pub const SERIES_TERM_TOL: f64 = 1e-14;
pub const SERIES_CAP: usize = 80;

/// `Σ_{l=-L..L} J_l(z)·I_l(y)`; with `l_max = None` the cutoff grows until the
/// outermost pair of terms drops below [`SERIES_TERM_TOL`], capped at [`SERIES_CAP`].
fn bessel_product_series(z: f64, y: f64, l_max: Option<usize>, bond: usize) -> Result<f64> {
    let cap = l_max.unwrap_or(SERIES_CAP);
    let mut sum = bessel_j(0, z)? * bessel_i(0, y)?;
    let mut last = sum.abs();
    for l in 1..=cap as i64 {
        let plus = bessel_j(l, z)? * bessel_i(l, y)?;
        let minus = bessel_j(-l, z)? * bessel_i(-l, y)?;
        sum += plus + minus;
        last = plus.abs().max(minus.abs());
        if l_max.is_none() && last < SERIES_TERM_TOL {
            return Ok(sum);
        }
    }
    if last >= SERIES_TERM_TOL {
        return Err(Error::SeriesNotConverged {
            bond,
            l_max: cap,
            partial: sum,
            last_term: last,
        });
    }
    Ok(sum)
}

/// Zeroth-order chain for the co-driven defect pair at `θ = 0`.
///
/// Bond `n` has `K'_n = J·Σ_l J_l(A·d_n/ω)·I_l(s_n·γ/ω)` with
/// `s_n = D_n − D_{n+1}` (`D = +1` on the gain site, `−1` on the loss site).
/// Bonds away from the defects have `s_n = 0` and reduce to `J·J₀(A·d_n/ω)`.
pub fn double_drive_effective_chain(model: &ModelConfig, l_max: Option<usize>) -> Result<EffectiveChain> {
    if !model.defect.co_driven {
        return Err(Error::InvalidConfig("double-drive chain needs a co-driven defect pair".into()));
    }
    if model.defect.theta != 0.0 {
        return Err(Error::InvalidConfig(
            "double-drive effective chain is only available for theta = 0".into(),
        ));
    }
    if l_max == Some(0) {
        return Err(Error::InvalidConfig("l_max must be at least 1".into()));
    }
    let lat = &model.lattice;
    let n = lat.n_sites;
    let w = model.drive.omega;
    let ratio = model.drive.amplitude / w;
    let y = model.defect.gamma / w;
    let (gain, loss) = model.defect_sites();
    let d = |site: usize| {
        if site == gain {
            1.0
        } else if site == loss {
            -1.0
        } else {
            0.0
        }
    };
    let mut hoppings = Vec::with_capacity(n - 1);
    for bond in 0..n - 1 {
        let z = ratio * lat.bond_length(bond);
        let s = d(bond) - d(bond + 1);
        let k = if s == 0.0 {
            bessel_j(0, z)?
        } else {
            bessel_product_series(z, s * y, l_max, bond + 1)?
        };
        hoppings.push(C64::new(lat.j_hop * k, 0.0));
    }
    Ok(EffectiveChain {
        n_sites: n,
        hoppings,
        onsite: vec![ZERO; n],
    })
}

/// Eigenvalues of the chain, sorted by ascending real part.
pub fn effective_spectrum(chain: &EffectiveChain) -> Result<Vec<C64>> {
    Ok(eig_general(&chain.matrix())?.values)
}

/// Folds an energy into the quasienergy zone `(−π/T, π/T]`.
pub fn fold_into_zone(e: C64, period: f64) -> C64 {
    let w = 2.0 * PI / period;
    let mut re = (e.re + PI / period).rem_euclid(w) - PI / period;
    if re <= -PI / period {
        re += w;
    }
    C64::new(re, e.im)
}

/// Drive ratios `A/ω ≤ max_ratio` at which an intra-cell (`J₀(r·a) = 0`) or
/// inter-cell (`J₀(r·b) = 0`) hopping vanishes, ascending.
pub fn cdt_ratios(a: f64, b: f64, max_ratio: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for d in [a, b] {
        for z in bessel_j0_zeros(max_ratio * d)? {
            out.push(z / d);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}
