use super::lu::inverse;
use super::matrix::{vec_norm, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Eigenvector condition number above which a result is flagged near-defective.
pub const NEAR_DEFECTIVE_COND: f64 = 1e8;

/// Residual bound relative to ‖M‖_F.
pub const RESIDUAL_BOUND: f64 = 1e-10;

const MAX_SWEEPS_PER_VALUE: usize = 60;

#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<C64>,
    /// Column `j` is the unit right eigenvector of `values[j]`.
    pub vectors: ComplexMatrix,
    pub residuals: Vec<f64>,
    pub condition: f64,
    pub near_defective: bool,
}

impl Eigensystem {
    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.vectors.column(j)
    }
}

fn abs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Indices that order `values` by ascending real part; values whose real parts
/// lie within `tol` of the first member of their run are ordered by imaginary part.
pub fn sort_order(values: &[C64], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re).then(a.cmp(&b)));
    let mut start = 0;
    while start < idx.len() {
        let anchor = values[idx[start]].re;
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]].re - anchor <= tol {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| {
            values[a]
                .im
                .total_cmp(&values[b].im)
                .then(values[a].re.total_cmp(&values[b].re))
                .then(a.cmp(&b))
        });
        start = end;
    }
    idx
}

/// Householder reduction to upper Hessenberg form; returns `(H, Q)` with `M = Q H Q†`.
fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.dim();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = vec_norm(&v);
        if alpha == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { ONE };
        v[0] += phase * alpha;
        let vn = vec_norm(&v);
        for z in v.iter_mut() {
            *z /= vn;
        }
        // H <- (I - 2 v v†) H
        for j in 0..n {
            let mut s = ZERO;
            for (r, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + r, j)];
            }
            s *= 2.0;
            for (r, vi) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= vi * s;
            }
        }
        // H <- H (I - 2 v v†), Q <- Q (I - 2 v v†)
        for target in [&mut h, &mut q] {
            for i in 0..n {
                let mut s = ZERO;
                for (r, vi) in v.iter().enumerate() {
                    s += target[(i, k + 1 + r)] * vi;
                }
                s *= 2.0;
                for (r, vi) in v.iter().enumerate() {
                    target[(i, k + 1 + r)] -= s * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Givens pair `(c, s)` with `[c s; -s̄ c] [x; y] = [r; 0]`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

/// Reduces Hessenberg `h` to upper triangular Schur form in place, accumulating into `z`.
fn schur(h: &mut ComplexMatrix, z: &mut ComplexMatrix, hash: u64) -> Result<()> {
    let n = h.dim();
    if n < 2 {
        return Ok(());
    }
    let norm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let cap = MAX_SWEEPS_PER_VALUE * n;
    loop {
        // Find the start of the active unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = abs1(h[(lo, lo - 1)]);
            let mut diag = abs1(h[(lo - 1, lo - 1)]) + abs1(h[(lo, lo)]);
            if diag == 0.0 {
                diag = norm;
            }
            if sub <= f64::EPSILON * diag || sub <= f64::MIN_POSITIVE * n as f64 {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            if hi == 0 {
                break;
            }
            hi -= 1;
            iter = 0;
            continue;
        }
        total += 1;
        iter += 1;
        if total > cap {
            return Err(Error::EigenNoConvergence {
                iterations: total,
                hash,
            });
        }

        let shift = if iter % 11 == 0 {
            h[(hi, hi)] + C64::new(0.75 * abs1(h[(hi, hi - 1)]), 0.0)
        } else if iter % 23 == 0 {
            h[(hi, hi)] + C64::new(0.0, abs1(h[(hi, hi - 1)]))
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let mean = (a + d) * 0.5;
            let l1 = mean + disc;
            let l2 = mean - disc;
            if (l1 - d).norm() <= (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };

        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            let (c, s) = givens(x, y);
            let col0 = if k > lo { k - 1 } else { lo };
            for j in col0..n {
                let p = h[(k, j)];
                let q = h[(k + 1, j)];
                h[(k, j)] = p * c + s * q;
                h[(k + 1, j)] = -s.conj() * p + q * c;
            }
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * c + q * s.conj();
                h[(i, k + 1)] = -p * s + q * c;
            }
            for i in 0..n {
                let p = z[(i, k)];
                let q = z[(i, k + 1)];
                z[(i, k)] = p * c + q * s.conj();
                z[(i, k + 1)] = -p * s + q * c;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    Ok(())
}

/// Full right eigensystem of a general complex matrix, sorted by ascending
/// real part (ties by imaginary part).
pub fn eig_general(m: &ComplexMatrix) -> Result<Eigensystem> {
    if !m.is_finite() {
        return Err(Error::NonFinite("eig_general input"));
    }
    let n = m.dim();
    let hash = m.fingerprint();
    let (mut t, mut z) = hessenberg(m);
    schur(&mut t, &mut z, hash)?;

    let tnorm = t.frobenius_norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut y = ComplexMatrix::zeros(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for p in j + 1..=k {
                s += t[(j, p)] * y[(p, k)];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            y[(j, k)] = -s / d;
        }
    }
    let mut vecs = super::mat_mul(&z, &y)?;
    for k in 0..n {
        let mut col = vecs.column(k);
        let nv = vec_norm(&col);
        if nv == 0.0 || !nv.is_finite() {
            return Err(Error::EigenNoConvergence { iterations: 0, hash });
        }
        for c in col.iter_mut() {
            *c /= nv;
        }
        vecs.set_column(k, &col);
    }

    let values_raw: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let scale = values_raw.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let order = sort_order(&values_raw, 1e-12 * scale);
    let values: Vec<C64> = order.iter().map(|&k| values_raw[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &vecs.column(src));
    }

    let mnorm = m.frobenius_norm();
    let bound = RESIDUAL_BOUND * mnorm.max(f64::MIN_POSITIVE);
    let mut residuals = Vec::with_capacity(n);
    for (j, &lambda) in values.iter().enumerate() {
        let v = vectors.column(j);
        let mv = m.matvec(&v)?;
        let r: Vec<C64> = mv.iter().zip(&v).map(|(a, b)| a - lambda * b).collect();
        let res = vec_norm(&r);
        if res > bound {
            return Err(Error::EigenResidual { residual: res, bound });
        }
        residuals.push(res);
    }

    let condition = match inverse(&vectors) {
        Ok(inv) => vectors.norm1() * inv.norm1(),
        Err(_) => f64::INFINITY,
    };
    Ok(Eigensystem {
        values,
        vectors,
        residuals,
        condition,
        near_defective: !(condition <= NEAR_DEFECTIVE_COND),
    })
}
