use super::matrix::{ComplexMatrix, C64, ZERO};

/// Tridiagonal matrix stored by its three bands.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<C64>,
    /// `upper[n]` is entry `(n, n+1)`.
    pub upper: Vec<C64>,
    /// `lower[n]` is entry `(n+1, n)`.
    pub lower: Vec<C64>,
}

impl Tridiagonal {
    pub fn zeros(dim: usize) -> Self {
        Self {
            diag: vec![ZERO; dim],
            upper: vec![ZERO; dim.saturating_sub(1)],
            lower: vec![ZERO; dim.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for i in 0..n.saturating_sub(1) {
            m[(i, i + 1)] = self.upper[i];
            m[(i + 1, i)] = self.lower[i];
        }
        m
    }

    /// `a * self + b * other`, both of the same dimension.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mix = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| p * a + q * b).collect();
        Self {
            diag: mix(&self.diag, &other.diag),
            upper: mix(&self.upper, &other.upper),
            lower: mix(&self.lower, &other.lower),
        }
    }

    pub fn norm1(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|j| {
                let mut s = self.diag[j].norm();
                if j > 0 {
                    s += self.upper[j - 1].norm();
                }
                if j + 1 < n {
                    s += self.lower[j].norm();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.diag
            .iter()
            .chain(&self.upper)
            .chain(&self.lower)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `out = s * self * x` for a row-major block `x` of `cols` columns.
    fn apply_block(&self, s: C64, x: &[C64], out: &mut [C64], cols: usize) {
        let n = self.dim();
        for i in 0..n {
            let row = &mut out[i * cols..(i + 1) * cols];
            let d = s * self.diag[i];
            let xi = &x[i * cols..(i + 1) * cols];
            for (o, &v) in row.iter_mut().zip(xi) {
                *o = d * v;
            }
            if i + 1 < n {
                let u = s * self.upper[i];
                let xn = &x[(i + 1) * cols..(i + 2) * cols];
                for (o, &v) in row.iter_mut().zip(xn) {
                    *o += u * v;
                }
            }
            if i > 0 {
                let l = s * self.lower[i - 1];
                let xp = &x[(i - 1) * cols..i * cols];
                for (o, &v) in row.iter_mut().zip(xp) {
                    *o += l * v;
                }
            }
        }
    }

    /// Replaces `x` (row-major, `dim` rows) by `exp(s * self) * x` using a
    /// scaled Taylor series.
    pub fn exp_apply(&self, s: C64, x: &mut [C64]) {
        let n = self.dim();
        if n == 0 {
            return;
        }
        let cols = x.len() / n;
        let norm = self.norm1() * s.norm();
        let substeps = (norm / 0.5).ceil().max(1.0) as usize;
        let h = s / substeps as f64;
        let mut term = vec![ZERO; x.len()];
        let mut next = vec![ZERO; x.len()];
        for _ in 0..substeps {
            term.copy_from_slice(x);
            let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let mut small = 0;
            for k in 1..60 {
                self.apply_block(h / k as f64, &term, &mut next, cols);
                std::mem::swap(&mut term, &mut next);
                let mut tmax: f64 = 0.0;
                for (xv, tv) in x.iter_mut().zip(&term) {
                    *xv += tv;
                    tmax = tmax.max(tv.norm());
                }
                if tmax <= scale * 1e-18 {
                    small += 1;
                    if small == 2 {
                        break;
                    }
                } else {
                    small = 0;
                }
            }
        }
    }

    pub fn exp_apply_matrix(&self, s: C64, m: &mut ComplexMatrix) {
        self.exp_apply(s, m.as_mut_slice());
    }
}
