use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= scale * f64::EPSILON * 1e-3 {
                return Err(Error::Singular);
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.dim();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = b.dim();
        let mut out = ComplexMatrix::zeros(n);
        for j in 0..n {
            let col = self.solve_vec(&b.column(j));
            out.set_column(j, &col);
        }
        out
    }
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(Lu::new(a)?.solve(&ComplexMatrix::identity(a.dim())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mat_mul;

    #[test]
    fn inverse_roundtrip() {
        let a = ComplexMatrix::from_fn(4, |i, j| {
            C64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3)
        });
        let inv = inverse(&a).unwrap();
        let p = mat_mul(&a, &inv).unwrap();
        assert!(p.sub(&ComplexMatrix::identity(4)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let a = ComplexMatrix::from_fn(3, |i, _| C64::new(i as f64, 0.0));
        assert_eq!(inverse(&a).unwrap_err(), Error::Singular);
    }
}
