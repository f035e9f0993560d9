use super::lu::Lu;
use super::matrix::{mat_mul, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Largest ‖scale·m‖₁ accepted by [`mat_exp`]; beyond this the result overflows
/// or loses all relative accuracy.
pub const EXP_NORM_LIMIT: f64 = 700.0;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// `exp(scale * m)` by scaling and squaring with a degree-13 Padé approximant.
pub fn mat_exp(m: &ComplexMatrix, scale: C64) -> Result<ComplexMatrix> {
    if !m.is_finite() || !scale.re.is_finite() || !scale.im.is_finite() {
        return Err(Error::NonFinite("mat_exp input"));
    }
    let a = m.scaled(scale);
    let n = a.dim();
    let norm = a.norm1();
    if norm > EXP_NORM_LIMIT {
        return Err(Error::NormOutOfRange {
            norm,
            limit: EXP_NORM_LIMIT,
        });
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scaled(C64::new(0.5f64.powi(squarings), 0.0));

    let b = &PADE13;
    let a2 = mat_mul(&a, &a)?;
    let a4 = mat_mul(&a2, &a2)?;
    let a6 = mat_mul(&a2, &a4)?;

    let re = |x: f64| C64::new(x, 0.0);

    let mut inner_u = a6.scaled(re(b[13]));
    inner_u.axpy(re(b[11]), &a4);
    inner_u.axpy(re(b[9]), &a2);
    let mut u = mat_mul(&a6, &inner_u)?;
    u.axpy(re(b[7]), &a6);
    u.axpy(re(b[5]), &a4);
    u.axpy(re(b[3]), &a2);
    u.add_identity(re(b[1]));
    let u = mat_mul(&a, &u)?;

    let mut inner_v = a6.scaled(re(b[12]));
    inner_v.axpy(re(b[10]), &a4);
    inner_v.axpy(re(b[8]), &a2);
    let mut v = mat_mul(&a6, &inner_v)?;
    v.axpy(re(b[6]), &a6);
    v.axpy(re(b[4]), &a4);
    v.axpy(re(b[2]), &a2);
    v.add_identity(re(b[0]));

    let p = v.add(&u)?;
    let q = v.sub(&u)?;
    let mut r = Lu::new(&q)?.solve(&p);
    for _ in 0..squarings {
        r = mat_mul(&r, &r)?;
    }
    debug_assert_eq!(r.dim(), n);
    if !r.is_finite() {
        return Err(Error::NonFinite("mat_exp result"));
    }
    Ok(r)
}
