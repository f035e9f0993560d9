use crate::error::{Error, Result};

pub const MAX_ORDER: i64 = 200;
pub const J_ARG_LIMIT: f64 = 100.0;
pub const I_ARG_LIMIT: f64 = 50.0;

const RESCALE: f64 = 1e250;

fn check(l: i64, x: f64, limit: f64, name: &str) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::NonFinite("Bessel argument"));
    }
    if l.abs() > MAX_ORDER || x.abs() > limit {
        return Err(Error::OutOfEnvelope(format!(
            "{name}(l = {l}, x = {x}) outside |l| <= {MAX_ORDER}, |x| <= {limit}"
        )));
    }
    Ok(())
}

fn start_index(l: usize, x: f64) -> usize {
    let m = (l as f64).max(x);
    let start = m as usize + 40 + (8.0 * m.sqrt()) as usize;
    start + start % 2
}

/// Bessel function of the first kind `J_l(x)` by Miller's backward recurrence,
/// normalized with `J₀ + 2 Σ J₂ₖ = 1`.
pub fn bessel_j(l: i64, x: f64) -> Result<f64> {
    check(l, x, J_ARG_LIMIT, "bessel_j")?;
    let n = l.unsigned_abs() as usize;
    // J_{-l}(x) = (-1)^l J_l(x) and J_l(-x) = (-1)^l J_l(x).
    let mut sign = 1.0;
    if l < 0 && n % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && n % 2 == 1 {
        sign = -sign;
    }
    let x = x.abs();
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let top = start_index(n, x);
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    let mut value = 0.0;
    for k in (1..=top).rev() {
        // cur = J_k, next = J_{k+1}
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if k - 1 == n {
            value = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            norm /= RESCALE;
            value /= RESCALE;
        }
    }
    norm += cur;
    Ok(sign * value / norm)
}

/// Modified Bessel function `I_l(x)` by backward recurrence, normalized with
/// `I₀ + 2 Σ Iₖ = eˣ`.
pub fn bessel_i(l: i64, x: f64) -> Result<f64> {
    check(l, x, I_ARG_LIMIT, "bessel_i")?;
    let n = l.unsigned_abs() as usize;
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let x = x.abs();
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let top = start_index(n, x);
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    let mut value = 0.0;
    for k in (1..=top).rev() {
        let prev = 2.0 * k as f64 / x * cur + next;
        next = cur;
        cur = prev;
        if k - 1 == n {
            value = cur;
        }
        if k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            norm /= RESCALE;
            value /= RESCALE;
        }
    }
    norm += cur;
    Ok(sign * value / norm * x.exp())
}

/// Positive zeros of `J₀` below `x_max`, located by sign changes and bisection.
pub fn bessel_j0_zeros(x_max: f64) -> Result<Vec<f64>> {
    let mut zeros = Vec::new();
    let step = 0.05;
    let mut lo = step;
    let mut f_lo = bessel_j(0, lo)?;
    while lo < x_max {
        let hi = (lo + step).min(x_max);
        let f_hi = bessel_j(0, hi)?;
        if f_lo == 0.0 {
            zeros.push(lo);
        } else if f_lo * f_hi < 0.0 {
            let (mut a, mut b) = (lo, hi);
            let mut fa = f_lo;
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                let fm = bessel_j(0, m)?;
                if fm == 0.0 || b - a < 1e-15 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(zeros)
}
