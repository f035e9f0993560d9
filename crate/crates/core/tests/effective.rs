mod common;

use std::f64::consts::PI;

use common::{chain, co_driven};
use floquet_pt::effective::{
    bessel_i, bessel_j, cdt_ratios, double_drive_effective_chain, effective_spectrum, fold_into_zone,
    hf_effective_chain,
};
use floquet_pt::linalg::{C64, I, ONE, ZERO};
use proptest::prelude::*;

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Power series for J_l(z), l ≥ 0, at complex argument.
fn j_series(l: u32, z: C64) -> C64 {
    let mut sum = ZERO;
    let half = z / 2.0;
    for k in 0..80u32 {
        let term = half.powu(2 * k + l) / (factorial(k) * factorial(k + l));
        sum += if k % 2 == 0 { term } else { -term };
        if term.norm() < 1e-18 * sum.norm().max(1e-300) && k > 5 {
            break;
        }
    }
    sum
}

fn i_series(l: u32, x: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..120u32 {
        let term = (x / 2.0).powi((2 * k + l) as i32) / (factorial(k) * factorial(k + l));
        sum += term;
        if term < 1e-18 * sum && k > 5 {
            break;
        }
    }
    sum
}

/// Trapezoid rule on the periodic integral (1/2π)∫ cos(lθ − x sinθ) dθ.
fn j_quadrature(l: i64, x: f64) -> f64 {
    let n = 4096;
    (0..n)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / n as f64;
            (l as f64 * th - x * th.sin()).cos()
        })
        .sum::<f64>()
        / n as f64
}

#[test]
fn bessel_j_reference_values() {
    assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
    assert!(bessel_j(0, 2.404825557695773).unwrap().abs() < 1e-10);
    assert!((bessel_j(0, 2.0).unwrap() - 0.22389077914123567).abs() < 1e-13);
    assert!((bessel_j(0, 2.0).unwrap() - j_series(0, C64::new(2.0, 0.0)).re).abs() < 1e-14);
}

#[test]
fn bessel_i_reference_values() {
    assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
    let i0 = bessel_i(0, 1.0).unwrap();
    assert!((i0 - 1.2660658777520082).abs() < 1e-12 * i0);
    assert!((i0 - i_series(0, 1.0)).abs() < 1e-12 * i0);
}

#[test]
fn imaginary_argument_identity() {
    // J_2(-0.7i) = (-i)^2 I_2(0.7)
    let lhs = j_series(2, C64::new(0.0, -0.7));
    let rhs = (-I).powu(2) * bessel_i(2, 0.7).unwrap();
    assert!((lhs - rhs).norm() < 1e-12);
}

#[test]
fn bessel_j_matches_series_and_quadrature() {
    for l in 0..12u32 {
        for &x in &[0.01, 0.3, 1.0, 2.5, 4.0, 6.0] {
            let got = bessel_j(l as i64, x).unwrap();
            assert!((got - j_series(l, C64::new(x, 0.0)).re).abs() < 1e-13, "J_{l}({x})");
        }
        for &x in &[10.0, 25.0, 60.0, 99.0] {
            let got = bessel_j(l as i64, x).unwrap();
            assert!((got - j_quadrature(l as i64, x)).abs() < 1e-13, "J_{l}({x})");
        }
    }
    for &x in &[3.0, 40.0] {
        let got = bessel_j(150, x).unwrap();
        assert!((got - j_quadrature(150, x)).abs() < 1e-13);
    }
}

#[test]
fn bessel_i_matches_series() {
    for l in 0..15u32 {
        for &x in &[1e-3, 0.2, 1.0, 3.5, 10.0, 25.0, 50.0] {
            let got = bessel_i(l as i64, x).unwrap();
            let want = i_series(l, x);
            assert!((got - want).abs() <= 1e-12 * want.abs(), "I_{l}({x}): {got} vs {want}");
        }
    }
}

#[test]
fn negative_order_and_argument_symmetries() {
    for l in 0..6i64 {
        let s = if l % 2 == 0 { 1.0 } else { -1.0 };
        assert!((bessel_j(-l, 1.7).unwrap() - s * bessel_j(l, 1.7).unwrap()).abs() < 1e-15);
        assert!((bessel_j(l, -1.7).unwrap() - s * bessel_j(l, 1.7).unwrap()).abs() < 1e-15);
        assert_eq!(bessel_i(-l, 0.9).unwrap(), bessel_i(l, 0.9).unwrap());
    }
}

#[test]
fn hf_chain_without_drive_is_uniform() {
    let c = hf_effective_chain(&chain(10, 5.0, 0.0, 2, 0.0)).unwrap();
    assert!(c.hoppings.iter().all(|&h| h == ONE));
    assert!(c.onsite.iter().all(|&o| o == ZERO));
}

#[test]
fn hf_chain_couplings_at_ratio_two() {
    let c = hf_effective_chain(&chain(8, 20.0, 2.0, 1, 0.3)).unwrap();
    assert!((c.hoppings[0].re - 0.22389077914123567).abs() < 1e-13);
    assert!((c.hoppings[1].re + 0.39714980986384735).abs() < 1e-13);
    assert_eq!(c.onsite[0], C64::new(0.0, 0.3));
    assert_eq!(c.onsite[7], C64::new(0.0, -0.3));
}

#[test]
fn hf_chain_intra_cell_cdt() {
    let c = hf_effective_chain(&chain(8, 20.0, 2.404825557695773, 1, 0.0)).unwrap();
    assert!(c.hoppings[0].norm() < 1e-10);
    assert!(c.hoppings[1].norm() > 0.1);
}

#[test]
fn hf_chain_rejects_co_driven() {
    assert!(hf_effective_chain(&co_driven(chain(8, 20.0, 2.0, 1, 0.3), 0.0)).is_err());
}

#[test]
fn double_drive_chain_reduces_without_defect() {
    let base = chain(12, 20.0, 1.7, 3, 0.0);
    let dd = double_drive_effective_chain(&co_driven(base, 0.0), None).unwrap();
    let hf = hf_effective_chain(&base).unwrap();
    assert_eq!(dd.hoppings, hf.hoppings);
}

#[test]
fn double_drive_chain_without_drive() {
    let m = co_driven(chain(12, 4.0, 0.0, 3, 1.2), 0.0);
    let c = double_drive_effective_chain(&m, None).unwrap();
    let i0 = bessel_i(0, 0.3).unwrap();
    // Bonds touching site 3 and site 10 (1-based bonds 2, 3, 9, 10).
    for (bond, h) in c.hoppings.iter().enumerate() {
        let want = if [1, 2, 8, 9].contains(&bond) { i0 } else { 1.0 };
        assert!((h.re - want).abs() < 1e-14, "bond {}", bond + 1);
        assert_eq!(h.im, 0.0);
    }
}

#[test]
fn double_drive_chain_rejects_nonzero_theta() {
    let m = co_driven(chain(12, 4.0, 1.0, 3, 1.2), 0.3);
    assert!(double_drive_effective_chain(&m, None).is_err());
    assert!(double_drive_effective_chain(&chain(12, 4.0, 1.0, 3, 1.2), None).is_err());
}

#[test]
fn double_drive_chain_is_hermitian_with_real_spectrum() {
    for gamma in [0.5, 1.0, 5.0, 20.0] {
        let m = co_driven(chain(60, 20.0, 2.0, 2, gamma), 0.0);
        let c = double_drive_effective_chain(&m, None).unwrap();
        let h = c.matrix();
        assert_eq!(h, h.adjoint());
        let e = effective_spectrum(&c).unwrap();
        assert!(e.iter().all(|v| v.im.abs() < 1e-12));
    }
}

#[test]
fn double_drive_series_truncation_is_stable() {
    let m = co_driven(chain(20, 10.0, 2.5, 4, 3.0), 0.0);
    let a = double_drive_effective_chain(&m, Some(20)).unwrap();
    let b = double_drive_effective_chain(&m, Some(40)).unwrap();
    for (x, y) in a.hoppings.iter().zip(&b.hoppings) {
        assert!((x - y).norm() <= 1e-13);
    }
    assert!(double_drive_effective_chain(&m, Some(1)).is_err());
}

#[test]
fn uniform_chain_spectrum_closed_form() {
    let n = 11;
    let c = hf_effective_chain(&chain(n, 5.0, 0.0, 1, 0.0)).unwrap();
    let e = effective_spectrum(&c).unwrap();
    let mut want: Vec<f64> = (1..=n).map(|m| 2.0 * (m as f64 * PI / (n as f64 + 1.0)).cos()).collect();
    want.sort_by(f64::total_cmp);
    for (got, w) in e.iter().zip(want) {
        assert!((got - w).norm() < 1e-12);
    }
}

#[test]
fn topological_chain_has_exponentially_small_edge_pair() {
    for n in [20, 40] {
        let c = hf_effective_chain(&chain(n, 20.0, 2.0, 1, 0.0)).unwrap();
        let e = effective_spectrum(&c).unwrap();
        let mut mags: Vec<f64> = e.iter().map(|v| v.norm()).collect();
        mags.sort_by(f64::total_cmp);
        assert!(mags[1] < 1e-3 && mags[2] > 0.05, "N = {n}: {mags:?}");
    }
}

#[test]
fn cdt_ratios_match_bessel_zeros() {
    let r = cdt_ratios(1.0, 2.0, 3.2).unwrap();
    let want = [2.404825557695773 / 2.0, 2.404825557695773, 5.520078110286311 / 2.0];
    assert_eq!(r.len(), 3);
    for (a, b) in r.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn folding_into_zone() {
    let t = 2.0 * PI / 2.0;
    assert!((fold_into_zone(C64::new(1.5, 0.2), t) - C64::new(-0.5, 0.2)).norm() < 1e-15);
    assert!((fold_into_zone(C64::new(-1.0, 0.0), t).re - 1.0).abs() < 1e-15);
    assert!((fold_into_zone(C64::new(0.3, 0.0), t).re - 0.3).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alternating_and_plain_series_agree(z in -8.0f64..8.0, y in 0.0f64..5.0) {
        // Odd-l terms cancel pairwise, so the alternating series equals the plain one.
        let mut alt = 0.0;
        let mut plain = 0.0;
        for l in -60i64..=60 {
            let t = bessel_j(l, z).unwrap() * bessel_i(l, y).unwrap();
            plain += t;
            alt += if l % 2 == 0 { t } else { -t };
        }
        prop_assert!((alt - plain).abs() < 1e-12 * plain.abs().max(1.0));
    }

    #[test]
    fn j_normalization_identity(x in -100.0f64..100.0) {
        let mut s = bessel_j(0, x).unwrap();
        for k in 1..=100 {
            s += 2.0 * bessel_j(2 * k, x).unwrap();
        }
        prop_assert!((s - 1.0).abs() < 1e-12);
    }
}
