mod common;

use common::chain;
use floquet_pt::floquet::{converged_spectrum, FloquetSpectrum};
use floquet_pt::lattice::hidden_symmetry_residual;
use floquet_pt::linalg::{ComplexMatrix, C64, ONE, ZERO};
use floquet_pt::spectral::{
    find_threshold, find_threshold_by, gamma_total, ipr, sigma_p_trace, zero_modes, Side, ThresholdOptions,
    ThresholdStatus, ZeroModeOptions,
};
use floquet_pt::{Error, Frame};

fn spectrum_from(values: Vec<C64>) -> FloquetSpectrum {
    let n = values.len();
    FloquetSpectrum {
        multipliers: values.clone(),
        quasienergies: values,
        modes: ComplexMatrix::identity(n),
        tau: 0.0,
        period: 1.0,
        n_steps: 16,
        converged: true,
        drift: 0.0,
        near_defective: false,
    }
}

#[test]
fn ipr_examples() {
    let mut single = vec![ZERO; 9];
    single[4] = C64::new(0.0, 2.0);
    assert!((ipr(&single).unwrap() - 1.0).abs() < 1e-15);
    let uniform = vec![C64::new(0.3, 0.0); 12];
    assert!((ipr(&uniform).unwrap() - 1.0 / 12.0).abs() < 1e-15);
    let mut pair = vec![ZERO; 5];
    pair[0] = ONE;
    pair[3] = -ONE;
    assert!((ipr(&pair).unwrap() - 0.5).abs() < 1e-15);
    assert!(matches!(ipr(&[ZERO; 3]), Err(Error::ZeroVector)));
}

#[test]
fn gamma_total_examples() {
    let real = spectrum_from(vec![C64::new(-1.0, 0.0), C64::new(0.5, 0.0)]);
    assert_eq!(gamma_total(&real), 0.0);
    let pair = spectrum_from(vec![C64::new(0.0, -0.3), C64::new(0.0, 0.3), C64::new(1.0, 0.0)]);
    assert!((gamma_total(&pair) - 0.6).abs() < 1e-15);
}

#[test]
fn gamma_total_positive_above_threshold() {
    let m = chain(60, 20.0, 2.0, 2, 0.5);
    let s = converged_spectrum(&m, Frame::Rotated, 0.0, 1e-10, 1 << 20).unwrap();
    assert!(gamma_total(&s) > 0.1);
}

#[test]
fn threshold_zero_for_first_site() {
    let r = find_threshold(&chain(60, 20.0, 2.0, 1, 0.0), &ThresholdOptions::default()).unwrap();
    assert_eq!(r.status, ThresholdStatus::Zero);
    assert_eq!(r.gamma_c, 0.0);
    assert!(r.bracket.1 <= 1e-3);
}

#[test]
fn threshold_found_in_trivial_phase() {
    let r = find_threshold(&chain(60, 20.0, 3.0, 1, 0.0), &ThresholdOptions::default()).unwrap();
    assert_eq!(r.status, ThresholdStatus::Found);
    assert!(r.gamma_c > 0.0);
    assert!(r.bracket.1 - r.bracket.0 <= 1e-3);
    assert!(r.gamma_total_at_bracket.0 <= r.cutoff && r.gamma_total_at_bracket.1 > r.cutoff);
}

#[test]
fn threshold_search_logic() {
    let opts = ThresholdOptions::default();
    // Synthetic order parameter with onset at 0.4567.
    let r = find_threshold_by(|g| Ok(if g > 0.4567 { g - 0.4567 } else { 0.0 }), &opts).unwrap();
    assert_eq!(r.status, ThresholdStatus::Found);
    assert!((r.gamma_c - 0.4567).abs() <= 1e-3);
    assert!(r.bracket.0 <= 0.4567 && r.bracket.1 > 0.4567);
    // Onset between refine_tol and the first coarse point.
    let r = find_threshold_by(|g| Ok(if g > 0.01 { 1.0 } else { 0.0 }), &opts).unwrap();
    assert_eq!(r.status, ThresholdStatus::Found);
    assert!((r.gamma_c - 0.01).abs() <= 1e-3);
    // Broken everywhere.
    let r = find_threshold_by(|_| Ok(1.0), &opts).unwrap();
    assert_eq!(r.status, ThresholdStatus::Zero);
    // Never broken.
    let r = find_threshold_by(|_| Ok(0.0), &opts).unwrap();
    assert_eq!(r.status, ThresholdStatus::UnbrokenUpToMax);
    assert!((r.gamma_max_probed - 2.0).abs() < 1e-12);
    // Re-entrant breaking: the first onset is reported.
    let r = find_threshold_by(|g| Ok(if (0.3..0.5).contains(&g) || g > 1.0 { 1.0 } else { 0.0 }), &opts).unwrap();
    assert!((r.gamma_c - 0.3).abs() <= 1e-3);
    // Errors propagate.
    assert!(find_threshold_by(|_| Err(Error::Singular), &opts).is_err());
    let bad = ThresholdOptions {
        coarse_step: 1e-4,
        ..opts
    };
    assert!(find_threshold_by(|_| Ok(0.0), &bad).is_err());
}

#[test]
fn no_zero_modes_in_trivial_phase() {
    let m = chain(60, 20.0, 3.0, 1, 0.0);
    let s = converged_spectrum(&m, Frame::Rotated, 0.0, 1e-10, 1 << 20).unwrap();
    assert!(zero_modes(&m, &s, &ZeroModeOptions::defaults_for(&m)).unwrap().is_empty());
}

#[test]
fn defect_free_pair_is_split_into_sublattice_modes() {
    let m = chain(60, 20.0, 2.0, 1, 0.0);
    let s = converged_spectrum(&m, Frame::Rotated, 0.0, 1e-10, 1 << 20).unwrap();
    let zm = zero_modes(&m, &s, &ZeroModeOptions::defaults_for(&m)).unwrap();
    assert_eq!(zm.len(), 2);
    assert_eq!(zm[0].side, Side::Left);
    assert_eq!(zm[1].side, Side::Right);
    assert!(zm[0].diagnostics.left_weight > 0.999);
    assert!(zm[0].diagnostics.even_weight < 1e-20);
    assert!(zm[1].diagnostics.even_weight > 1.0 - 1e-12);
}

#[test]
fn odd_chain_has_single_left_zero_mode() {
    let m = chain(61, 20.0, 2.0, 1, 0.0);
    let s = converged_spectrum(&m, Frame::Rotated, 0.0, 1e-10, 1 << 20).unwrap();
    let zm = zero_modes(&m, &s, &ZeroModeOptions::defaults_for(&m)).unwrap();
    assert_eq!(zm.len(), 1);
    assert_eq!(zm[0].side, Side::Left);
}

#[test]
fn sigma_p_high_frequency_start_and_bounds() {
    let m = chain(60, 20.0, 2.0, 1, 0.0);
    let tr = sigma_p_trace(&m, 33).unwrap();
    assert_eq!(tr.times.len(), 33);
    assert!(tr.sigma_p[0] < 1e-6);
    assert!(tr.sigma_p.iter().all(|&p| (0.0..=1.0).contains(&p)));
    assert!((tr.times[32] - m.period()).abs() < 1e-12);
}

#[test]
fn sigma_p_low_frequency_peaks_between_chiral_times() {
    let m = chain(60, 1.0, 2.0, 1, 0.0);
    let tr = sigma_p_trace(&m, 33).unwrap();
    assert!(tr.sigma_p[0] < 1e-4 && tr.sigma_p[16] < 1e-4);
    assert!(tr.sigma_p.iter().cloned().fold(0.0, f64::max) > 1e-2);
}

#[test]
fn sigma_p_refinement_invariance() {
    let m = chain(40, 2.0, 2.0, 1, 0.0);
    let coarse = sigma_p_trace(&m, 17).unwrap();
    let fine = sigma_p_trace(&m, 33).unwrap();
    for (i, p) in coarse.sigma_p.iter().enumerate() {
        assert!((p - fine.sigma_p[2 * i]).abs() < 1e-8, "sample {i}");
    }
}

#[test]
fn sigma_p_rejects_invalid_models() {
    assert!(sigma_p_trace(&chain(60, 20.0, 2.0, 1, 0.1), 32).is_err());
    assert!(sigma_p_trace(&chain(61, 20.0, 2.0, 1, 0.0), 32).is_err());
    assert!(sigma_p_trace(&chain(60, 20.0, 2.0, 1, 0.0), 8).is_err());
    let err = sigma_p_trace(&chain(60, 20.0, 3.0, 1, 0.0), 32).unwrap_err();
    assert!(matches!(err, Error::NoZeroMode(ref msg) if msg.contains("trivial")));
}

#[test]
fn odd_chain_ground_state_has_even_site_reflection_symmetry() {
    let m = chain(61, 20.0, 2.0, 2, 0.4);
    let s = converged_spectrum(&m, Frame::Rotated, 0.0, 1e-10, 1 << 20).unwrap();
    let (r_even, r_odd) = hidden_symmetry_residual(&s.mode(0), &m.lattice).unwrap();
    assert!(r_even < 1e-3, "r_even = {r_even:e}");
    assert!(r_odd > 10.0 * r_even, "r_odd = {r_odd:e}");
}
