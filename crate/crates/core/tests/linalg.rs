use floquet_pt::linalg::{eig_general, inverse, mat_exp, mat_mul, ComplexMatrix, C64, I, ONE, ZERO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn triple_loop(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    ComplexMatrix::from_fn(n, |i, j| {
        let mut s = ZERO;
        for k in 0..n {
            s += a[(i, k)] * b[(k, j)];
        }
        s
    })
}

/// Characteristic polynomial coefficients (monic, highest degree first) by Faddeev-LeVerrier.
fn char_poly(m: &ComplexMatrix) -> Vec<C64> {
    let n = m.dim();
    let mut coeffs = vec![ONE];
    let mut mk = ComplexMatrix::zeros(n);
    for k in 1..=n {
        let mut next = mk.clone();
        next.add_identity(*coeffs.last().unwrap());
        mk = triple_loop(m, &next);
        let c = -mk.trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

/// Polynomial roots by Aberth-Ehrlich iteration.
fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let eval = |z: C64| {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let radius = 1.0 + coeffs.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius * 0.5, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: C64 = (0..n).filter(|&j| j != i).map(|j| ONE / (z[i] - z[j])).sum();
            let w = ratio / (ONE - ratio * sum);
            z[i] -= w;
            moved = moved.max(w.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

#[test]
fn mat_mul_matches_triple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_matrix(&mut rng, 5);
    let b = random_matrix(&mut rng, 5);
    let fast = mat_mul(&a, &b).unwrap();
    let slow = triple_loop(&a, &b);
    assert!(fast.sub(&slow).unwrap().max_abs() < 1e-13);
}

#[test]
fn eig_matches_characteristic_polynomial_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let m = random_matrix(&mut rng, 8);
        let e = eig_general(&m).unwrap();
        let mut roots = poly_roots(&char_poly(&m));
        for v in &e.values {
            let (pos, dist) = roots
                .iter()
                .enumerate()
                .map(|(i, r)| (i, (r - v).norm()))
                .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
            assert!(dist < 1e-8, "eigenvalue {v} has no matching root (closest {dist:e})");
            roots.remove(pos);
        }
    }
}

#[test]
fn eig_reconstruction_and_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [1, 2, 3, 10, 40] {
        let m = random_matrix(&mut rng, n);
        let e = eig_general(&m).unwrap();
        assert!(!e.near_defective);
        for j in 0..n {
            let v = e.vector(j);
            let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((nv - 1.0).abs() < 1e-12);
            assert!(e.residuals[j] <= 1e-10 * m.frobenius_norm());
        }
        let lam = ComplexMatrix::from_diag(&e.values);
        let vinv = inverse(&e.vectors).unwrap();
        let rec = mat_mul(&mat_mul(&e.vectors, &lam).unwrap(), &vinv).unwrap();
        assert!(rec.sub(&m).unwrap().frobenius_norm() <= 1e-8 * m.frobenius_norm());
        for w in e.values.windows(2) {
            assert!(w[0].re <= w[1].re + 1e-12);
        }
    }
}

#[test]
fn unitary_eigenvalues_on_unit_circle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_matrix(&mut rng, 12);
    let h = a.add(&a.adjoint()).unwrap();
    let u = mat_exp(&h, -I * 0.7).unwrap();
    let e = eig_general(&u).unwrap();
    for v in e.values {
        assert!((v.norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn hermitian_matrix_with_degenerate_eigenvalues() {
    // Two-fold degenerate spectrum {1, 1, -1, -1} rotated by a unitary.
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let a = random_matrix(&mut rng, 4);
    let h = a.add(&a.adjoint()).unwrap();
    let u = mat_exp(&h, -I).unwrap();
    let d = ComplexMatrix::from_diag(&[ONE, ONE, -ONE, -ONE]);
    let m = mat_mul(&mat_mul(&u, &d).unwrap(), &u.adjoint()).unwrap();
    let e = eig_general(&m).unwrap();
    for (v, expect) in e.values.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
        assert!((v - expect).norm() < 1e-12);
    }
}

#[test]
fn exp_semigroup_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let m = random_matrix(&mut rng, 6);
    let s = C64::new(0.4, -1.1);
    let t = C64::new(-0.2, 2.3);
    let lhs = mat_mul(&mat_exp(&m, s).unwrap(), &mat_exp(&m, t).unwrap()).unwrap();
    let rhs = mat_exp(&m, s + t).unwrap();
    assert!(lhs.sub(&rhs).unwrap().frobenius_norm() < 1e-10 * rhs.frobenius_norm().max(1.0));
}

#[test]
fn exp_relative_accuracy_at_envelope_edge() {
    // Hermitian generator scaled to spectral norm 20: compare against the eigen-decomposition.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let a = random_matrix(&mut rng, 6);
    let h = a.add(&a.adjoint()).unwrap();
    let e = eig_general(&h).unwrap();
    let rho = e.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let h = h.scaled(C64::new(20.0 / rho, 0.0));
    let e = eig_general(&h).unwrap();
    let phases: Vec<C64> = e.values.iter().map(|v| (-I * v).exp()).collect();
    let v = &e.vectors;
    let vinv = inverse(v).unwrap();
    let reference = mat_mul(&mat_mul(v, &ComplexMatrix::from_diag(&phases)).unwrap(), &vinv).unwrap();
    let got = mat_exp(&h, -I).unwrap();
    let rel = got.sub(&reference).unwrap().frobenius_norm() / reference.frobenius_norm();
    assert!(rel < 1e-12, "relative error {rel:e}");
}
