use nalgebra::DMatrix;
use proptest::prelude::*;
use zerotwo::sample::{random_with_norm, rng};
use zerotwo::{eigenvalues, op_norm, singular_values, solve, Complex, ComplexMatrix};

fn random(seed: u64, dim: usize, norm: f64) -> ComplexMatrix<f64> {
    random_with_norm(&mut rng(seed), dim, norm)
}

fn to_nalgebra(m: &ComplexMatrix<f64>) -> DMatrix<Complex<f64>> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| m[(i, j)])
}

/// Largest eigenvalue of the Hermitian `m^H m`, via nalgebra.
fn gram_top_eigenvalue(m: &ComplexMatrix<f64>) -> f64 {
    let g = to_nalgebra(&m.adjoint().matmul(m));
    g.symmetric_eigenvalues().iter().cloned().fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn op_norm_is_submultiplicative(seed in any::<u64>(), dim in 1usize..12, na in 0.1f64..10.0, nb in 0.1f64..10.0) {
        let a = random(seed, dim, na);
        let b = random(seed.wrapping_add(1), dim, nb);
        let ab = op_norm(&a.matmul(&b)).unwrap();
        prop_assert!(ab <= op_norm(&a).unwrap() * op_norm(&b).unwrap() + 1e-10);
    }

    #[test]
    fn op_norm_matches_gram_eigenvalue(seed in any::<u64>(), dim in 1usize..16, norm in 0.1f64..5.0) {
        let m = random(seed, dim, norm);
        let ours = op_norm(&m).unwrap();
        prop_assert!((ours - gram_top_eigenvalue(&m).sqrt()).abs() <= 1e-10 * ours.max(1.0));
    }

    #[test]
    fn singular_values_match_nalgebra(seed in any::<u64>(), dim in 1usize..12) {
        let m = random(seed, dim, 3.0);
        let mut oracle: Vec<f64> = to_nalgebra(&m).singular_values().iter().cloned().collect();
        oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let ours = singular_values(&m).unwrap();
        for (x, y) in ours.iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn solve_recovers_x(seed in any::<u64>(), dim in 1usize..12) {
        // Well conditioned: identity-dominant shift of a random matrix.
        let m = random(seed, dim, 1.0).shift(Complex::new(2.5, 0.5));
        let x = random(seed.wrapping_add(7), dim, 1.0);
        let got = solve(&m, &m.matmul(&x)).unwrap();
        let err = op_norm(&(&got - &x)).unwrap();
        prop_assert!(err <= 1e-9 * op_norm(&x).unwrap());
    }

    #[test]
    fn eigenvalues_are_eigenvalues(seed in any::<u64>(), dim in 1usize..10) {
        let m = random(seed, dim, 2.0);
        let eig = eigenvalues(&m).unwrap();
        prop_assert_eq!(eig.len(), dim);
        for mu in eig {
            let shifted = m.shift(-mu);
            let smin = *singular_values(&shifted).unwrap().last().unwrap();
            prop_assert!(smin <= 1e-8 * 2.0, "sigma_min = {smin}");
        }
    }
}

#[test]
fn solve_recovers_x_at_moderate_condition() {
    // diag(1, ..., 1e-6) rotated by a unitary: condition number 1e6.
    let mut r = rng(3);
    let d: Vec<Complex<f64>> = (0..6).map(|k| Complex::new(10f64.powf(-(k as f64) * 1.2), 0.0)).collect();
    let m = zerotwo::sample::random_normal(&mut r, &d);
    let x = random(11, 6, 1.0);
    let got = solve(&m, &m.matmul(&x)).unwrap();
    assert!(op_norm(&(&got - &x)).unwrap() <= 1e-9 * op_norm(&x).unwrap());
}

#[test]
fn large_matrix_norm_uses_power_iteration_consistently() {
    let m = random(5, 80, 3.0);
    let ours = op_norm(&m).unwrap();
    assert!((ours - gram_top_eigenvalue(&m).sqrt()).abs() <= 1e-9);
}
