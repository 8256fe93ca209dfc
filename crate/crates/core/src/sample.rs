//! Seeded random test matrices.
//!
//! Everything here draws from `ChaCha8Rng`, so a seed reproduces the same
//! matrices on every platform.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{op_norm, ComplexMatrix};
use crate::scalar::Real;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_entry<T: Real, R: Rng>(rng: &mut R) -> Complex<T> {
    Complex::new(
        T::lit(rng.gen_range(-1.0..1.0)),
        T::lit(rng.gen_range(-1.0..1.0)),
    )
}

/// Complex matrix with i.i.d. uniform entries, rescaled so that its spectral
/// norm equals `norm`.
pub fn random_with_norm<T: Real, R: Rng>(rng: &mut R, dim: usize, norm: T) -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = uniform_entry(rng);
        }
    }
    let current = op_norm(&m).expect("finite");
    m.scale(norm / current)
}

/// The standard generator set: `count` matrices of size `dim` whose spectral
/// norms are drawn uniformly from `[max_norm / 2, max_norm]`.
pub fn generator_set<T: Real>(seed: u64, count: usize, dim: usize, max_norm: T) -> Vec<ComplexMatrix<T>> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let norm = max_norm * T::lit(rng.gen_range(0.5..1.0));
            random_with_norm(&mut rng, dim, norm)
        })
        .collect()
}

/// Random matrix with spectrum in the open left half-plane: `B - (||B|| + margin) I`.
pub fn random_stable<T: Real, R: Rng>(rng: &mut R, dim: usize, norm: T, margin: T) -> ComplexMatrix<T> {
    let b = random_with_norm(rng, dim, norm);
    b.shift(Complex::new(-(norm + margin), T::zero()))
}

/// Random normal matrix `U diag(d) U^H` with prescribed eigenvalues.
pub fn random_normal<T: Real, R: Rng>(rng: &mut R, eigenvalues: &[Complex<T>]) -> ComplexMatrix<T> {
    let n = eigenvalues.len();
    let u = random_unitary(rng, n);
    let d = ComplexMatrix::from_diag(eigenvalues).expect("finite eigenvalues");
    u.matmul(&d).matmul(&u.adjoint())
}

/// Unitary matrix from modified Gram-Schmidt on a random complex matrix.
pub fn random_unitary<T: Real, R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix<T> {
    let mut cols: Vec<Vec<Complex<T>>> = (0..dim)
        .map(|_| (0..dim).map(|_| uniform_entry(rng)).collect())
        .collect();
    for j in 0..dim {
        for k in 0..j {
            let proj: Complex<T> = cols[k].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
            let ck = cols[k].clone();
            for (x, y) in cols[j].iter_mut().zip(ck) {
                *x -= y * proj;
            }
        }
        let nrm = cols[j].iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for x in cols[j].iter_mut() {
            *x = *x / nrm;
        }
    }
    let mut m = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_sets_are_reproducible() {
        let a = generator_set::<f64>(42, 3, 5, 4.0);
        let b = generator_set::<f64>(42, 3, 5, 4.0);
        assert_eq!(a, b);
        for m in &a {
            let n = op_norm(m).unwrap();
            assert!((2.0 - 1e-12..=4.0 + 1e-12).contains(&n));
        }
    }

    #[test]
    fn unitary_is_unitary() {
        let u = random_unitary::<f64, _>(&mut rng(7), 6);
        let g = &u.adjoint().matmul(&u) - &ComplexMatrix::identity(6);
        assert!(g.max_abs() < 1e-13);
    }
}
