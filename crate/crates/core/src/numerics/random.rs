//! Seeded random matrices. Every sweep draws from a `ChaCha8Rng` seeded
//! with a single `u64`, so runs are bit-reproducible.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{norm, CMatrix};

pub type Prng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Prng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / std::f64::consts::SQRT_2
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = random_matrix(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for z in q.column_mut(c).iter_mut() {
            *z *= phase;
        }
    }
    q
}

/// Random Hermitian matrix (GUE) rescaled to operator norm `op_norm`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, op_norm: f64, rng: &mut R) -> CMatrix {
    let g = random_matrix(dim, dim, rng);
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let n = norm(&h);
    h * Complex64::new(op_norm / n, 0.0)
}

/// Random matrix rescaled to operator norm `op_norm`.
pub fn random_scaled_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, op_norm: f64, rng: &mut R) -> CMatrix {
    let g = random_matrix(rows, cols, rng);
    let n = norm(&g);
    g * Complex64::new(op_norm / n, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{hermiticity_defect, is_unitary};

    #[test]
    fn generators_respect_their_contracts() {
        let mut rng = seeded(0);
        let u = random_unitary(8, &mut rng);
        assert!(is_unitary(&u, 1e-12));
        let h = random_hermitian(4, 0.9, &mut rng);
        assert!(hermiticity_defect(&h) < 1e-15);
        assert!((norm(&h) - 0.9).abs() < 1e-12);
        let a = random_scaled_matrix(2, 3, 0.8, &mut rng);
        assert!((norm(&a) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn seeding_is_reproducible() {
        let a = random_unitary(4, &mut seeded(42));
        let b = random_unitary(4, &mut seeded(42));
        assert_eq!(a, b);
    }
}
