//! Seeded random states and matrices for property tests and CP checks.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::qstate::{dagger, trace, DensityMatrix, Operator, C64};

/// One standard complex normal sample (Box–Muller).
fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u1.ln()).sqrt();
    C64::new(r * u2.cos(), r * u2.sin())
}

/// Ginibre matrix: i.i.d. complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    Array2::from_shape_fn((dim, dim), |_| complex_normal(rng))
}

/// Random Hermitian matrix with O(1) entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let g = ginibre(rng, dim);
    (&g + &dagger(&g)).mapv(|z| z * 0.5)
}

/// Random full-rank density matrix from the Hilbert–Schmidt ensemble.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, n_qubits: usize) -> DensityMatrix {
    let dim = 1usize << n_qubits;
    let g = ginibre(rng, dim);
    let rho = g.dot(&dagger(&g));
    let tr = trace(&rho).re;
    DensityMatrix::new(rho.mapv(|z| z / tr)).expect("Ginibre construction yields a valid state")
}

/// Random normalized ket.
pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Array1<C64> {
    let mut v = Array1::from_shape_fn(dim, |_| complex_normal(rng));
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / norm);
    v
}
