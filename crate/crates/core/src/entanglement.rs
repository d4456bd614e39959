//! Entanglement measures: negativity per bipartition, the average over all
//! bipartitions, reduced pair states, and particle-number mixtures.

use std::collections::BTreeMap;

use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::qstate::{hermitize, partial_trace, partial_transpose, Bipartition, DensityMatrix};

/// `𝒩_A = (‖ρ^{T_A}‖₁ − 1)/2`, computed from the eigenvalues of the
/// (Hermitian) partial transpose. Zero for separable states; ½ for a
/// maximally entangled pair.
pub fn negativity(rho: &DensityMatrix, split: &Bipartition) -> Result<f64> {
    let pt = partial_transpose(rho, split)?;
    let (vals, _) = hermitize(&pt).eigh(UPLO::Lower)?;
    let trace_norm: f64 = vals.iter().map(|v| v.abs()).sum();
    Ok(((trace_norm - 1.0) / 2.0).max(0.0))
}

/// Equivalent route: −Σ of the negative eigenvalues of ρ^{T_A}. Agrees with
/// [`negativity`] to machine precision for trace-one states; kept as an
/// internal cross-check of the trace-norm code.
pub fn negativity_from_negative_eigenvalues(
    rho: &DensityMatrix,
    split: &Bipartition,
) -> Result<f64> {
    let pt = partial_transpose(rho, split)?;
    let (vals, _) = hermitize(&pt).eigh(UPLO::Lower)?;
    let neg_sum: f64 = vals.iter().filter(|&&v| v < 0.0).sum();
    Ok((-neg_sum).max(0.0))
}

/// All `2^(N−1) − 1` unordered splits in canonical form.
pub fn enumerate_bipartitions(n_qubits: usize) -> Result<Vec<Bipartition>> {
    if n_qubits < 2 {
        return Err(Error::invalid(
            "enumerate_bipartitions: need at least 2 qubits",
        ));
    }
    // Canonical side A is any nonempty subset of {1, …, N−1}.
    let mut out = Vec::with_capacity((1 << (n_qubits - 1)) - 1);
    for mask in 1usize..(1 << (n_qubits - 1)) {
        let members: Vec<usize> = (1..n_qubits)
            .filter(|s| mask & (1 << (s - 1)) != 0)
            .collect();
        out.push(Bipartition::new(n_qubits, members)?);
    }
    Ok(out)
}

/// Arithmetic mean of the negativity over all bipartitions. Zero means no
/// split is negativity-entangled.
pub fn average_negativity(rho: &DensityMatrix) -> Result<f64> {
    let splits = enumerate_bipartitions(rho.n_qubits())?;
    let mut sum = 0.0;
    for split in &splits {
        sum += negativity(rho, split)?;
    }
    Ok(sum / splits.len() as f64)
}

/// Reduced state of qubits `i` and `j` (everything else traced out).
pub fn reduced_pair(rho: &DensityMatrix, i: usize, j: usize) -> Result<DensityMatrix> {
    if i == j {
        return Err(Error::invalid("reduced_pair: need two distinct qubits"));
    }
    partial_trace(rho, &[i, j])
}

/// Truncated, renormalized Poisson weights over a particle-number window.
#[derive(Debug, Clone, Copy)]
pub struct MixtureSpec {
    pub n_min: usize,
    pub n_max: usize,
    /// Poisson mean; the weights are `p_N ∝ λ^N e^{−λ} / N!` renormalized
    /// over `[n_min, n_max]`.
    pub lambda: f64,
}

impl MixtureSpec {
    pub fn new(n_min: usize, n_max: usize, lambda: f64) -> Result<Self> {
        if n_min == 0 || n_min > n_max {
            return Err(Error::invalid("MixtureSpec: need 1 ≤ n_min ≤ n_max"));
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::invalid("MixtureSpec: lambda must be > 0"));
        }
        Ok(MixtureSpec {
            n_min,
            n_max,
            lambda,
        })
    }

    /// Weights for N = n_min..=n_max; strictly positive, summing to one.
    pub fn weights(&self) -> Vec<f64> {
        let mut w: Vec<f64> = (self.n_min..=self.n_max)
            .map(|n| {
                let mut log_w = n as f64 * self.lambda.ln() - self.lambda;
                for k in 1..=n {
                    log_w -= (k as f64).ln();
                }
                log_w.exp()
            })
            .collect();
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x /= total;
        }
        w
    }
}

/// Convex mixture `Σ_N p_N ρ^{(N)}` of two-qubit states indexed by particle
/// number, with truncated Poisson weights.
pub fn poisson_mixture(
    states: &BTreeMap<usize, DensityMatrix>,
    spec: &MixtureSpec,
) -> Result<DensityMatrix> {
    let weights = spec.weights();
    let mut acc: Option<crate::qstate::Operator> = None;
    for (n, w) in (spec.n_min..=spec.n_max).zip(weights) {
        let rho = states
            .get(&n)
            .ok_or_else(|| Error::invalid(format!("poisson_mixture: missing state for N = {n}")))?;
        if rho.n_qubits() != 2 {
            return Err(Error::invalid(format!(
                "poisson_mixture: state for N = {n} is not two-qubit"
            )));
        }
        let term = rho.op().mapv(|z| z * w);
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    DensityMatrix::new(acc.expect("window is nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{self, TwoQubitParams};
    use crate::qstate::{tensor, Operator, C64};
    use crate::random::{random_density_matrix, random_ket};
    use approx::assert_abs_diff_eq;
    use ndarray::{Array1, Array2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell_phi_plus() -> DensityMatrix {
        let a = 1.0 / 2.0_f64.sqrt();
        let ket = Array1::from_vec(vec![
            C64::new(a, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(a, 0.0),
        ]);
        DensityMatrix::from_ket(&ket).unwrap()
    }

    fn ghz3() -> DensityMatrix {
        let a = 1.0 / 2.0_f64.sqrt();
        let mut ket = Array1::<C64>::zeros(8);
        ket[0] = C64::new(a, 0.0);
        ket[7] = C64::new(a, 0.0);
        DensityMatrix::from_ket(&ket).unwrap()
    }

    #[test]
    fn product_state_has_zero_negativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_density_matrix(&mut rng, 1);
        let b = random_density_matrix(&mut rng, 1);
        let joint = DensityMatrix::new(tensor(&[a.op().clone(), b.op().clone()]).unwrap()).unwrap();
        let split = Bipartition::new(2, [1]).unwrap();
        assert_abs_diff_eq!(negativity(&joint, &split).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_state_reaches_one_half() {
        let split = Bipartition::new(2, [1]).unwrap();
        assert_abs_diff_eq!(
            negativity(&bell_phi_plus(), &split).unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn analytic_steady_state_negativity_agrees_with_closed_form() {
        let p = TwoQubitParams::new(2.5, 1.0, 5.0).unwrap();
        let rho = analytic::steady_state(&p).unwrap();
        let split = Bipartition::new(2, [1]).unwrap();
        let measured = negativity(&rho, &split).unwrap();
        assert_abs_diff_eq!(measured, 7.25 / 546.0, epsilon = 1e-9);
    }

    #[test]
    fn both_negativity_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let rho = random_density_matrix(&mut rng, 3);
            for split in enumerate_bipartitions(3).unwrap() {
                let a = negativity(&rho, &split).unwrap();
                let b = negativity_from_negative_eigenvalues(&rho, &split).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn negativity_symmetric_under_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let rho = random_density_matrix(&mut rng, 3);
        for split in enumerate_bipartitions(3).unwrap() {
            let comp = Bipartition::new(3, split.complement()).unwrap();
            let a = negativity(&rho, &split).unwrap();
            let b = negativity(&rho, &comp).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn negativity_invariant_under_local_unitaries() {
        // Random single-qubit unitaries on each side of the split.
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let rho = random_density_matrix(&mut rng, 2);
        let split = Bipartition::new(2, [1]).unwrap();
        let n0 = negativity(&rho, &split).unwrap();

        let haar_u2 = |rng: &mut ChaCha8Rng| -> Operator {
            // QR of a Ginibre matrix, phase-fixed.
            let g = crate::random::ginibre(rng, 2);
            let a = g.column(0).to_owned();
            let norm_a: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let q0 = a.mapv(|z| z / norm_a);
            let b = g.column(1).to_owned();
            let overlap: C64 = q0.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
            let mut q1 = b - q0.mapv(|z| z * overlap);
            let norm_b: f64 = q1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            q1.mapv_inplace(|z| z / norm_b);
            let mut u = Array2::<C64>::zeros((2, 2));
            for i in 0..2 {
                u[[i, 0]] = q0[i];
                u[[i, 1]] = q1[i];
            }
            u
        };
        let u = tensor(&[haar_u2(&mut rng), haar_u2(&mut rng)]).unwrap();
        let rotated = u.dot(rho.op()).dot(&crate::qstate::dagger(&u));
        let rotated = DensityMatrix::new_unchecked(rotated).unwrap();
        let n1 = negativity(&rotated, &split).unwrap();
        assert_abs_diff_eq!(n0, n1, epsilon = 1e-10);
    }

    #[test]
    fn bipartition_counts() {
        assert_eq!(enumerate_bipartitions(2).unwrap().len(), 1);
        assert_eq!(enumerate_bipartitions(5).unwrap().len(), 15);
        assert_eq!(enumerate_bipartitions(7).unwrap().len(), 63);
        assert!(enumerate_bipartitions(1).is_err());
    }

    #[test]
    fn average_negativity_ghz3() {
        // Every one of the 3 splits of the GHZ state gives ½.
        assert_abs_diff_eq!(average_negativity(&ghz3()).unwrap(), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn average_negativity_of_two_qubits_is_plain_negativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let rho = random_density_matrix(&mut rng, 2);
        let split = Bipartition::new(2, [1]).unwrap();
        assert_abs_diff_eq!(
            average_negativity(&rho).unwrap(),
            negativity(&rho, &split).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn product_state_average_negativity_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let locals: Vec<Operator> = (0..4)
            .map(|_| random_density_matrix(&mut rng, 1).into_op())
            .collect();
        let rho = DensityMatrix::new(tensor(&locals).unwrap()).unwrap();
        assert_abs_diff_eq!(average_negativity(&rho).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn reduced_pair_of_two_qubit_state_is_identity_operation() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let rho = random_density_matrix(&mut rng, 2);
        let red = reduced_pair(&rho, 1, 2).unwrap();
        assert!(rho.trace_distance(&red).unwrap() < 1e-13);
    }

    #[test]
    fn reduced_pair_of_ghz3_is_classically_correlated() {
        let red = reduced_pair(&ghz3(), 1, 2).unwrap();
        let mut expected = Array2::<C64>::zeros((4, 4));
        expected[[0, 0]] = C64::new(0.5, 0.0);
        expected[[3, 3]] = C64::new(0.5, 0.0);
        assert!(crate::qstate::max_abs_diff(red.op(), &expected) < 1e-12);
        let split = Bipartition::new(2, [1]).unwrap();
        assert_abs_diff_eq!(negativity(&red, &split).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reduced_pair_rejects_equal_sites() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(reduced_pair(&rho, 2, 2).is_err());
    }

    #[test]
    fn poisson_weights_normalized_and_log_concave() {
        let spec = MixtureSpec::new(2, 6, 4.0).unwrap();
        let w = spec.weights();
        assert_eq!(w.len(), 5);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(w.iter().all(|&x| x > 0.0));
        for k in 1..w.len() - 1 {
            assert!(w[k] * w[k] >= w[k - 1] * w[k + 1] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn mixture_of_identical_states_is_that_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let rho = random_density_matrix(&mut rng, 2);
        let spec = MixtureSpec::new(2, 6, 2.7).unwrap();
        let mut states = BTreeMap::new();
        for n in 2..=6 {
            states.insert(n, rho.clone());
        }
        let mixed = poisson_mixture(&states, &spec).unwrap();
        assert!(mixed.trace_distance(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn mixture_negativity_bounded_by_max_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let spec = MixtureSpec::new(2, 4, 3.0).unwrap();
        let mut states = BTreeMap::new();
        for n in 2..=4 {
            let ket = random_ket(&mut rng, 4);
            states.insert(n, DensityMatrix::from_ket(&ket).unwrap());
        }
        let split = Bipartition::new(2, [1]).unwrap();
        let max_n = states
            .values()
            .map(|s| negativity(s, &split).unwrap())
            .fold(0.0, f64::max);
        let mixed = poisson_mixture(&states, &spec).unwrap();
        assert!(negativity(&mixed, &split).unwrap() <= max_n + 1e-12);
    }

    #[test]
    fn mixture_missing_member_is_error() {
        let spec = MixtureSpec::new(2, 3, 1.0).unwrap();
        let mut states = BTreeMap::new();
        states.insert(2, DensityMatrix::maximally_mixed(2));
        assert!(poisson_mixture(&states, &spec).is_err());
    }
}
