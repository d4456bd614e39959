//! Value-semantic complex linear algebra for multi-qubit operators and
//! density matrices.
//!
//! Conventions, fixed once here and relied on everywhere else:
//! - Basis states are bit strings `|s_1 s_2 … s_N⟩` with qubit 1 the most
//!   significant bit of the row/column index.
//! - `σ_z|0⟩ = +|0⟩`, `σ_z|1⟩ = −|1⟩`; `σ_± = (σ_x ± iσ_y)/2`, so
//!   `σ_+ = |0⟩⟨1|`.
//! - Sites are 1-based (`1..=n_qubits`).

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix on a 2^N-dimensional Hilbert space.
pub type Operator = Array2<C64>;

/// Max |ρ − ρ†| accepted when constructing a [`DensityMatrix`].
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Max |tr ρ − 1| accepted when constructing a [`DensityMatrix`].
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted when constructing a [`DensityMatrix`].
pub const POSITIVITY_TOL: f64 = -1e-9;

#[inline]
fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Single-site operators that can be embedded into a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl Pauli {
    pub fn matrix(self) -> Operator {
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        match self {
            Pauli::I => Array2::from_shape_vec((2, 2), vec![o, z, z, o]).unwrap(),
            Pauli::X => Array2::from_shape_vec((2, 2), vec![z, o, o, z]).unwrap(),
            Pauli::Y => {
                Array2::from_shape_vec((2, 2), vec![z, c(0.0, -1.0), c(0.0, 1.0), z]).unwrap()
            }
            Pauli::Z => Array2::from_shape_vec((2, 2), vec![o, z, z, c(-1.0, 0.0)]).unwrap(),
            Pauli::Plus => Array2::from_shape_vec((2, 2), vec![z, o, z, z]).unwrap(),
            Pauli::Minus => Array2::from_shape_vec((2, 2), vec![z, z, o, z]).unwrap(),
        }
    }

    /// Hermitian letters are the ones allowed in Hamiltonian words.
    pub fn is_hermitian(self) -> bool {
        !matches!(self, Pauli::Plus | Pauli::Minus)
    }

    pub fn from_char(ch: char) -> Result<Self> {
        match ch.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            '+' => Ok(Pauli::Plus),
            '-' => Ok(Pauli::Minus),
            other => Err(Error::invalid(format!("unknown Pauli letter `{other}`"))),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
            Pauli::Plus => '+',
            Pauli::Minus => '-',
        }
    }
}

pub fn identity(dim: usize) -> Operator {
    Array2::eye(dim)
}

pub fn sigma_x() -> Operator {
    Pauli::X.matrix()
}

pub fn sigma_y() -> Operator {
    Pauli::Y.matrix()
}

pub fn sigma_z() -> Operator {
    Pauli::Z.matrix()
}

pub fn sigma_plus() -> Operator {
    Pauli::Plus.matrix()
}

pub fn sigma_minus() -> Operator {
    Pauli::Minus.matrix()
}

/// `|+⟩ = (|0⟩ + |1⟩)/√2`, the σ_x eigenstate with eigenvalue +1.
pub fn ket_plus() -> Array1<C64> {
    let a = 1.0 / 2.0_f64.sqrt();
    Array1::from_vec(vec![c(a, 0.0), c(a, 0.0)])
}

pub fn ket_minus() -> Array1<C64> {
    let a = 1.0 / 2.0_f64.sqrt();
    Array1::from_vec(vec![c(a, 0.0), c(-a, 0.0)])
}

pub fn ket_zero() -> Array1<C64> {
    Array1::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn ket_one() -> Array1<C64> {
    Array1::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)])
}

/// Kronecker product of the factors in list order.
pub fn tensor(factors: &[Operator]) -> Result<Operator> {
    let mut iter = factors.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::invalid("tensor: empty factor list"))?;
    let mut acc = first.clone();
    for f in iter {
        acc = ndarray::linalg::kron(&acc, f);
    }
    Ok(acc)
}

/// Embed a single-qubit operator at `site` (1-based) of an N-qubit register.
pub fn embed_single(op: &Operator, site: usize, n_qubits: usize) -> Result<Operator> {
    if op.nrows() != 2 || op.ncols() != 2 {
        return Err(Error::invalid("embed_single: operator must be 2×2"));
    }
    if site == 0 || site > n_qubits {
        return Err(Error::invalid(format!(
            "embed_single: site {site} out of range 1..={n_qubits}"
        )));
    }
    let left = identity(1 << (site - 1));
    let right = identity(1 << (n_qubits - site));
    tensor(&[left, op.clone(), right])
}

/// Identity on every site except `site`, where the named Pauli acts.
pub fn embed_pauli(which: Pauli, site: usize, n_qubits: usize) -> Result<Operator> {
    embed_single(&which.matrix(), site, n_qubits)
}

pub fn dagger(m: &Operator) -> Operator {
    let mut out = m.t().to_owned();
    out.mapv_inplace(|z| z.conj());
    out
}

pub fn trace(m: &Operator) -> C64 {
    m.diag().sum()
}

pub fn hermitize(m: &Operator) -> Operator {
    (m + &dagger(m)).mapv(|z| z * 0.5)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a.dot(b) - b.dot(a)
}

pub fn frobenius_norm(m: &Operator) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &Operator, b: &Operator) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &Operator) -> f64 {
    max_abs_diff(m, &dagger(m))
}

/// Hermitian eigendecomposition with eigenvectors guaranteed in columns:
/// `m · v_k = λ_k v_k` for `v_k = vecs.column(k)`.
///
/// The backing LAPACK call is column-major; on row-major complex input the
/// raw `eigh` effectively decomposes the transpose and hands back
/// conjugated eigenvectors. This wrapper pins the layout and conjugates,
/// and a unit test guards the convention.
pub fn eigh_hermitian(m: &Operator) -> Result<(Array1<f64>, Operator)> {
    let c_layout: Operator = m.as_standard_layout().to_owned();
    let (vals, vecs) = c_layout
        .eigh(UPLO::Lower)
        .map_err(crate::error::Error::from)?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// Bit of `index` at `site` (1-based; qubit 1 is the most significant bit).
#[inline]
pub fn bit_at(index: usize, site: usize, n_qubits: usize) -> usize {
    (index >> (n_qubits - site)) & 1
}

fn check_sites(sites: &[usize], n_qubits: usize, what: &str) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::invalid(format!("{what}: empty site set")));
    }
    for &s in sites {
        if s == 0 || s > n_qubits {
            return Err(Error::invalid(format!(
                "{what}: site {s} out of range 1..={n_qubits}"
            )));
        }
    }
    Ok(())
}

fn sorted_dedup(sites: &[usize]) -> Vec<usize> {
    let mut v = sites.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Partial trace over the complement of `keep`, for a raw square matrix on
/// `n_qubits`. Kept qubits retain their relative order.
pub fn partial_trace_op(m: &Operator, n_qubits: usize, keep: &[usize]) -> Result<Operator> {
    let dim = 1usize << n_qubits;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::invalid(format!(
            "partial_trace: matrix is {}×{}, expected {dim}×{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    let keep = sorted_dedup(keep);
    check_sites(&keep, n_qubits, "partial_trace")?;

    // Bit positions, indexed so that the first kept site is the most
    // significant bit of the reduced index.
    let keep_pos: Vec<usize> = keep.iter().map(|&s| n_qubits - s).collect();
    let traced_pos: Vec<usize> = (1..=n_qubits)
        .filter(|s| !keep.contains(s))
        .map(|s| n_qubits - s)
        .collect();

    let nk = keep_pos.len();
    let nt = traced_pos.len();
    let dk = 1usize << nk;
    let dt = 1usize << nt;

    let compose = |sub: usize, env: usize| -> usize {
        let mut full = 0usize;
        for (i, &p) in keep_pos.iter().enumerate() {
            full |= ((sub >> (nk - 1 - i)) & 1) << p;
        }
        for (i, &p) in traced_pos.iter().enumerate() {
            full |= ((env >> (nt.max(1) - 1 - i)) & 1) << p;
        }
        full
    };

    let mut out = Array2::<C64>::zeros((dk, dk));
    for jr in 0..dk {
        for kr in 0..dk {
            let mut acc = c(0.0, 0.0);
            for a in 0..dt {
                acc += m[[compose(jr, a), compose(kr, a)]];
            }
            out[[jr, kr]] = acc;
        }
    }
    Ok(out)
}

/// Transpose the indices belonging to side A of `split` only.
pub fn partial_transpose_op(m: &Operator, split: &Bipartition) -> Result<Operator> {
    let n = split.n_qubits();
    let dim = 1usize << n;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::invalid(format!(
            "partial_transpose: matrix is {}×{}, expected {dim}×{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mask = split.mask_a();
    let rest = !mask & (dim - 1);
    let mut out = Array2::<C64>::zeros((dim, dim));
    for j in 0..dim {
        for k in 0..dim {
            let jp = (j & rest) | (k & mask);
            let kp = (k & rest) | (j & mask);
            out[[j, k]] = m[[jp, kp]];
        }
    }
    Ok(out)
}

/// A nonempty proper subset A of the qubits, labelling one bipartite split.
///
/// Canonical form: A never contains the last qubit, so each unordered split
/// appears exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    n_qubits: usize,
    members: Vec<usize>,
}

impl Bipartition {
    pub fn new(n_qubits: usize, side_a: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::invalid("Bipartition: need at least 2 qubits"));
        }
        let members = sorted_dedup(&side_a.into_iter().collect::<Vec<_>>());
        check_sites(&members, n_qubits, "Bipartition")?;
        if members.len() == n_qubits {
            return Err(Error::invalid("Bipartition: A must be a proper subset"));
        }
        // Canonicalize: keep the side that does not contain the last qubit.
        let members = if members.contains(&n_qubits) {
            (1..=n_qubits).filter(|s| !members.contains(s)).collect()
        } else {
            members
        };
        Ok(Bipartition { n_qubits, members })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn side_a(&self) -> &[usize] {
        &self.members
    }

    pub fn complement(&self) -> Vec<usize> {
        (1..=self.n_qubits)
            .filter(|s| !self.members.contains(s))
            .collect()
    }

    /// Bit mask of side A within a basis index.
    pub(crate) fn mask_a(&self) -> usize {
        self.members
            .iter()
            .fold(0usize, |m, &s| m | (1 << (self.n_qubits - s)))
    }
}

/// Hermitian, trace-one, positive-semidefinite operator with a cached qubit
/// count.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
    n_qubits: usize,
}

fn qubit_count_of_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::invalid(format!(
            "dimension {dim} is not a power of two ≥ 2"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

impl DensityMatrix {
    /// Construct from raw data, validating all state invariants.
    pub fn new(op: Operator) -> Result<Self> {
        let dm = Self::new_unchecked(op)?;
        dm.validate()?;
        Ok(dm)
    }

    /// Construct checking only the shape; state invariants can be
    /// re-validated on demand via [`DensityMatrix::validate`].
    pub fn new_unchecked(op: Operator) -> Result<Self> {
        if op.nrows() != op.ncols() {
            return Err(Error::invalid("DensityMatrix: matrix not square"));
        }
        let n_qubits = qubit_count_of_dim(op.nrows())?;
        Ok(DensityMatrix { op, n_qubits })
    }

    /// Check Hermiticity, unit trace and positivity at the module
    /// tolerances.
    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_error(&self.op);
        if herm > HERMITICITY_TOL {
            return Err(Error::validation(
                "density_matrix",
                format!("hermiticity deviation {herm:.3e} exceeds {HERMITICITY_TOL:.0e}"),
            ));
        }
        let tr = trace(&self.op);
        if (tr - c(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::validation(
                "density_matrix",
                format!("trace {tr} deviates from 1 beyond {TRACE_TOL:.0e}"),
            ));
        }
        let min = self.min_eigenvalue()?;
        if min < POSITIVITY_TOL {
            return Err(Error::validation(
                "density_matrix",
                format!("eigenvalue {min:.3e} below {POSITIVITY_TOL:.0e}"),
            ));
        }
        Ok(())
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_op(self) -> Operator {
        self.op
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.op.nrows()
    }

    pub fn trace(&self) -> C64 {
        trace(&self.op)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = hermitize(&self.op).eigh(UPLO::Lower)?;
        Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// `|ψ⟩⟨ψ|` from a (normalized) ket.
    pub fn from_ket(ket: &Array1<C64>) -> Result<Self> {
        let n_qubits = qubit_count_of_dim(ket.len())?;
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("ket norm {norm} is not 1")));
        }
        let dim = ket.len();
        let mut op = Array2::<C64>::zeros((dim, dim));
        for j in 0..dim {
            for k in 0..dim {
                op[[j, k]] = ket[j] * ket[k].conj();
            }
        }
        Ok(DensityMatrix { op, n_qubits })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let op = identity(dim).mapv(|z| z / dim as f64);
        DensityMatrix { op, n_qubits }
    }

    /// Tensor product of single-qubit density matrices, site 1 first.
    pub fn product(locals: &[Operator]) -> Result<Self> {
        let op = tensor(locals)?;
        Self::new(op)
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::invalid("trace_distance: dimension mismatch"));
        }
        let diff = hermitize(&(&self.op - &other.op));
        let (vals, _) = diff.eigh(UPLO::Lower)?;
        Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
    }
}

/// Reduced state on `keep`, trace preserved.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let out = partial_trace_op(rho.op(), rho.n_qubits(), keep)?;
    DensityMatrix::new_unchecked(out)
}

/// Partial transpose of a state; Hermitian and trace one but in general not
/// positive.
pub fn partial_transpose(rho: &DensityMatrix, split: &Bipartition) -> Result<Operator> {
    if split.n_qubits() != rho.n_qubits() {
        return Err(Error::invalid(format!(
            "partial_transpose: split is over {} qubits, state over {}",
            split.n_qubits(),
            rho.n_qubits()
        )));
    }
    partial_transpose_op(rho.op(), split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell_phi_plus() -> DensityMatrix {
        let a = 1.0 / 2.0_f64.sqrt();
        let ket = Array1::from_vec(vec![c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(a, 0.0)]);
        DensityMatrix::from_ket(&ket).unwrap()
    }

    fn ghz(n: usize) -> DensityMatrix {
        let dim = 1usize << n;
        let a = 1.0 / 2.0_f64.sqrt();
        let mut ket = Array1::<C64>::zeros(dim);
        ket[0] = c(a, 0.0);
        ket[dim - 1] = c(a, 0.0);
        DensityMatrix::from_ket(&ket).unwrap()
    }

    #[test]
    fn tensor_identity_case() {
        let i2 = identity(2);
        let t = tensor(std::slice::from_ref(&i2)).unwrap();
        assert_eq!(max_abs_diff(&t, &i2), 0.0);
    }

    #[test]
    fn tensor_zz_is_diag() {
        let t = tensor(&[sigma_z(), sigma_z()]).unwrap();
        let expected = Array2::from_diag(&Array1::from_vec(vec![
            c(1.0, 0.0),
            c(-1.0, 0.0),
            c(-1.0, 0.0),
            c(1.0, 0.0),
        ]));
        assert!(max_abs_diff(&t, &expected) < 1e-15);
    }

    #[test]
    fn tensor_xx_flips_both_bits() {
        let t = tensor(&[sigma_x(), sigma_x()]).unwrap();
        let ket00 = Array1::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let out = t.dot(&ket00);
        assert!((out[3] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(out.iter().take(3).all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn tensor_empty_list_is_error() {
        assert!(matches!(tensor(&[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tensor_is_associative() {
        let a = sigma_x();
        let b = sigma_y();
        let d = sigma_z();
        let left = tensor(&[tensor(&[a.clone(), b.clone()]).unwrap(), d.clone()]).unwrap();
        let right = tensor(&[a, tensor(&[b, d]).unwrap()]).unwrap();
        assert!(max_abs_diff(&left, &right) < 1e-14);
    }

    #[test]
    fn embed_pauli_site_placement() {
        let e = embed_pauli(Pauli::Z, 1, 1).unwrap();
        assert!(max_abs_diff(&e, &sigma_z()) < 1e-15);

        let e = embed_pauli(Pauli::Z, 2, 2).unwrap();
        let expected = tensor(&[identity(2), sigma_z()]).unwrap();
        assert!(max_abs_diff(&e, &expected) < 1e-15);
    }

    #[test]
    fn embed_pauli_raising_ladder() {
        // σ_+|1⟩ = |0⟩ under σ_z|0⟩ = +|0⟩.
        let p = embed_pauli(Pauli::Plus, 1, 1).unwrap();
        let out = p.dot(&ket_one());
        assert!((out[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(out[1].norm() < 1e-15);
    }

    #[test]
    fn embed_pauli_out_of_range() {
        assert!(embed_pauli(Pauli::X, 3, 2).is_err());
        assert!(embed_pauli(Pauli::X, 0, 2).is_err());
    }

    #[test]
    fn embedded_paulis_on_distinct_sites_commute() {
        let a = embed_pauli(Pauli::X, 1, 3).unwrap();
        let b = embed_pauli(Pauli::Y, 3, 3).unwrap();
        let comm = commutator(&a, &b);
        assert_eq!(frobenius_norm(&comm), 0.0);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho_a = Array2::from_shape_vec(
            (2, 2),
            vec![c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)],
        )
        .unwrap();
        let rho_b = Array2::from_shape_vec(
            (2, 2),
            vec![c(0.4, 0.0), c(0.0, -0.1), c(0.0, 0.1), c(0.6, 0.0)],
        )
        .unwrap();
        let joint = DensityMatrix::new_unchecked(tensor(&[rho_a.clone(), rho_b]).unwrap()).unwrap();
        let red = partial_trace(&joint, &[1]).unwrap();
        assert!(max_abs_diff(red.op(), &rho_a) < 1e-14);
    }

    #[test]
    fn partial_trace_of_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(2);
        let red = partial_trace(&rho, &[2]).unwrap();
        let expected = identity(2).mapv(|z| z * 0.5);
        assert!(max_abs_diff(red.op(), &expected) < 1e-14);
    }

    #[test]
    fn partial_trace_ghz3_pair() {
        // Independent contraction oracle: brute-force index sum.
        let rho = ghz(3);
        let red = partial_trace(&rho, &[1, 2]).unwrap();
        let mut expected = Array2::<C64>::zeros((4, 4));
        expected[[0, 0]] = c(0.5, 0.0);
        expected[[3, 3]] = c(0.5, 0.0);
        assert!(max_abs_diff(red.op(), &expected) < 1e-14);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let rho = ghz(3);
        let red = partial_trace(&rho, &[2]).unwrap();
        assert_abs_diff_eq!((red.trace() - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_empty_keep_is_error() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(partial_trace(&rho, &[]).is_err());
    }

    #[test]
    fn partial_transpose_is_involution() {
        let rho = ghz(3);
        let split = Bipartition::new(3, [1, 3]).unwrap();
        let once = partial_transpose(&rho, &split).unwrap();
        let twice = partial_transpose_op(&once, &split).unwrap();
        assert!(max_abs_diff(&twice, rho.op()) < 1e-15);
    }

    #[test]
    fn partial_transpose_bell_eigenvalues() {
        let rho = bell_phi_plus();
        let split = Bipartition::new(2, [1]).unwrap();
        let pt = partial_transpose(&rho, &split).unwrap();
        let (mut vals, _) = hermitize(&pt).eigh(UPLO::Lower).unwrap();
        vals.as_slice_mut().unwrap().sort_by(f64::total_cmp);
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (v, e) in vals.iter().zip(expected) {
            assert_abs_diff_eq!(v, &e, epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_transpose_of_product_state_is_positive() {
        let rho_a = Array2::from_shape_vec(
            (2, 2),
            vec![c(0.8, 0.0), c(0.1, 0.1), c(0.1, -0.1), c(0.2, 0.0)],
        )
        .unwrap();
        let rho_b = Array2::from_shape_vec(
            (2, 2),
            vec![c(0.5, 0.0), c(0.2, -0.3), c(0.2, 0.3), c(0.5, 0.0)],
        )
        .unwrap();
        let joint = DensityMatrix::new_unchecked(tensor(&[rho_a, rho_b]).unwrap()).unwrap();
        let split = Bipartition::new(2, [1]).unwrap();
        let pt = partial_transpose(&joint, &split).unwrap();
        let (vals, _) = hermitize(&pt).eigh(UPLO::Lower).unwrap();
        assert!(vals.iter().all(|&v| v > -1e-12));
    }

    #[test]
    fn partial_transpose_preserves_trace_and_hermiticity() {
        let rho = ghz(3);
        let split = Bipartition::new(3, [2]).unwrap();
        let pt = partial_transpose(&rho, &split).unwrap();
        assert!((trace(&pt) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(hermiticity_error(&pt) < 1e-12);
    }

    #[test]
    fn bipartition_canonical_form() {
        // {2,3} on 3 qubits contains the last qubit → canonicalized to {1}.
        let split = Bipartition::new(3, [2, 3]).unwrap();
        assert_eq!(split.side_a(), &[1]);
        assert_eq!(split.complement(), vec![2, 3]);
    }

    #[test]
    fn bipartition_rejects_improper_sets() {
        assert!(Bipartition::new(2, []).is_err());
        assert!(Bipartition::new(2, [1, 2]).is_err());
        assert!(Bipartition::new(2, [5]).is_err());
    }

    #[test]
    fn density_matrix_rejects_bad_states() {
        // Trace 2.
        let op = identity(2);
        assert!(DensityMatrix::new(op).is_err());
        // Negative eigenvalue.
        let op = Array2::from_shape_vec(
            (2, 2),
            vec![c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)],
        )
        .unwrap();
        assert!(DensityMatrix::new(op).is_err());
    }

    #[test]
    fn eigh_hermitian_columns_are_right_eigenvectors() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m = crate::random::random_hermitian(&mut rng, 6);
        let (vals, vecs) = eigh_hermitian(&m).unwrap();
        for k in 0..6 {
            let v = vecs.column(k).to_owned();
            let mv = m.dot(&v);
            let err: f64 = mv
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - b * vals[k]).norm())
                .sum();
            assert!(err < 1e-10, "eigenpair {k} residual {err:.3e}");
        }
    }

    #[test]
    fn basis_convention_entry_lookup() {
        // Entry ⟨s1's2'|ρ|s1 s2⟩ equals the coefficient the state was built
        // from, with qubit 1 as the most significant bit.
        let mut op = Array2::<C64>::zeros((4, 4));
        for j in 0..4 {
            op[[j, j]] = c(0.25, 0.0);
        }
        let coeff = c(0.05, 0.02);
        // C_{01;10}: row |01⟩ = 1, col |10⟩ = 2.
        op[[1, 2]] = coeff;
        op[[2, 1]] = coeff.conj();
        let rho = DensityMatrix::new(op).unwrap();
        assert_eq!(rho.op()[[1, 2]], coeff);
        assert_eq!(bit_at(1, 1, 2), 0);
        assert_eq!(bit_at(1, 2, 2), 1);
        assert_eq!(bit_at(2, 1, 2), 1);
        assert_eq!(bit_at(2, 2, 2), 0);
    }
}
