//! The master-equation generator: Hamiltonian commutator, per-site noise
//! channels and the per-site reset channel, available as a matrix-free
//! action on density matrices or assembled as a dense superoperator over
//! column-stacked (vectorized) matrices.

use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, UPLO};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::{random_config, ModelConfig, Noise};
use crate::ode::{integrate, RkOptions};
use crate::qstate::{dagger, embed_single, hermitize, identity, Operator, C64};

/// Largest qubit count for which the 4^N × 4^N dense form is assembled.
pub const DENSE_QUBIT_LIMIT: usize = 6;

/// PSD tolerance on Choi eigenvalues in [`check_lindblad`].
pub const CHOI_TOL: f64 = -1e-8;

/// Largest qubit count for [`check_lindblad`]: the Choi matrix is
/// 4^N × 4^N and is built by propagating all 4^N basis matrices.
pub const CP_CHECK_QUBIT_LIMIT: usize = 5;

/// Matrix-free action of the generator. All site structure is precomputed
/// as bit masks and per-index phases; one application costs
/// O((terms + N)·4^N) never materializing the 4^N × 4^N matrix.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    n_qubits: usize,
    dim: usize,
    /// (g·c_k, flip mask, per-column phase) for each Hamiltonian word.
    words: Vec<(f64, usize, Vec<C64>)>,
    /// Elementwise-diagonal part: dephasing, anticommutators of the jump
    /// channels, and the −r·N drain of the reset channel.
    cmask: Array2<f64>,
    decay: f64,
    excite: f64,
    reset_rate: f64,
    /// 2×2 reset targets, site order.
    chi: Vec<Operator>,
}

impl Liouvillian {
    pub fn new(config: &ModelConfig) -> Result<Self> {
        let n = config.n_qubits;
        if n == 0 {
            return Err(Error::invalid("Liouvillian: need at least one qubit"));
        }
        let dim = 1usize << n;

        let words: Vec<(f64, usize, Vec<C64>)> = config
            .hamiltonian
            .terms
            .iter()
            .map(|t| {
                let w = &t.word;
                let phases: Vec<C64> = (0..dim).map(|m| w.phase(m)).collect();
                (config.hamiltonian.g * t.coefficient, w.flip_mask(), phases)
            })
            .collect();

        let kappa_z = config.noise.dephasing_rate();
        let decay = config.noise.decay_rate();
        let excite = config.noise.excitation_rate();
        let r = config.reset.rate;

        let mut cmask = Array2::<f64>::zeros((dim, dim));
        for j in 0..dim {
            for k in 0..dim {
                let differing = (j ^ k).count_ones() as f64;
                let ones_j = j.count_ones() as f64;
                let ones_k = k.count_ones() as f64;
                let zeros_j = n as f64 - ones_j;
                let zeros_k = n as f64 - ones_k;
                cmask[[j, k]] = -2.0 * kappa_z * differing
                    - 0.5 * decay * (zeros_j + zeros_k)
                    - 0.5 * excite * (ones_j + ones_k)
                    - r * n as f64;
            }
        }

        let chi = config
            .reset
            .states()
            .iter()
            .map(|s| s.density().clone())
            .collect();

        Ok(Liouvillian {
            n_qubits: n,
            dim,
            words,
            cmask,
            decay,
            excite,
            reset_rate: r,
            chi,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// ρ ↦ ℒρ. Errors on dimension mismatch.
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::invalid(format!(
                "Liouvillian::apply: state is {}×{}, expected {}×{}",
                rho.nrows(),
                rho.ncols(),
                self.dim,
                self.dim
            )));
        }
        Ok(self.apply_raw(rho))
    }

    pub(crate) fn apply_raw(&self, rho: &Operator) -> Operator {
        let dim = self.dim;
        let n = self.n_qubits;
        let mut out = Array2::<C64>::zeros((dim, dim));

        // −i [H, ρ], word by word: (Wρ)_{jk} = φ(j⊕f) ρ_{j⊕f,k},
        // (ρW)_{jk} = φ(k) ρ_{j,k⊕f}.
        let minus_i = C64::new(0.0, -1.0);
        for (coeff, flip, phase) in &self.words {
            let w = minus_i * *coeff;
            for j in 0..dim {
                let jf = j ^ flip;
                for k in 0..dim {
                    let kf = k ^ flip;
                    out[[j, k]] += w * (phase[jf] * rho[[jf, k]] - phase[k] * rho[[j, kf]]);
                }
            }
        }

        // Elementwise-diagonal damping.
        for j in 0..dim {
            for k in 0..dim {
                out[[j, k]] += rho[[j, k]] * self.cmask[[j, k]];
            }
        }

        // Sandwich parts of decay / excitation, per site.
        if self.decay > 0.0 || self.excite > 0.0 {
            for site in 0..n {
                let m = 1usize << (n - 1 - site);
                for j in 0..dim {
                    for k in 0..dim {
                        let bj = j & m != 0;
                        let bk = k & m != 0;
                        if bj && bk {
                            if self.decay > 0.0 {
                                out[[j, k]] += rho[[j ^ m, k ^ m]] * self.decay;
                            }
                        } else if !bj && !bk && self.excite > 0.0 {
                            out[[j, k]] += rho[[j ^ m, k ^ m]] * self.excite;
                        }
                    }
                }
            }
        }

        // Reset gain r·χ_i ⊗ tr_i ρ, inserted at site i's tensor slot.
        if self.reset_rate > 0.0 {
            let r = self.reset_rate;
            let half = dim / 2;
            for site in 0..n {
                let p = n - 1 - site;
                let chi = &self.chi[site];
                let low_mask = (1usize << p) - 1;
                let ins = |x: usize, b: usize| -> usize {
                    ((x >> p) << (p + 1)) | (b << p) | (x & low_mask)
                };
                for jr in 0..half {
                    let j0 = ins(jr, 0);
                    let j1 = ins(jr, 1);
                    for kr in 0..half {
                        let k0 = ins(kr, 0);
                        let k1 = ins(kr, 1);
                        let traced = rho[[j0, k0]] + rho[[j1, k1]];
                        let scaled = traced * r;
                        out[[j0, k0]] += chi[[0, 0]] * scaled;
                        out[[j0, k1]] += chi[[0, 1]] * scaled;
                        out[[j1, k0]] += chi[[1, 0]] * scaled;
                        out[[j1, k1]] += chi[[1, 1]] * scaled;
                    }
                }
            }
        }

        out
    }

    /// Frobenius norm of ℒρ; the steady-state residual.
    pub fn residual(&self, rho: &Operator) -> Result<f64> {
        let a = self.apply(rho)?;
        Ok(crate::qstate::frobenius_norm(&a))
    }
}

/// One-shot convenience wrapper over [`Liouvillian::apply`].
pub fn apply(config: &ModelConfig, rho: &Operator) -> Result<Operator> {
    Liouvillian::new(config)?.apply(rho)
}

/// Column-stacking vectorization: `vec(ρ)[c·dim + r] = ρ[r, c]`.
pub fn vectorize(m: &Operator) -> Array1<C64> {
    Array1::from_iter(m.t().iter().cloned())
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &Array1<C64>) -> Result<Operator> {
    let len = v.len();
    let dim = (len as f64).sqrt().round() as usize;
    if dim * dim != len {
        return Err(Error::invalid(format!(
            "devectorize: length {len} is not a perfect square"
        )));
    }
    let arr = Array2::from_shape_vec((dim, dim).f(), v.to_vec())
        .map_err(|e| Error::invalid(format!("devectorize: {e}")))?;
    Ok(arr.as_standard_layout().to_owned())
}

/// Dense 4^N × 4^N matrix form of the generator over column-stacked ρ.
#[derive(Debug, Clone)]
pub struct SuperOperator {
    n_qubits: usize,
    matrix: Array2<C64>,
}

impl SuperOperator {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        self.matrix.dot(v)
    }

    pub fn apply_op(&self, rho: &Operator) -> Result<Operator> {
        devectorize(&self.apply_vec(&vectorize(rho)))
    }
}

/// Assemble the dense superoperator from Kronecker algebra. This is an
/// independent construction from [`Liouvillian::apply`]; their agreement is
/// pinned by tests.
pub fn assemble_dense(config: &ModelConfig) -> Result<SuperOperator> {
    let n = config.n_qubits;
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::Capacity(format!(
            "dense superoperator limited to {DENSE_QUBIT_LIMIT} qubits (got {n}); \
             use the matrix-free Liouvillian instead"
        )));
    }
    let dim = 1usize << n;
    let dl = dim * dim;
    let id = identity(dim);
    let kron = ndarray::linalg::kron;

    let mut l = Array2::<C64>::zeros((dl, dl));

    // −i (I ⊗ H − Hᵀ ⊗ I)
    let h = config.hamiltonian.matrix();
    let minus_i = C64::new(0.0, -1.0);
    l = l + (kron(&id, &h) - kron(&h.t().to_owned(), &id)).mapv(|z| z * minus_i);

    // Jump channels per site: rate · (c̄ ⊗ c − ½ I ⊗ c†c − ½ (c†c)ᵀ ⊗ I).
    let channels: [(f64, Operator); 3] = [
        (config.noise.decay_rate(), crate::qstate::sigma_minus()),
        (config.noise.excitation_rate(), crate::qstate::sigma_plus()),
        (config.noise.dephasing_rate(), crate::qstate::sigma_z()),
    ];
    for site in 1..=n {
        for (rate, c2) in &channels {
            if *rate == 0.0 {
                continue;
            }
            let c = embed_single(c2, site, n)?;
            let cdc = dagger(&c).dot(&c);
            let conj_c = c.mapv(|z| z.conj());
            let term = kron(&conj_c, &c)
                - kron(&id, &cdc).mapv(|z| z * 0.5)
                - kron(&cdc.t().to_owned(), &id).mapv(|z| z * 0.5);
            l = l + term.mapv(|z| z * *rate);
        }
    }

    // Reset channel: Kraus form of χ_i ⊗ tr_i with K_{m,a} = √λ_m (|u_m⟩⟨a|)_i.
    let r = config.reset.rate;
    if r > 0.0 {
        for (site0, st) in config.reset.states().iter().enumerate() {
            let site = site0 + 1;
            let (vals, vecs) = crate::qstate::eigh_hermitian(&hermitize(st.density()))?;
            for m in 0..2 {
                if vals[m] <= 1e-14 {
                    continue;
                }
                let w = vals[m].sqrt();
                for a in 0..2 {
                    let mut k2 = Array2::<C64>::zeros((2, 2));
                    for x in 0..2 {
                        k2[[x, a]] = vecs[[x, m]] * w;
                    }
                    let k = embed_single(&k2, site, n)?;
                    let conj_k = k.mapv(|z| z.conj());
                    l = l + kron(&conj_k, &k).mapv(|z| z * r);
                }
            }
        }
        let drain = C64::new(-(r * n as f64), 0.0);
        for d in 0..dl {
            l[[d, d]] += drain;
        }
    }

    Ok(SuperOperator {
        n_qubits: n,
        matrix: l,
    })
}

/// Outcome of the complete-positivity check.
#[derive(Debug, Clone, Copy)]
pub struct CpCheck {
    pub cp: bool,
    pub min_choi_eigenvalue: f64,
    pub dt: f64,
}

/// Largest rate appearing in the model, floored at 1; sets default time
/// scales.
pub fn rate_scale(config: &ModelConfig) -> f64 {
    let mut scale = config.hamiltonian.g;
    match config.noise {
        Noise::Dephasing(p) => scale = scale.max(p.gamma),
        Noise::General(p) => scale = scale.max(p.b).max(p.c),
    }
    scale.max(config.reset.rate).max(1.0)
}

/// Check that exp(ℒ·dt) is completely positive by building its Choi matrix
/// from the action on a full operator basis and testing positive
/// semidefiniteness to [`CHOI_TOL`].
///
/// `dt` defaults to `1e-3 / rate_scale(config)` so that a CP violation,
/// which enters at first order in dt, would sit far above the tolerance.
pub fn check_lindblad(config: &ModelConfig, dt: Option<f64>) -> Result<CpCheck> {
    if config.n_qubits > CP_CHECK_QUBIT_LIMIT {
        return Err(Error::Capacity(format!(
            "complete-positivity check limited to {CP_CHECK_QUBIT_LIMIT} qubits (got {}); \
             the noise and reset channels act sitewise, so checking the same rates on a \
             small register certifies them",
            config.n_qubits
        )));
    }
    let lio = Liouvillian::new(config)?;
    let dim = lio.dim();
    let dt = dt.unwrap_or(1e-3 / rate_scale(config));
    if dt <= 0.0 {
        return Err(Error::invalid("check_lindblad: dt must be > 0"));
    }
    let opts = RkOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..RkOptions::default()
    };

    let mut choi = Array2::<C64>::zeros((dim * dim, dim * dim));
    for a in 0..dim {
        for b in 0..dim {
            let mut basis = Array2::<C64>::zeros((dim, dim));
            basis[[a, b]] = C64::new(1.0, 0.0);
            let evolved = integrate(|y| lio.apply_raw(y), &basis, dt, &opts)?;
            for row in 0..dim {
                for col in 0..dim {
                    choi[[a * dim + row, b * dim + col]] = evolved[[row, col]];
                }
            }
        }
    }
    let (vals, _) = hermitize(&choi).eigh(UPLO::Lower)?;
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(CpCheck {
        cp: min >= CHOI_TOL,
        min_choi_eigenvalue: min,
        dt,
    })
}

/// Run [`check_lindblad`] on `trials` random valid configs on `n_qubits`.
pub fn check_lindblad_random(n_qubits: usize, trials: usize, seed: u64) -> Result<Vec<CpCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let config = random_config(&mut rng, n_qubits);
            check_lindblad(&config, None)
        })
        .collect()
}
