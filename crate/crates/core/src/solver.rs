//! Steady states, finite-time propagation and generator spectra.
//!
//! Dense null-space extraction works up to [`DENSE_QUBIT_LIMIT`] qubits;
//! matrix-free long-time propagation covers larger registers (N ≤ 7).

use ndarray::Array1;
use ndarray_linalg::{Eig, Solve};

use crate::error::{Error, Result};
use crate::liouvillian::{
    assemble_dense, devectorize, rate_scale, vectorize, Liouvillian, DENSE_QUBIT_LIMIT,
};
use crate::models::ModelConfig;
use crate::ode::{integrate, RkOptions};
use crate::qstate::{
    frobenius_norm, hermiticity_error, hermitize, trace, DensityMatrix, Operator, C64,
};

/// Relative splitting point between "zero" and decaying eigenvalues.
const NULL_EIG_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub state: DensityMatrix,
    /// ‖ℒρ‖_F through the matrix-free generator.
    pub residual: f64,
    /// Whether the null space was one-dimensional (dense route), or the
    /// fixed point is assumed unique (evolution route).
    pub unique: bool,
    /// −max Re λ over decaying eigenvalues; available on the dense route.
    pub spectral_gap: Option<f64>,
}

/// Steady state from the dense null space: eigen-decompose ℒ, take the
/// null eigenvector(s), devectorize, Hermitize and normalize to trace one.
///
/// With a degenerate null space the returned representative is the
/// projection of the maximally mixed state onto the null space, flagged
/// `unique = false`.
pub fn steady_state_dense(config: &ModelConfig, tol: f64) -> Result<SteadyStateResult> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::invalid("steady_state_dense: tol must be > 0"));
    }
    let sup = assemble_dense(config)?;
    let lio = Liouvillian::new(config)?;
    let dim = 1usize << config.n_qubits;

    let (vals, vecs) = sup.matrix().eig()?;
    let max_mag = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ztol = NULL_EIG_REL_TOL * max_mag.max(1.0);

    let null_idx: Vec<usize> = (0..vals.len())
        .filter(|&i| vals[i].norm() <= ztol)
        .collect();
    if null_idx.is_empty() {
        let closest = vals.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        return Err(Error::Solver(format!(
            "no eigenvalue within {ztol:.3e} of zero (closest magnitude {closest:.3e})"
        )));
    }
    let unique = null_idx.len() == 1;

    let spectral_gap = (0..vals.len())
        .filter(|i| !null_idx.contains(i))
        .map(|i| -vals[i].re)
        .fold(f64::INFINITY, f64::min);
    let spectral_gap = if spectral_gap.is_finite() {
        Some(spectral_gap.max(0.0))
    } else {
        None
    };

    let raw = if unique {
        vecs.column(null_idx[0]).to_owned()
    } else {
        // Orthonormalize the null vectors and project vec(I/dim).
        let mut basis: Vec<Array1<C64>> = Vec::with_capacity(null_idx.len());
        for &i in &null_idx {
            let mut v = vecs.column(i).to_owned();
            for b in &basis {
                let overlap: C64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                v.zip_mut_with(b, |a, bb| *a -= overlap * bb);
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-12 {
                v.mapv_inplace(|z| z / norm);
                basis.push(v);
            }
        }
        let mixed = vectorize(&crate::qstate::identity(dim).mapv(|z| z / dim as f64));
        let mut proj = Array1::<C64>::zeros(dim * dim);
        for b in &basis {
            let overlap: C64 = b.iter().zip(mixed.iter()).map(|(x, y)| x.conj() * y).sum();
            proj.zip_mut_with(b, |a, bb| *a += overlap * bb);
        }
        proj
    };

    let state = normalize_to_state(&devectorize(&raw)?)?;
    let residual = frobenius_norm(&lio.apply(state.op())?);
    if residual > tol {
        return Err(Error::Solver(format!(
            "null-space candidate has residual {residual:.3e} above tolerance {tol:.1e}"
        )));
    }
    Ok(SteadyStateResult {
        state,
        residual,
        unique,
        spectral_gap,
    })
}

/// Cross-check utility: solve the trace-augmented linear system by LU.
/// One diagonal row of ℒ is redundant by trace preservation, so it is
/// replaced with the trace functional and the system solved for trace one.
/// Assumes a unique steady state.
pub fn steady_state_lu(config: &ModelConfig, tol: f64) -> Result<SteadyStateResult> {
    let sup = assemble_dense(config)?;
    let lio = Liouvillian::new(config)?;
    let dim = 1usize << config.n_qubits;
    let dl = dim * dim;

    let mut m = sup.matrix().clone();
    for col in 0..dl {
        m[[0, col]] = C64::new(0.0, 0.0);
    }
    for k in 0..dim {
        m[[0, k * dim + k]] = C64::new(1.0, 0.0);
    }
    let mut rhs = Array1::<C64>::zeros(dl);
    rhs[0] = C64::new(1.0, 0.0);
    let v = m
        .solve(&rhs)
        .map_err(|e| Error::Solver(format!("trace-augmented LU solve failed: {e}")))?;

    let state = normalize_to_state(&devectorize(&v)?)?;
    let residual = frobenius_norm(&lio.apply(state.op())?);
    if residual > tol {
        return Err(Error::Solver(format!(
            "LU steady state has residual {residual:.3e} above tolerance {tol:.1e}"
        )));
    }
    Ok(SteadyStateResult {
        state,
        residual,
        unique: true,
        spectral_gap: None,
    })
}

pub(crate) fn normalize_to_state(raw: &Operator) -> Result<DensityMatrix> {
    let tr = trace(raw);
    if tr.norm() < 1e-12 {
        return Err(Error::Solver(
            "null vector has vanishing trace; cannot normalize to a state".into(),
        ));
    }
    let normalized = raw.mapv(|z| z / tr);
    let state = DensityMatrix::new_unchecked(hermitize(&normalized))?;
    state.validate()?;
    Ok(state)
}

/// Smallest positive decay-rate estimate; sets default evolution horizons.
fn min_positive_rate(config: &ModelConfig) -> f64 {
    let mut rates = vec![];
    if config.reset.rate > 0.0 {
        rates.push(config.reset.rate);
    }
    let deph = 2.0 * config.noise.dephasing_rate();
    if deph > 0.0 {
        rates.push(deph);
    }
    let flip = config.noise.decay_rate() + config.noise.excitation_rate();
    if flip > 0.0 {
        rates.push(flip);
    }
    rates.into_iter().fold(f64::INFINITY, f64::min).min(1e6)
}

/// Default evolution horizon: 100 over the slowest decay-rate estimate.
pub fn default_t_max(config: &ModelConfig) -> f64 {
    let min_rate = min_positive_rate(config);
    if min_rate.is_finite() {
        100.0 / min_rate
    } else {
        100.0 / rate_scale(config)
    }
}

/// Matrix-free steady state: propagate `rho0` until ‖ℒρ‖_F ≤ `tol`.
///
/// The convergence criterion is the generator residual, not the change in
/// state, so slow transients cannot masquerade as convergence. Errors with
/// [`Error::Timeout`] carrying the last residual when `t_max` is reached.
pub fn steady_state_evolve(
    config: &ModelConfig,
    rho0: &DensityMatrix,
    tol: f64,
    t_max: Option<f64>,
) -> Result<SteadyStateResult> {
    let lio = Liouvillian::new(config)?;
    if rho0.dim() != lio.dim() {
        return Err(Error::invalid(format!(
            "steady_state_evolve: state on {} qubits, model on {}",
            rho0.n_qubits(),
            config.n_qubits
        )));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::invalid("steady_state_evolve: tol must be > 0"));
    }
    let t_max = t_max.unwrap_or_else(|| default_t_max(config));
    let (op, residual, _t) = evolve_to_residual(&lio, rho0.op().clone(), tol, t_max, config)?;
    let state = normalize_to_state(&op)?;
    Ok(SteadyStateResult {
        state,
        residual,
        unique: true,
        spectral_gap: None,
    })
}

/// Chunked integration until the residual drops below `tol`.
pub(crate) fn evolve_to_residual(
    lio: &Liouvillian,
    rho0: Operator,
    tol: f64,
    t_max: f64,
    config: &ModelConfig,
) -> Result<(Operator, f64, f64)> {
    // The residual bottoms out at the integrator's error floor, which
    // scales with rtol times the generator norm; keep that floor well
    // under the requested residual tolerance.
    let opts = RkOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..RkOptions::default()
    };
    let scale = rate_scale(config);
    let min_rate = min_positive_rate(config);
    let chunk_cap = if min_rate.is_finite() {
        20.0 / min_rate
    } else {
        20.0 / scale
    };

    let mut rho = rho0;
    let mut t = 0.0;
    let mut chunk = (1.0 / scale).min(t_max);
    let mut residual = frobenius_norm(&lio.apply_raw(&rho));
    if residual <= tol {
        return Ok((rho, residual, t));
    }
    while t < t_max {
        let step = chunk.min(t_max - t);
        rho = integrate(|y| lio.apply_raw(y), &rho, step, &opts)?;
        t += step;
        residual = frobenius_norm(&lio.apply_raw(&rho));
        if residual <= tol {
            return Ok((rho, residual, t));
        }
        chunk = (chunk * 2.0).min(chunk_cap);
    }
    Err(Error::Timeout { t, residual })
}

/// ρ(t) = exp(ℒt) ρ0 by adaptive integration; trace and Hermiticity drift
/// are checked to 1e-9 before the state is returned.
pub fn propagate(config: &ModelConfig, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if t < 0.0 {
        return Err(Error::invalid("propagate: t must be ≥ 0"));
    }
    let lio = Liouvillian::new(config)?;
    if rho0.dim() != lio.dim() {
        return Err(Error::invalid("propagate: dimension mismatch"));
    }
    let opts = RkOptions::default();
    let out = integrate(|y| lio.apply_raw(y), rho0.op(), t, &opts)?;

    let trace_drift = (trace(&out) - C64::new(1.0, 0.0)).norm();
    let herm_drift = hermiticity_error(&out);
    if trace_drift > 1e-9 || herm_drift > 1e-9 {
        return Err(Error::Integration(format!(
            "propagation drifted: |tr−1| = {trace_drift:.3e}, |ρ−ρ†| = {herm_drift:.3e}"
        )));
    }
    let tr = trace(&out);
    DensityMatrix::new_unchecked(hermitize(&out.mapv(|z| z / tr)))
}

/// All 4^N eigenvalues of the dense generator, sorted by descending real
/// part, then descending imaginary part.
pub fn spectrum(config: &ModelConfig) -> Result<Vec<C64>> {
    if config.n_qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::Capacity(format!(
            "spectrum needs the dense form; limited to {DENSE_QUBIT_LIMIT} qubits"
        )));
    }
    let sup = assemble_dense(config)?;
    let (vals, _) = sup.matrix().eig()?;
    let mut out: Vec<C64> = vals.to_vec();
    out.sort_by(|a, b| {
        (b.re, b.im)
            .partial_cmp(&(a.re, a.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// Greedy multiset match: for each expected value take the nearest remaining
/// computed value; returns the largest pairing distance.
pub fn multiset_match_distance(expected: &[C64], computed: &[C64]) -> f64 {
    let mut remaining: Vec<C64> = computed.to_vec();
    let mut worst = 0.0_f64;
    for e in expected {
        if remaining.is_empty() {
            return f64::INFINITY;
        }
        let (idx, dist) = remaining
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c - e).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        worst = worst.max(dist);
        remaining.swap_remove(idx);
    }
    if remaining.is_empty() {
        worst
    } else {
        f64::INFINITY
    }
}
