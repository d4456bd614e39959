//! Parameter-grid machinery: presets in reduced units (γ_ref = 1), grid
//! sweeps over (g/γ, r/γ), entanglement-boundary extraction, and the
//! multi-qubit curve sets behind the rate-scan figures.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::entanglement::{
    average_negativity, negativity, poisson_mixture, reduced_pair, MixtureSpec,
};
use crate::error::{Error, Result};
use crate::liouvillian::Liouvillian;
use crate::models::{HamiltonianSpec, ModelConfig, Noise, ResetSpec, ResetState};
use crate::qstate::{Bipartition, DensityMatrix, Pauli};
use crate::solver::{default_t_max, evolve_to_residual, steady_state_dense, SteadyStateResult};

/// Negativity below this counts as "not entangled" in boundary scans.
pub const ENTANGLEMENT_THRESHOLD: f64 = 1e-9;

/// Default residual tolerance for sweep solves.
pub const DEFAULT_SWEEP_TOL: f64 = 1e-8;

/// Qubit count above which sweeps switch from the dense null space to
/// matrix-free propagation.
pub const DENSE_SWEEP_LIMIT: usize = 4;

/// One axis of a parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn linear(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        GridSpec {
            lo,
            hi,
            steps,
            log: false,
        }
        .checked()
    }

    pub fn logarithmic(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        GridSpec {
            lo,
            hi,
            steps,
            log: true,
        }
        .checked()
    }

    fn checked(self) -> Result<Self> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::invalid("grid: bounds must be finite"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("grid: steps must be ≥ 1"));
        }
        if self.steps > 1 && self.hi <= self.lo {
            return Err(Error::invalid("grid: need hi > lo for multi-point axes"));
        }
        if self.log && self.lo <= 0.0 {
            return Err(Error::invalid("grid: log spacing needs lo > 0"));
        }
        Ok(self)
    }

    /// Parse `lo:hi:steps[:log|:lin]`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() < 3 || parts.len() > 4 {
            return Err(Error::invalid(format!(
                "grid `{text}`: expected lo:hi:steps[:log|:lin]"
            )));
        }
        let lo: f64 = parts[0]
            .parse()
            .map_err(|_| Error::invalid(format!("grid `{text}`: bad lower bound")))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|_| Error::invalid(format!("grid `{text}`: bad upper bound")))?;
        let steps: usize = parts[2]
            .parse()
            .map_err(|_| Error::invalid(format!("grid `{text}`: bad step count")))?;
        let log = match parts.get(3) {
            None => true, // asymptotes span decades; default log
            Some(&"log") => true,
            Some(&"lin") => false,
            Some(other) => {
                return Err(Error::invalid(format!(
                    "grid `{text}`: unknown spacing `{other}`"
                )))
            }
        };
        GridSpec { lo, hi, steps, log }.checked()
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let n = self.steps as f64 - 1.0;
        (0..self.steps)
            .map(|k| {
                let f = k as f64 / n;
                if self.log {
                    self.lo * (self.hi / self.lo).powf(f)
                } else {
                    self.lo + (self.hi - self.lo) * f
                }
            })
            .collect()
    }
}

// --- Presets (γ_ref = 1) ----------------------------------------------------

/// Two-qubit Ising + dephasing + reset-to-|+⟩ at reduced rates.
pub fn two_qubit_ising(g_over_gamma: f64, r_over_gamma: f64) -> ModelConfig {
    ModelConfig::new(
        2,
        HamiltonianSpec::ising(g_over_gamma, &[(1, 2)], 2).expect("static preset"),
        Noise::dephasing(1.0),
        ResetSpec::uniform(r_over_gamma, ResetState::plus(), 2),
    )
}

/// Two-qubit anisotropic-exchange model at g = 10 with the general noise
/// channel at the dephasing-free boundary (B = 2C, C = 1) and stationary
/// inversion `s`. s = 0 is a zero-temperature bath, s = 1/2 an
/// infinite-temperature one.
pub fn xyz_general_noise(s: f64, r_over_gamma: f64) -> ModelConfig {
    ModelConfig::new(
        2,
        HamiltonianSpec::xyz_field(10.0).expect("static preset"),
        Noise::general(2.0, 1.0, s),
        ResetSpec::uniform(r_over_gamma, ResetState::plus(), 2),
    )
}

/// N qubits, all pairs Ising-coupled, dephasing at unit rate, reset to |+⟩.
pub fn symmetric_ising(n_qubits: usize, g_over_gamma: f64, r_over_gamma: f64) -> ModelConfig {
    ModelConfig::new(
        n_qubits,
        HamiltonianSpec::ising_all_pairs(g_over_gamma, n_qubits).expect("static preset"),
        Noise::dephasing(1.0),
        ResetSpec::uniform(r_over_gamma, ResetState::plus(), n_qubits),
    )
}

/// Two-qubit model with r = 0 and a pure decay channel (`s`, B = 2γ, C = γ)
/// under `H = g σ_x σ_x`; the no-reset counterpoint.
pub fn decay_channel_xx(g: f64, s: f64) -> ModelConfig {
    ModelConfig::new(
        2,
        HamiltonianSpec::from_terms(
            2,
            g,
            vec![crate::models::HamiltonianTerm {
                coefficient: 1.0,
                word: crate::models::PauliWord::from_sites(2, &[(1, Pauli::X), (2, Pauli::X)])
                    .expect("static preset"),
            }],
        )
        .expect("static preset"),
        Noise::general(2.0, 1.0, s),
        ResetSpec::uniform(0.0, ResetState::plus(), 2),
    )
}

// --- Steady-state routing ---------------------------------------------------

/// Dense null space for small registers, matrix-free propagation above
/// [`DENSE_SWEEP_LIMIT`]; `warm` seeds the propagation when given.
pub fn steady_state_auto(
    config: &ModelConfig,
    tol: f64,
    warm: Option<&DensityMatrix>,
) -> Result<SteadyStateResult> {
    if config.n_qubits <= DENSE_SWEEP_LIMIT {
        steady_state_dense(config, tol)
    } else {
        let lio = Liouvillian::new(config)?;
        let rho0 = warm
            .cloned()
            .unwrap_or_else(|| DensityMatrix::maximally_mixed(config.n_qubits));
        // Collective slow modes can undercut the single-site rate estimate;
        // give sweeps a generous horizon (convergence stops early anyway).
        let t_max = 10.0 * default_t_max(config);
        let (op, residual, _t) = evolve_to_residual(&lio, rho0.into_op(), tol, t_max, config)?;
        let state = crate::solver::normalize_to_state(&op)?;
        Ok(SteadyStateResult {
            state,
            residual,
            unique: true,
            spectral_gap: None,
        })
    }
}

// --- Grid sweeps -------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub g_over_gamma: f64,
    pub r_over_gamma: f64,
    /// Negativity of the (1|2) split for two qubits; negativity of the
    /// reduced (1,2) pair for larger registers.
    pub negativity: f64,
    pub avg_negativity: Option<f64>,
    pub residual: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: usize,
}

fn solve_point(config: &ModelConfig, tol: f64, with_avg: bool) -> Result<(f64, Option<f64>, f64)> {
    let result = steady_state_auto(config, tol, None)?;
    let (neg, avg) = if config.n_qubits == 2 {
        let split = Bipartition::new(2, [1])?;
        let n = negativity(&result.state, &split)?;
        (n, if with_avg { Some(n) } else { None })
    } else {
        let pair = reduced_pair(&result.state, 1, 2)?;
        let split = Bipartition::new(2, [1])?;
        let n = negativity(&pair, &split)?;
        let avg = if with_avg {
            Some(average_negativity(&result.state)?)
        } else {
            None
        };
        (n, avg)
    };
    Ok((neg, avg, result.residual))
}

/// Evaluate the steady-state negativity over a (g/γ, r/γ) grid in row-major
/// order. Failed points yield NaN rows and are counted, never aborting the
/// sweep.
pub fn sweep(
    base: &ModelConfig,
    g_grid: &GridSpec,
    r_grid: &GridSpec,
    tol: f64,
    with_avg: bool,
) -> SweepOutcome {
    let g_values = g_grid.values();
    let r_values = r_grid.values();
    let points: Vec<(f64, f64)> = g_values
        .iter()
        .flat_map(|&g| r_values.iter().map(move |&r| (g, r)))
        .collect();

    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(g, r)| {
            let start = Instant::now();
            let config = base.with_rates(g, r);
            match solve_point(&config, tol, with_avg) {
                Ok((neg, avg, residual)) => SweepRow {
                    g_over_gamma: g,
                    r_over_gamma: r,
                    negativity: neg,
                    avg_negativity: avg,
                    residual,
                    wall_time_s: start.elapsed().as_secs_f64(),
                },
                Err(_) => SweepRow {
                    g_over_gamma: g,
                    r_over_gamma: r,
                    negativity: f64::NAN,
                    avg_negativity: if with_avg { Some(f64::NAN) } else { None },
                    residual: f64::NAN,
                    wall_time_s: start.elapsed().as_secs_f64(),
                },
            }
        })
        .collect();

    let failures = rows.iter().filter(|r| r.negativity.is_nan()).count();
    SweepOutcome { rows, failures }
}

// --- Boundary extraction ------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BoundaryRow {
    pub g_over_gamma: f64,
    /// Smallest r/γ with negativity above threshold, by bisection; `None`
    /// when no crossing was found in the search window.
    pub r_star: Option<f64>,
    /// Closed-form root for the reference two-qubit Ising model, when it
    /// applies.
    pub closed_form: Option<f64>,
}

/// Whether `config` is the reference two-qubit Ising + dephasing +
/// reset-to-|+⟩ family (for which the closed-form boundary exists).
pub fn is_reference_two_qubit_model(config: &ModelConfig) -> bool {
    if config.n_qubits != 2 || !matches!(config.noise, Noise::Dephasing(_)) {
        return false;
    }
    if config.hamiltonian.terms.len() != 1 {
        return false;
    }
    let term = &config.hamiltonian.terms[0];
    let zz = term.word.letters() == [Pauli::Z, Pauli::Z] && (term.coefficient - 1.0).abs() < 1e-12;
    let plus = ResetState::plus();
    zz && config
        .reset
        .states()
        .iter()
        .all(|s| crate::qstate::max_abs_diff(s.density(), plus.density()) < 1e-12)
}

fn negativity_at(base: &ModelConfig, g: f64, r: f64, tol: f64) -> Result<f64> {
    let config = base.with_rates(g, r);
    let result = steady_state_auto(&config, tol, None)?;
    let split = Bipartition::new(config.n_qubits, [1])?;
    if config.n_qubits == 2 {
        negativity(&result.state, &split)
    } else {
        let pair = reduced_pair(&result.state, 1, 2)?;
        negativity(&pair, &Bipartition::new(2, [1])?)
    }
}

/// For each coupling, bisect the smallest r/γ whose steady state is
/// entangled. The search bracket is found on a log grid over
/// `[r_lo, r_hi]`; bisection refines to `1e-6` in r/γ.
pub fn boundary_scan(
    base: &ModelConfig,
    g_values: &[f64],
    r_lo: f64,
    r_hi: f64,
    tol: f64,
) -> Vec<BoundaryRow> {
    let reference = is_reference_two_qubit_model(base);
    g_values
        .par_iter()
        .map(|&g| {
            let closed_form = if reference {
                crate::analytic::threshold_r(g).ok()
            } else {
                None
            };
            let r_star = bisect_boundary(base, g, r_lo, r_hi, tol);
            BoundaryRow {
                g_over_gamma: g,
                r_star,
                closed_form,
            }
        })
        .collect()
}

fn bisect_boundary(base: &ModelConfig, g: f64, r_lo: f64, r_hi: f64, tol: f64) -> Option<f64> {
    let entangled = |r: f64| -> Option<bool> {
        negativity_at(base, g, r, tol)
            .ok()
            .map(|n| n > ENTANGLEMENT_THRESHOLD)
    };
    // Locate a sign change on a log probe grid.
    let probes = 33;
    let mut prev_r = r_lo;
    let mut prev = entangled(prev_r)?;
    if prev {
        // Already entangled at the lower edge; the boundary sits below the
        // search window.
        return Some(r_lo);
    }
    let mut bracket = None;
    for k in 1..probes {
        let r = r_lo * (r_hi / r_lo).powf(k as f64 / (probes - 1) as f64);
        let here = entangled(r)?;
        if here != prev {
            bracket = Some((prev_r, r));
            break;
        }
        prev_r = r;
        prev = here;
    }
    let (mut lo, mut hi) = bracket?;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if entangled(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

// --- Figure curves -------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TemperatureCurveRow {
    pub r_over_gamma: f64,
    pub negativity_s0: f64,
    pub negativity_s05: f64,
}

/// Steady-state negativity of the anisotropic-exchange preset versus reset
/// rate, at zero (`s = 0`) and infinite (`s = 1/2`) bath temperature.
pub fn temperature_curves(r_values: &[f64], tol: f64) -> Result<Vec<TemperatureCurveRow>> {
    let split = Bipartition::new(2, [1])?;
    r_values
        .par_iter()
        .map(|&r| {
            let cold = steady_state_dense(&xyz_general_noise(0.0, r), tol)?;
            let hot = steady_state_dense(&xyz_general_noise(0.5, r), tol)?;
            Ok(TemperatureCurveRow {
                r_over_gamma: r,
                negativity_s0: negativity(&cold.state, &split)?,
                negativity_s05: negativity(&hot.state, &split)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct MultiQubitCurveRow {
    pub r_over_gamma: f64,
    pub avg_negativity_5q: f64,
    pub pair_negativity_5q: f64,
    pub pair_negativity_poisson: f64,
}

/// The three multi-qubit curves versus reset rate at g = 5γ: average
/// negativity of the symmetric 5-qubit steady state, negativity of its
/// reduced (1,2) pair, and the pair negativity of the Poisson mixture of
/// reduced pairs over N ∈ [2, 6].
pub fn multi_qubit_curves(
    r_values: &[f64],
    lambda: f64,
    tol: f64,
) -> Result<Vec<MultiQubitCurveRow>> {
    const G_OVER_GAMMA: f64 = 5.0;
    const N_MIN: usize = 2;
    const N_MAX: usize = 6;
    let spec = MixtureSpec::new(N_MIN, N_MAX, lambda)?;
    let split = Bipartition::new(2, [1])?;

    // Per N: reduced (1,2) pair states along the r grid, plus the full
    // 5-qubit states for the average negativity. Chains walk r downward so
    // each solve warm-starts from the faster-converging neighbor above.
    struct Chain {
        pairs: Vec<DensityMatrix>,
        avg_neg: Option<Vec<f64>>,
    }

    let chain_for = |n: usize| -> Result<Chain> {
        let mut order: Vec<(usize, f64)> = r_values.iter().cloned().enumerate().collect();
        order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let mut pairs: Vec<Option<DensityMatrix>> = vec![None; r_values.len()];
        let mut avgs: Vec<f64> = vec![0.0; r_values.len()];
        let mut warm: Option<DensityMatrix> = None;
        for (idx, r) in order {
            let config = symmetric_ising(n, G_OVER_GAMMA, r);
            let result = steady_state_auto(&config, tol, warm.as_ref())?;
            if n == 5 {
                avgs[idx] = average_negativity(&result.state)?;
            }
            pairs[idx] = Some(reduced_pair(&result.state, 1, 2)?);
            warm = Some(result.state);
        }
        Ok(Chain {
            pairs: pairs.into_iter().map(|p| p.unwrap()).collect(),
            avg_neg: (n == 5).then_some(avgs),
        })
    };

    let chains: Vec<Result<Chain>> = (N_MIN..=N_MAX).into_par_iter().map(chain_for).collect();
    let mut by_n: BTreeMap<usize, Chain> = BTreeMap::new();
    for (n, chain) in (N_MIN..=N_MAX).zip(chains) {
        by_n.insert(n, chain?);
    }

    let mut rows = Vec::with_capacity(r_values.len());
    for (idx, &r) in r_values.iter().enumerate() {
        let five = &by_n[&5];
        let pair5 = &five.pairs[idx];
        let mixture_states: BTreeMap<usize, DensityMatrix> = by_n
            .iter()
            .map(|(&n, chain)| (n, chain.pairs[idx].clone()))
            .collect();
        let mixed = poisson_mixture(&mixture_states, &spec)?;
        rows.push(MultiQubitCurveRow {
            r_over_gamma: r,
            avg_negativity_5q: five.avg_neg.as_ref().unwrap()[idx],
            pair_negativity_5q: negativity(pair5, &split)?,
            pair_negativity_poisson: negativity(&mixed, &split)?,
        });
    }
    Ok(rows)
}
