//! Closed forms for the two-qubit Ising model with per-site dephasing and
//! reset to |+⟩: steady-state matrix, the coefficient ODE right-hand side,
//! the negativity as a function of rates, the generator spectrum, and the
//! entanglement threshold in the reset rate.
//!
//! These are the independent oracles the numerical pipeline is tested
//! against.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::qstate::{bit_at, DensityMatrix, Operator, C64};

/// Rates of the two-qubit Ising + dephasing + reset model.
///
/// The physics depends only on `g/γ` and `r/γ`; absolute rates set the time
/// unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitParams {
    /// Ising coupling.
    pub g: f64,
    /// Dephasing rate.
    pub gamma: f64,
    /// Reset rate.
    pub r: f64,
}

impl TwoQubitParams {
    pub fn new(g: f64, gamma: f64, r: f64) -> Result<Self> {
        if [g, gamma, r].iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid("TwoQubitParams: rates must be ≥ 0"));
        }
        Ok(TwoQubitParams { g, gamma, r })
    }

    /// (g/γ, r/γ); defined only for γ > 0.
    pub fn reduced(&self) -> Result<(f64, f64)> {
        if self.gamma <= 0.0 {
            return Err(Error::invalid("reduced coordinates need gamma > 0"));
        }
        Ok((self.g / self.gamma, self.r / self.gamma))
    }
}

/// Right-hand side of the 16 coupled linear coefficient ODEs, with the
/// coefficients laid out as the 4×4 matrix C[s₁'s₂', s₁s₂]:
///
/// Ċ = {−ig[(−1)^{s₁'+s₂'} − (−1)^{s₁+s₂}]
///      + γ/2[(−1)^{s₁'+s₁} + (−1)^{s₂'+s₂} − 2] − 2r} C
///     + r/2 {C_{0s₂',0s₂} + C_{1s₂',1s₂} + C_{s₁'0,s₁0} + C_{s₁'1,s₁1}}
pub fn coefficient_rhs(c: &Operator, p: &TwoQubitParams) -> Result<Operator> {
    if c.nrows() != 4 || c.ncols() != 4 {
        return Err(Error::invalid("coefficient_rhs: expected a 4×4 matrix"));
    }
    let sign = |bit: usize| -> f64 {
        if bit == 0 {
            1.0
        } else {
            -1.0
        }
    };
    let mut out = Array2::<C64>::zeros((4, 4));
    for row in 0..4 {
        let s1p = bit_at(row, 1, 2);
        let s2p = bit_at(row, 2, 2);
        for col in 0..4 {
            let s1 = bit_at(col, 1, 2);
            let s2 = bit_at(col, 2, 2);

            let ham = C64::new(0.0, -p.g) * (sign(s1p) * sign(s2p) - sign(s1) * sign(s2));
            let deph = 0.5 * p.gamma * (sign(s1p) * sign(s1) + sign(s2p) * sign(s2) - 2.0);
            let local = ham + C64::new(deph - 2.0 * p.r, 0.0);

            // Reset drive: sums over the first and second site index.
            let idx = |a: usize, b: usize| a * 2 + b;
            let drive = c[[idx(0, s2p), idx(0, s2)]]
                + c[[idx(1, s2p), idx(1, s2)]]
                + c[[idx(s1p, 0), idx(s1, 0)]]
                + c[[idx(s1p, 1), idx(s1, 1)]];

            out[[row, col]] = local * c[[row, col]] + drive * (0.5 * p.r);
        }
    }
    Ok(out)
}

/// Denominator block `2g² + (r + γ/2)(r + γ)` shared by all closed forms.
fn denom_core(p: &TwoQubitParams) -> f64 {
    2.0 * p.g * p.g + (p.r + 0.5 * p.gamma) * (p.r + p.gamma)
}

/// The unique steady state for r > 0: diagonal ¼, the off-diagonal family
/// `r(−ig + r + γ/2) / (4(2g² + (r+γ/2)(r+γ)))`, a real anti-diagonal, and
/// the rest fixed by Hermiticity.
pub fn steady_state(p: &TwoQubitParams) -> Result<DensityMatrix> {
    if p.r <= 0.0 {
        return Err(Error::invalid(
            "steady_state: r must be > 0 (the r = 0 steady state is not unique)",
        ));
    }
    let dc = denom_core(p);
    // C_{00,01} = C_{00,10} = conj(C_{01,11}) = conj(C_{10,11})
    let v = C64::new(p.r * (p.r + 0.5 * p.gamma), -p.r * p.g) / (4.0 * dc);
    // Anti-diagonal entry, real.
    let w = p.r * p.r * (p.r + 0.5 * p.gamma) / (4.0 * (p.r + p.gamma) * dc);

    let mut m = Array2::<C64>::zeros((4, 4));
    for j in 0..4 {
        m[[j, j]] = C64::new(0.25, 0.0);
    }
    m[[0, 1]] = v;
    m[[0, 2]] = v;
    m[[1, 3]] = v.conj();
    m[[2, 3]] = v.conj();
    m[[0, 3]] = C64::new(w, 0.0);
    m[[1, 2]] = C64::new(w, 0.0);
    // Hermiticity.
    m[[1, 0]] = v.conj();
    m[[2, 0]] = v.conj();
    m[[3, 1]] = v;
    m[[3, 2]] = v;
    m[[3, 0]] = C64::new(w, 0.0);
    m[[2, 1]] = C64::new(w, 0.0);

    DensityMatrix::new(m)
}

/// Steady-state negativity
/// `max{0, −[γ(r+γ/2)² + g²(r+γ) − rg(r+γ)] / (2(r+γ)(2g²+(r+γ/2)(r+γ)))}`.
pub fn negativity(p: &TwoQubitParams) -> f64 {
    let num = p.gamma * (p.r + 0.5 * p.gamma).powi(2) + p.g * p.g * (p.r + p.gamma)
        - p.r * p.g * (p.r + p.gamma);
    let den = 2.0 * (p.r + p.gamma) * denom_core(p);
    (-num / den).max(0.0)
}

/// All 16 generator eigenvalues:
/// `{0, −r (×2), −2r, −2(r+γ) (×4), −(3r/2+γ) ± 2i√(g² − r²/16) (×4 each)}`.
/// For g² < r²/16 the square root is continued to the real branch.
pub fn spectrum(p: &TwoQubitParams) -> Vec<C64> {
    let mut out = Vec::with_capacity(16);
    out.push(C64::new(0.0, 0.0));
    out.push(C64::new(-p.r, 0.0));
    out.push(C64::new(-p.r, 0.0));
    out.push(C64::new(-2.0 * p.r, 0.0));
    for _ in 0..4 {
        out.push(C64::new(-2.0 * (p.r + p.gamma), 0.0));
    }
    let disc = C64::new(p.g * p.g - p.r * p.r / 16.0, 0.0).sqrt();
    let base = C64::new(-(1.5 * p.r + p.gamma), 0.0);
    let shift = C64::new(0.0, 2.0) * disc;
    for _ in 0..4 {
        out.push(base + shift);
        out.push(base - shift);
    }
    out
}

/// Smallest reset rate (in units of γ) with an entangled steady state at
/// coupling `g_over_gamma > 1`; the positive root of the negativity
/// numerator.
pub fn threshold_r(g_over_gamma: f64) -> Result<f64> {
    let g = g_over_gamma;
    if !g.is_finite() || g <= 1.0 {
        return Err(Error::invalid(
            "threshold_r: needs g/γ > 1; below that the steady state is separable for every r",
        ));
    }
    // γ = 1: (1−g) r² + (g² − g + 1) r + (g² + 1/4) = 0, positive root.
    let a = g - 1.0;
    let b = g * g - g + 1.0;
    let c = g * g + 0.25;
    Ok((b + (b * b + 4.0 * a * c).sqrt()) / (2.0 * a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::max_abs_diff;
    use approx::assert_abs_diff_eq;

    #[test]
    fn steady_state_matches_quoted_entries() {
        let p = TwoQubitParams::new(2.5, 1.0, 5.0).unwrap();
        let rho = steady_state(&p).unwrap();
        // (27.5 − 12.5i)/182 and 137.5/1092.
        let v = C64::new(27.5 / 182.0, -12.5 / 182.0);
        let w = 137.5 / 1092.0;
        assert!((rho.op()[[0, 1]] - v).norm() < 1e-12);
        assert!((rho.op()[[0, 2]] - v).norm() < 1e-12);
        assert!((rho.op()[[1, 3]] - v.conj()).norm() < 1e-12);
        assert_abs_diff_eq!(rho.op()[[0, 3]].re, w, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.op()[[1, 2]].re, w, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.op()[[0, 3]].im, 0.0, epsilon = 1e-15);
        for j in 0..4 {
            assert_abs_diff_eq!(rho.op()[[j, j]].re, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn steady_state_rejects_r_zero() {
        let p = TwoQubitParams::new(1.0, 1.0, 0.0).unwrap();
        assert!(steady_state(&p).is_err());
    }

    #[test]
    fn steady_state_is_fixed_point_of_coefficient_odes() {
        for (g, gamma, r) in [(2.5, 1.0, 5.0), (0.3, 2.0, 0.7), (10.0, 1.0, 12.0)] {
            let p = TwoQubitParams::new(g, gamma, r).unwrap();
            let rho = steady_state(&p).unwrap();
            let rhs = coefficient_rhs(rho.op(), &p).unwrap();
            assert!(
                crate::qstate::frobenius_norm(&rhs) < 1e-12,
                "({g},{gamma},{r})"
            );
        }
    }

    #[test]
    fn diagonal_coefficients_form_a_closed_set() {
        // A perturbation with only off-diagonal entries must not feed back
        // into the diagonal derivatives.
        let p = TwoQubitParams::new(1.7, 1.0, 0.9).unwrap();
        let mut c = Array2::<C64>::zeros((4, 4));
        c[[0, 3]] = C64::new(0.2, 0.1);
        c[[3, 0]] = C64::new(0.2, -0.1);
        c[[1, 2]] = C64::new(-0.05, 0.3);
        c[[2, 1]] = C64::new(-0.05, -0.3);
        let rhs = coefficient_rhs(&c, &p).unwrap();
        for j in 0..4 {
            assert!(rhs[[j, j]].norm() < 1e-15);
        }
    }

    #[test]
    fn negativity_quoted_values() {
        let p = TwoQubitParams::new(2.5, 1.0, 5.0).unwrap();
        assert_abs_diff_eq!(negativity(&p), 7.25 / 546.0, epsilon = 1e-15);

        // Below threshold: numerator positive → clamped to zero.
        let p = TwoQubitParams::new(2.5, 1.0, 2.0).unwrap();
        assert_eq!(negativity(&p), 0.0);
    }

    #[test]
    fn negativity_on_middle_line_approaches_global_maximum() {
        let rt = 1e4;
        let gt = rt / (1.0 + 3.0_f64.sqrt());
        let p = TwoQubitParams::new(gt, 1.0, rt).unwrap();
        let n = negativity(&p);
        assert!((n - 0.0915).abs() < 5e-4, "negativity {n}");
    }

    #[test]
    fn negativity_is_scale_invariant() {
        let base = TwoQubitParams::new(3.2, 1.0, 6.4).unwrap();
        let n0 = negativity(&base);
        for lambda in [1e-2, 0.5, 1.0, 7.3, 1e2] {
            let p =
                TwoQubitParams::new(base.g * lambda, base.gamma * lambda, base.r * lambda).unwrap();
            assert_abs_diff_eq!(negativity(&p), n0, epsilon = 1e-12);
        }
    }

    #[test]
    fn negativity_limits() {
        // r → ∞ at fixed g, γ: reset dominates, no entanglement left.
        let p = TwoQubitParams::new(10.0, 1.0, 1e9).unwrap();
        assert!(negativity(&p) < 1e-7);
        // Weak coupling g ≤ γ: separable for every r.
        for r in [0.1, 1.0, 10.0, 1e3] {
            let p = TwoQubitParams::new(1.0, 1.0, r).unwrap();
            assert_eq!(negativity(&p), 0.0);
            let p = TwoQubitParams::new(0.5, 1.0, r).unwrap();
            assert_eq!(negativity(&p), 0.0);
        }
        // g = 0: no interaction, nothing to entangle.
        let p = TwoQubitParams::new(0.0, 1.0, 3.0).unwrap();
        assert_eq!(negativity(&p), 0.0);
    }

    #[test]
    fn spectrum_values_at_unit_rates() {
        let p = TwoQubitParams::new(1.0, 1.0, 1.0).unwrap();
        let mut spec = spectrum(&p);
        assert_eq!(spec.len(), 16);
        let omega = (15.0_f64).sqrt() / 2.0; // 2√(1 − 1/16)
        let mut expected = vec![
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(-2.0, 0.0),
        ];
        expected.extend(std::iter::repeat_n(C64::new(-4.0, 0.0), 4));
        for _ in 0..4 {
            expected.push(C64::new(-2.5, omega));
            expected.push(C64::new(-2.5, -omega));
        }
        let key = |z: &C64| (z.re, z.im);
        spec.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        expected.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, b) in spec.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn spectrum_continues_to_real_branch() {
        // r > 4g: the complex pair becomes two real eigenvalues.
        let p = TwoQubitParams::new(0.5, 1.0, 4.0).unwrap();
        let spec = spectrum(&p);
        assert!(spec.iter().all(|z| z.im.abs() < 1e-14));
        let split = 2.0 * (p.r * p.r / 16.0 - p.g * p.g).sqrt();
        let base = -(1.5 * p.r + p.gamma);
        assert!(spec.iter().any(|z| (z.re - (base + split)).abs() < 1e-12));
        assert!(spec.iter().any(|z| (z.re - (base - split)).abs() < 1e-12));
    }

    #[test]
    fn threshold_matches_quoted_root_and_sign_change() {
        let rt = threshold_r(2.5).unwrap();
        assert_abs_diff_eq!(rt, (4.75 + 61.5625_f64.sqrt()) / 3.0, epsilon = 1e-12);
        assert!((rt - 4.1987).abs() < 1e-4);

        let below = TwoQubitParams::new(2.5, 1.0, 0.99 * rt).unwrap();
        let above = TwoQubitParams::new(2.5, 1.0, 1.01 * rt).unwrap();
        assert_eq!(negativity(&below), 0.0);
        assert!(negativity(&above) > 0.0);
    }

    #[test]
    fn threshold_requires_strong_coupling() {
        assert!(threshold_r(1.0).is_err());
        assert!(threshold_r(0.3).is_err());
    }

    #[test]
    fn boundary_approaches_asymptotes() {
        // Along increasing g̃ the lower boundary r̃*(g̃) has r̃*/g̃ → 1 from
        // above, approaching the g = r asymptote monotonically.
        let mut prev_ratio = f64::INFINITY;
        for gt in [10.0, 100.0, 1000.0] {
            let rt = threshold_r(gt).unwrap();
            let ratio = rt / gt;
            assert!(ratio > 1.0);
            assert!(ratio < prev_ratio);
            prev_ratio = ratio;
        }
        assert!((prev_ratio - 1.0).abs() < 0.01);
    }

    #[test]
    fn analytic_state_diagonal_in_weak_coupling_is_still_quarter() {
        let p = TwoQubitParams::new(0.2, 1.0, 0.3).unwrap();
        let rho = steady_state(&p).unwrap();
        let diag_quarter = Array2::from_diag(&ndarray::Array1::from_elem(4, C64::new(0.25, 0.0)));
        // Off-diagonals are small but nonzero; only the diagonal is pinned.
        for j in 0..4 {
            assert!((rho.op()[[j, j]] - diag_quarter[[j, j]]).norm() < 1e-15);
        }
        assert!(max_abs_diff(rho.op(), &diag_quarter) > 0.0);
    }
}
