//! Adaptive Dormand–Prince 5(4) integration for matrix-valued linear ODEs
//! `dY/dt = F(Y)` with a time-independent right-hand side.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::qstate::{Operator, C64};

#[derive(Debug, Clone, Copy)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        RkOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 50_000_000,
        }
    }
}

/// Scaled RMS norm used for both error control and step-size selection.
fn scaled_norm(err: &Array2<C64>, y0: &Array2<C64>, y1: &Array2<C64>, opts: &RkOptions) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (a, b))| {
            let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
            let r = e.norm() / sc;
            r * r
        })
        .sum();
    (sum / n).sqrt()
}

fn rms(y: &Array2<C64>) -> f64 {
    let n = y.len() as f64;
    (y.iter().map(|z| z.norm_sqr()).sum::<f64>() / n).sqrt()
}

/// Hairer's starting-step heuristic for an autonomous system.
fn initial_step<F>(f: &F, y0: &Array2<C64>, f0: &Array2<C64>, span: f64) -> f64
where
    F: Fn(&Array2<C64>) -> Array2<C64>,
{
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1 = y0 + &f0.mapv(|z| z * h0);
    let f1 = f(&y1);
    let d2 = rms(&(&f1 - f0)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrate `dY/dt = F(Y)` from 0 to `span`; returns `Y(span)`.
pub fn integrate<F>(f: F, y0: &Operator, span: f64, opts: &RkOptions) -> Result<Operator>
where
    F: Fn(&Operator) -> Operator,
{
    if span < 0.0 {
        return Err(Error::invalid("integrate: span must be ≥ 0"));
    }
    if span == 0.0 {
        return Ok(y0.clone());
    }

    // Dormand–Prince coefficients.
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // b − b̂ for the embedded 4th-order error estimate.
    const D1: f64 = 71.0 / 57_600.0;
    const D3: f64 = -71.0 / 16_695.0;
    const D4: f64 = 71.0 / 1_920.0;
    const D5: f64 = -17_253.0 / 339_200.0;
    const D6: f64 = 22.0 / 525.0;
    const D7: f64 = -1.0 / 40.0;

    let mut t = 0.0;
    let mut y = y0.clone();
    let mut k1 = f(&y);
    let mut h = initial_step(&f, &y, &k1, span);
    let h_floor = span * 1e-14;

    let lin = |pieces: &[(f64, &Array2<C64>)]| -> Array2<C64> {
        let mut acc = Array2::<C64>::zeros(y0.raw_dim());
        for &(w, m) in pieces {
            acc.zip_mut_with(m, |a, b| *a += b * w);
        }
        acc
    };

    for _step in 0..opts.max_steps {
        if t >= span {
            return Ok(y);
        }
        h = h.min(span - t);
        if h < h_floor {
            return Err(Error::Integration(format!(
                "step size underflow at t = {t:.6e} (h = {h:.3e})"
            )));
        }

        let y2 = &y + &lin(&[(h * A21, &k1)]);
        let k2 = f(&y2);
        let y3 = &y + &lin(&[(h * A31, &k1), (h * A32, &k2)]);
        let k3 = f(&y3);
        let y4 = &y + &lin(&[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]);
        let k4 = f(&y4);
        let y5 = &y
            + &lin(&[
                (h * A51, &k1),
                (h * A52, &k2),
                (h * A53, &k3),
                (h * A54, &k4),
            ]);
        let k5 = f(&y5);
        let y6 = &y
            + &lin(&[
                (h * A61, &k1),
                (h * A62, &k2),
                (h * A63, &k3),
                (h * A64, &k4),
                (h * A65, &k5),
            ]);
        let k6 = f(&y6);
        let y_next = &y
            + &lin(&[
                (h * B1, &k1),
                (h * B3, &k3),
                (h * B4, &k4),
                (h * B5, &k5),
                (h * B6, &k6),
            ]);
        let k7 = f(&y_next);

        let err = lin(&[
            (h * D1, &k1),
            (h * D3, &k3),
            (h * D4, &k4),
            (h * D5, &k5),
            (h * D6, &k6),
            (h * D7, &k7),
        ]);
        let err_norm = scaled_norm(&err, &y, &y_next, opts);

        if err_norm <= 1.0 {
            t += h;
            y = y_next;
            k1 = k7; // FSAL
        }
        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Err(Error::Integration(format!(
        "step budget {} exhausted at t = {t:.6e} of {span:.6e}",
        opts.max_steps
    )))
}
