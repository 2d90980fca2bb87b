//! Embedded Dormand-Prince 5(4) integration over complex state vectors.
//!
//! The error estimate can be restricted to a prefix of the state so that
//! slaved quadrature components (accumulated time, arclength) do not steer
//! the step size.

use num_complex::Complex64;
use thiserror::Error;

pub const DEFAULT_H0: f64 = 1e-3;
pub const H_FLOOR: f64 = 1e-12;

#[derive(Error, Debug)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted at t = {t}")]
    StepBudget { t: f64 },
    #[error("derivative returned a non-finite value at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub tol: f64,
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Number of leading state components used for error control;
    /// 0 means all of them.
    pub n_controlled: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tol: 1e-10,
            h0: DEFAULT_H0,
            h_min: H_FLOOR,
            h_max: 1.0,
            max_steps: 2_000_000,
            n_controlled: 0,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            tol,
            ..Default::default()
        }
    }
}

pub enum OdeControl {
    Continue,
    /// Stop after this accepted step.
    Stop,
    /// Discard this step and retry from its start with the given size.
    Retry(f64),
}

/// One accepted step as seen by the observer.
pub struct OdeStep<'a> {
    pub t0: f64,
    pub t1: f64,
    pub y0: &'a [Complex64],
    pub y1: &'a [Complex64],
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Single 5th-order step with embedded 4th-order error estimate.
/// Returns `(y1, per-component error)`.
pub fn dopri5_step<F>(f: &F, t: f64, y: &[Complex64], h: f64) -> (Vec<Complex64>, Vec<f64>)
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    let n = y.len();
    let mut k = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    f(t, y, &mut k[0]);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    for stage in 0..6 {
        for i in 0..n {
            let mut acc = y[i];
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = A[stage][j];
                if a != 0.0 {
                    acc += kj[i] * (a * h);
                }
            }
            scratch[i] = acc;
        }
        let ts = t + C[stage] * h;
        let (head, tail) = k.split_at_mut(stage + 1);
        let _ = head;
        f(ts, &scratch, &mut tail[0]);
    }
    let mut y1 = vec![Complex64::new(0.0, 0.0); n];
    let mut err = vec![0.0f64; n];
    for i in 0..n {
        let mut acc5 = y[i];
        let mut acc4 = y[i];
        for (j, kj) in k.iter().enumerate() {
            if B5[j] != 0.0 {
                acc5 += kj[i] * (B5[j] * h);
            }
            if B4[j] != 0.0 {
                acc4 += kj[i] * (B4[j] * h);
            }
        }
        y1[i] = acc5;
        err[i] = (acc5 - acc4).norm();
    }
    (y1, err)
}

/// Adaptive driver. The observer sees every accepted step and may stop the
/// integration or ask for the step to be redone at a smaller size (event
/// localization by bisection).
pub fn integrate<F, O>(
    f: F,
    t0: f64,
    y0: Vec<Complex64>,
    t_end: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> Result<(f64, Vec<Complex64>), OdeError>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(&OdeStep) -> OdeControl,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h0.min(opts.h_max).min((t_end - t0).abs().max(1e-30));
    let n_ctrl = if opts.n_controlled == 0 {
        y.len()
    } else {
        opts.n_controlled.min(y.len())
    };
    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok((t, y));
        }
        h = h.min(t_end - t).min(opts.h_max);
        let (y1, err) = dopri5_step(&f, t, &y, h);
        if y1.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            h *= 0.25;
            if h < opts.h_min {
                return Err(OdeError::NonFinite { t });
            }
            continue;
        }
        let mut scaled = 0.0f64;
        for i in 0..n_ctrl {
            let sc = opts.tol * (1.0 + y[i].norm().max(y1[i].norm()));
            scaled = scaled.max(err[i] / sc);
        }
        if scaled <= 1.0 {
            let step = OdeStep {
                t0: t,
                t1: t + h,
                y0: &y,
                y1: &y1,
            };
            match observer(&step) {
                OdeControl::Continue => {
                    t += h;
                    y = y1;
                    let grow = if scaled > 0.0 {
                        0.9 * scaled.powf(-0.2)
                    } else {
                        5.0
                    };
                    h *= grow.clamp(0.2, 5.0);
                    h = h.max(opts.h_min);
                }
                OdeControl::Stop => {
                    return Ok((t + h, y1));
                }
                OdeControl::Retry(hnew) => {
                    if hnew < opts.h_min {
                        return Err(OdeError::StepUnderflow { t, h: hnew });
                    }
                    h = hnew;
                }
            }
        } else {
            h *= (0.9 * scaled.powf(-0.2)).clamp(0.1, 0.9);
            if h < opts.h_min {
                return Err(OdeError::StepUnderflow { t, h });
            }
        }
    }
    Err(OdeError::StepBudget { t })
}

/// Integrate along a parametrized complex path `x(s)`, `s` in `[0, 1]`,
/// carrying auxiliary state via `dY/ds = g(x(s), x'(s), Y)`.
pub fn integrate_along_path<P, G>(
    path: P,
    g: G,
    y0: Vec<Complex64>,
    tol: f64,
) -> Result<Vec<Complex64>, OdeError>
where
    P: Fn(f64) -> (Complex64, Complex64),
    G: Fn(Complex64, Complex64, &[Complex64], &mut [Complex64]),
{
    let opts = OdeOptions {
        tol,
        h0: 1e-2,
        h_max: 0.1,
        ..Default::default()
    };
    let f = |s: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let (x, dx) = path(s);
        g(x, dx, y, dy);
    };
    let (_, y) = integrate(f, 0.0, y0, 1.0, &opts, |_| OdeControl::Continue)?;
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let f = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = -y[0];
        };
        let (t, y) = integrate(
            f,
            0.0,
            vec![Complex64::new(1.0, 0.0)],
            5.0,
            &OdeOptions::with_tol(1e-12),
            |_| OdeControl::Continue,
        )
        .unwrap();
        assert!((t - 5.0).abs() < 1e-12);
        assert!((y[0].re - (-5.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn circular_contour_picks_up_residue() {
        // integral of dz/z over the unit circle = 2 pi i
        let path = |s: f64| {
            let ang = 2.0 * std::f64::consts::PI * s;
            let x = Complex64::from_polar(1.0, ang);
            let dx = Complex64::new(0.0, 2.0 * std::f64::consts::PI) * x;
            (x, dx)
        };
        let g = |x: Complex64, dx: Complex64, _y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = dx / x;
        };
        let y = integrate_along_path(path, g, vec![Complex64::new(0.0, 0.0)], 1e-12).unwrap();
        let expected = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        assert!((y[0] - expected).norm() < 1e-10);
    }

    #[test]
    fn stiffish_problem_respects_tolerance() {
        // y' = 25(cos t - y): solution settles near cos t
        let f = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = Complex64::new(25.0 * (t.cos() - y[0].re), -25.0 * y[0].im);
        };
        let (_, y) = integrate(
            f,
            0.0,
            vec![Complex64::new(0.0, 0.0)],
            8.0,
            &OdeOptions::with_tol(1e-10),
            |_| OdeControl::Continue,
        )
        .unwrap();
        let expect = (25.0 * (25.0 * 8.0f64.cos() + 8.0f64.sin()) - 25.0 * (-200.0f64).exp())
            / 626.0;
        assert!((y[0].re - expect).abs() < 1e-7);
    }
}
