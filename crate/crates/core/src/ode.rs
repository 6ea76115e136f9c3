//! Explicit Runge–Kutta steppers: classical RK4 with a fixed step, and the
//! Dormand–Prince 5(4) pair with PI step-size control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

/// Classical RK4 over `[t0, t1]` with `ceil((t1 - t0) / h)` equal steps.
///
/// `after_step` sees every accepted state and may modify it in place
/// (projection, clamping); returning an error aborts the run.
pub fn rk4<F, S>(mut f: F, y0: &[f64], t0: f64, t1: f64, h: f64, mut after_step: S) -> Result<SolverStats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let steps = ((t1 - t0) / h).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        f(t, &y, &mut k1);
        axpy(&mut tmp, &y, 0.5 * h, &k1);
        f(t + 0.5 * h, &tmp, &mut k2);
        axpy(&mut tmp, &y, 0.5 * h, &k2);
        f(t + 0.5 * h, &tmp, &mut k3);
        axpy(&mut tmp, &y, h, &k3);
        f(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = if s + 1 == steps { t1 } else { t0 + (s + 1) as f64 * h };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t_next });
        }
        after_step(t_next, &mut y)?;
    }
    Ok(SolverStats {
        steps,
        rejected: 0,
        evaluations: 4 * steps,
    })
}

fn axpy(out: &mut [f64], y: &[f64], a: f64, k: &[f64]) {
    for ((o, yi), ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + a * ki;
    }
}

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// Dormand–Prince 5(4) with FSAL and PI control. The step never exceeds
/// `max_step` and the last step lands exactly on `t1`.
pub fn dopri5<F, S>(mut f: F, y0: &[f64], t0: f64, t1: f64, opts: &AdaptiveOptions, mut after_step: S) -> Result<SolverStats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let mut stats = SolverStats::default();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut t = t0;
    f(t, &y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t, &y, &k[0], opts, &mut stats).min(t1 - t0);
    let mut err_prev: f64 = 1e-4;
    let mut last_rejected = false;

    while t < t1 {
        if stats.steps + stats.rejected >= opts.max_steps {
            return Err(Error::InvalidConfig(format!("step limit {} reached at t = {t}", opts.max_steps)));
        }
        let remaining = t1 - t;
        let mut final_step = false;
        if h >= remaining {
            h = remaining;
            final_step = true;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + h * acc;
            }
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
            let (_, rest) = k.split_at_mut(s);
            f(t + C[s] * h, &stage, &mut rest[0]);
        }
        stats.evaluations += 6;

        let mut sum = 0.0;
        for i in 0..n {
            let err_i: f64 = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            sum += (err_i / scale).powi(2);
        }
        let err = (sum / n.max(1) as f64).sqrt();

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            stats.rejected += 1;
            h *= MIN_FACTOR;
            if h <= f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::NonFinite { t });
            }
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            t = if final_step { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            y_new.copy_from_slice(&y);
            after_step(t, &mut y)?;
            // FSAL: the last stage is f(t + h, y_new); recompute only if the
            // observer moved the state.
            if y != y_new {
                f(t, &y, &mut k[0]);
                stats.evaluations += 1;
            } else {
                let last = k[6].clone();
                k[0].copy_from_slice(&last);
            }
            stats.steps += 1;
            let mut factor = SAFETY * err.max(1e-10).powf(-ALPHA) * err_prev.powf(BETA);
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = (h * factor).min(opts.max_step);
            err_prev = err.max(1e-4);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let factor = (SAFETY * err.powf(-ALPHA)).max(MIN_FACTOR);
            h *= factor;
            last_rejected = true;
            if h <= f64::EPSILON * t.abs().max(1.0) {
                return Err(Error::NonFinite { t });
            }
        }
    }
    Ok(stats)
}

/// Starting step from the standard two-evaluation heuristic.
fn initial_step<F>(f: &mut F, t: f64, y: &[f64], f0: &[f64], opts: &AdaptiveOptions, stats: &mut SolverStats) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let scale: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let norm = |v: &[f64]| -> f64 {
        (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(opts.max_step);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; n];
    f(t + h0, &y1, &mut f1);
    stats.evaluations += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}
