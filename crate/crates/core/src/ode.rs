//! Dormand-Prince 5(4) integrator with step-size control and the free
//! fourth-order continuous extension, used to emit samples on a fixed grid
//! independent of the internal steps.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Right-hand side of `y' = f(t, y)`.
pub trait OdeSystem<T, const N: usize> {
    fn rhs(&mut self, t: T, y: &[T; N]) -> Result<[T; N]>;
}

impl<T, const N: usize, F> OdeSystem<T, N> for F
where
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    fn rhs(&mut self, t: T, y: &[T; N]) -> Result<[T; N]> {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Smallest step accepted before reporting [`Error::StepFailure`], s.
    pub min_step: T,
    pub max_step: T,
    /// Spacing of the emitted samples, s.
    pub output_interval: T,
    pub max_steps: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-6),
            atol: T::lit(1e-8),
            min_step: T::lit(1e-12),
            max_step: T::lit(0.05),
            output_interval: T::lit(0.01),
            max_steps: 50_000_000,
        }
    }
}

impl<T: Scalar> SolverOptions<T> {
    /// Same options with both tolerances scaled by `factor`.
    pub fn scaled_tolerances(self, factor: T) -> Self {
        Self { rtol: self.rtol * factor, atol: self.atol * factor, ..self }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn axpy<T: Scalar, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc = acc + T::lit(*c) * k[i];
        }
        *o = *o + h * acc;
    }
    out
}

/// Integrates from `t0` to `t_end`, calling `on_sample(t, y)` at
/// `t0 + k * output_interval` for every grid point in `[t0, t_end]` and once
/// more at `t_end` if it is off the grid. Returns the state at `t_end`.
pub fn solve<T, const N: usize, S, F>(
    system: &mut S,
    t0: T,
    y0: [T; N],
    t_end: T,
    opts: &SolverOptions<T>,
    mut on_sample: F,
) -> Result<([T; N], SolverStats)>
where
    T: Scalar,
    S: OdeSystem<T, N>,
    F: FnMut(T, &[T; N]) -> Result<()>,
{
    let mut stats = SolverStats::default();
    let span = t_end - t0;
    let dt_out = opts.output_interval;
    // Grid points strictly after t0 that lie inside the span (with a little slack
    // so that an end time on the grid is not emitted twice).
    let grid_slack = T::lit(1e-9) * dt_out;
    let n_grid = ((span + grid_slack) / dt_out).floor().to_usize().unwrap_or(0);
    let end_on_grid = (span - T::from_usize(n_grid).unwrap() * dt_out).abs() <= grid_slack;
    let mut next_out = 1usize;

    on_sample(t0, &y0)?;
    if span <= T::zero() {
        return Ok((y0, stats));
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = system.rhs(t, &y)?;
    stats.evaluations += 1;
    let mut h = initial_step(system, t, &y, &k1, opts, &mut stats)?.min(span);

    let safety = T::lit(0.9);
    let min_factor = T::lit(0.2);
    let max_factor = T::lit(10.0);
    let exponent = T::lit(-0.2);

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepFailure { t: t.to_f64_lossless(), step: h.to_f64_lossless() });
        }
        if h < opts.min_step {
            return Err(Error::StepFailure { t: t.to_f64_lossless(), step: h.to_f64_lossless() });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let k2 = system.rhs(t + T::lit(C2) * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = system.rhs(t + T::lit(C3) * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = system.rhs(t + T::lit(C4) * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = system.rhs(
            t + T::lit(C5) * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = system.rhs(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t_end } else { t + h };
        let k7 = system.rhs(t_new, &y_new)?;
        stats.evaluations += 6;

        let mut err_sq = T::zero();
        for i in 0..N {
            let e = h
                * (T::lit(E1) * k1[i]
                    + T::lit(E3) * k3[i]
                    + T::lit(E4) * k4[i]
                    + T::lit(E5) * k5[i]
                    + T::lit(E6) * k6[i]
                    + T::lit(E7) * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err_sq = err_sq + (e / sc) * (e / sc);
        }
        let err = (err_sq / T::from_usize(N).unwrap()).sqrt();

        if !err.is_finite() {
            stats.rejected += 1;
            h = h * min_factor;
            continue;
        }

        if err <= T::one() {
            stats.accepted += 1;
            // Emit every grid point covered by (t, t_new].
            while next_out <= n_grid {
                let t_out = t0 + T::from_usize(next_out).unwrap() * dt_out;
                if t_out > t_new && !(last && next_out == n_grid) {
                    break;
                }
                let y_out = if last && next_out == n_grid && end_on_grid {
                    y_new
                } else {
                    let theta = (t_out - t) / h;
                    dense(&y, &y_new, &k1, &k3, &k4, &k5, &k6, &k7, h, theta)
                };
                on_sample(t_out, &y_out)?;
                next_out += 1;
            }
            if last {
                if !end_on_grid {
                    on_sample(t_end, &y_new)?;
                }
                return Ok((y_new, stats));
            }
            let factor = if err == T::zero() {
                max_factor
            } else {
                (safety * err.powf(exponent)).max(min_factor).min(max_factor)
            };
            t = t_new;
            y = y_new;
            k1 = k7;
            h = (h * factor).min(opts.max_step);
        } else {
            stats.rejected += 1;
            let factor = (safety * err.powf(exponent)).max(min_factor).min(T::one());
            h = h * factor;
        }
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn dense<T: Scalar, const N: usize>(
    y0: &[T; N],
    y1: &[T; N],
    k1: &[T; N],
    k3: &[T; N],
    k4: &[T; N],
    k5: &[T; N],
    k6: &[T; N],
    k7: &[T; N],
    h: T,
    theta: T,
) -> [T; N] {
    let theta1 = T::one() - theta;
    let mut out = [T::zero(); N];
    for i in 0..N {
        let ydiff = y1[i] - y0[i];
        let bspl = h * k1[i] - ydiff;
        let r4 = ydiff - h * k7[i] - bspl;
        let r5 = h
            * (T::lit(D1) * k1[i]
                + T::lit(D3) * k3[i]
                + T::lit(D4) * k4[i]
                + T::lit(D5) * k5[i]
                + T::lit(D6) * k6[i]
                + T::lit(D7) * k7[i]);
        out[i] = y0[i] + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
    }
    out
}

/// Starting step from the local scale of the solution and its derivatives.
fn initial_step<T: Scalar, const N: usize, S: OdeSystem<T, N>>(
    system: &mut S,
    t: T,
    y: &[T; N],
    f0: &[T; N],
    opts: &SolverOptions<T>,
    stats: &mut SolverStats,
) -> Result<T> {
    let n = T::from_usize(N).unwrap();
    let scale = |i: usize| opts.atol + opts.rtol * y[i].abs();
    let rms = |v: &dyn Fn(usize) -> T| {
        let mut s = T::zero();
        for i in 0..N {
            let q = v(i) / scale(i);
            s = s + q * q;
        }
        (s / n).sqrt()
    };
    let d0 = rms(&|i| y[i]);
    let d1 = rms(&|i| f0[i]);
    let tiny = T::lit(1e-5);
    let h0 = if d0 < tiny || d1 < tiny { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    let h0 = h0.min(opts.max_step);
    let y1 = axpy(y, h0, &[(1.0, f0)]);
    let f1 = system.rhs(t + h0, &y1)?;
    stats.evaluations += 1;
    let d2 = rms(&|i| f1[i] - f0[i]) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / dmax).powf(T::lit(0.2))
    };
    Ok((T::lit(100.0) * h0).min(h1).min(opts.max_step))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect<const N: usize>(
        mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
        y0: [f64; N],
        t_end: f64,
        opts: &SolverOptions<f64>,
    ) -> (Vec<(f64, [f64; N])>, [f64; N], SolverStats) {
        let mut out = Vec::new();
        let (y, stats) = solve(&mut f, 0.0, y0, t_end, opts, |t, y| {
            out.push((t, *y));
            Ok(())
        })
        .unwrap();
        (out, y, stats)
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let opts = SolverOptions::default();
        let (samples, y, _) = collect(|_, y: &[f64; 1]| Ok([-2.0 * y[0]]), [1.0], 3.0, &opts);
        assert_eq!(samples.len(), 301);
        for (t, s) in &samples {
            assert!((s[0] - (-2.0 * t).exp()).abs() < 1e-6, "t={t}");
        }
        assert!((y[0] - (-6.0f64).exp()).abs() < 1e-7);
        assert_eq!(samples.last().unwrap().0, 3.0);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let opts = SolverOptions { output_interval: 0.037, ..SolverOptions::default() };
        let (samples, _, stats) =
            collect(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), [1.0, 0.0], 10.0, &opts);
        // Dense samples fall between internal steps.
        assert!(stats.accepted < samples.len());
        for (t, s) in &samples {
            assert!((s[0] - t.cos()).abs() < 2e-5, "t={t}");
            assert!((s[1] + t.sin()).abs() < 2e-5, "t={t}");
        }
        // Off-grid end time is emitted once at the end.
        let last = samples.last().unwrap().0;
        assert_eq!(last, 10.0);
        assert!((samples[samples.len() - 2].0 - 0.037 * 270.0).abs() < 1e-12);
    }

    #[test]
    fn tighter_tolerance_is_more_accurate() {
        let f = |_: f64, y: &[f64; 2]| Ok([y[1], -y[0]]);
        let loose = SolverOptions { rtol: 1e-4, atol: 1e-6, ..SolverOptions::default() };
        let tight = SolverOptions { rtol: 1e-9, atol: 1e-11, ..SolverOptions::default() };
        let (_, a, sa) = collect(f, [1.0, 0.0], 20.0, &loose);
        let (_, b, sb) = collect(f, [1.0, 0.0], 20.0, &tight);
        let ea = (a[0] - 20f64.cos()).abs();
        let eb = (b[0] - 20f64.cos()).abs();
        assert!(eb < ea);
        assert!(eb < 1e-8);
        assert!(sb.accepted > sa.accepted);
    }

    #[test]
    fn step_underflow_reported() {
        // Finite-time blow-up: y' = y^2, y(0) = 1 explodes at t = 1.
        let opts = SolverOptions::default();
        let mut f = |_: f64, y: &[f64; 1]| Ok([y[0] * y[0]]);
        let r = solve(&mut f, 0.0, [1.0], 2.0, &opts, |_, _| Ok(()));
        assert!(matches!(r, Err(Error::StepFailure { .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let opts = SolverOptions::<f32> { rtol: 1e-5, atol: 1e-6, ..SolverOptions::default() };
        let mut f = |_: f32, y: &[f32; 1]| Ok([-y[0]]);
        let (y, _) = solve(&mut f, 0.0, [1.0f32], 1.0, &opts, |_, _| Ok(())).unwrap();
        assert!((y[0] - (-1.0f32).exp()).abs() < 1e-5);
    }

    #[test]
    fn rhs_errors_propagate() {
        let opts = SolverOptions::default();
        let mut f = |t: f64, y: &[f64; 1]| {
            if t > 0.5 {
                Err(Error::ContactDegenerate { condition: f64::INFINITY })
            } else {
                Ok([y[0]])
            }
        };
        let r = solve(&mut f, 0.0, [1.0], 1.0, &opts, |_, _| Ok(()));
        assert!(matches!(r, Err(Error::ContactDegenerate { .. })));
    }
}
