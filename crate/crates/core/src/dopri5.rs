//! Embedded Dormand–Prince 5(4) integrator with dense output.
//!
//! Seven-stage FSAL pair with the standard PI step-size controller and an
//! RMS error norm scaled by `abs_tol + rel_tol · |y|`. Every accepted step
//! exposes a quartic interpolant to an observer callback, which drives event
//! location (boundary crossings, collisions, section returns) and dense
//! sampling without constraining the step sequence.

use crate::{Result, VortexError};

// Nodes.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

// Stage coefficients.
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

// Fifth-order solution weights (also the seventh-stage position: FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Embedded error weights (difference of the 5th- and 4th-order rows).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output weights for the quartic interpolant.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller parameters.
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const SAFE: f64 = 0.9;
const FAC_MIN_SHRINK: f64 = 0.2; // h may shrink to at most 0.2·h per step
const FAC_MAX_GROW: f64 = 10.0; // and grow to at most 10·h

/// Integration controls.
#[derive(Clone, Copy, Debug)]
pub struct Dopri5Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size.
    pub max_step: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    /// Safety cap on the number of accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: f64::INFINITY,
            h_init: None,
            max_steps: 20_000_000,
        }
    }
}

/// Counters accumulated over one integration run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

/// What the observer wants after seeing an accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepAction {
    Continue,
    /// Stop the run at the given time inside the step just taken; the final
    /// state is produced from the interpolant.
    StopAt(f64),
}

/// Quartic interpolant over one accepted step, valid on
/// `[t_start, t_end]`.
pub struct StepInterp<'a> {
    pub t_start: f64,
    pub t_end: f64,
    rcont: [&'a [f64]; 5],
}

impl StepInterp<'_> {
    /// Dimension of the state vector.
    pub fn dim(&self) -> usize {
        self.rcont[0].len()
    }

    /// Interpolated state at `t`, written into `out`.
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let h = self.t_end - self.t_start;
        let theta = if h == 0.0 { 0.0 } else { (t - self.t_start) / h };
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.rcont;
        for i in 0..r1.len() {
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
    }

    /// Interpolated value of component `i` at `t`.
    pub fn eval_component(&self, t: f64, i: usize) -> f64 {
        let h = self.t_end - self.t_start;
        let theta = if h == 0.0 { 0.0 } else { (t - self.t_start) / h };
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.rcont;
        r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])))
    }
}

/// Integrate `y' = f(t, y)` from `(t0, y0)` to `t_end`, invoking `observe`
/// after every accepted step. Returns the final time, state, and counters.
/// The observer may stop the run early ([`StepAction::StopAt`]) or abort it
/// by returning an error, which is passed through unchanged.
pub fn integrate<F, O>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &Dopri5Options,
    mut observe: O,
) -> Result<(f64, Vec<f64>, Stats)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(&StepInterp<'_>) -> Result<StepAction>,
{
    let n = y0.len();
    if n == 0 {
        return Err(VortexError::Validation("empty state vector".into()));
    }
    if !(t_end > t0) {
        return Err(VortexError::Validation(
            "integration end time must exceed the start time".into(),
        ));
    }
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) {
        return Err(VortexError::Validation(
            "tolerances must be positive".into(),
        ));
    }

    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut y_next = vec![0.0; n];
    let mut y_stage = vec![0.0; n];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut rcont = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];

    f(t, &y, &mut k1);
    stats.rhs_evaluations += 1;

    let mut h = match opts.h_init {
        Some(h0) => h0.min(opts.max_step).min(t_end - t0),
        None => initial_step(&mut f, t0, &y, &k1, t_end, opts, &mut stats),
    };
    let mut facold: f64 = 1e-4;
    let mut just_rejected = false;

    loop {
        if stats.accepted_steps + stats.rejected_steps >= opts.max_steps {
            return Err(VortexError::StepBudgetExhausted {
                steps: opts.max_steps,
                t,
            });
        }
        if h.abs() <= t.abs().max(1.0) * 1e-14 {
            return Err(VortexError::StepSizeUnderflow { t, h });
        }
        h = h.min(opts.max_step);
        let mut last = false;
        if t + 1.01 * h >= t_end {
            h = t_end - t;
            last = true;
        }

        // Stages 2..6.
        for i in 0..n {
            y_stage[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &y_stage, &mut k2);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &y_stage, &mut k3);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &y_stage, &mut k4);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &y_stage, &mut k5);
        for i in 0..n {
            y_stage[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, &y_stage, &mut k6);
        // Fifth-order solution and the FSAL stage.
        for i in 0..n {
            y_next[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(t + h, &y_next, &mut k7);
        stats.rhs_evaluations += 5;

        // Scaled RMS error estimate.
        let mut err_sq = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_next[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / n as f64).sqrt();

        if !err.is_finite() {
            // A stage blew up (e.g. near-collision): retry much smaller.
            stats.rejected_steps += 1;
            just_rejected = true;
            h *= 0.1;
            continue;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // Accept: build the interpolant, notify the observer, advance.
            for i in 0..n {
                let dy = y_next[i] - y[i];
                let bspl = h * k1[i] - dy;
                rcont[0][i] = y[i];
                rcont[1][i] = dy;
                rcont[2][i] = bspl;
                rcont[3][i] = dy - h * k7[i] - bspl;
                rcont[4][i] = h
                    * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let interp = StepInterp {
                t_start: t,
                t_end: t + h,
                rcont: [&rcont[0], &rcont[1], &rcont[2], &rcont[3], &rcont[4]],
            };
            let action = observe(&interp)?;
            stats.accepted_steps += 1;
            if let StepAction::StopAt(ts) = action {
                let mut y_stop = vec![0.0; n];
                interp.eval(ts, &mut y_stop);
                return Ok((ts, y_stop, stats));
            }
            t += h;
            std::mem::swap(&mut y, &mut y_next);
            std::mem::swap(&mut k1, &mut k7);
            if last {
                return Ok((t, y, stats));
            }
            let mut fac = fac11 / facold.powf(BETA);
            fac = (fac / SAFE).clamp(1.0 / FAC_MAX_GROW, 1.0 / FAC_MIN_SHRINK);
            let mut h_new = h / fac;
            if just_rejected {
                h_new = h_new.min(h);
                just_rejected = false;
            }
            facold = err.max(1e-4);
            h = h_new;
        } else {
            // Reject: shrink and retry.
            stats.rejected_steps += 1;
            just_rejected = true;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN_SHRINK);
        }
    }
}

/// Starting step heuristic based on the local derivative magnitude and a
/// trial Euler step.
fn initial_step<F>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    t_end: f64,
    opts: &Dopri5Options,
    stats: &mut Stats,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let sc: Vec<f64> = y0
        .iter()
        .map(|yi| opts.abs_tol + opts.rel_tol * yi.abs())
        .collect();
    let rms = |v: &[f64]| -> f64 {
        let s: f64 = v.iter().zip(&sc).map(|(vi, si)| (vi / si) * (vi / si)).sum();
        (s / n as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(yi, fi)| yi + h0 * fi).collect();
    let mut f1 = vec![0.0; n];
    f(t0 + h0, &y1, &mut f1);
    stats.rhs_evaluations += 1;
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&df) / h0;
    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step).min(t_end - t0)
}
