//! Trajectory integration of a full vortex system.
//!
//! The state advances on raw (continuous, unwrapped) chart coordinates —
//! the velocity field is built from periodic primitives, so representatives
//! never need wrapping mid-flight. Canonicalization happens only when a
//! sample is emitted. Each accepted integrator step is post-processed for:
//!
//! * **seam crossings** — a vortex whose raw `x` passes a multiple of π
//!   leaves the fundamental chart and re-enters flipped; the event time is
//!   located on the step interpolant and logged with the vortex label;
//! * **collisions** — the minimal lifted separation is monitored and the
//!   first crossing under the collision radius aborts the run;
//! * **dense samples** — states on the uniform output grid, with
//!   conservation drift tracked at sample resolution.

use serde::Serialize;

use crate::dopri5::{self, Dopri5Options, StepAction, StepInterp};
use crate::dynamics::{hamiltonian_flat, momentum_flat, velocity_flat};
use crate::geometry::{canonicalize, min_lift_separation_flat, Vortex, VortexSystem};
use crate::{Result, VortexError};

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * PI;

/// Controls for [`integrate`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the adaptive step.
    pub max_step: f64,
    /// Minimal allowed lifted separation before the run aborts.
    pub collision_radius: f64,
    /// Integration horizon (the run covers `[0, t_end]`).
    pub t_end: f64,
    /// Output sample spacing.
    pub sample_dt: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: f64::INFINITY,
            collision_radius: 1e-6,
            t_end: 10.0,
            sample_dt: 0.1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) {
            return Err(VortexError::Validation("t_end must be positive".into()));
        }
        if !(self.sample_dt > 0.0) {
            return Err(VortexError::Validation("sample_dt must be positive".into()));
        }
        if !(self.collision_radius > 0.0) {
            return Err(VortexError::Validation(
                "collision radius must be positive".into(),
            ));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(VortexError::Validation("tolerances must be positive".into()));
        }
        Ok(())
    }

    fn kernel_options(&self) -> Dopri5Options {
        Dopri5Options {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            ..Dopri5Options::default()
        }
    }
}

/// A vortex left the fundamental chart (raw `x` crossed a multiple of π).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlipEvent {
    pub t: f64,
    pub label: String,
}

/// Run summary: conserved-quantity drift at sample resolution plus kernel
/// counters.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Diagnostics {
    pub energy_initial: f64,
    pub momentum_initial: f64,
    /// max |H(t) − H(0)| over samples.
    pub max_energy_drift: f64,
    /// Same, relative to `max(1, |H(0)|)`.
    pub max_energy_drift_rel: f64,
    /// max |Φ(t) − Φ(0)| over samples.
    pub max_momentum_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

/// Integrated trajectory: canonical samples for output, raw samples for
/// interpolation and post-processing, seam-crossing events, and diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `(t, system)` with every vortex reduced to the canonical chart.
    pub samples: Vec<(f64, VortexSystem)>,
    /// `(t, [x1, y1, x2, y2, …])` on the raw, unwrapped coordinates.
    pub raw_samples: Vec<(f64, Vec<f64>)>,
    /// Strengths attached to the raw representatives (constant in time).
    pub gammas: Vec<f64>,
    pub labels: Vec<String>,
    pub flip_events: Vec<FlipEvent>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    /// Raw state at time `t` by cubic Hermite interpolation between the
    /// bracketing samples (slopes re-evaluated from the velocity field).
    /// `None` outside the sampled range.
    pub fn state_at(&self, t: f64) -> Option<Vec<f64>> {
        let ts_first = self.raw_samples.first()?.0;
        let ts_last = self.raw_samples.last()?.0;
        if t < ts_first - 1e-12 || t > ts_last + 1e-12 {
            return None;
        }
        let idx = match self
            .raw_samples
            .binary_search_by(|(tk, _)| tk.partial_cmp(&t).unwrap())
        {
            Ok(k) => return Some(self.raw_samples[k].1.clone()),
            Err(k) => k,
        };
        let (k0, k1) = (idx.saturating_sub(1), idx.min(self.raw_samples.len() - 1));
        if k0 == k1 {
            return Some(self.raw_samples[k0].1.clone());
        }
        let (t0, y0) = &self.raw_samples[k0];
        let (t1, y1) = &self.raw_samples[k1];
        let mut v0 = vec![0.0; y0.len()];
        let mut v1 = vec![0.0; y1.len()];
        velocity_flat(y0, &self.gammas, &mut v0);
        velocity_flat(y1, &self.gammas, &mut v1);
        Some(hermite_eval(*t0, y0, &v0, *t1, y1, &v1, t))
    }
}

/// Cubic Hermite interpolation of a vector-valued function.
fn hermite_eval(
    t0: f64,
    y0: &[f64],
    v0: &[f64],
    t1: f64,
    y1: &[f64],
    v1: &[f64],
    t: f64,
) -> Vec<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    (0..y0.len())
        .map(|i| h00 * y0[i] + h10 * h * v0[i] + h01 * y1[i] + h11 * h * v1[i])
        .collect()
}

/// Integrate a system over `[0, cfg.t_end]`.
pub fn integrate(s0: &VortexSystem, cfg: &IntegratorConfig) -> Result<Trajectory> {
    s0.validate()?;
    cfg.validate()?;
    s0.collision_check(cfg.collision_radius, Some(0.0))?;

    let gammas = s0.gammas();
    let labels = s0.labels();
    let y0 = s0.coords();
    let n = gammas.len();
    let dim = 2 * n;

    let h0 = hamiltonian_flat(&y0, &gammas);
    let phi0 = momentum_flat(&y0, &gammas);

    let mut raw_samples: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut systems: Vec<(f64, VortexSystem)> = Vec::new();
    let mut flips: Vec<FlipEvent> = Vec::new();
    let mut max_energy_drift: f64 = 0.0;
    let mut max_momentum_drift: f64 = 0.0;

    let mut record = |t: f64, y: &[f64]| {
        max_energy_drift = max_energy_drift.max((hamiltonian_flat(y, &gammas) - h0).abs());
        max_momentum_drift = max_momentum_drift.max((momentum_flat(y, &gammas) - phi0).abs());
        raw_samples.push((t, y.to_vec()));
        let vortices = (0..n)
            .map(|i| {
                let (x, yv, g) = canonicalize(y[2 * i], y[2 * i + 1], gammas[i]);
                Vortex::new(x, yv, g, labels[i].clone())
            })
            .collect();
        systems.push((t, VortexSystem { vortices }));
    };
    record(0.0, &y0);

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| velocity_flat(y, &gammas, dy);

    let mut next_sample = 1usize;
    let mut buf = vec![0.0; dim];
    let sample_eps = 1e-9 * cfg.t_end.max(1.0);

    let observer = |interp: &StepInterp<'_>| -> Result<StepAction> {
        // Collision scan at interior probes and the step end.
        let mut hit: Option<f64> = None;
        for &theta in &[0.25, 0.5, 0.75, 1.0] {
            let tc = interp.t_start + theta * (interp.t_end - interp.t_start);
            interp.eval(tc, &mut buf);
            if let Some((d, ..)) = min_lift_separation_flat(&buf) {
                if d < cfg.collision_radius {
                    hit = Some(tc);
                    break;
                }
            }
        }
        if let Some(t_bad) = hit {
            // The separation was at least the radius when the step began;
            // bisect the first crossing.
            let (mut lo, mut hi) = (interp.t_start, t_bad);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                interp.eval(mid, &mut buf);
                let d = min_lift_separation_flat(&buf).map_or(f64::INFINITY, |(d, ..)| d);
                if d < cfg.collision_radius {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            interp.eval(hi, &mut buf);
            let (dist, i, j, image) =
                min_lift_separation_flat(&buf).expect("collision needs two vortices");
            let b = if image {
                format!("{}*", labels[j])
            } else {
                labels[j].clone()
            };
            return Err(VortexError::Collision {
                time: Some(hi),
                a: labels[i].clone(),
                b,
                dist,
                radius: cfg.collision_radius,
            });
        }

        // Seam crossings: raw x_i passing a multiple of π.
        for (i, label) in labels.iter().enumerate() {
            let xa = interp.eval_component(interp.t_start, 2 * i);
            let xb = interp.eval_component(interp.t_end, 2 * i);
            let (ca, cb) = ((xa / PI).floor() as i64, (xb / PI).floor() as i64);
            if ca == cb {
                continue;
            }
            for m in ca.min(cb) + 1..=ca.max(cb) {
                let seam = m as f64 * PI;
                // The endpoints straddle every crossed seam, so bisection on
                // x_i(t) − seam is well-posed per seam.
                let (mut lo, mut hi) = (interp.t_start, interp.t_end);
                let ga = xa - seam;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let g = interp.eval_component(mid, 2 * i) - seam;
                    if (g >= 0.0) == (ga >= 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                flips.push(FlipEvent {
                    t: 0.5 * (lo + hi),
                    label: label.clone(),
                });
            }
        }

        // Dense samples on the uniform grid (strictly before t_end; the
        // final state is recorded after the run).
        loop {
            let ts = next_sample as f64 * cfg.sample_dt;
            if ts > interp.t_end + 1e-13 * cfg.t_end.max(1.0) || ts >= cfg.t_end - sample_eps {
                break;
            }
            interp.eval(ts, &mut buf);
            record(ts, &buf);
            next_sample += 1;
        }
        Ok(StepAction::Continue)
    };

    let (t_final, y_final, stats) =
        dopri5::integrate(rhs, 0.0, &y0, cfg.t_end, &cfg.kernel_options(), observer)?;
    record(t_final, &y_final);

    flips.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());

    let diagnostics = Diagnostics {
        energy_initial: h0,
        momentum_initial: phi0,
        max_energy_drift,
        max_energy_drift_rel: max_energy_drift / h0.abs().max(1.0),
        max_momentum_drift,
        accepted_steps: stats.accepted_steps,
        rejected_steps: stats.rejected_steps,
        rhs_evaluations: stats.rhs_evaluations,
    };

    Ok(Trajectory {
        samples: systems,
        raw_samples,
        gammas,
        labels,
        flip_events: flips,
        diagnostics,
    })
}

/// Outcome of first-return detection on a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PeriodDetection {
    /// The tracked pair state never left the initial point: rigid motion.
    Steady { variation: f64 },
    /// First return found; `closure` is the distance from the initial
    /// reduced state at the detected return time.
    Periodic { period: f64, closure: f64 },
    /// No return within the sampled span.
    NotFound,
}

/// Scan a trajectory for the first return of the pair state
/// `(x_i − x_j, y_i)`. Samples are interpolated with cubic Hermite segments
/// and the section crossing `sin((Δx − Δx₀)/2) = 0` is refined by bisection;
/// a crossing only counts as a return when `y_i` also matches its initial
/// value to `return_tol`.
pub fn detect_period(
    traj: &Trajectory,
    i: usize,
    j: usize,
    return_tol: f64,
) -> Result<PeriodDetection> {
    let n = traj.gammas.len();
    if i >= n || j >= n || i == j {
        return Err(VortexError::Validation(
            "period detection needs two distinct vortex indices".into(),
        ));
    }
    if traj.raw_samples.len() < 3 {
        return Err(VortexError::Validation(
            "period detection needs at least three samples".into(),
        ));
    }

    let t0 = traj.raw_samples[0].0;
    let dx = |y: &[f64]| y[2 * i] - y[2 * j];
    let yi = |y: &[f64]| y[2 * i + 1];
    let a0 = dx(&traj.raw_samples[0].1);
    let b0 = yi(&traj.raw_samples[0].1);

    // Rigid-motion check: the pair state stays put.
    let mut variation: f64 = 0.0;
    for (_, y) in &traj.raw_samples {
        variation = variation.max(((dx(y) - a0).powi(2) + (yi(y) - b0).powi(2)).sqrt());
    }
    if variation < 1e-9 {
        return Ok(PeriodDetection::Steady { variation });
    }

    // Velocities at the samples, for Hermite segments.
    let vels: Vec<Vec<f64>> = traj
        .raw_samples
        .iter()
        .map(|(_, y)| {
            let mut v = vec![0.0; y.len()];
            velocity_flat(y, &traj.gammas, &mut v);
            v
        })
        .collect();

    let section = |a: f64| (0.5 * (a - a0)).sin();
    let mut armed = false;
    let mut e_prev = 0.0;
    for k in 1..traj.raw_samples.len() {
        let (tk, yk) = &traj.raw_samples[k];
        let (tp, yp) = &traj.raw_samples[k - 1];
        let excursion = ((dx(yk) - a0).powi(2) + (yi(yk) - b0).powi(2)).sqrt();
        if !armed {
            if excursion > 1e-4 {
                armed = true;
            }
            e_prev = section(dx(yk));
            continue;
        }
        let e_here = section(dx(yk));
        if e_prev != 0.0 && (e_prev < 0.0) != (e_here < 0.0) {
            // Refine the crossing time on the Hermite segment.
            let seg = |t: f64| hermite_eval(*tp, yp, &vels[k - 1], *tk, yk, &vels[k], t);
            let (mut lo, mut hi) = (*tp, *tk);
            let e_lo_sign = e_prev < 0.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let e_mid = section(dx(&seg(mid)));
                if (e_mid < 0.0) == e_lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t_star = 0.5 * (lo + hi);
            let y_star = seg(t_star);
            let (a_star, b_star) = (dx(&y_star), yi(&y_star));
            if (b_star - b0).abs() <= return_tol {
                let m = ((a_star - a0) / TWO_PI).round();
                let closure =
                    ((a_star - a0 - TWO_PI * m).powi(2) + (b_star - b0).powi(2)).sqrt();
                return Ok(PeriodDetection::Periodic {
                    period: t_star - t0,
                    closure,
                });
            }
        }
        e_prev = e_here;
    }
    Ok(PeriodDetection::NotFound)
}
