//! One-degree-of-freedom reduction of the two-vortex problem.
//!
//! For two vortices of strengths `Γ₁ ≥ Γ₂ > 0` the vertical impulse
//! `C = Γ₁y₁ + Γ₂y₂` is conserved, so the pair is described by the relative
//! angle `Δx = x₁ − x₂` and the height `y₁` alone; `y₂` is reconstructed
//! from `C`. The reduced energy `H(Δx, y₁)` is conserved along orbits, its
//! level sets are the orbits themselves, and two excluded points organise
//! the picture: the co-rotating collision `(0, C/(Γ₁+Γ₂))` where the energy
//! diverges to `+∞`, and — for unequal strengths — the counter-rotating
//! collision `(π, C/(Γ₁−Γ₂))` where it diverges to `−∞`. (For equal
//! strengths with `C = 0` the whole line `Δx = π` is the collision set.)
//!
//! Orbits fall into three families: closed loops around the co-rotating
//! point (type I), closed loops around the counter-rotating point
//! (type II), and winding orbits whose `Δx` gains a full turn per period
//! (type III).

use std::fmt;

use serde::Serialize;

use crate::dopri5::{self, Dopri5Options, StepAction, StepInterp};
use crate::dynamics::{
    inv_s_plus_sinh2_half, ln_cosh, ln_s_plus_sinh2_half, sinh_over_s_plus_sinh2_half,
    VelocityVector,
};
use crate::geometry::min_lift_separation_flat;
use crate::grid::GridSpec;
use crate::{Result, VortexError};

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * PI;
const INV_4PI: f64 = 1.0 / (4.0 * PI);
const INV_8PI: f64 = 1.0 / (8.0 * PI);

/// States closer than this (in lifted separation of the reconstructed pair)
/// to a collision are rejected as singular.
const SINGULAR_GUARD: f64 = 1e-9;

/// Strengths and conserved impulse of the reduced problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub c: f64,
}

impl ReducedParams {
    /// Requires `Γ₁ ≥ Γ₂ > 0` (the labelling convention of the reduction).
    pub fn new(gamma1: f64, gamma2: f64, c: f64) -> Result<Self> {
        if !(gamma1.is_finite() && gamma2.is_finite() && c.is_finite()) {
            return Err(VortexError::Validation(
                "reduced parameters must be finite".into(),
            ));
        }
        if !(gamma2 > 0.0 && gamma1 >= gamma2) {
            return Err(VortexError::Domain(
                "reduced parameters need Γ₁ ≥ Γ₂ > 0".into(),
            ));
        }
        Ok(Self { gamma1, gamma2, c })
    }

    /// Height of the second vortex on the impulse level set.
    pub fn y2_of(&self, y1: f64) -> f64 {
        (self.c - self.gamma1 * y1) / self.gamma2
    }

    /// Height of the co-rotating collision point on `Δx = 0`.
    pub fn co_rotating_collision_y(&self) -> f64 {
        self.c / (self.gamma1 + self.gamma2)
    }

    /// Height of the counter-rotating collision point on `Δx = π`;
    /// `None` for equal strengths (the collision escapes to infinity, or for
    /// `C = 0` fills the whole line).
    pub fn counter_rotating_collision_y(&self) -> Option<f64> {
        (self.gamma1 > self.gamma2).then(|| self.c / (self.gamma1 - self.gamma2))
    }
}

/// A point of the reduced phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedState {
    pub dx: f64,
    pub y1: f64,
}

impl ReducedState {
    pub fn new(dx: f64, y1: f64) -> Self {
        Self { dx, y1 }
    }
}

/// Flattened reconstruction `[x₁, y₁, x₂, y₂]` with `x₂ = 0`.
fn reconstruction(state: ReducedState, p: &ReducedParams) -> [f64; 4] {
    [state.dx, state.y1, 0.0, p.y2_of(state.y1)]
}

fn lifted_separation(state: ReducedState, p: &ReducedParams) -> f64 {
    min_lift_separation_flat(&reconstruction(state, p))
        .map(|(d, ..)| d)
        .unwrap_or(f64::INFINITY)
}

fn singular_guard(state: ReducedState, p: &ReducedParams) -> Result<()> {
    if lifted_separation(state, p) < SINGULAR_GUARD {
        return Err(VortexError::SingularState(format!(
            "reduced state (dx = {}, y1 = {}) coincides with a collision of the pair",
            state.dx, state.y1
        )));
    }
    Ok(())
}

/// Hand-specialized velocity of a two-vortex configuration, written out
/// term by term. An independent code path from the general N-vortex field,
/// used to cross-check it and to drive the reduced integration.
pub fn two_vortex_velocity(
    x1: f64,
    y1: f64,
    gamma1: f64,
    x2: f64,
    y2: f64,
    gamma2: f64,
) -> [VelocityVector; 2] {
    let dx = x1 - x2;
    let s = (0.5 * dx).sin();
    let c = (0.5 * dx).cos();
    let (s2, c2) = (s * s, c * c);
    let dm = y1 - y2;
    let dp = y1 + y2;
    let ratio_m = sinh_over_s_plus_sinh2_half(s2, dm);
    let ratio_p = sinh_over_s_plus_sinh2_half(c2, dp);
    let inv_sum = inv_s_plus_sinh2_half(s2, dm) + inv_s_plus_sinh2_half(c2, dp);
    let v1 = VelocityVector {
        dx: gamma2 * INV_8PI * (ratio_p - ratio_m) + gamma1 * INV_4PI * y1.tanh(),
        dy: gamma2 * INV_8PI * dx.sin() * inv_sum,
    };
    let v2 = VelocityVector {
        dx: gamma1 * INV_8PI * (ratio_p + ratio_m) + gamma2 * INV_4PI * y2.tanh(),
        dy: -gamma1 * INV_8PI * dx.sin() * inv_sum,
    };
    [v1, v2]
}

/// Reduced energy, evaluated without the singular-state guard (diverges at
/// the collision points).
pub(crate) fn reduced_hamiltonian_raw(dx: f64, y1: f64, p: &ReducedParams) -> f64 {
    let y2 = p.y2_of(y1);
    let s = (0.5 * dx).sin();
    let c = (0.5 * dx).cos();
    let pair = -p.gamma1 * p.gamma2
        * INV_4PI
        * (ln_s_plus_sinh2_half(s * s, y1 - y2) - ln_s_plus_sinh2_half(c * c, y1 + y2));
    pair + p.gamma1 * p.gamma1 * INV_4PI * ln_cosh(y1)
        + p.gamma2 * p.gamma2 * INV_4PI * ln_cosh(y2)
}

/// Reduced energy `H(Δx, y₁)` on the impulse level set. Agrees with the
/// full two-vortex energy of the reconstructed pair, and is even and
/// 2π-periodic in `Δx`.
pub fn reduced_hamiltonian(state: ReducedState, p: &ReducedParams) -> Result<f64> {
    singular_guard(state, p)?;
    Ok(reduced_hamiltonian_raw(state.dx, state.y1, p))
}

/// Limiting reduced-energy profile for equal strengths as `y₁ → ±∞`:
/// `(Γ²/4π) · log(cos²(Δx/2) + sinh²(C/2Γ))`. The far field of the
/// equal-strength system is exponentially flat and approaches this value.
pub fn equal_strength_h_limit(dx: f64, gamma: f64, c: f64) -> f64 {
    let half = (0.5 * dx).cos();
    let sh = (c / (2.0 * gamma)).sinh();
    gamma * gamma * INV_4PI * (half * half + sh * sh).ln()
}

/// Time derivatives of the reduced coordinates, plus the absolute drifts of
/// both vortices (needed for winding diagnostics).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedVelocity {
    /// d(Δx)/dt.
    pub d_dx: f64,
    /// dy₁/dt.
    pub d_y1: f64,
    pub x1_dot: f64,
    pub x2_dot: f64,
}

/// Reduced velocity field. `d(Δx)/dt = (1/Γ₁) ∂H/∂y₁` and
/// `dy₁/dt = −(1/Γ₁) ∂H/∂Δx`; errors at the excluded collision states.
pub fn reduced_velocity(state: ReducedState, p: &ReducedParams) -> Result<ReducedVelocity> {
    singular_guard(state, p)?;
    let [v1, v2] = two_vortex_velocity(
        state.dx,
        state.y1,
        p.gamma1,
        0.0,
        p.y2_of(state.y1),
        p.gamma2,
    );
    Ok(ReducedVelocity {
        d_dx: v1.dx - v2.dx,
        d_y1: v1.dy,
        x1_dot: v1.dx,
        x2_dot: v2.dx,
    })
}

fn d_dx_raw(dx: f64, y1: f64, p: &ReducedParams) -> f64 {
    let [v1, v2] = two_vortex_velocity(dx, y1, p.gamma1, 0.0, p.y2_of(y1), p.gamma2);
    v1.dx - v2.dx
}

/// Nature of a nondegenerate critical point of the reduced energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CriticalKind {
    Minimum,
    Maximum,
    Saddle,
    Degenerate,
}

/// A critical point of the reduced energy (always on `Δx = 0` or `Δx = π`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub state: ReducedState,
    pub kind: CriticalKind,
    pub energy: f64,
}

/// An excluded collision point of the reduced phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingularPoint {
    pub state: ReducedState,
    /// `true` for the same-copy collision on `Δx = 0` (energy `+∞`),
    /// `false` for the opposite-copy collision on `Δx = π` (energy `−∞`).
    pub co_rotating: bool,
}

/// Critical points found on the two symmetry lines, plus the excluded
/// collision points.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CriticalPointReport {
    pub line_zero: Vec<CriticalPoint>,
    pub line_pi: Vec<CriticalPoint>,
    pub singular: Vec<SingularPoint>,
}

/// Locate all critical points of the reduced energy. The gradient's `Δx`
/// component vanishes identically on the lines `Δx ∈ {0, π}` (the sign law
/// `(∂H/∂Δx)·sin Δx ≤ 0` pins critical points to them), so the search is a
/// one-dimensional root scan of `∂H/∂y₁ = Γ₁·d(Δx)/dt` along each line,
/// followed by a finite-difference Hessian classification.
pub fn critical_points(p: &ReducedParams) -> Result<CriticalPointReport> {
    let mut report = CriticalPointReport {
        singular: vec![SingularPoint {
            state: ReducedState::new(0.0, p.co_rotating_collision_y()),
            co_rotating: true,
        }],
        ..Default::default()
    };
    if let Some(ysc) = p.counter_rotating_collision_y() {
        report.singular.push(SingularPoint {
            state: ReducedState::new(PI, ysc),
            co_rotating: false,
        });
    }
    report.line_zero = scan_line(p, 0.0);
    report.line_pi = scan_line(p, PI);
    Ok(report)
}

/// Root scan of `y₁ ↦ d(Δx)/dt` along the line `Δx = line_x`.
fn scan_line(p: &ReducedParams, line_x: f64) -> Vec<CriticalPoint> {
    let equal = p.gamma1 == p.gamma2;
    if equal && p.c == 0.0 && line_x != 0.0 {
        // The entire line Δx = π is the collision set here; no critical
        // points live on it.
        return Vec::new();
    }
    let g = |y1: f64| d_dx_raw(line_x, y1, p);

    let singular_y = if line_x == 0.0 {
        Some(p.co_rotating_collision_y())
    } else {
        p.counter_rotating_collision_y()
    };

    // Window: beyond it the derivative keeps one sign per tail. For unequal
    // strengths it approaches the nonzero limits ±(Γ₁ − Γ₂)/4π, so grow the
    // window until the tails are magnitude-stable and sign-constant; for
    // equal strengths the far field is exponentially flat and a fixed margin
    // past the collision height suffices.
    let mut yw = 5.0 + singular_y.map_or(0.0, f64::abs);
    if !equal {
        let limit = (p.gamma1 - p.gamma2) * INV_4PI;
        for _ in 0..8 {
            let ok_mag = g(yw).abs() > 0.25 * limit && g(-yw).abs() > 0.25 * limit;
            let ok_tail =
                sign_constant(&g, yw, 2.0 * yw, 33) && sign_constant(&g, -2.0 * yw, -yw, 33);
            if ok_mag && ok_tail {
                break;
            }
            yw *= 2.0;
        }
    } else {
        yw = yw.max((p.c / (2.0 * p.gamma1)).abs() + 25.0);
    }

    // Scan pieces strictly between the collision exclusions.
    let mut bounds = vec![-yw];
    if let Some(ys) = singular_y {
        if ys.abs() < yw {
            let gap = 1e-7 * ys.abs().max(1.0);
            bounds.push(ys - gap);
            bounds.push(ys + gap);
        }
    }
    bounds.push(yw);

    let mut roots: Vec<f64> = Vec::new();
    for pair in bounds.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if !(b > a) {
            continue;
        }
        let samples = 4001;
        let mut y_prev = a;
        let mut g_prev = g(a);
        for i in 1..samples {
            let y = a + (b - a) * i as f64 / (samples - 1) as f64;
            let gy = g(y);
            if g_prev == 0.0 {
                roots.push(y_prev);
            } else if gy.is_finite() && g_prev.is_finite() && (g_prev < 0.0) != (gy < 0.0) {
                roots.push(bisect_root(&g, y_prev, y));
            }
            y_prev = y;
            g_prev = gy;
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * a.abs().max(1.0));

    roots
        .into_iter()
        .map(|y1| {
            let (kind, energy) = classify_critical(p, line_x, y1);
            CriticalPoint {
                state: ReducedState::new(line_x, y1),
                kind,
                energy,
            }
        })
        .collect()
}

fn sign_constant(g: &dyn Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> bool {
    let first = g(a) < 0.0;
    (0..samples).all(|i| {
        let y = a + (b - a) * i as f64 / (samples - 1) as f64;
        let v = g(y);
        v.is_finite() && (v < 0.0) == first && v != 0.0
    })
}

fn bisect_root(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let neg_at_lo = g(lo) < 0.0;
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) == neg_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Finite-difference Hessian classification of a critical point.
fn classify_critical(p: &ReducedParams, dx: f64, y1: f64) -> (CriticalKind, f64) {
    let f = |a: f64, b: f64| reduced_hamiltonian_raw(a, b, p);
    let h = 1e-4 * y1.abs().max(1.0);
    let f00 = f(dx, y1);
    let hxx = (f(dx + h, y1) - 2.0 * f00 + f(dx - h, y1)) / (h * h);
    let hyy = (f(dx, y1 + h) - 2.0 * f00 + f(dx, y1 - h)) / (h * h);
    let hxy = (f(dx + h, y1 + h) - f(dx + h, y1 - h) - f(dx - h, y1 + h) + f(dx - h, y1 - h))
        / (4.0 * h * h);
    let det = hxx * hyy - hxy * hxy;
    let scale = hxx.abs().max(hyy.abs()).max(hxy.abs()).powi(2).max(1e-30);
    let kind = if det.abs() < 1e-6 * scale {
        CriticalKind::Degenerate
    } else if det < 0.0 {
        CriticalKind::Saddle
    } else if hxx > 0.0 {
        CriticalKind::Minimum
    } else {
        CriticalKind::Maximum
    };
    (kind, f00)
}

/// The three orbit families of the reduced flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrbitType {
    /// Closed loop around the co-rotating collision point.
    #[serde(rename = "I")]
    TypeI,
    /// Closed loop around the counter-rotating collision point (or a
    /// regular extremum on `Δx = π`).
    #[serde(rename = "II")]
    TypeII,
    /// Winding orbit: `Δx` gains a full turn each period.
    #[serde(rename = "III")]
    TypeIII,
}

impl fmt::Display for OrbitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrbitType::TypeI => "I",
            OrbitType::TypeII => "II",
            OrbitType::TypeIII => "III",
        })
    }
}

/// Controls for [`classify_orbit`].
#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    /// Give up (as a near-separatrix or unbounded orbit) past this time.
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step cap, which also bounds the section-detection granularity.
    pub max_step: f64,
    /// How closely `y₁` must return for a section crossing to count as the
    /// period.
    pub return_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            t_max: 1e5,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 0.5,
            return_tol: 1e-7,
        }
    }
}

/// Classified reduced orbit.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrbitReport {
    pub orbit_type: OrbitType,
    pub period: f64,
    /// Net horizontal displacement of vortex 1 over one period (radians).
    pub winding1: f64,
    /// Net horizontal displacement of vortex 2 over one period (radians).
    pub winding2: f64,
    /// Full turns gained by `Δx` over one period
    /// (`winding1 − winding2 = 2π · net_dx_loops`).
    pub net_dx_loops: i64,
    /// Both vortices drift the same way over the period.
    pub co_rotating: bool,
    /// Maximal relative drift of the reduced energy along the orbit.
    pub energy_drift_rel: f64,
    pub start: ReducedState,
}

/// Integrate the reduced flow from `start` until the orbit first returns to
/// the section `Δx = Δx₀` with matching `y₁`, then classify it by its
/// winding behaviour: a net `Δx` turn makes it type III; otherwise the loop
/// is classified by which collision point it encircles.
pub fn classify_orbit(
    start: ReducedState,
    p: &ReducedParams,
    opts: &ClassifyOptions,
) -> Result<OrbitReport> {
    reduced_velocity(start, p)?; // reject singular starts
    let h0 = reduced_hamiltonian_raw(start.dx, start.y1, p);
    let u0 = [start.dx, start.y1, 0.0, 0.0];
    let rhs = |_t: f64, u: &[f64], du: &mut [f64]| {
        let [v1, v2] = two_vortex_velocity(u[0], u[1], p.gamma1, 0.0, p.y2_of(u[1]), p.gamma2);
        du[0] = v1.dx - v2.dx;
        du[1] = v1.dy;
        du[2] = v1.dx;
        du[3] = v2.dx;
    };
    let kernel_opts = Dopri5Options {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step: opts.max_step,
        ..Dopri5Options::default()
    };

    let section = |dx: f64| (0.5 * (dx - start.dx)).sin();
    let mut poly: Vec<(f64, f64)> = vec![(start.dx, start.y1)];
    let mut armed = false;
    let mut e_prev = 0.0;
    let mut drift: f64 = 0.0;
    let mut matched: Option<(f64, [f64; 4])> = None;
    let mut buf = vec![0.0; 4];

    let observer = |interp: &StepInterp<'_>| -> Result<StepAction> {
        let mut t_sub = interp.t_start;
        let mut e_sub = e_prev;
        for &theta in &[0.25, 0.5, 0.75, 1.0] {
            let tc = interp.t_start + theta * (interp.t_end - interp.t_start);
            interp.eval(tc, &mut buf);
            let st = ReducedState::new(buf[0], buf[1]);
            if lifted_separation(st, p) < 1e-10 {
                return Err(VortexError::SingularState(format!(
                    "orbit ran into a collision near t = {tc}"
                )));
            }
            let h_here = reduced_hamiltonian_raw(buf[0], buf[1], p);
            drift = drift.max((h_here - h0).abs() / h0.abs().max(1.0));
            poly.push((buf[0], buf[1]));

            let e_here = section(buf[0]);
            let excursion = (e_here.powi(2) + (buf[1] - start.y1).powi(2)).sqrt();
            if !armed {
                if excursion > 1e-4 {
                    armed = true;
                }
                e_sub = e_here;
                t_sub = tc;
                continue;
            }
            if e_sub != 0.0 && (e_sub < 0.0) != (e_here < 0.0) {
                // Bisect the section crossing inside [t_sub, tc].
                let (mut lo, mut hi) = (t_sub, tc);
                let neg_at_lo = e_sub < 0.0;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if (section(interp.eval_component(mid, 0)) < 0.0) == neg_at_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t_star = 0.5 * (lo + hi);
                interp.eval(t_star, &mut buf);
                if (buf[1] - start.y1).abs() <= opts.return_tol {
                    matched = Some((t_star, [buf[0], buf[1], buf[2], buf[3]]));
                    return Ok(StepAction::StopAt(t_star));
                }
                interp.eval(tc, &mut buf); // restore the probe state
            }
            e_sub = e_here;
            t_sub = tc;
        }
        e_prev = e_sub;
        Ok(StepAction::Continue)
    };

    dopri5::integrate(rhs, 0.0, &u0, opts.t_max, &kernel_opts, observer)?;
    let Some((t_star, u_star)) = matched else {
        return Err(VortexError::SeparatrixTimeout { t_max: opts.t_max });
    };

    // Replace the probe point past the return time with the exact endpoint.
    poly.pop();
    poly.push((u_star[0], u_star[1]));

    let k = ((u_star[0] - start.dx) / TWO_PI).round() as i64;
    let (winding1, winding2) = (u_star[2], u_star[3]);
    let orbit_type = if k != 0 {
        OrbitType::TypeIII
    } else {
        loop_type(&poly, p)
    };

    Ok(OrbitReport {
        orbit_type,
        period: t_star,
        winding1,
        winding2,
        net_dx_loops: k,
        co_rotating: winding1 * winding2 > 0.0,
        energy_drift_rel: drift,
        start,
    })
}

/// Distinguish type I from type II for a non-winding closed loop by the
/// winding number of its polygonal trace around each collision point.
fn loop_type(poly: &[(f64, f64)], p: &ReducedParams) -> OrbitType {
    let mean_dx = poly.iter().map(|q| q.0).sum::<f64>() / poly.len() as f64;
    let m = (mean_dx / TWO_PI).round();
    let w_co = polygon_winding(poly, TWO_PI * m, p.co_rotating_collision_y());
    if w_co.abs() > 0.5 {
        return OrbitType::TypeI;
    }
    if let Some(ysc) = p.counter_rotating_collision_y() {
        let m2 = ((mean_dx - PI) / TWO_PI).round();
        let w_counter = polygon_winding(poly, TWO_PI * m2 + PI, ysc);
        if w_counter.abs() > 0.5 {
            return OrbitType::TypeII;
        }
    }
    // Fallback: a closed loop must enclose one of the symmetry lines;
    // decide by which kind falls inside the Δx range.
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for q in poly {
        lo = lo.min(q.0);
        hi = hi.max(q.0);
    }
    let contains_even = (lo / TWO_PI).ceil() * TWO_PI <= hi;
    if contains_even {
        OrbitType::TypeI
    } else {
        OrbitType::TypeII
    }
}

/// Winding number of a closed polygon around `(cx, cy)` (the closing edge
/// back to the first point is implicit).
fn polygon_winding(poly: &[(f64, f64)], cx: f64, cy: f64) -> f64 {
    let mut total = 0.0;
    let mut prev = (poly[0].1 - cy).atan2(poly[0].0 - cx);
    for i in 1..=poly.len() {
        let q = poly[i % poly.len()];
        let a = (q.1 - cy).atan2(q.0 - cx);
        let mut d = a - prev;
        d -= TWO_PI * (d / TWO_PI).round();
        total += d;
        prev = a;
    }
    total / TWO_PI
}

/// Integrate the reduced flow and sample `(Δx, y₁)` on a uniform grid,
/// always including the initial and final states.
pub fn integrate_reduced(
    start: ReducedState,
    p: &ReducedParams,
    t_end: f64,
    sample_dt: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Vec<(f64, ReducedState)>> {
    if !(t_end > 0.0) || !(sample_dt > 0.0) {
        return Err(VortexError::Validation(
            "t_end and sample_dt must be positive".into(),
        ));
    }
    reduced_velocity(start, p)?;
    let rhs = |_t: f64, u: &[f64], du: &mut [f64]| {
        let [v1, v2] = two_vortex_velocity(u[0], u[1], p.gamma1, 0.0, p.y2_of(u[1]), p.gamma2);
        du[0] = v1.dx - v2.dx;
        du[1] = v1.dy;
    };
    let kernel_opts = Dopri5Options {
        rel_tol,
        abs_tol,
        ..Dopri5Options::default()
    };
    let mut samples = vec![(0.0, start)];
    let mut next = 1usize;
    let mut buf = vec![0.0; 2];
    let eps = 1e-9 * t_end.max(1.0);
    let observer = |interp: &StepInterp<'_>| -> Result<StepAction> {
        interp.eval(interp.t_end, &mut buf);
        let st = ReducedState::new(buf[0], buf[1]);
        if lifted_separation(st, p) < 1e-10 {
            return Err(VortexError::SingularState(format!(
                "orbit ran into a collision near t = {}",
                interp.t_end
            )));
        }
        loop {
            let ts = next as f64 * sample_dt;
            if ts > interp.t_end + 1e-13 * t_end.max(1.0) || ts >= t_end - eps {
                break;
            }
            interp.eval(ts, &mut buf);
            samples.push((ts, ReducedState::new(buf[0], buf[1])));
            next += 1;
        }
        Ok(StepAction::Continue)
    };
    let (tf, uf, _) = dopri5::integrate(rhs, 0.0, &[start.dx, start.y1], t_end, &kernel_opts, observer)?;
    samples.push((tf, ReducedState::new(uf[0], uf[1])));
    Ok(samples)
}

/// Reduced-energy landscape sampled over a grid.
#[derive(Clone, Debug, Serialize)]
pub struct PhasePortrait {
    pub params: ReducedParams,
    pub grid: GridSpec,
    /// Row-major energies (`iy * nx + ix`); `NaN` marks masked cells near
    /// the collision set.
    pub values: Vec<f64>,
    pub report: CriticalPointReport,
}

fn portrait_row(p: &ReducedParams, grid: &GridSpec, iy: usize, mask_radius: f64) -> Vec<f64> {
    let y1 = grid.y_at(iy);
    (0..grid.nx)
        .map(|ix| {
            let dx = grid.x_at(ix);
            let st = ReducedState::new(dx, y1);
            if lifted_separation(st, p) < mask_radius {
                f64::NAN
            } else {
                reduced_hamiltonian_raw(dx, y1, p)
            }
        })
        .collect()
}

/// Sample the reduced energy over `grid`, masking cells whose reconstructed
/// pair comes within `mask_radius` of collision, and attach the
/// critical-point report. Data-parallel over rows when the `parallel`
/// feature is on; identical values either way.
pub fn phase_portrait(
    p: &ReducedParams,
    grid: &GridSpec,
    mask_radius: f64,
) -> Result<PhasePortrait> {
    #[cfg(feature = "parallel")]
    {
        grid.validate()?;
        let report = critical_points(p)?;
        use rayon::prelude::*;
        let values = (0..grid.ny)
            .into_par_iter()
            .flat_map_iter(|iy| portrait_row(p, grid, iy, mask_radius))
            .collect();
        Ok(PhasePortrait {
            params: *p,
            grid: *grid,
            values,
            report,
        })
    }
    #[cfg(not(feature = "parallel"))]
    {
        phase_portrait_serial(p, grid, mask_radius)
    }
}

/// Sequential twin of [`phase_portrait`].
pub fn phase_portrait_serial(
    p: &ReducedParams,
    grid: &GridSpec,
    mask_radius: f64,
) -> Result<PhasePortrait> {
    grid.validate()?;
    let report = critical_points(p)?;
    let values = (0..grid.ny)
        .flat_map(|iy| portrait_row(p, grid, iy, mask_radius))
        .collect();
    Ok(PhasePortrait {
        params: *p,
        grid: *grid,
        values,
        report,
    })
}
