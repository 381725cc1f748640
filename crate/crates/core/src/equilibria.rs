//! Steady and rigidly drifting configurations: the single-vortex drift law,
//! the two-vortex fixed equilibria, alternating equatorial rings, and
//! equally spaced rings with their analytic drift.

use serde::Serialize;

use crate::dynamics::{velocity, VelocityVector};
use crate::geometry::{canonicalize, Vortex, VortexSystem, TWO_PI};
use crate::{Result, VortexError};

const PI: f64 = std::f64::consts::PI;
const INV_4PI: f64 = 1.0 / (4.0 * PI);

/// Closed-form velocity of a lone vortex: it drifts horizontally with
/// `ẋ = (Γ/4π) tanh(y)`, carried by its own deck image; `ẏ = 0`.
pub fn single_vortex_velocity(gamma: f64, y: f64) -> VelocityVector {
    VelocityVector {
        dx: gamma * INV_4PI * y.tanh(),
        dy: 0.0,
    }
}

/// One mirror branch of the two-vortex fixed equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedEquilibriumBranch {
    pub y1: f64,
    pub y2: f64,
    /// Vertical impulse `Γ₁y₁ + Γ₂y₂` of the branch.
    pub momentum: f64,
}

impl FixedEquilibriumBranch {
    /// Materialize the branch as a two-vortex system (both vortices at
    /// `x = 0`).
    pub fn to_system(&self, gamma1: f64, gamma2: f64) -> VortexSystem {
        VortexSystem::new(vec![
            Vortex::new(0.0, self.y1, gamma1, "v1"),
            Vortex::new(0.0, self.y2, gamma2, "v2"),
        ])
    }
}

/// The two fixed (zero-velocity) equilibria of a same-sign, unequal-strength
/// pair sitting on a common vertical line. With `a_i = Γ_i²` and
/// `S = √(a₁⁴ + a₁³a₂ + a₁a₂³ + a₂⁴)`, the heights are
/// `y₁ = ±asinh √(2a₂(a₁² + a₂² + S) / (a₁(a₁ − a₂)²))` and the mirrored
/// expression for `y₂` with the opposite sign. Equal strengths push the
/// equilibrium to infinity and opposite signs admit none; both are domain
/// errors.
pub fn fixed_equilibrium_two(gamma1: f64, gamma2: f64) -> Result<[FixedEquilibriumBranch; 2]> {
    if !(gamma1.is_finite() && gamma2.is_finite()) {
        return Err(VortexError::Validation("strengths must be finite".into()));
    }
    if gamma1 * gamma2 <= 0.0 {
        return Err(VortexError::Domain(
            "a fixed two-vortex equilibrium needs strengths of the same sign".into(),
        ));
    }
    if gamma1 == gamma2 {
        return Err(VortexError::Domain(
            "equal strengths have no fixed two-vortex equilibrium at finite height".into(),
        ));
    }
    let a1 = gamma1 * gamma1;
    let a2 = gamma2 * gamma2;
    let s = (a1.powi(4) + a1.powi(3) * a2 + a1 * a2.powi(3) + a2.powi(4)).sqrt();
    let num = 2.0 * (a1 * a1 + a2 * a2 + s);
    let den = (a1 - a2) * (a1 - a2);
    let y1 = (a2 * num / (a1 * den)).sqrt().asinh();
    let y2 = -(a1 * num / (a2 * den)).sqrt().asinh();
    let up = FixedEquilibriumBranch {
        y1,
        y2,
        momentum: gamma1 * y1 + gamma2 * y2,
    };
    let down = FixedEquilibriumBranch {
        y1: -y1,
        y2: -y2,
        momentum: -(gamma1 * y1 + gamma2 * y2),
    };
    Ok([up, down])
}

/// Controls for the equatorial Newton solver.
#[derive(Clone, Debug)]
pub struct EquatorialOptions {
    /// Starting positions for `x₂ … x_N` (the first vortex is gauge-fixed at
    /// `x₁ = 0`); equally spaced with gap π/N when `None`.
    pub initial: Option<Vec<f64>>,
    /// Convergence threshold on the residual (∞-norm).
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for EquatorialOptions {
    fn default() -> Self {
        Self {
            initial: None,
            tol: 1e-12,
            max_iterations: 60,
        }
    }
}

/// Converged equatorial equilibrium.
#[derive(Clone, Debug, Serialize)]
pub struct EquatorialSolution {
    /// All positions including the gauge-fixed `x₁ = 0`.
    pub positions: Vec<f64>,
    /// Maximal chart speed of the solved configuration.
    pub residual: f64,
    pub iterations: usize,
    pub system: VortexSystem,
}

/// Solve for an equilibrium of an odd, alternating-sign strength vector on
/// the equator `y = 0`. On the equator every horizontal velocity vanishes
/// identically, so the problem reduces to the vertical balance
/// `F_j = Σ_{l≠j} Γ_l / sin(x_j − x_l) = 0`, solved by a damped Newton
/// iteration with analytic Jacobian on the strictly ordered interior
/// positions (gauge `x₁ = 0`).
pub fn equatorial_equilibrium(
    gammas: &[f64],
    opts: &EquatorialOptions,
) -> Result<EquatorialSolution> {
    let n = gammas.len();
    if n == 0 || n.is_multiple_of(2) {
        return Err(VortexError::Validation(
            "equatorial equilibria need an odd number of vortices".into(),
        ));
    }
    for g in gammas {
        if !g.is_finite() || *g == 0.0 {
            return Err(VortexError::Validation(
                "strengths must be finite and nonzero".into(),
            ));
        }
    }
    for w in gammas.windows(2) {
        if w[0] * w[1] >= 0.0 {
            return Err(VortexError::Validation(
                "strength signs must alternate around the equator".into(),
            ));
        }
    }

    let build_system = |positions: &[f64]| -> VortexSystem {
        VortexSystem::new(
            positions
                .iter()
                .zip(gammas)
                .map(|(&x, &g)| Vortex::new(x, 0.0, g, ""))
                .collect(),
        )
    };
    let measured_residual = |sys: &VortexSystem| -> Result<f64> {
        Ok(velocity(sys)?
            .iter()
            .map(|v| v.dx.abs().max(v.dy.abs()))
            .fold(0.0, f64::max))
    };

    if n == 1 {
        let system = build_system(&[0.0]);
        let residual = measured_residual(&system)?;
        return Ok(EquatorialSolution {
            positions: vec![0.0],
            residual,
            iterations: 0,
            system,
        });
    }

    let m = n - 1; // unknowns x₂ … x_N
    let mut u: Vec<f64> = match &opts.initial {
        Some(init) => {
            if init.len() != m {
                return Err(VortexError::Validation(format!(
                    "initial guess needs {m} interior positions"
                )));
            }
            init.clone()
        }
        None => (1..n).map(|j| j as f64 * PI / n as f64).collect(),
    };
    if !ordered_in_chart(&u) {
        return Err(VortexError::Validation(
            "initial positions must be strictly increasing inside (0, π)".into(),
        ));
    }

    let full = |u: &[f64]| -> Vec<f64> {
        let mut xs = Vec::with_capacity(n);
        xs.push(0.0);
        xs.extend_from_slice(u);
        xs
    };
    let balance = |xs: &[f64]| -> Vec<f64> {
        (1..n)
            .map(|j| {
                (0..n)
                    .filter(|&l| l != j)
                    .map(|l| gammas[l] / (xs[j] - xs[l]).sin())
                    .sum()
            })
            .collect()
    };
    let norm2 = |f: &[f64]| f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_inf = |f: &[f64]| f.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    let mut xs = full(&u);
    let mut f = balance(&xs);
    for it in 0..opts.max_iterations {
        let res = norm_inf(&f);
        if res <= opts.tol {
            let system = build_system(&xs);
            let residual = measured_residual(&system)?;
            return Ok(EquatorialSolution {
                positions: xs,
                residual,
                iterations: it,
                system,
            });
        }

        // Analytic Jacobian of the balance with respect to x₂ … x_N.
        let mut jac = vec![0.0; m * m];
        for j in 1..n {
            for l in 0..n {
                if l == j {
                    continue;
                }
                let d = xs[j] - xs[l];
                let coupling = gammas[l] * d.cos() / (d.sin() * d.sin());
                jac[(j - 1) * m + (j - 1)] -= coupling;
                if l >= 1 {
                    jac[(j - 1) * m + (l - 1)] += coupling;
                }
            }
        }
        let mut delta: Vec<f64> = f.iter().map(|v| -v).collect();
        if solve_dense(&mut jac, &mut delta, m).is_none() {
            return Err(VortexError::Convergence {
                iterations: it,
                residual: res,
            });
        }

        // Damped update: halve until the residual drops, rejecting any
        // candidate that scrambles the ordering.
        let f2 = norm2(&f);
        let mut alpha = 1.0;
        let mut stepped = false;
        let mut saw_ordered_candidate = false;
        for _ in 0..40 {
            let cand: Vec<f64> = u
                .iter()
                .zip(&delta)
                .map(|(ui, di)| ui + alpha * di)
                .collect();
            if ordered_in_chart(&cand) {
                saw_ordered_candidate = true;
                let xs_cand = full(&cand);
                let f_cand = balance(&xs_cand);
                if norm2(&f_cand) < f2 {
                    u = cand;
                    xs = xs_cand;
                    f = f_cand;
                    stepped = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !stepped {
            if !saw_ordered_candidate {
                return Err(VortexError::OrderingViolation { iteration: it });
            }
            return Err(VortexError::Convergence {
                iterations: it,
                residual: res,
            });
        }
    }
    Err(VortexError::Convergence {
        iterations: opts.max_iterations,
        residual: norm_inf(&f),
    })
}

/// Strictly increasing and strictly inside `(0, π)`, with the implicit
/// leading `x₁ = 0`.
fn ordered_in_chart(u: &[f64]) -> bool {
    let mut prev = 0.0;
    for &x in u {
        if !(x > prev + 1e-12) {
            return false;
        }
        prev = x;
    }
    prev < PI - 1e-12
}

/// Gaussian elimination with partial pivoting on a row-major `n × n` system;
/// the solution replaces `b`. `None` on a (numerically) singular matrix.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<()> {
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in (col + 1)..n {
            sum -= a[col * n + k] * b[k];
        }
        b[col] = sum / a[col * n + col];
    }
    Some(())
}

/// An equally spaced ring of `n` vortices of common strength at height `y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NRingSpec {
    pub n: usize,
    pub gamma: f64,
    pub y: f64,
}

impl NRingSpec {
    pub fn new(n: usize, gamma: f64, y: f64) -> Self {
        Self { n, gamma, y }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(VortexError::Validation("a ring needs n ≥ 1".into()));
        }
        if !self.gamma.is_finite() || self.gamma == 0.0 {
            return Err(VortexError::Validation(
                "ring strength must be finite and nonzero".into(),
            ));
        }
        if !self.y.is_finite() || self.y < 0.0 {
            return Err(VortexError::Domain(
                "ring height must be finite and nonnegative".into(),
            ));
        }
        if self.n.is_multiple_of(2) && self.y == 0.0 {
            return Err(VortexError::Domain(
                "an even ring needs positive height: opposite-copy partners collide on the equator"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Build the ring: vortices equally spaced along the horizontal circle of
/// length 2π at height `y`, i.e. chart representatives of the points
/// `s_m = 2πm/n`. Members whose parameter falls in the second copy appear at
/// `(s_m − π, −y, −Γ)`; for even `n` the lift is two aligned rows, for odd
/// `n` two staggered rows.
pub fn nring(spec: &NRingSpec) -> Result<VortexSystem> {
    spec.validate()?;
    let vortices = (0..spec.n)
        .map(|m| {
            let (x, y, g) = canonicalize(TWO_PI * m as f64 / spec.n as f64, spec.y, spec.gamma);
            Vortex::new(x, y, g, "")
        })
        .collect();
    Ok(VortexSystem::new(vortices))
}

/// Closed-form horizontal drift of the ring: `(Γn/4π)·coth(ny)` for even
/// `n` (aligned rows) and `(Γn/4π)·tanh(ny)` for odd `n` (staggered rows).
/// Reduces to `(Γ/4π)tanh y` at `n = 1` and `(Γ/2π)coth 2y` at `n = 2`.
pub fn nring_velocity_analytic(spec: &NRingSpec) -> Result<f64> {
    spec.validate()?;
    let ny = spec.n as f64 * spec.y;
    let scale = spec.gamma * spec.n as f64 * INV_4PI;
    Ok(if spec.n.is_multiple_of(2) {
        scale / ny.tanh()
    } else {
        scale * ny.tanh()
    })
}

/// Which squared trig function appears in the denominators of
/// [`trig_sum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrigVariant {
    Sin,
    Cos,
}

/// Closed form of `Σ_{j=1..K} sinh(2y) / (trig²(πj/K) + sinh²y)`:
/// `2K·coth(Ky)` for the sine variant, and for the cosine variant
/// `2K·coth(Ky)` when `K` is even, `2K·tanh(Ky)` when `K` is odd.
pub fn trig_sum(k: usize, y: f64, variant: TrigVariant) -> Result<f64> {
    if k == 0 {
        return Err(VortexError::Validation("trig sums need K ≥ 1".into()));
    }
    if y == 0.0 || !y.is_finite() {
        return Err(VortexError::Domain(
            "trig sums need a finite nonzero height".into(),
        ));
    }
    let ky = k as f64 * y;
    let two_k = 2.0 * k as f64;
    Ok(match variant {
        TrigVariant::Sin => two_k / ky.tanh(),
        TrigVariant::Cos => {
            if k.is_multiple_of(2) {
                two_k / ky.tanh()
            } else {
                two_k * ky.tanh()
            }
        }
    })
}

/// Direct term-by-term evaluation of the sum handled by [`trig_sum`].
pub fn trig_sum_direct(k: usize, y: f64, variant: TrigVariant) -> Result<f64> {
    if k == 0 {
        return Err(VortexError::Validation("trig sums need K ≥ 1".into()));
    }
    if y == 0.0 || !y.is_finite() {
        return Err(VortexError::Domain(
            "trig sums need a finite nonzero height".into(),
        ));
    }
    let sh = y.sinh();
    let sh2 = sh * sh;
    let s2y = (2.0 * y).sinh();
    Ok((1..=k)
        .map(|j| {
            let angle = PI * j as f64 / k as f64;
            let trig = match variant {
                TrigVariant::Sin => angle.sin(),
                TrigVariant::Cos => angle.cos(),
            };
            s2y / (trig * trig + sh2)
        })
        .sum())
}

/// How a configuration moves as a rigid body.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EquilibriumKind {
    /// Every vortex is at rest.
    Fixed,
    /// Uniform horizontal drift with no vertical motion.
    Relative,
    NotEquilibrium,
}

/// Verdict of [`verify_relative_equilibrium`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub kind: EquilibriumKind,
    /// Common horizontal drift (zero for fixed equilibria; for
    /// non-equilibria, the mean horizontal velocity the test compared
    /// against).
    pub drift_velocity: f64,
    /// Maximal deviation from the rigid motion just described.
    pub residual: f64,
}

/// Measure how rigidly a configuration moves: fixed if every velocity
/// vanishes to `tol`, relative if the horizontal velocities agree to `tol`
/// and the vertical ones vanish, otherwise not an equilibrium (with the
/// deviation reported).
pub fn verify_relative_equilibrium(s: &VortexSystem, tol: f64) -> Result<EquilibriumResult> {
    let v = velocity(s)?;
    let max_speed = v
        .iter()
        .map(|u| u.dx.abs().max(u.dy.abs()))
        .fold(0.0, f64::max);
    if max_speed <= tol {
        return Ok(EquilibriumResult {
            kind: EquilibriumKind::Fixed,
            drift_velocity: 0.0,
            residual: max_speed,
        });
    }
    let drift = v.iter().map(|u| u.dx).sum::<f64>() / v.len() as f64;
    let residual = v
        .iter()
        .map(|u| (u.dx - drift).abs().max(u.dy.abs()))
        .fold(0.0, f64::max);
    let kind = if residual <= tol {
        EquilibriumKind::Relative
    } else {
        EquilibriumKind::NotEquilibrium
    };
    Ok(EquilibriumResult {
        kind,
        drift_velocity: drift,
        residual,
    })
}
