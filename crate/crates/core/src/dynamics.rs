//! Interaction energy, stream function, momentum, and the induced velocity
//! field on the fundamental chart.
//!
//! All formulas act on one chart representative per vortex but are invariant
//! under re-representation (pushing any single vortex through the gluing with
//! its strength sign), under horizontal translation, and under
//! [`VortexSystem::mobius_flip`] — these symmetries are what make the
//! quantities well defined on the band itself.

use serde::Serialize;

use crate::geometry::{
    cylinder_distance, tau, ChartPoint, CylinderPoint, VortexSystem, DEFAULT_COLLISION_RADIUS,
};
use crate::grid::GridSpec;
use crate::{Result, VortexError};

const PI: f64 = std::f64::consts::PI;
const LN_2: f64 = std::f64::consts::LN_2;
const INV_4PI: f64 = 1.0 / (4.0 * PI);
const INV_8PI: f64 = 1.0 / (8.0 * PI);

/// Beyond this vertical separation the hyperbolic terms are evaluated
/// asymptotically; `sinh²(u/2)` would otherwise overflow near `|u| ≈ 1420`
/// and `sinh(u)` near `|u| ≈ 710`.
const LARGE_DIFF: f64 = 700.0;

/// `log(s + sinh²(u/2))` for `s ∈ [0, 1]`, with the asymptotic branch
/// `|u| − 2 log 2` (error `O(e^{−|u|})`) once `sinh²(u/2)` would overflow.
pub(crate) fn ln_s_plus_sinh2_half(s: f64, u: f64) -> f64 {
    if u.abs() > LARGE_DIFF {
        u.abs() - 2.0 * LN_2
    } else {
        let sh = (0.5 * u).sinh();
        (s + sh * sh).ln()
    }
}

/// `sinh(u) / (s + sinh²(u/2))`, saturating to `±2` for large `|u|`.
pub(crate) fn sinh_over_s_plus_sinh2_half(s: f64, u: f64) -> f64 {
    if u.abs() > LARGE_DIFF {
        2.0 * u.signum()
    } else {
        let sh = (0.5 * u).sinh();
        u.sinh() / (s + sh * sh)
    }
}

/// `1 / (s + sinh²(u/2))`, vanishing for large `|u|`.
pub(crate) fn inv_s_plus_sinh2_half(s: f64, u: f64) -> f64 {
    if u.abs() > LARGE_DIFF {
        0.0
    } else {
        let sh = (0.5 * u).sinh();
        1.0 / (s + sh * sh)
    }
}

/// `log cosh(y)` with the asymptotic branch `|y| − log 2` for large `|y|`.
pub(crate) fn ln_cosh(y: f64) -> f64 {
    if y.abs() > 350.0 {
        y.abs() - LN_2
    } else {
        y.cosh().ln()
    }
}

/// Interaction kernel of the covering cylinder:
/// `−(1/4π) · log(sin²(Δx/2) + sinh²(Δy/2))`.
/// Symmetric, 2π-periodic in `Δx`, and diverging to `+∞` at coincident
/// points; evaluation closer than the default collision radius is an error.
pub fn cylinder_green(p: CylinderPoint, q: CylinderPoint) -> Result<f64> {
    if cylinder_distance(p, q) < DEFAULT_COLLISION_RADIUS {
        return Err(VortexError::Collision {
            time: None,
            a: "p".into(),
            b: "q".into(),
            dist: cylinder_distance(p, q),
            radius: DEFAULT_COLLISION_RADIUS,
        });
    }
    let s = (0.5 * (p.x - q.x)).sin();
    Ok(-INV_4PI * ln_s_plus_sinh2_half(s * s, p.y - q.y))
}

/// Interaction kernel of the band: the cylinder kernel antisymmetrized over
/// the deck map,
/// `−(1/4π) [log(sin²(Δx/2) + sinh²((y_a−y_b)/2)) − log(cos²(Δx/2) + sinh²((y_a+y_b)/2))]`.
/// Flips sign when either argument is re-represented through the gluing
/// (it is a *twisted* kernel); errors when `a` collides with the lift of `b`.
pub fn green_mobius(a: ChartPoint, b: ChartPoint) -> Result<f64> {
    let pa = CylinderPoint::new(a.x, a.y);
    let pb = CylinderPoint::new(b.x, b.y);
    let d = cylinder_distance(pa, pb).min(cylinder_distance(pa, tau(pb)));
    if d < DEFAULT_COLLISION_RADIUS {
        return Err(VortexError::Collision {
            time: None,
            a: "a".into(),
            b: "b".into(),
            dist: d,
            radius: DEFAULT_COLLISION_RADIUS,
        });
    }
    Ok(green_mobius_raw(a.x - b.x, a.y, b.y))
}

/// Unchecked band kernel on raw chart coordinates.
fn green_mobius_raw(dx: f64, ya: f64, yb: f64) -> f64 {
    let s = (0.5 * dx).sin();
    let c = (0.5 * dx).cos();
    -INV_4PI * (ln_s_plus_sinh2_half(s * s, ya - yb) - ln_s_plus_sinh2_half(c * c, ya + yb))
}

/// Chart velocity of one vortex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VelocityVector {
    pub dx: f64,
    pub dy: f64,
}

/// Conserved quantities of a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Observables {
    pub hamiltonian: f64,
    pub momentum: f64,
}

/// Total interaction energy on flattened coordinates (no collision check).
pub(crate) fn hamiltonian_flat(coords: &[f64], gammas: &[f64]) -> f64 {
    let n = gammas.len();
    let mut h = 0.0;
    for k in 0..n {
        let (xk, yk) = (coords[2 * k], coords[2 * k + 1]);
        // Self energy: interaction with the vortex's own deck image.
        h += INV_4PI * gammas[k] * gammas[k] * ln_cosh(yk);
        for l in (k + 1)..n {
            let (xl, yl) = (coords[2 * l], coords[2 * l + 1]);
            let g = gammas[k] * gammas[l];
            let s = (0.5 * (xk - xl)).sin();
            let c = (0.5 * (xk - xl)).cos();
            h -= INV_4PI * g * ln_s_plus_sinh2_half(s * s, yk - yl);
            h += INV_4PI * g * ln_s_plus_sinh2_half(c * c, yk + yl);
        }
    }
    h
}

/// Vertical impulse `Σ Γ_k y_k` on flattened coordinates. Invariant under
/// re-representation since `Γ` and `y` flip sign together.
pub(crate) fn momentum_flat(coords: &[f64], gammas: &[f64]) -> f64 {
    gammas
        .iter()
        .enumerate()
        .map(|(k, g)| g * coords[2 * k + 1])
        .sum()
}

/// Chart velocity field on flattened coordinates (no collision check).
/// `out` receives `[ẋ1, ẏ1, ẋ2, ẏ2, …]`.
pub(crate) fn velocity_flat(coords: &[f64], gammas: &[f64], out: &mut [f64]) {
    let n = gammas.len();
    for k in 0..n {
        let (xk, yk) = (coords[2 * k], coords[2 * k + 1]);
        // Self-advection along the ring induced by the vortex's deck image.
        let mut xd = gammas[k] * INV_4PI * yk.tanh();
        let mut yd = 0.0;
        for l in 0..n {
            if l == k {
                continue;
            }
            let (xl, yl) = (coords[2 * l], coords[2 * l + 1]);
            let dx = xk - xl;
            let s = (0.5 * dx).sin();
            let c = (0.5 * dx).cos();
            let (s2, c2) = (s * s, c * c);
            let dym = yk - yl;
            let dyp = yk + yl;
            xd += gammas[l]
                * INV_8PI
                * (sinh_over_s_plus_sinh2_half(c2, dyp) - sinh_over_s_plus_sinh2_half(s2, dym));
            yd += gammas[l]
                * INV_8PI
                * dx.sin()
                * (inv_s_plus_sinh2_half(s2, dym) + inv_s_plus_sinh2_half(c2, dyp));
        }
        out[2 * k] = xd;
        out[2 * k + 1] = yd;
    }
}

/// Total interaction energy of the configuration:
/// pairwise band-kernel terms plus the self term
/// `(Γ_k²/8π) log(1 + sinh² y_k)` from each vortex's own deck image.
/// Errors on configurations within the default collision radius.
pub fn hamiltonian(s: &VortexSystem) -> Result<f64> {
    s.collision_check(DEFAULT_COLLISION_RADIUS, None)?;
    Ok(hamiltonian_flat(&s.coords(), &s.gammas()))
}

/// Conserved vertical impulse `Σ Γ_k y_k`.
pub fn momentum(s: &VortexSystem) -> f64 {
    momentum_flat(&s.coords(), &s.gammas())
}

/// Energy and momentum together.
pub fn observables(s: &VortexSystem) -> Result<Observables> {
    Ok(Observables {
        hamiltonian: hamiltonian(s)?,
        momentum: momentum(s),
    })
}

/// Chart velocity of every vortex. Equivariant under re-representation:
/// pushing a vortex through the gluing maps its velocity to `(ẋ, −ẏ)`.
/// Errors on configurations within the default collision radius.
pub fn velocity(s: &VortexSystem) -> Result<Vec<VelocityVector>> {
    s.collision_check(DEFAULT_COLLISION_RADIUS, None)?;
    let coords = s.coords();
    let gammas = s.gammas();
    let mut out = vec![0.0; coords.len()];
    velocity_flat(&coords, &gammas, &mut out);
    Ok(out
        .chunks_exact(2)
        .map(|v| VelocityVector { dx: v[0], dy: v[1] })
        .collect())
}

/// Stream function of the configuration at a field point: the sum of twisted
/// kernels `Σ_k Γ_k G(p, p_k)`. Twisted itself — re-representing `p` flips
/// the sign — but insensitive to how each *vortex* is represented. Errors
/// when `p` falls within the default collision radius of the lift.
pub fn stream_function(p: ChartPoint, s: &VortexSystem) -> Result<f64> {
    let pc = CylinderPoint::new(p.x, p.y);
    for (q, _) in s.lift() {
        if cylinder_distance(pc, q) < DEFAULT_COLLISION_RADIUS {
            return Err(VortexError::Collision {
                time: None,
                a: "field point".into(),
                b: "lifted vortex".into(),
                dist: cylinder_distance(pc, q),
                radius: DEFAULT_COLLISION_RADIUS,
            });
        }
    }
    Ok(stream_function_raw(p, s))
}

fn stream_function_raw(p: ChartPoint, s: &VortexSystem) -> f64 {
    s.vortices
        .iter()
        .map(|v| v.gamma * green_mobius_raw(p.x - v.x, p.y, v.y))
        .sum()
}

fn masked_stream_value(s: &VortexSystem, lift: &[(CylinderPoint, f64)], p: ChartPoint, mask_radius: f64) -> f64 {
    let pc = CylinderPoint::new(p.x, p.y);
    for (q, _) in lift {
        if cylinder_distance(pc, *q) < mask_radius {
            return f64::NAN;
        }
    }
    stream_function_raw(p, s)
}

fn stream_row(s: &VortexSystem, lift: &[(CylinderPoint, f64)], grid: &GridSpec, iy: usize, mask_radius: f64) -> Vec<f64> {
    let y = grid.y_at(iy);
    (0..grid.nx)
        .map(|ix| masked_stream_value(s, lift, ChartPoint::new(grid.x_at(ix), y), mask_radius))
        .collect()
}

/// Stream function sampled over a grid, row-major (`iy * nx + ix`); nodes
/// within `mask_radius` of any lifted vortex are `NaN`. Data-parallel over
/// rows when the `parallel` feature is on; identical values either way.
pub fn stream_function_grid(
    s: &VortexSystem,
    grid: &GridSpec,
    mask_radius: f64,
) -> Result<Vec<f64>> {
    #[cfg(feature = "parallel")]
    {
        grid.validate()?;
        s.validate()?;
        let lift = s.lift();
        use rayon::prelude::*;
        Ok((0..grid.ny)
            .into_par_iter()
            .flat_map_iter(|iy| stream_row(s, &lift, grid, iy, mask_radius))
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        stream_function_grid_serial(s, grid, mask_radius)
    }
}

/// Sequential twin of [`stream_function_grid`].
pub fn stream_function_grid_serial(
    s: &VortexSystem,
    grid: &GridSpec,
    mask_radius: f64,
) -> Result<Vec<f64>> {
    grid.validate()?;
    s.validate()?;
    let lift = s.lift();
    Ok((0..grid.ny)
        .flat_map(|iy| stream_row(s, &lift, grid, iy, mask_radius))
        .collect())
}
