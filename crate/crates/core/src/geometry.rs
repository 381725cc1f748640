//! Chart and cover representations of the band and the maps between them.
//!
//! The band is the strip `0 ≤ x < π` with its vertical edges glued by
//! `(0, y) ~ (π, −y)`; equivalently, the quotient of the cylinder
//! `x ∈ [0, 2π)` by the deck map [`tau`]`: (x, y) ↦ (x + π, −y)`. A vortex is
//! stored as one chart representative together with a signed strength whose
//! sign is tied to that representative: pushing the representative through
//! the gluing negates both `y` and the strength, leaving the physical
//! configuration unchanged.

use serde::{Deserialize, Serialize};

use crate::{Result, VortexError};

/// Circumference of the covering cylinder.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Width of the fundamental chart; also the horizontal shift of [`tau`].
pub const CHART_WIDTH: f64 = std::f64::consts::PI;

/// Default collision radius (cylinder metric between lifted vortices).
pub const DEFAULT_COLLISION_RADIUS: f64 = 1e-6;

/// Wrap `x` into `[0, 2π)`. `rem_euclid` can round up to the modulus for
/// tiny negative inputs, so that endpoint is folded back to `0`.
pub fn wrap_2pi(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// A point on the fundamental chart. The canonical range is `0 ≤ x < π`;
/// values outside it are legal intermediates and denote the representative
/// reached by unwrapping through the gluing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub x: f64,
    pub y: f64,
}

impl ChartPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// A point on the covering cylinder, `x` canonically in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderPoint {
    pub x: f64,
    pub y: f64,
}

impl CylinderPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x: wrap_2pi(x),
            y,
        }
    }
}

/// Orientation-reversing deck map of the cover: `(x, y) ↦ (x + π, −y)`.
/// An involution up to floating-point wrap-around.
pub fn tau(p: CylinderPoint) -> CylinderPoint {
    CylinderPoint {
        x: wrap_2pi(p.x + CHART_WIDTH),
        y: -p.y,
    }
}

/// Distance on the covering cylinder (horizontal separation wrapped to the
/// nearer side).
pub fn cylinder_distance(a: CylinderPoint, b: CylinderPoint) -> f64 {
    let mut dx = (a.x - b.x).rem_euclid(TWO_PI);
    if dx > CHART_WIDTH {
        dx = TWO_PI - dx;
    }
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Reduce a representative `(x, y, strength)` to the canonical chart: wrap
/// `x` into `[0, 2π)` and, if it landed in the second copy `[π, 2π)`, push it
/// through the gluing to `(x − π, −y, −strength)`. Idempotent.
pub fn canonicalize(x: f64, y: f64, gamma: f64) -> (f64, f64, f64) {
    let xr = wrap_2pi(x);
    if xr >= CHART_WIDTH {
        (xr - CHART_WIDTH, -y, -gamma)
    } else {
        (xr, y, gamma)
    }
}

/// One vortex: a chart position and a signed strength bound to that
/// representative (the sign travels with `y` under re-representation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vortex {
    pub x: f64,
    pub y: f64,
    pub gamma: f64,
    /// Stable identity used in trajectory output and event logs.
    #[serde(default)]
    pub label: String,
}

impl Vortex {
    pub fn new(x: f64, y: f64, gamma: f64, label: impl Into<String>) -> Self {
        Self {
            x,
            y,
            gamma,
            label: label.into(),
        }
    }

    /// The same vortex expressed in the canonical chart range.
    pub fn canonicalized(&self) -> Self {
        let (x, y, gamma) = canonicalize(self.x, self.y, self.gamma);
        Self {
            x,
            y,
            gamma,
            label: self.label.clone(),
        }
    }

    /// This representative's position on the cover.
    pub fn cover_point(&self) -> CylinderPoint {
        CylinderPoint::new(self.x, self.y)
    }
}

/// An ordered collection of vortices with stable labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexSystem {
    pub vortices: Vec<Vortex>,
}

impl VortexSystem {
    /// Build a system from raw vortices, assigning labels `v1, v2, …` to any
    /// vortex whose label is empty.
    pub fn new(vortices: Vec<Vortex>) -> Self {
        let mut s = Self { vortices };
        s.fill_labels();
        s
    }

    fn fill_labels(&mut self) {
        for (i, v) in self.vortices.iter_mut().enumerate() {
            if v.label.is_empty() {
                v.label = format!("v{}", i + 1);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.vortices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vortices.is_empty()
    }

    /// Parse a system from JSON (`{"vortices": [{"x", "y", "gamma", "label"?}]}`).
    /// Unknown keys are rejected; empty labels are auto-filled; positions are
    /// canonicalized; the result is validated.
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: Self = serde_json::from_str(text)
            .map_err(|e| VortexError::Validation(format!("invalid system JSON: {e}")))?;
        let mut sys = Self::new(parsed.vortices).canonicalized();
        sys.fill_labels();
        sys.validate()?;
        Ok(sys)
    }

    /// Serialize in the same schema accepted by [`VortexSystem::from_json`].
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("vortex system serializes");
        s.push('\n');
        s
    }

    /// Check basic well-formedness: at least one vortex, finite coordinates,
    /// nonzero strengths, distinct labels.
    pub fn validate(&self) -> Result<()> {
        if self.vortices.is_empty() {
            return Err(VortexError::Validation(
                "a vortex system needs at least one vortex".into(),
            ));
        }
        let mut labels: Vec<&str> = Vec::with_capacity(self.len());
        for v in &self.vortices {
            if !(v.x.is_finite() && v.y.is_finite() && v.gamma.is_finite()) {
                return Err(VortexError::Validation(format!(
                    "vortex {} has non-finite coordinates or strength",
                    v.label
                )));
            }
            if v.gamma == 0.0 {
                return Err(VortexError::Validation(format!(
                    "vortex {} has zero strength",
                    v.label
                )));
            }
            if labels.contains(&v.label.as_str()) {
                return Err(VortexError::Validation(format!(
                    "duplicate label {}",
                    v.label
                )));
            }
            labels.push(&v.label);
        }
        Ok(())
    }

    /// Every vortex reduced to the canonical chart range.
    pub fn canonicalized(&self) -> Self {
        Self {
            vortices: self.vortices.iter().map(Vortex::canonicalized).collect(),
        }
    }

    /// Re-represent every vortex through the deck map:
    /// `(x, y, Γ) ↦ (x + π mod 2π, −y, −Γ)`, labels preserved. The physical
    /// configuration is untouched — the lift is the same set — but every
    /// stored representative moves to the opposite copy of the chart.
    /// An involution up to floating-point wrap-around.
    pub fn mobius_flip(&self) -> Self {
        Self {
            vortices: self
                .vortices
                .iter()
                .map(|v| Vortex {
                    x: wrap_2pi(v.x + CHART_WIDTH),
                    y: -v.y,
                    gamma: -v.gamma,
                    label: v.label.clone(),
                })
                .collect(),
        }
    }

    /// The `2N` covering vortices: each chart vortex contributes its own
    /// representative and the deck image with negated strength. The total
    /// lifted strength is therefore always zero.
    pub fn lift(&self) -> Vec<(CylinderPoint, f64)> {
        let mut out = Vec::with_capacity(2 * self.len());
        for v in &self.vortices {
            let p = v.cover_point();
            out.push((p, v.gamma));
            out.push((tau(p), -v.gamma));
        }
        out
    }

    /// All strengths in order.
    pub fn gammas(&self) -> Vec<f64> {
        self.vortices.iter().map(|v| v.gamma).collect()
    }

    /// All labels in order.
    pub fn labels(&self) -> Vec<String> {
        self.vortices.iter().map(|v| v.label.clone()).collect()
    }

    /// Positions flattened as `[x1, y1, x2, y2, …]` (uncanonicalized).
    pub fn coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.len());
        for v in &self.vortices {
            out.push(v.x);
            out.push(v.y);
        }
        out
    }

    /// Shift every representative horizontally by `delta` (a symmetry of the
    /// dynamics). No canonicalization is applied.
    pub fn translated(&self, delta: f64) -> Self {
        Self {
            vortices: self
                .vortices
                .iter()
                .map(|v| Vortex {
                    x: v.x + delta,
                    ..v.clone()
                })
                .collect(),
        }
    }

    /// Same positions with every strength negated (reverses the flow).
    pub fn negated_strengths(&self) -> Self {
        Self {
            vortices: self
                .vortices
                .iter()
                .map(|v| Vortex {
                    gamma: -v.gamma,
                    ..v.clone()
                })
                .collect(),
        }
    }

    /// Minimal cylinder distance over distinct lifted pairs, together with
    /// the chart indices achieving it and whether the second member is the
    /// deck image of vortex `j`. A vortex and its own image are at least π
    /// apart, so only cross pairs matter.
    pub fn min_lift_separation(&self) -> Option<(f64, usize, usize, bool)> {
        min_lift_separation_flat(&self.coords())
    }

    /// Error with [`VortexError::Collision`] if any two lifted vortices are
    /// closer than `radius`. `time` is threaded into the error for event
    /// reporting.
    pub fn collision_check(&self, radius: f64, time: Option<f64>) -> Result<()> {
        if let Some((dist, i, j, image)) = self.min_lift_separation() {
            if dist < radius {
                let a = self.vortices[i].label.clone();
                let b = if image {
                    format!("{}*", self.vortices[j].label)
                } else {
                    self.vortices[j].label.clone()
                };
                return Err(VortexError::Collision {
                    time,
                    a,
                    b,
                    dist,
                    radius,
                });
            }
        }
        Ok(())
    }
}

/// Minimal lifted separation over flattened coordinates `[x1, y1, …]`.
/// Returns `(distance, i, j, j_is_deck_image)`, or `None` for fewer than two
/// vortices.
pub(crate) fn min_lift_separation_flat(coords: &[f64]) -> Option<(f64, usize, usize, bool)> {
    let n = coords.len() / 2;
    if n < 2 {
        return None;
    }
    let mut best: Option<(f64, usize, usize, bool)> = None;
    for i in 0..n {
        let pi = CylinderPoint::new(coords[2 * i], coords[2 * i + 1]);
        for j in (i + 1)..n {
            let pj = CylinderPoint::new(coords[2 * j], coords[2 * j + 1]);
            let direct = cylinder_distance(pi, pj);
            let image = cylinder_distance(pi, tau(pj));
            let (d, is_image) = if direct <= image {
                (direct, false)
            } else {
                (image, true)
            };
            if best.is_none_or(|(bd, ..)| d < bd) {
                best = Some((d, i, j, is_image));
            }
        }
    }
    best
}

/// Distance between two band points: the minimum over deck representatives.
pub fn band_distance(a: ChartPoint, b: ChartPoint) -> f64 {
    let pa = CylinderPoint::new(a.x, a.y);
    let pb = CylinderPoint::new(b.x, b.y);
    cylinder_distance(pa, pb).min(cylinder_distance(pa, tau(pb)))
}
