//! Point-vortex dynamics on the Möbius band.
//!
//! The band is modelled as the quotient of a flat cylinder of circumference
//! 2π (and infinite height) by the orientation-reversing deck map
//! `(x, y) ↦ (x + π, −y)`. States live on the fundamental chart
//! `0 ≤ x < π`; every vortex carries a signed strength that flips sign
//! whenever its representative is pushed through the gluing, so the physical
//! vorticity on the band is well defined even though no global orientation
//! exists.
//!
//! The crate provides:
//!
//! * [`geometry`] — chart/cover representations, the deck map, lifting,
//!   canonicalization, and serialization of vortex systems;
//! * [`dynamics`] — interaction energy, stream function, momentum, and the
//!   induced velocity field;
//! * [`integrator`] — adaptive trajectory integration with boundary-crossing
//!   events, collision detection, conservation diagnostics, and first-return
//!   period detection (on top of the embedded Dormand–Prince 5(4) kernel in
//!   [`dopri5`]);
//! * [`equilibria`] — closed-form and Newton-solved steady and rigidly
//!   drifting configurations (single vortex, two-vortex fixed equilibria,
//!   alternating equatorial rings, equally spaced rings);
//! * [`reduced`] — the one-degree-of-freedom reduction of the two-vortex
//!   problem: reduced energy, reduced velocity, critical-point scans, orbit
//!   classification, and phase-portrait grids.
//!
//! Grid-shaped evaluations (`stream_function_grid`, `phase_portrait`) are
//! data-parallel when the default `parallel` feature is enabled; sequential
//! twins (`*_serial`) are always compiled and the parallel entry points fall
//! back to them when the feature is off.

// Validation sites spell range checks as `!(x > lo)` so that NaN fails them
// too; the positively phrased forms clippy suggests would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dopri5;
pub mod dynamics;
pub mod equilibria;
mod error;
pub mod geometry;
pub mod grid;
pub mod integrator;
pub mod reduced;

pub use error::VortexError;

/// Convenient result alias for fallible operations in this crate.
pub type Result<T> = std::result::Result<T, VortexError>;
