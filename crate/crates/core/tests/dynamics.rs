//! Interaction kernels, energy/impulse, velocity field, stream function.

mod common;

use std::f64::consts::PI;

use mobius_vortex::dynamics::{
    cylinder_green, green_mobius, hamiltonian, momentum, observables, stream_function,
    stream_function_grid, stream_function_grid_serial, velocity,
};
use mobius_vortex::geometry::{
    ChartPoint, CylinderPoint, Vortex, VortexSystem, CHART_WIDTH, TWO_PI,
};
use mobius_vortex::grid::GridSpec;
use mobius_vortex::VortexError;
use proptest::prelude::*;
use rand::Rng;

const INV_4PI: f64 = 1.0 / (4.0 * PI);

#[test]
fn cylinder_kernel_spot_value() {
    // −(1/4π)·log(sin²(π/4) + sinh²(1))
    let g = cylinder_green(CylinderPoint::new(PI / 2.0, 2.0), CylinderPoint::new(0.0, 0.0))
        .unwrap();
    assert!((g - (-0.05028146838801004)).abs() < 1e-15);
}

#[test]
fn cylinder_kernel_vanishes_at_the_antipode() {
    let g = cylinder_green(CylinderPoint::new(PI, 0.3), CylinderPoint::new(0.0, 0.3)).unwrap();
    assert_eq!(g, 0.0); // sin²(π/2) + sinh²(0) = 1
}

#[test]
fn cylinder_kernel_rejects_coincident_points() {
    let p = CylinderPoint::new(1.0, 0.5);
    assert!(matches!(
        cylinder_green(p, CylinderPoint::new(1.0 + 1e-9, 0.5)),
        Err(VortexError::Collision { .. })
    ));
}

proptest! {
    #[test]
    fn cylinder_kernel_symmetry_and_periodicity(
        x1 in 0.0..TWO_PI, y1 in -2.0..2.0,
        x2 in 0.0..TWO_PI, y2 in -2.0..2.0,
    ) {
        let p = CylinderPoint::new(x1, y1);
        let q = CylinderPoint::new(x2, y2);
        prop_assume!(mobius_vortex::geometry::cylinder_distance(p, q) > 1e-3);
        let g = cylinder_green(p, q).unwrap();
        prop_assert!((g - cylinder_green(q, p).unwrap()).abs() <= 1e-13);
        let shifted = CylinderPoint::new(x1 + TWO_PI, y1);
        prop_assert!((g - cylinder_green(shifted, q).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn band_kernel_is_twisted_and_symmetric(
        xa in 0.0..CHART_WIDTH, ya in -2.0..2.0,
        xb in 0.0..CHART_WIDTH, yb in -2.0..2.0,
    ) {
        let a = ChartPoint::new(xa, ya);
        let b = ChartPoint::new(xb, yb);
        let pa = CylinderPoint::new(xa, ya);
        let pb = CylinderPoint::new(xb, yb);
        let d = mobius_vortex::geometry::cylinder_distance(pa, pb)
            .min(mobius_vortex::geometry::cylinder_distance(pa, mobius_vortex::geometry::tau(pb)));
        prop_assume!(d > 1e-3);
        let g = green_mobius(a, b).unwrap();
        // Symmetric in its arguments.
        prop_assert!((g - green_mobius(b, a).unwrap()).abs() <= 1e-13);
        // Twisted: re-representing either argument flips the sign.
        let a_flip = ChartPoint::new(xa + PI, -ya);
        let b_flip = ChartPoint::new(xb + PI, -yb);
        prop_assert!((green_mobius(a_flip, b).unwrap() + g).abs() <= 1e-13);
        prop_assert!((green_mobius(a, b_flip).unwrap() + g).abs() <= 1e-13);
        // Re-representing both restores it.
        prop_assert!((green_mobius(a_flip, b_flip).unwrap() - g).abs() <= 1e-13);
    }
}

#[test]
fn pair_energy_decomposes_into_kernel_and_self_terms() {
    let mut rng = common::rng(21);
    for _ in 0..30 {
        let s = common::random_system(&mut rng, 2, 0.1, 2.0);
        let [a, b] = [&s.vortices[0], &s.vortices[1]];
        let h = hamiltonian(&s).unwrap();
        let pair = a.gamma
            * b.gamma
            * green_mobius(ChartPoint::new(a.x, a.y), ChartPoint::new(b.x, b.y)).unwrap();
        let self_terms = a.gamma * a.gamma * INV_4PI * a.y.cosh().ln()
            + b.gamma * b.gamma * INV_4PI * b.y.cosh().ln();
        assert!(
            (h - (pair + self_terms)).abs() <= 1e-13 * h.abs().max(1.0),
            "H = {h} vs pair {pair} + self {self_terms}"
        );
    }
}

#[test]
fn energy_and_impulse_are_flip_invariant() {
    let mut rng = common::rng(22);
    for _ in 0..100 {
        let n = rng.gen_range(1..=5);
        let s = common::random_system(&mut rng, n, 0.1, 1.5);
        let f = s.mobius_flip();
        let h = hamiltonian(&s).unwrap();
        assert!((hamiltonian(&f).unwrap() - h).abs() <= 1e-12 * h.abs().max(1.0));
        // Φ = ΣΓy term-wise: (−Γ)(−y) = Γy exactly.
        assert_eq!(momentum(&f), momentum(&s));
    }
}

#[test]
fn energy_is_representation_and_translation_invariant() {
    let mut rng = common::rng(23);
    for _ in 0..40 {
        let n = rng.gen_range(2..=4);
        // Raw (non-canonical) representatives on the full cover.
        let s = loop {
            let vortices = (0..n)
                .map(|_| {
                    Vortex::new(
                        rng.gen_range(0.0..TWO_PI),
                        rng.gen_range(-1.5..1.5),
                        rng.gen_range(0.5..2.0),
                        "",
                    )
                })
                .collect();
            let s = VortexSystem::new(vortices);
            match s.min_lift_separation() {
                Some((d, ..)) if d < 0.1 => continue,
                _ => break s,
            }
        };
        let h = hamiltonian(&s).unwrap();
        let scale = h.abs().max(1.0);
        assert!((hamiltonian(&s.canonicalized()).unwrap() - h).abs() <= 1e-12 * scale);
        let delta = rng.gen_range(-3.0..3.0);
        assert!(
            (hamiltonian(&s.translated(delta)).unwrap() - h).abs() <= 1e-12 * scale,
            "translation by {delta} moved the energy"
        );
    }
}

#[test]
fn velocity_is_flip_equivariant() {
    let mut rng = common::rng(24);
    for _ in 0..100 {
        let n = rng.gen_range(1..=5);
        let s = common::random_system(&mut rng, n, 0.1, 1.5);
        let v = velocity(&s).unwrap();
        let vf = velocity(&s.mobius_flip()).unwrap();
        for (a, b) in v.iter().zip(&vf) {
            assert!((a.dx - b.dx).abs() <= 1e-12, "ẋ changed under the flip");
            assert!((a.dy + b.dy).abs() <= 1e-12, "ẏ did not negate under the flip");
        }
    }
}

#[test]
fn impulse_derivative_vanishes_identically() {
    // dΦ/dt = ΣΓ_k ẏ_k = 0 follows from the antisymmetry of the pair terms.
    let mut rng = common::rng(25);
    for _ in 0..50 {
        let n = rng.gen_range(2..=6);
        let s = common::random_system(&mut rng, n, 0.05, 2.0);
        let v = velocity(&s).unwrap();
        let sum: f64 = s
            .vortices
            .iter()
            .zip(&v)
            .map(|(vx, u)| vx.gamma * u.dy)
            .sum();
        let scale: f64 = s
            .vortices
            .iter()
            .zip(&v)
            .map(|(vx, u)| (vx.gamma * u.dy).abs())
            .sum::<f64>()
            .max(1e-300);
        assert!(sum.abs() <= 1e-13 * scale.max(1.0), "ΣΓẏ = {sum}");
    }
}

#[test]
fn velocity_matches_energy_gradient() {
    // ẋ_k = (1/Γ_k) ∂H/∂y_k, ẏ_k = −(1/Γ_k) ∂H/∂x_k (central differences).
    let mut rng = common::rng(26);
    let h_step = 1e-5;
    for _ in 0..10 {
        let n = rng.gen_range(2..=4);
        let s = common::random_system(&mut rng, n, 0.3, 1.5);
        let v = velocity(&s).unwrap();
        for (k, vk) in v.iter().enumerate() {
            let bump = |dx: f64, dy: f64| {
                let mut c = s.clone();
                c.vortices[k].x += dx;
                c.vortices[k].y += dy;
                hamiltonian(&c).unwrap()
            };
            let dh_dy = (bump(0.0, h_step) - bump(0.0, -h_step)) / (2.0 * h_step);
            let dh_dx = (bump(h_step, 0.0) - bump(-h_step, 0.0)) / (2.0 * h_step);
            let g = s.vortices[k].gamma;
            assert!(
                (vk.dx - dh_dy / g).abs() <= 1e-6 * vk.dx.abs().max(1.0),
                "ẋ[{k}] = {} vs ∂H/∂y/Γ = {}",
                vk.dx,
                dh_dy / g
            );
            assert!(
                (vk.dy + dh_dx / g).abs() <= 1e-6 * vk.dy.abs().max(1.0),
                "ẏ[{k}] = {} vs −∂H/∂x/Γ = {}",
                vk.dy,
                dh_dx / g
            );
        }
    }
}

#[test]
fn observables_bundle_matches_pieces() {
    let mut rng = common::rng(27);
    let s = common::random_system(&mut rng, 3, 0.1, 1.5);
    let o = observables(&s).unwrap();
    assert_eq!(o.hamiltonian, hamiltonian(&s).unwrap());
    assert_eq!(o.momentum, momentum(&s));
}

#[test]
fn energy_stays_finite_far_from_the_equator() {
    // Exercises the large-argument guards in the log/sinh kernels.
    for &y in &[360.0, 400.0, 1e4] {
        let s = VortexSystem::new(vec![
            Vortex::new(0.3, y, 1.0, ""),
            Vortex::new(1.8, -y + 1.0, 2.0, ""),
        ]);
        let h = hamiltonian(&s).unwrap();
        assert!(h.is_finite(), "H not finite at y = {y}");
        let f = hamiltonian(&s.mobius_flip()).unwrap();
        assert!((h - f).abs() <= 1e-12 * h.abs().max(1.0));
        for u in velocity(&s).unwrap() {
            assert!(u.dx.is_finite() && u.dy.is_finite());
        }
    }
}

#[test]
fn collision_aborts_energy_and_velocity() {
    let s = VortexSystem::new(vec![
        Vortex::new(1.0, 0.2, 1.0, "a"),
        Vortex::new(1.0 + 1e-9, 0.2, 1.0, "b"),
    ]);
    assert!(matches!(hamiltonian(&s), Err(VortexError::Collision { .. })));
    assert!(matches!(velocity(&s), Err(VortexError::Collision { .. })));
}

#[test]
fn stream_function_is_twisted() {
    let mut rng = common::rng(28);
    let s = common::random_system(&mut rng, 3, 0.1, 1.5);
    for _ in 0..20 {
        let p = ChartPoint::new(rng.gen_range(0.0..CHART_WIDTH), rng.gen_range(-2.0..2.0));
        let psi = match stream_function(p, &s) {
            Ok(v) => v,
            Err(_) => continue, // too close to the lift
        };
        let p_flip = ChartPoint::new(p.x + PI, -p.y);
        let psi_flip = stream_function(p_flip, &s).unwrap();
        assert!(
            (psi + psi_flip).abs() <= 1e-12 * psi.abs().max(1.0),
            "ψ({}, {}) = {psi} vs flipped {psi_flip}",
            p.x,
            p.y
        );
    }
}

#[test]
fn stream_function_ignores_vortex_representation() {
    let mut rng = common::rng(29);
    let s = common::random_system(&mut rng, 3, 0.1, 1.5);
    let rerepresented = s.mobius_flip(); // same configuration, other copies
    for _ in 0..20 {
        let p = ChartPoint::new(rng.gen_range(0.0..CHART_WIDTH), rng.gen_range(-2.0..2.0));
        let (Ok(a), Ok(b)) = (stream_function(p, &s), stream_function(p, &rerepresented)) else {
            continue;
        };
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn stream_function_errors_on_the_lift() {
    let s = VortexSystem::new(vec![Vortex::new(1.0, 0.5, 1.0, "")]);
    assert!(matches!(
        stream_function(ChartPoint::new(1.0, 0.5), &s),
        Err(VortexError::Collision { .. })
    ));
    // … including the deck image of the vortex.
    assert!(matches!(
        stream_function(ChartPoint::new(1.0 + PI, -0.5), &s),
        Err(VortexError::Collision { .. })
    ));
}

#[test]
fn stream_grid_masks_and_matches_serial_bitwise() {
    let mut rng = common::rng(30);
    let s = common::random_system(&mut rng, 4, 0.1, 1.2);
    let grid = GridSpec::new(0.0, CHART_WIDTH, 64, -2.0, 2.0, 48);
    let mask = 0.15;
    let par = stream_function_grid(&s, &grid, mask).unwrap();
    let ser = stream_function_grid_serial(&s, &grid, mask).unwrap();
    assert_eq!(par.len(), grid.len());
    let mut masked = 0usize;
    for (i, (a, b)) in par.iter().zip(&ser).enumerate() {
        assert!(
            a.to_bits() == b.to_bits(),
            "parallel/serial grids differ at node {i}: {a} vs {b}"
        );
        if a.is_nan() {
            masked += 1;
        }
    }
    assert!(masked > 0, "a {mask}-radius mask around 8 lifted vortices hits no node?");
    assert!(masked < grid.len() / 2, "mask swallowed half the grid");

    // Row-major layout: values[iy*nx + ix] belongs to (x_at(ix), y_at(iy)).
    let iy = 17;
    let ix = 40;
    let direct = stream_function(ChartPoint::new(grid.x_at(ix), grid.y_at(iy)), &s).unwrap();
    assert_eq!(par[iy * grid.nx + ix], direct);
}
