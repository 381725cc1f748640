//! Chart arithmetic, deck-map symmetry, and JSON schema behaviour.

mod common;

use std::f64::consts::PI;

use mobius_vortex::geometry::{
    band_distance, canonicalize, cylinder_distance, tau, wrap_2pi, ChartPoint, CylinderPoint,
    Vortex, VortexSystem, CHART_WIDTH, TWO_PI,
};
use mobius_vortex::VortexError;
use proptest::prelude::*;

#[test]
fn wrap_2pi_lands_in_range() {
    for &x in &[-10.0, -TWO_PI, -1e-17, 0.0, 1.0, TWO_PI, TWO_PI + 1e-9, 1e6] {
        let w = wrap_2pi(x);
        assert!((0.0..TWO_PI).contains(&w), "wrap_2pi({x}) = {w}");
    }
    assert_eq!(wrap_2pi(0.0), 0.0);
    assert_eq!(wrap_2pi(TWO_PI), 0.0);
}

#[test]
fn deck_map_swaps_copies() {
    let p = CylinderPoint::new(0.7, 0.4);
    let q = tau(p);
    assert!((q.x - (0.7 + PI)).abs() < 1e-15);
    assert_eq!(q.y, -0.4);
}

proptest! {
    #[test]
    fn deck_map_is_an_involution(x in 0.0..TWO_PI, y in -3.0..3.0) {
        let p = CylinderPoint::new(x, y);
        prop_assert!(cylinder_distance(tau(tau(p)), p) <= 1e-13);
    }

    #[test]
    fn canonicalize_lands_in_chart_and_is_idempotent(
        x in -20.0..20.0,
        y in -3.0..3.0,
        gamma in prop_oneof![-2.0..-0.1, 0.1..2.0],
    ) {
        let (cx, cy, cg) = canonicalize(x, y, gamma);
        prop_assert!((0.0..CHART_WIDTH).contains(&cx), "x = {cx} outside chart");
        prop_assert_eq!(canonicalize(cx, cy, cg), (cx, cy, cg));
        prop_assert_eq!(cg.abs(), gamma.abs());
        // Same band point: both representatives lift to the same pair.
        prop_assert!(band_distance(ChartPoint::new(x, y), ChartPoint::new(cx, cy)) <= 1e-12);
    }

    #[test]
    fn canonicalize_flips_strength_with_the_copy(
        x in CHART_WIDTH..TWO_PI,
        y in -3.0..3.0,
    ) {
        let (cx, cy, cg) = canonicalize(x, y, 1.5);
        prop_assert!((cx - (x - PI)).abs() <= 1e-12);
        prop_assert_eq!(cy, -y);
        prop_assert_eq!(cg, -1.5);
    }
}

#[test]
fn flip_preserves_the_lift_and_is_an_involution() {
    let mut rng = common::rng(11);
    for _ in 0..50 {
        let n = 1 + (rand::Rng::gen_range(&mut rng, 0..5usize));
        let s = common::random_system(&mut rng, n, 0.05, 2.0);
        let f = s.mobius_flip();

        // Same labels in the same order; strengths negated per vortex.
        for (a, b) in s.vortices.iter().zip(&f.vortices) {
            assert_eq!(a.label, b.label);
            assert_eq!(b.gamma, -a.gamma);
            assert_eq!(b.y, -a.y);
        }

        // The lift is the same weighted point set.
        let lift = s.lift();
        let flipped_lift = f.lift();
        assert_eq!(lift.len(), 2 * s.len());
        for (p, g) in &lift {
            let hit = flipped_lift
                .iter()
                .any(|(q, h)| cylinder_distance(*p, *q) <= 1e-12 && (g - h).abs() <= 1e-15);
            assert!(hit, "lifted vortex at ({}, {}) lost by the flip", p.x, p.y);
        }

        // Twice returns every representative (distances on the cover).
        let ff = f.mobius_flip();
        for (a, b) in s.vortices.iter().zip(&ff.vortices) {
            assert!(cylinder_distance(a.cover_point(), b.cover_point()) <= 1e-13);
            assert_eq!(a.gamma, b.gamma);
        }
    }
}

#[test]
fn canonical_system_stays_put() {
    let mut rng = common::rng(12);
    let s = common::random_system(&mut rng, 4, 0.05, 2.0);
    let c = s.canonicalized();
    assert_eq!(s, c, "random_system already canonicalizes");
    for v in &c.vortices {
        assert!((0.0..CHART_WIDTH).contains(&v.x));
    }
}

#[test]
fn json_round_trip_is_exact() {
    let mut rng = common::rng(13);
    for _ in 0..20 {
        let s = common::random_system(&mut rng, 3, 0.05, 2.0);
        let back = VortexSystem::from_json(&s.to_json_pretty()).expect("round trip parses");
        assert_eq!(s, back);
    }
}

#[test]
fn json_fills_missing_labels() {
    let s = VortexSystem::from_json(
        r#"{"vortices": [{"x": 0.2, "y": 0.1, "gamma": 1.0},
                          {"x": 1.0, "y": -0.4, "gamma": -2.0, "label": "named"}]}"#,
    )
    .unwrap();
    assert_eq!(s.vortices[0].label, "v1");
    assert_eq!(s.vortices[1].label, "named");
}

#[test]
fn json_canonicalizes_on_input() {
    let s = VortexSystem::from_json(
        r#"{"vortices": [{"x": 4.0, "y": 0.5, "gamma": 1.0}]}"#,
    )
    .unwrap();
    let v = &s.vortices[0];
    assert!((v.x - (4.0 - PI)).abs() < 1e-15);
    assert_eq!(v.y, -0.5);
    assert_eq!(v.gamma, -1.0);
}

#[test]
fn json_rejects_malformed_input() {
    let cases = [
        ("not json at all", "syntax"),
        (r#"{"vortices": []}"#, "empty"),
        (r#"{"vortices": [{"x": 0, "y": 0, "gamma": 0}]}"#, "zero strength"),
        (
            r#"{"vortices": [{"x": 0, "y": 0, "gamma": 1, "spin": 3}]}"#,
            "unknown key",
        ),
        (
            r#"{"vortices": [{"x": 0, "y": 0, "gamma": 1, "label": "a"},
                             {"x": 1, "y": 0, "gamma": 1, "label": "a"}]}"#,
            "duplicate label",
        ),
    ];
    for (text, what) in cases {
        match VortexSystem::from_json(text) {
            Err(VortexError::Validation(_)) => {}
            other => panic!("{what}: expected a validation error, got {other:?}"),
        }
    }
}

#[test]
fn collision_check_sees_direct_and_image_proximity() {
    // Direct pair 1e-3 apart.
    let close = VortexSystem::new(vec![
        Vortex::new(1.0, 0.5, 1.0, "a"),
        Vortex::new(1.001, 0.5, 1.0, "b"),
    ]);
    match close.collision_check(1e-2, Some(3.0)) {
        Err(VortexError::Collision { time, a, b, .. }) => {
            assert_eq!(time, Some(3.0));
            assert_eq!((a.as_str(), b.as_str()), ("a", "b"));
        }
        other => panic!("expected collision, got {other:?}"),
    }
    assert!(close.collision_check(1e-4, None).is_ok());

    // Pair whose *deck images* nearly coincide: (x, y) vs (x + π, −y) + ε.
    let image_close = VortexSystem::new(vec![
        Vortex::new(1.0, 0.5, 1.0, "a"),
        Vortex::new(1.0 + PI - 1e-3, -0.5, 1.0, "b"),
    ]);
    match image_close.collision_check(1e-2, None) {
        Err(VortexError::Collision { b, .. }) => assert_eq!(b, "b*"),
        other => panic!("expected image collision, got {other:?}"),
    }

    let (d, i, j, image) = image_close.min_lift_separation().unwrap();
    assert!(d <= 1.1e-3 && i == 0 && j == 1 && image);
}

#[test]
fn single_vortex_never_self_collides() {
    let s = VortexSystem::new(vec![Vortex::new(0.3, 0.0, 1.0, "")]);
    assert_eq!(s.min_lift_separation(), None);
    assert!(s.collision_check(1.0, None).is_ok());
}

#[test]
fn band_distance_identifies_deck_representatives() {
    let a = ChartPoint::new(0.4, 1.2);
    let b = ChartPoint::new(0.4 + PI, -1.2); // the other representative
    assert!(band_distance(a, b) <= 1e-15);
    assert!(band_distance(a, a) == 0.0);
    // Symmetric and positive for genuinely distinct points.
    let c = ChartPoint::new(2.0, -0.3);
    assert!((band_distance(a, c) - band_distance(c, a)).abs() <= 1e-15);
    assert!(band_distance(a, c) > 1.0);
}

#[test]
fn translation_moves_the_chart_coordinate() {
    let s = VortexSystem::new(vec![Vortex::new(3.0, 0.7, 1.0, "a")]);
    let t = s.translated(0.5);
    // Raw representative shifts without canonicalization …
    assert_eq!(t.vortices[0].x, 3.5);
    assert_eq!(t.vortices[0].y, 0.7);
    // … and 3.5 > π lands in the opposite copy once canonicalized.
    let v = &t.canonicalized().vortices[0];
    assert!((v.x - (3.5 - PI)).abs() < 1e-12);
    assert_eq!(v.y, -0.7);
    assert_eq!(v.gamma, -1.0);
    assert_eq!(v.label, "a");
}

#[test]
fn negating_strengths_keeps_positions() {
    let mut rng = common::rng(15);
    let s = common::random_system(&mut rng, 3, 0.05, 2.0);
    let n = s.negated_strengths();
    for (a, b) in s.vortices.iter().zip(&n.vortices) {
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, b.y);
        assert_eq!(a.gamma, -b.gamma);
    }
}

#[test]
fn coords_and_gammas_flatten_in_order() {
    let s = VortexSystem::new(vec![
        Vortex::new(0.1, 0.2, 1.0, ""),
        Vortex::new(0.3, 0.4, -2.0, ""),
    ]);
    assert_eq!(s.coords(), vec![0.1, 0.2, 0.3, 0.4]);
    assert_eq!(s.gammas(), vec![1.0, -2.0]);
    assert_eq!(s.labels(), vec!["v1".to_string(), "v2".to_string()]);
}
