//! Seeded self-check suite: exercises the closed-form identities and
//! conservation laws the library is built on and reports pass/fail per
//! check.

use std::f64::consts::PI;
use std::fmt;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use mobius_vortex::dynamics::{hamiltonian, momentum, velocity};
use mobius_vortex::equilibria::{
    equatorial_equilibrium, fixed_equilibrium_two, nring, nring_velocity_analytic,
    single_vortex_velocity, trig_sum, trig_sum_direct, verify_relative_equilibrium,
    EquatorialOptions, EquilibriumKind, NRingSpec, TrigVariant,
};
use mobius_vortex::geometry::{Vortex, VortexSystem, TWO_PI};
use mobius_vortex::integrator::{integrate, IntegratorConfig};
use mobius_vortex::reduced::{
    classify_orbit, critical_points, equal_strength_h_limit, reduced_hamiltonian,
    reduced_velocity, two_vortex_velocity, ClassifyOptions, CriticalKind, OrbitType,
    ReducedParams, ReducedState,
};
use mobius_vortex::VortexError;

use crate::output::write_json;
use crate::{Cli, VerifyArgs};

/// At least one self-check failed; maps to exit code 1.
#[derive(Clone, Copy, Debug)]
pub struct VerifyFailed {
    pub failed: usize,
}

impl fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verification failed: {} check(s) did not pass", self.failed)
    }
}

impl std::error::Error for VerifyFailed {}

#[derive(Serialize)]
struct CheckResult {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    seed: u64,
    systems: usize,
    t_end: f64,
    tol_scale: f64,
    checks: Vec<CheckResult>,
    passed: usize,
    failed: usize,
}

struct Suite {
    checks: Vec<CheckResult>,
}

impl Suite {
    fn run(&mut self, name: &str, body: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail) = match body() {
            Ok(outcome) => outcome,
            Err(err) => (false, format!("errored: {err:#}")),
        };
        println!("[{}] {name}: {detail}", if passed { "pass" } else { "FAIL" });
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

/// Random canonical-chart system with every lifted pair at least `min_sep`
/// apart.
fn random_system(rng: &mut ChaCha8Rng, n: usize, min_sep: f64, y_span: f64) -> VortexSystem {
    loop {
        let vortices = (0..n)
            .map(|_| {
                let x = rng.gen_range(0.0..TWO_PI);
                let y = rng.gen_range(-y_span..y_span);
                let mag = rng.gen_range(0.5..2.0);
                let gamma = if rng.gen_bool(0.5) { mag } else { -mag };
                Vortex::new(x, y, gamma, "")
            })
            .collect();
        let s = VortexSystem::new(vortices);
        match s.min_lift_separation() {
            Some((d, ..)) if d < min_sep => continue,
            _ => return s.canonicalized(),
        }
    }
}

pub fn run(cli: &Cli, args: &VerifyArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut suite = Suite { checks: Vec::new() };
    let scale = args.tol_scale;
    let n_systems = args.systems.max(1);

    suite.run("flip-symmetry", || {
        let tol = 1e-12 * scale;
        let mut worst_h: f64 = 0.0;
        let mut worst_p: f64 = 0.0;
        let mut worst_v: f64 = 0.0;
        for _ in 0..n_systems {
            let n = rng.gen_range(1..=5);
            let s = random_system(&mut rng, n, 0.1, 1.5);
            let flipped = s.mobius_flip();
            let h = hamiltonian(&s)?;
            worst_h = worst_h.max((hamiltonian(&flipped)? - h).abs() / h.abs().max(1.0));
            let p = momentum(&s);
            worst_p = worst_p.max((momentum(&flipped) - p).abs() / p.abs().max(1.0));
            for (a, b) in velocity(&s)?.iter().zip(velocity(&flipped)?.iter()) {
                worst_v = worst_v.max((a.dx - b.dx).abs()).max((a.dy + b.dy).abs());
            }
        }
        let worst = worst_h.max(worst_p).max(worst_v);
        Ok((
            worst <= tol,
            format!(
                "{n_systems} systems: energy {worst_h:.2e}, impulse {worst_p:.2e}, \
                 velocity {worst_v:.2e} (tol {tol:.1e})"
            ),
        ))
    });

    suite.run("conservation", || {
        let tol = 1e-8 * scale;
        let count = (n_systems / 10).max(3);
        let mut worst_h: f64 = 0.0;
        let mut worst_p: f64 = 0.0;
        let mut retries = 0usize;
        for _ in 0..count {
            let mut attempts = 0;
            let diag = loop {
                let s = random_system(&mut rng, 3, 0.5, 1.0);
                let cfg = IntegratorConfig {
                    t_end: args.t_end,
                    sample_dt: (args.t_end / 100.0).max(1e-3),
                    ..IntegratorConfig::default()
                };
                match integrate(&s, &cfg) {
                    Ok(traj) => break traj.diagnostics,
                    // A random draw may wander into a near-collision; such
                    // runs abort by design, so draw a fresh system.
                    Err(VortexError::Collision { .. }) if attempts < 5 => {
                        attempts += 1;
                        retries += 1;
                    }
                    Err(e) => return Err(e.into()),
                }
            };
            worst_h = worst_h.max(diag.max_energy_drift_rel);
            worst_p = worst_p.max(diag.max_momentum_drift);
        }
        let worst = worst_h.max(worst_p);
        Ok((
            worst <= tol,
            format!(
                "{count} three-vortex runs to t = {}: energy drift {worst_h:.2e}, \
                 impulse drift {worst_p:.2e}, {retries} near-collision redraws (tol {tol:.1e})",
                args.t_end
            ),
        ))
    });

    suite.run("ring-drift", || {
        let tol = 1e-10 * scale;
        let mut worst: f64 = 0.0;
        let mut cases = 0usize;
        for n in 1..=8 {
            for &y in &[0.3, 1.0, 2.0] {
                for &gamma in &[1.0, 2.0] {
                    let spec = NRingSpec::new(n, gamma, y);
                    let ring = nring(&spec)?;
                    let analytic = nring_velocity_analytic(&spec)?;
                    let verdict = verify_relative_equilibrium(&ring, tol)?;
                    if verdict.kind != EquilibriumKind::Relative {
                        return Ok((
                            false,
                            format!("ring n = {n}, y = {y}: not a rigid drifter ({verdict:?})"),
                        ));
                    }
                    worst = worst
                        .max((verdict.drift_velocity - analytic).abs() / analytic.abs().max(1.0));
                    cases += 1;
                }
            }
        }
        Ok((
            worst <= tol,
            format!("{cases} rings: measured vs closed-form drift off by {worst:.2e} (tol {tol:.1e})"),
        ))
    });

    suite.run("trig-identities", || {
        let tol = 1e-12 * scale;
        let mut worst: f64 = 0.0;
        for k in 1..=20 {
            for &y in &[0.5, 1.0, 2.0] {
                for variant in [TrigVariant::Sin, TrigVariant::Cos] {
                    let closed = trig_sum(k, y, variant)?;
                    let direct = trig_sum_direct(k, y, variant)?;
                    worst = worst.max((closed - direct).abs() / closed.abs().max(1.0));
                }
            }
        }
        Ok((
            worst <= tol,
            format!("120 sums: closed form vs direct off by {worst:.2e} (tol {tol:.1e})"),
        ))
    });

    suite.run("fixed-pair-equilibria", || {
        let tol = 1e-10 * scale;
        let mut worst: f64 = 0.0;
        for &g1 in &[1.5, 2.0, 3.0, 10.0] {
            let branches = fixed_equilibrium_two(g1, 1.0)?;
            for b in &branches {
                let verdict = verify_relative_equilibrium(&b.to_system(g1, 1.0), tol)?;
                if verdict.kind != EquilibriumKind::Fixed {
                    return Ok((
                        false,
                        format!("pair ({g1}, 1): branch not at rest ({verdict:?})"),
                    ));
                }
                worst = worst.max(verdict.residual);
            }
            worst = worst.max((branches[0].momentum + branches[1].momentum).abs());
        }
        let equal_rejected = matches!(
            fixed_equilibrium_two(1.0, 1.0),
            Err(VortexError::Domain(_))
        );
        let opposite_rejected = matches!(
            fixed_equilibrium_two(1.0, -1.0),
            Err(VortexError::Domain(_))
        );
        Ok((
            worst <= tol && equal_rejected && opposite_rejected,
            format!(
                "4 strength ratios: residual {worst:.2e} (tol {tol:.1e}); \
                 equal rejected: {equal_rejected}, opposite rejected: {opposite_rejected}"
            ),
        ))
    });

    suite.run("equatorial-equilibria", || {
        let tol = 1e-10 * scale;
        let opts = EquatorialOptions::default();
        let mut worst: f64 = 0.0;

        let tri = equatorial_equilibrium(&[1.0, -1.0, 1.0], &opts)?;
        for (j, &x) in tri.positions.iter().enumerate() {
            worst = worst.max((x - j as f64 * PI / 3.0).abs());
        }
        worst = worst.max(tri.residual);

        let penta = equatorial_equilibrium(&[1.0, -1.0, 1.0, -1.0, 1.0], &opts)?;
        for (j, &x) in penta.positions.iter().enumerate() {
            worst = worst.max((x - j as f64 * PI / 5.0).abs());
        }
        worst = worst.max(penta.residual);

        let skew = equatorial_equilibrium(&[2.0, -1.0, 1.0], &opts)?;
        worst = worst.max(skew.residual);

        Ok((
            worst <= tol,
            format!(
                "uniform triple/pentagon at k·π/N and skew (2,-1,1): worst deviation \
                 {worst:.2e} (tol {tol:.1e})"
            ),
        ))
    });

    suite.run("single-vortex-law", || {
        let tol = 1e-13 * scale;
        let mut worst: f64 = 0.0;
        for &gamma in &[1.0, 2.5, -1.3] {
            for &y in &[-2.0, -0.5, 0.0, 0.7, 3.0, 400.0] {
                let s = VortexSystem::new(vec![Vortex::new(1.0, y, gamma, "")]);
                let v = velocity(&s)?[0];
                let law = single_vortex_velocity(gamma, y);
                worst = worst.max((v.dx - law.dx).abs()).max(v.dy.abs());
            }
        }
        Ok((
            worst <= tol,
            format!("field vs (Γ/4π)·tanh y off by {worst:.2e} (tol {tol:.1e})"),
        ))
    });

    suite.run("pair-kernel-crosscheck", || {
        let tol = 1e-13 * scale;
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let s = random_system(&mut rng, 2, 0.2, 2.0);
            let [a, b] = [&s.vortices[0], &s.vortices[1]];
            let pair = two_vortex_velocity(a.x, a.y, a.gamma, b.x, b.y, b.gamma);
            let general = velocity(&s)?;
            for (p, g) in pair.iter().zip(general.iter()) {
                worst = worst.max((p.dx - g.dx).abs()).max((p.dy - g.dy).abs());
            }
        }
        Ok((
            worst <= tol,
            format!(
                "200 pairs: specialized vs general velocity off by {worst:.2e} (tol {tol:.1e})"
            ),
        ))
    });

    suite.run("reduced-consistency", || {
        let tol_h = 1e-12 * scale;
        let tol_fd = 1e-5 * scale;
        let mut worst_h: f64 = 0.0;
        let mut worst_fd: f64 = 0.0;
        let mut drawn = 0usize;
        while drawn < 60 {
            let gamma2 = rng.gen_range(0.5..2.0);
            let gamma1 = gamma2 + rng.gen_range(0.0..2.0);
            let c = rng.gen_range(-2.0..2.0);
            let p = ReducedParams::new(gamma1, gamma2, c)?;
            let state = ReducedState::new(rng.gen_range(0.0..TWO_PI), rng.gen_range(-2.0..2.0));
            let full = VortexSystem::new(vec![
                Vortex::new(state.dx, state.y1, gamma1, ""),
                Vortex::new(0.0, p.y2_of(state.y1), gamma2, ""),
            ]);
            match full.min_lift_separation() {
                Some((d, ..)) if d < 0.05 => continue,
                _ => {}
            }
            drawn += 1;

            let h = reduced_hamiltonian(state, &p)?;
            worst_h = worst_h.max((h - hamiltonian(&full)?).abs() / h.abs().max(1.0));

            // The reduced flow is Hamiltonian in (Δx, Γ₁y₁): compare the
            // velocity field against central differences of the energy.
            let step = 1e-5;
            let v = reduced_velocity(state, &p)?;
            let dh_dy1 = (reduced_hamiltonian(ReducedState::new(state.dx, state.y1 + step), &p)?
                - reduced_hamiltonian(ReducedState::new(state.dx, state.y1 - step), &p)?)
                / (2.0 * step);
            let dh_ddx = (reduced_hamiltonian(ReducedState::new(state.dx + step, state.y1), &p)?
                - reduced_hamiltonian(ReducedState::new(state.dx - step, state.y1), &p)?)
                / (2.0 * step);
            worst_fd = worst_fd
                .max((v.d_dx - dh_dy1 / gamma1).abs() / v.d_dx.abs().max(1.0))
                .max((v.d_y1 + dh_ddx / gamma1).abs() / v.d_y1.abs().max(1.0));
        }
        Ok((
            worst_h <= tol_h && worst_fd <= tol_fd,
            format!(
                "60 states: reduced vs full energy off by {worst_h:.2e} (tol {tol_h:.1e}); \
                 velocity vs energy gradient off by {worst_fd:.2e} (tol {tol_fd:.1e})"
            ),
        ))
    });

    suite.run("monotonicity-sign-law", || {
        // (∂H/∂Δx)·sin Δx ≤ 0, i.e. ẏ₁·sin Δx ≥ 0, at every regular state.
        let mut worst = f64::INFINITY;
        let mut evaluated = 0usize;
        for &(g1, g2, c) in &[(2.0, 1.0, 1.0), (3.0, 1.0, -1.0), (1.5, 1.5, 0.7)] {
            let p = ReducedParams::new(g1, g2, c)?;
            for i in 0..64 {
                let dx = TWO_PI * (i as f64 + 0.5) / 64.0;
                for j in 0..51 {
                    let y1 = -2.5 + 5.0 * j as f64 / 50.0;
                    match reduced_velocity(ReducedState::new(dx, y1), &p) {
                        Ok(v) => {
                            worst = worst.min(v.d_y1 * dx.sin());
                            evaluated += 1;
                        }
                        Err(VortexError::SingularState(_)) => continue,
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        Ok((
            worst >= 0.0,
            format!("{evaluated} regular states: min ẏ₁·sin Δx = {worst:.2e} (needs ≥ 0)"),
        ))
    });

    suite.run("critical-points-known", || {
        let tol = 1e-8 * scale;
        let p = ReducedParams::new(2.0, 1.0, 1.0)?;
        let report = critical_points(&p)?;
        let saddles: Vec<f64> = report
            .line_zero
            .iter()
            .filter(|c| c.kind == CriticalKind::Saddle)
            .map(|c| c.state.y1)
            .collect();
        let expected = [-0.892_448_438_108_566_1, 1.621_511_601_547_099_8];
        let mut worst: f64 = 0.0;
        for e in expected {
            let best = saddles
                .iter()
                .map(|s| (s - e).abs())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        Ok((
            worst <= tol,
            format!(
                "pair (2, 1, C = 1): {} saddles on Δx = 0, match {worst:.2e} (tol {tol:.1e})",
                saddles.len()
            ),
        ))
    });

    suite.run("orbit-families", || {
        let opts = ClassifyOptions::default();
        let mut notes = Vec::new();
        let mut ok = true;

        let pinned = classify_orbit(
            ReducedState::new(0.35, 0.3),
            &ReducedParams::new(2.0, 1.0, 0.0)?,
            &opts,
        )?;
        let pinned_ok = pinned.orbit_type == OrbitType::TypeI
            && pinned.winding1.abs() <= 1e-6
            && pinned.winding2.abs() <= 1e-6;
        ok &= pinned_ok;
        notes.push(format!(
            "C = 0 loop: type {}, |windings| ≤ {:.1e} ({})",
            pinned.orbit_type,
            pinned.winding1.abs().max(pinned.winding2.abs()),
            if pinned_ok { "ok" } else { "BAD" }
        ));

        let counter = classify_orbit(
            ReducedState::new(0.0, 3.0),
            &ReducedParams::new(3.0, 1.0, 1.0)?,
            &opts,
        )?;
        let counter_ok = counter.orbit_type == OrbitType::TypeIII
            && !counter.co_rotating
            && ((counter.winding1 - counter.winding2).abs() - TWO_PI).abs() <= 1e-6;
        ok &= counter_ok;
        notes.push(format!(
            "(3,1) winding orbit: type {}, w₁−w₂ = {:.6}, counter-rotating: {} ({})",
            counter.orbit_type,
            counter.winding1 - counter.winding2,
            !counter.co_rotating,
            if counter_ok { "ok" } else { "BAD" }
        ));

        let co = classify_orbit(
            ReducedState::new(0.0, 3.0),
            &ReducedParams::new(3.0, 2.0, 1.0)?,
            &opts,
        )?;
        let co_ok = co.orbit_type == OrbitType::TypeIII && co.co_rotating;
        ok &= co_ok;
        notes.push(format!(
            "(3,2) winding orbit: type {}, co-rotating: {} ({})",
            co.orbit_type,
            co.co_rotating,
            if co_ok { "ok" } else { "BAD" }
        ));

        Ok((ok, notes.join("; ")))
    });

    suite.run("far-field", || {
        let tol = 1e-12 * scale;
        let mut worst: f64 = 0.0;

        let p = ReducedParams::new(3.0, 1.0, 1.0)?;
        let slope = (p.gamma1 - p.gamma2) / (4.0 * PI);
        for &(y1, sign) in &[(50.0, 1.0), (400.0, 1.0), (-50.0, -1.0)] {
            let v = reduced_velocity(ReducedState::new(0.7, y1), &p)?;
            worst = worst.max((v.d_dx - sign * slope).abs());
        }

        let eq = ReducedParams::new(1.0, 1.0, 1.0)?;
        for &dx in &[0.5, 2.0, PI] {
            let limit = equal_strength_h_limit(dx, 1.0, 1.0);
            for &y1 in &[25.0, -25.0] {
                let h = reduced_hamiltonian(ReducedState::new(dx, y1), &eq)?;
                worst = worst.max((h - limit).abs());
            }
        }

        Ok((
            worst <= tol,
            format!(
                "drift slope at |y₁| ∈ {{50, 400}} and equal-strength energy plateau \
                 off by {worst:.2e} (tol {tol:.1e})"
            ),
        ))
    });

    let passed = suite.checks.iter().filter(|c| c.passed).count();
    let failed = suite.checks.len() - passed;
    let report = VerifyReport {
        seed: cli.seed,
        systems: args.systems,
        t_end: args.t_end,
        tol_scale: args.tol_scale,
        checks: suite.checks,
        passed,
        failed,
    };
    write_json(&cli.out, "verify.json", &report)?;
    println!("{passed} passed, {failed} failed (seed {})", cli.seed);

    if failed > 0 {
        Err(VerifyFailed { failed }.into())
    } else {
        Ok(())
    }
}
