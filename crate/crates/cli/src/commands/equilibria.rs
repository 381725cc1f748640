use anyhow::Result;
use serde::Serialize;

use mobius_vortex::equilibria::{
    equatorial_equilibrium, fixed_equilibrium_two, nring, nring_velocity_analytic,
    verify_relative_equilibrium, EquatorialOptions, EquatorialSolution, EquilibriumResult,
    FixedEquilibriumBranch, NRingSpec,
};
use mobius_vortex::geometry::VortexSystem;

use crate::output::{fmt_f64, write_json};
use crate::{Cli, EquilibriaCommand};

#[derive(Serialize)]
struct FixedBranchOut {
    branch: FixedEquilibriumBranch,
    verdict: EquilibriumResult,
    system: VortexSystem,
}

#[derive(Serialize)]
struct FixedOut {
    gamma1: f64,
    gamma2: f64,
    branches: Vec<FixedBranchOut>,
}

#[derive(Serialize)]
struct EquatorialOut {
    strengths: Vec<f64>,
    solution: EquatorialSolution,
    verdict: EquilibriumResult,
}

#[derive(Serialize)]
struct NringOut {
    spec: NRingSpec,
    drift_analytic: f64,
    verdict: EquilibriumResult,
    system: VortexSystem,
}

pub fn run(cli: &Cli, which: &EquilibriaCommand) -> Result<()> {
    match which {
        EquilibriaCommand::Fixed { g1, g2 } => {
            let branches = fixed_equilibrium_two(*g1, *g2)?;
            let mut out = FixedOut {
                gamma1: *g1,
                gamma2: *g2,
                branches: Vec::new(),
            };
            for branch in branches {
                let system = branch.to_system(*g1, *g2);
                let verdict = verify_relative_equilibrium(&system, 1e-10)?;
                out.branches.push(FixedBranchOut {
                    branch,
                    verdict,
                    system,
                });
            }
            write_json(&cli.out, "fixed_equilibria.json", &out)?;
            for b in &out.branches {
                println!(
                    "fixed branch: y1 = {}, y2 = {}, momentum = {}, residual {:.3e} ({:?})",
                    fmt_f64(b.branch.y1),
                    fmt_f64(b.branch.y2),
                    fmt_f64(b.branch.momentum),
                    b.verdict.residual,
                    b.verdict.kind
                );
            }
        }
        EquilibriaCommand::Equatorial {
            strengths,
            solver_tol,
            max_iterations,
        } => {
            let opts = EquatorialOptions {
                initial: None,
                tol: solver_tol.unwrap_or(cli.tol.max(1e-12)),
                max_iterations: *max_iterations,
            };
            let solution = equatorial_equilibrium(strengths, &opts)?;
            let verdict = verify_relative_equilibrium(&solution.system, 1e-8)?;
            println!(
                "equatorial equilibrium after {} iterations, residual {:.3e} ({:?})",
                solution.iterations, solution.residual, verdict.kind
            );
            for (x, g) in solution.positions.iter().zip(strengths) {
                println!("  x = {}, gamma = {}", fmt_f64(*x), fmt_f64(*g));
            }
            write_json(
                &cli.out,
                "equatorial.json",
                &EquatorialOut {
                    strengths: strengths.clone(),
                    solution,
                    verdict,
                },
            )?;
        }
        EquilibriaCommand::Nring { n, gamma, y } => {
            let spec = NRingSpec::new(*n, *gamma, *y);
            let system = nring(&spec)?;
            let drift_analytic = nring_velocity_analytic(&spec)?;
            let verdict = verify_relative_equilibrium(&system, 1e-8)?;
            println!(
                "ring n = {n}: analytic drift {}, measured {} ({:?}, residual {:.3e})",
                fmt_f64(drift_analytic),
                fmt_f64(verdict.drift_velocity),
                verdict.kind,
                verdict.residual
            );
            write_json(
                &cli.out,
                "nring.json",
                &NringOut {
                    spec,
                    drift_analytic,
                    verdict,
                    system,
                },
            )?;
        }
    }
    Ok(())
}
