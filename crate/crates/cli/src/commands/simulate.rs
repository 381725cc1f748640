use std::fs;

use anyhow::{Context, Result};
use serde::Serialize;

use mobius_vortex::geometry::{Vortex, VortexSystem};
use mobius_vortex::integrator::{integrate, IntegratorConfig, Trajectory};

use crate::output::{fmt_f64, write_json, write_text};
use crate::{Cli, Format, SimulateArgs};

#[derive(Serialize)]
struct SampleOut<'a> {
    t: f64,
    vortices: &'a [Vortex],
}

#[derive(Serialize)]
struct TrajectoryOut<'a> {
    samples: Vec<SampleOut<'a>>,
}

#[derive(Serialize)]
struct DiagnosticsOut<'a> {
    config: &'a IntegratorConfig,
    diagnostics: &'a mobius_vortex::integrator::Diagnostics,
    flip_count: usize,
}

pub fn run(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.system)
        .with_context(|| format!("reading {}", args.system.display()))?;
    let system = VortexSystem::from_json(&text)?;

    let cfg = IntegratorConfig {
        rel_tol: args.rel_tol.unwrap_or(cli.tol),
        abs_tol: args.abs_tol.unwrap_or(cli.tol),
        max_step: args.max_step.unwrap_or(f64::INFINITY),
        collision_radius: args.collision_radius,
        t_end: args.t_end,
        sample_dt: args.sample_dt,
    };
    let traj = integrate(&system, &cfg)?;

    match cli.format {
        Format::Csv => {
            write_text(&cli.out, "trajectory.csv", &trajectory_csv(&traj))?;
        }
        Format::Json => {
            let out = TrajectoryOut {
                samples: traj
                    .samples
                    .iter()
                    .map(|(t, s)| SampleOut {
                        t: *t,
                        vortices: &s.vortices,
                    })
                    .collect(),
            };
            write_json(&cli.out, "trajectory.json", &out)?;
        }
    }

    let mut flips = String::from("t,label\n");
    for ev in &traj.flip_events {
        flips.push_str(&format!("{},{}\n", fmt_f64(ev.t), ev.label));
    }
    write_text(&cli.out, "flips.csv", &flips)?;

    write_json(
        &cli.out,
        "diagnostics.json",
        &DiagnosticsOut {
            config: &cfg,
            diagnostics: &traj.diagnostics,
            flip_count: traj.flip_events.len(),
        },
    )?;

    let final_state = &traj.samples.last().expect("trajectory has samples").1;
    write_text(&cli.out, "final_state.json", &final_state.to_json_pretty())?;

    println!(
        "simulated {} vortices to t = {}: {} samples, {} seam crossings",
        system.len(),
        fmt_f64(cfg.t_end),
        traj.samples.len(),
        traj.flip_events.len()
    );
    println!(
        "energy drift {:.3e}, momentum drift {:.3e} ({} accepted / {} rejected steps)",
        traj.diagnostics.max_energy_drift,
        traj.diagnostics.max_momentum_drift,
        traj.diagnostics.accepted_steps,
        traj.diagnostics.rejected_steps
    );
    Ok(())
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,label,x,y,gamma\n");
    for (t, sys) in &traj.samples {
        for v in &sys.vortices {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(*t),
                v.label,
                fmt_f64(v.x),
                fmt_f64(v.y),
                fmt_f64(v.gamma)
            ));
        }
    }
    out
}
