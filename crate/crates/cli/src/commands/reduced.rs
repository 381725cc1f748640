use anyhow::Result;
use serde::Serialize;

use mobius_vortex::grid::GridSpec;
use mobius_vortex::reduced::{
    classify_orbit, critical_points, integrate_reduced, phase_portrait, ClassifyOptions,
    CriticalPointReport, OrbitReport, ReducedParams, ReducedState,
};

use crate::output::{fmt_f64, parse_grid_shape, parse_range, parse_sweep, write_json, write_text};
use crate::{Cli, Format, ReducedCommand};

const PI: f64 = std::f64::consts::PI;

#[derive(Serialize)]
struct CriticalOut {
    params: ReducedParams,
    report: CriticalPointReport,
}

#[derive(Serialize)]
struct OrbitOut {
    params: ReducedParams,
    report: OrbitReport,
}

#[derive(Serialize)]
struct PortraitMeta {
    params: ReducedParams,
    grid: GridSpec,
    mask_radius: f64,
    values_file: Option<String>,
    report: CriticalPointReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

pub fn run(cli: &Cli, which: &ReducedCommand) -> Result<()> {
    match which {
        ReducedCommand::Critical { g1, g2, c } => {
            let params = ReducedParams::new(*g1, *g2, *c)?;
            let report = critical_points(&params)?;
            for cp in report.line_zero.iter().chain(&report.line_pi) {
                println!(
                    "critical point at (dx = {}, y1 = {}): {:?}, energy {}",
                    fmt_f64(cp.state.dx),
                    fmt_f64(cp.state.y1),
                    cp.kind,
                    fmt_f64(cp.energy)
                );
            }
            for sp in &report.singular {
                println!(
                    "collision point at (dx = {}, y1 = {}), co_rotating = {}",
                    fmt_f64(sp.state.dx),
                    fmt_f64(sp.state.y1),
                    sp.co_rotating
                );
            }
            write_json(&cli.out, "critical_points.json", &CriticalOut { params, report })?;
        }
        ReducedCommand::Orbit {
            g1,
            g2,
            c,
            dx,
            y1,
            t_max,
        } => {
            let params = ReducedParams::new(*g1, *g2, *c)?;
            let opts = ClassifyOptions {
                t_max: *t_max,
                rel_tol: cli.tol,
                abs_tol: cli.tol,
                ..ClassifyOptions::default()
            };
            let report = classify_orbit(ReducedState::new(*dx, *y1), &params, &opts)?;
            println!(
                "orbit type {}: period {}, windings ({}, {}), co_rotating = {}",
                report.orbit_type,
                fmt_f64(report.period),
                fmt_f64(report.winding1),
                fmt_f64(report.winding2),
                report.co_rotating
            );
            write_json(&cli.out, "orbit.json", &OrbitOut { params, report })?;

            // One-period trace at 512 samples.
            let trace = integrate_reduced(
                ReducedState::new(*dx, *y1),
                &params,
                report.period,
                report.period / 512.0,
                cli.tol,
                cli.tol,
            )?;
            let mut csv = String::from("t,dx,y1\n");
            for (t, st) in &trace {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f64(*t),
                    fmt_f64(st.dx),
                    fmt_f64(st.y1)
                ));
            }
            write_text(&cli.out, "orbit_trace.csv", &csv)?;
        }
        ReducedCommand::Scan {
            g1,
            g2,
            c,
            c_sweep,
            grid,
            dx_range,
            y_range,
            mask_radius,
        } => {
            let (nx, ny) = parse_grid_shape(grid)?;
            let (dx_lo, dx_hi) = match dx_range {
                Some(r) => parse_range(r)?,
                None => (-PI, PI),
            };
            let (y_lo, y_hi) = parse_range(y_range)?;
            let spec = GridSpec::new(dx_lo, dx_hi, nx, y_lo, y_hi, ny);

            let c_values: Vec<f64> = match (c, c_sweep) {
                (Some(v), None) => vec![*v],
                (None, Some(sweep)) => parse_sweep(sweep)?,
                (None, None) => vec![0.0],
                (Some(_), Some(_)) => unreachable!("clap forbids both"),
            };

            let single = c_values.len() == 1;
            for (idx, c_val) in c_values.iter().enumerate() {
                let params = ReducedParams::new(*g1, *g2, *c_val)?;
                let portrait = phase_portrait(&params, &spec, *mask_radius)?;
                let stem = if single {
                    "portrait".to_string()
                } else {
                    format!("portrait_{idx:03}")
                };
                let values_file = match cli.format {
                    Format::Csv => {
                        let mut csv = String::from("dx,y1,h\n");
                        for iy in 0..spec.ny {
                            for ix in 0..spec.nx {
                                csv.push_str(&format!(
                                    "{},{},{}\n",
                                    fmt_f64(spec.x_at(ix)),
                                    fmt_f64(spec.y_at(iy)),
                                    fmt_f64(portrait.values[iy * spec.nx + ix])
                                ));
                            }
                        }
                        let name = format!("{stem}.csv");
                        write_text(&cli.out, &name, &csv)?;
                        Some(name)
                    }
                    Format::Json => None,
                };
                let meta = PortraitMeta {
                    params,
                    grid: spec,
                    mask_radius: *mask_radius,
                    values_file,
                    report: portrait.report,
                    values: match cli.format {
                        Format::Json => Some(portrait.values),
                        Format::Csv => None,
                    },
                };
                write_json(&cli.out, &format!("{stem}.json"), &meta)?;
                println!(
                    "portrait C = {}: {} saddles on dx = 0, {} critical points on dx = pi",
                    fmt_f64(*c_val),
                    meta.report
                        .line_zero
                        .iter()
                        .filter(|cp| cp.kind == mobius_vortex::reduced::CriticalKind::Saddle)
                        .count(),
                    meta.report.line_pi.len()
                );
            }
        }
    }
    Ok(())
}
