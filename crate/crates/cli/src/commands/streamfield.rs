use std::fs;

use anyhow::{Context, Result};
use serde::Serialize;

use mobius_vortex::dynamics::stream_function_grid;
use mobius_vortex::geometry::{VortexSystem, CHART_WIDTH};
use mobius_vortex::grid::GridSpec;

use crate::output::{fmt_f64, parse_grid_shape, parse_range, write_json, write_text};
use crate::{Cli, Format, StreamfieldArgs};

#[derive(Serialize)]
struct StreamfieldMeta {
    grid: GridSpec,
    mask_radius: f64,
    system: VortexSystem,
    values_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

pub fn run(cli: &Cli, args: &StreamfieldArgs) -> Result<()> {
    let text = fs::read_to_string(&args.system)
        .with_context(|| format!("reading {}", args.system.display()))?;
    let system = VortexSystem::from_json(&text)?;

    let (nx, ny) = parse_grid_shape(&args.grid)?;
    let (x_lo, x_hi) = match &args.x_range {
        Some(r) => parse_range(r)?,
        None => (0.0, CHART_WIDTH),
    };
    let (y_lo, y_hi) = parse_range(&args.y_range)?;
    let grid = GridSpec::new(x_lo, x_hi, nx, y_lo, y_hi, ny);

    let values = stream_function_grid(&system, &grid, args.mask_radius)?;

    let values_file = match cli.format {
        Format::Csv => {
            let mut csv = String::from("x,y,psi\n");
            for iy in 0..grid.ny {
                for ix in 0..grid.nx {
                    csv.push_str(&format!(
                        "{},{},{}\n",
                        fmt_f64(grid.x_at(ix)),
                        fmt_f64(grid.y_at(iy)),
                        fmt_f64(values[iy * grid.nx + ix])
                    ));
                }
            }
            write_text(&cli.out, "streamfield.csv", &csv)?;
            Some("streamfield.csv".to_string())
        }
        Format::Json => None,
    };

    let masked = values.iter().filter(|v| v.is_nan()).count();
    write_json(
        &cli.out,
        "streamfield.json",
        &StreamfieldMeta {
            grid,
            mask_radius: args.mask_radius,
            system,
            values_file,
            values: match cli.format {
                Format::Json => Some(values),
                Format::Csv => None,
            },
        },
    )?;
    println!(
        "stream function on {nx}x{ny} grid ({masked} masked nodes)"
    );
    Ok(())
}
