//! Small deterministic output helpers shared by the commands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Create `dir` (and parents) if needed.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

/// Write `content` to `dir/name`, creating the directory first.
pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Serialize `value` as pretty JSON (trailing newline) into `dir/name`.
pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).context("serializing JSON output")?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// Shortest round-trip decimal formatting; `NaN` for masked values.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Parse `"min:max"` into an ordered float pair.
pub fn parse_range(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(':')
        .with_context(|| format!("range `{text}` must look like min:max"))?;
    let lo: f64 = a.trim().parse().with_context(|| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().with_context(|| format!("bad number `{b}`"))?;
    anyhow::ensure!(lo < hi, "range `{text}` must be increasing");
    Ok((lo, hi))
}

/// Parse `"NXxNY"` into grid dimensions.
pub fn parse_grid_shape(text: &str) -> Result<(usize, usize)> {
    let (a, b) = text
        .split_once('x')
        .with_context(|| format!("grid `{text}` must look like NXxNY"))?;
    let nx: usize = a.trim().parse().with_context(|| format!("bad count `{a}`"))?;
    let ny: usize = b.trim().parse().with_context(|| format!("bad count `{b}`"))?;
    anyhow::ensure!(nx >= 2 && ny >= 2, "grid `{text}` needs at least 2x2 points");
    Ok((nx, ny))
}

/// Parse `"start:stop:count"` into a uniform sweep (inclusive endpoints).
pub fn parse_sweep(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    anyhow::ensure!(
        parts.len() == 3,
        "sweep `{text}` must look like start:stop:count"
    );
    let start: f64 = parts[0].trim().parse().context("bad sweep start")?;
    let stop: f64 = parts[1].trim().parse().context("bad sweep stop")?;
    let count: usize = parts[2].trim().parse().context("bad sweep count")?;
    anyhow::ensure!(count >= 1, "sweep needs at least one point");
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}
