//! Field dumps.
//!
//! Plain-text CSV with one header line
//! `# grid dim=<d> extent=<a0,b0[,a1,b1]> cells=<M0[,M1]>`, then one row
//! per grid line: the single row of a 1D field, or row `i` holding the
//! nodes with first index `i` in 2D. Values use Rust's shortest round-trip
//! formatting (see [`fmt_f64`]), so a write/read cycle is lossless (`inf`
//! and `-inf` allowed).

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e16)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn grid_header(grid: &GridSpec) -> String {
    let d = grid.dim();
    let extent: Vec<String> = (0..d)
        .flat_map(|a| {
            let (lo, hi) = grid.extent(a);
            [lo.to_string(), hi.to_string()]
        })
        .collect();
    let cells: Vec<String> = (0..d).map(|a| grid.cells(a).to_string()).collect();
    format!(
        "# grid dim={d} extent={} cells={}",
        extent.join(","),
        cells.join(",")
    )
}

pub fn parse_grid_header(line: &str) -> Result<GridSpec> {
    let bad = |msg: &str| Error::FieldFormat(format!("{msg}: {line:?}"));
    let rest = line
        .strip_prefix("# grid ")
        .ok_or_else(|| bad("expected '# grid' header"))?;
    let (mut dim, mut extent, mut cells) = (None, None, None);
    for item in rest.split_whitespace() {
        let (key, value) = item.split_once('=').ok_or_else(|| bad("malformed header item"))?;
        match key {
            "dim" => dim = Some(value.parse::<usize>().map_err(|_| bad("bad dim"))?),
            "extent" => {
                extent = Some(
                    value
                        .split(',')
                        .map(|v| v.parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad("bad extent"))?,
                )
            }
            "cells" => {
                cells = Some(
                    value
                        .split(',')
                        .map(|v| v.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad("bad cells"))?,
                )
            }
            _ => return Err(bad("unknown header key")),
        }
    }
    let (dim, extent, cells) = match (dim, extent, cells) {
        (Some(d), Some(e), Some(c)) => (d, e, c),
        _ => return Err(bad("header needs dim, extent and cells")),
    };
    if !(1..=2).contains(&dim) || extent.len() != 2 * dim || cells.len() != dim {
        return Err(bad("header sizes do not match dim"));
    }
    let pairs: Vec<(f64, f64)> = extent.chunks(2).map(|c| (c[0], c[1])).collect();
    GridSpec::new(&pairs, &cells)
}

pub fn format_field(u: &ScalarField) -> String {
    let grid = u.grid();
    let mut out = grid_header(grid);
    out.push('\n');
    let row_len = if grid.dim() == 1 {
        grid.len()
    } else {
        grid.nodes_per_axis(1)
    };
    for row in u.values().chunks(row_len) {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn parse_field(text: &str) -> Result<ScalarField> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::FieldFormat("empty field file".into()))?;
    let grid = parse_grid_header(header.trim())?;
    let mut values = Vec::with_capacity(grid.len());
    for (r, line) in lines.enumerate() {
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::FieldFormat(format!("row {r}: cannot parse {:?}", cell.trim()))
            })?;
            values.push(v);
        }
    }
    if values.len() != grid.len() {
        return Err(Error::FieldFormat(format!(
            "expected {} values, found {}",
            grid.len(),
            values.len()
        )));
    }
    ScalarField::new(grid, values)
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    parse_field(&fs::read_to_string(path)?)
}

pub fn write_field(path: &Path, u: &ScalarField) -> Result<()> {
    write_atomic(path, format_field(u).as_bytes())
}

/// Writes to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .ok_or_else(|| Error::FieldFormat(format!("not a file path: {}", path.display())))?;
    tmp.set_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let grid = GridSpec::square(-2.0, 2.0, 16).unwrap();
        assert_eq!(grid_header(&grid), "# grid dim=2 extent=-2,2,-2,2 cells=16,16");
        assert_eq!(parse_grid_header(&grid_header(&grid)).unwrap(), grid);
    }

    #[test]
    fn one_row_per_grid_line() {
        let grid = GridSpec::square(0.0, 1.0, 3).unwrap();
        let u = ScalarField::from_fn(grid, |x| x[0]);
        let text = format_field(&u);
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows[3].split(',').all(|v| v == "1"));
        let line = ScalarField::zeros(GridSpec::line(0.0, 1.0, 5).unwrap());
        assert_eq!(format_field(&line).lines().count(), 2);
    }

    #[test]
    fn values_survive_round_trip() {
        let grid = GridSpec::line(0.0, 1.0, 7).unwrap();
        let mut u = ScalarField::from_fn(grid, |x| (x[0] * 1e3).sin() / 3.0);
        u.values_mut()[2] = f64::NEG_INFINITY;
        u.values_mut()[3] = f64::INFINITY;
        u.values_mut()[4] = 1e-300;
        u.values_mut()[5] = -2.5e20;
        let back = parse_field(&format_field(&u)).unwrap();
        assert_eq!(back.values(), u.values());
        assert_eq!(back.grid(), u.grid());
    }

    #[test]
    fn malformed_input_rejected() {
        assert!(parse_field("").is_err());
        assert!(parse_field("0,1,2\n").is_err());
        assert!(parse_field("# grid dim=1 extent=0,1 cells=2\n0,1\n").is_err());
        assert!(parse_field("# grid dim=1 extent=0,1 cells=2\n0,x,1\n").is_err());
        assert!(parse_field("# grid dim=3 extent=0,1 cells=2\n0,1,2\n").is_err());
    }

    #[test]
    fn atomic_write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let u = ScalarField::from_fn(GridSpec::square(0.0, 1.0, 4).unwrap(), |x| x[0] * x[1]);
        write_field(&path, &u).unwrap();
        write_field(&path, &u).unwrap();
        assert_eq!(read_field(&path).unwrap().values(), u.values());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
