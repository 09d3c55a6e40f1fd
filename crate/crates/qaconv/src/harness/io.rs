//! Reading and writing grids as CSV and plain-text PGM (P2).
//!
//! CSV values are written with 17 significant digits so round-trips are
//! exact and byte-identical across runs. PGM files follow the P2 variant:
//! ASCII decimal samples, `#` comments, maxval up to 65535.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::convolution::ImageGrid;
use crate::encoding::KernelMatrix;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Loads a single-channel image, sniffing the format from the content: a
/// leading `P2` token means PGM, anything else is parsed as CSV.
pub fn load_image(path: &Path) -> Result<ImageGrid> {
    Ok(ImageGrid::new(load_grid(path)?))
}

/// Loads kernel weights from a CSV or PGM file.
pub fn load_kernel_file(path: &Path) -> Result<KernelMatrix> {
    Ok(KernelMatrix::new(load_grid(path)?))
}

fn load_grid(path: &Path) -> Result<Grid> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if looks_like_pgm(&text) {
        parse_pgm(&text)
    } else {
        parse_csv(&text)
    }
}

fn looks_like_pgm(text: &str) -> bool {
    text.trim_start().starts_with("P2")
}

/// Parses comma-separated rows of real numbers; all rows must be equally
/// long.
pub fn parse_csv(text: &str) -> Result<Grid> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for token in line.split(',') {
            let token = token.trim();
            let value: f64 = token.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{token}` is not a number"),
            })?;
            row.push(value);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("row has {} entries, expected {w}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Grid::from_rows(&rows)
}

/// Parses the ASCII P2 format. `#` starts a comment running to the end of
/// its line; maxval must be in 1..=65535 and every sample in 0..=maxval.
pub fn parse_pgm(text: &str) -> Result<Grid> {
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            tokens.push((idx + 1, token));
        }
    }
    let mut cursor = tokens.into_iter();
    let mut next = |what: &str| {
        cursor.next().ok_or_else(|| Error::Parse {
            line: text.lines().count().max(1),
            message: format!("file ended before {what}"),
        })
    };
    let (line, magic) = next("the magic number")?;
    if magic != "P2" {
        return Err(Error::Parse {
            line,
            message: format!("expected magic `P2`, found `{magic}`"),
        });
    }
    let parse_dim = |(line, token): (usize, &str), what: &str| -> Result<usize> {
        token.parse::<usize>().map_err(|_| Error::Parse {
            line,
            message: format!("{what} `{token}` is not a non-negative integer"),
        })
    };
    let cols = parse_dim(next("the width")?, "width")?;
    let rows = parse_dim(next("the height")?, "height")?;
    let maxval = parse_dim(next("the maxval")?, "maxval")?;
    if cols == 0 || rows == 0 {
        return Err(Error::Parse {
            line: 1,
            message: format!("image dimensions {cols}x{rows} must be positive"),
        });
    }
    if !(1..=65535).contains(&maxval) {
        return Err(Error::Parse {
            line: 1,
            message: format!("maxval {maxval} outside 1..=65535"),
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let (line, token) = next("all samples")?;
        let value = parse_dim((line, token), "sample")?;
        if value > maxval {
            return Err(Error::Parse {
                line,
                message: format!("sample {value} exceeds maxval {maxval}"),
            });
        }
        data.push(value as f64);
    }
    if let Some((line, token)) = cursor.next() {
        return Err(Error::Parse {
            line,
            message: format!("unexpected trailing token `{token}`"),
        });
    }
    Grid::new(rows, cols, data)
}

/// Writes a grid as CSV with full (17 significant digit) precision.
pub fn write_csv(grid: &Grid, path: &Path) -> Result<()> {
    let mut text = String::new();
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            if c > 0 {
                text.push(',');
            }
            let _ = write!(text, "{:.16e}", grid.at(r, c));
        }
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Renders a grid to PGM by min-max scaling into 0..=255; a flat grid
/// renders as mid-gray 128.
pub fn render_pgm(grid: &Grid, path: &Path) -> Result<()> {
    let slice = grid.as_slice();
    let min = slice.iter().copied().fold(f64::INFINITY, f64::min);
    let max = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = |v: f64| -> u32 {
        if max == min {
            128
        } else {
            (((v - min) / (max - min)) * 255.0).round() as u32
        }
    };
    write_pgm_samples(grid, 255, scale, path)
}

/// Writes integer-valued pixels verbatim so the file reads back identical.
/// Values must be non-negative integers no larger than 65535.
pub fn write_pgm_raw(grid: &Grid, path: &Path) -> Result<()> {
    let mut max = 0u32;
    for &v in grid.as_slice() {
        if v.fract() != 0.0 || !(0.0..=65535.0).contains(&v) {
            return Err(Error::Input(format!(
                "pixel value {v} is not an integer in 0..=65535"
            )));
        }
        max = max.max(v as u32);
    }
    write_pgm_samples(grid, max.max(1), |v| v as u32, path)
}

fn write_pgm_samples(
    grid: &Grid,
    maxval: u32,
    scale: impl Fn(f64) -> u32,
    path: &Path,
) -> Result<()> {
    let mut text = format!("P2\n{} {}\n{}\n", grid.cols(), grid.rows(), maxval);
    for r in 0..grid.rows() {
        let row: Vec<String> = (0..grid.cols()).map(|c| scale(grid.at(r, c)).to_string()).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `{prefix}.csv` and a `{prefix}.pgm` rendering; returns both
/// paths.
pub fn save_map(grid: &Grid, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv = with_suffix(prefix, ".csv");
    let pgm = with_suffix(prefix, ".pgm");
    write_csv(grid, &csv)?;
    render_pgm(grid, &pgm)?;
    Ok((csv, pgm))
}

/// Appends a suffix to a path's final component.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}
