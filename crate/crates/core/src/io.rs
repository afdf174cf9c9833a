//! File formats: matrix JSON, signal CSV, grid CSV, 16-bit PGM export, and
//! the frame/experiment report shapes.
//!
//! All text formats round-trip exactly: floats are written with Rust's
//! shortest-round-trip formatting, so parse(write(x)) reproduces x bit for
//! bit. The PGM export quantizes the modulus to 16 bits and records the
//! scaling constant in a header comment so the mapping is reproducible.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::{Grid2, SampledSignal};
use crate::error::{Error, Result};
use crate::frames::{DualWindow, Lattice};

/// On-disk matrix shape: `{"d": int, "rows": [[real, ...], ...]}` row-major.
#[derive(Serialize, Deserialize)]
pub struct MatrixFile {
    pub d: usize,
    pub rows: Vec<Vec<f64>>,
}

pub fn matrix_to_json(mat: &DMatrix<f64>, d: usize) -> Result<String> {
    let rows = (0..mat.nrows())
        .map(|i| (0..mat.ncols()).map(|j| mat[(i, j)]).collect())
        .collect();
    Ok(serde_json::to_string_pretty(&MatrixFile { d, rows })?)
}

/// Parses the matrix JSON; validates squareness and that the side length is
/// `2d` or `4d`. Symplecticity is left to the caller (`classify` reports on
/// non-symplectic input instead of rejecting it).
pub fn parse_matrix_json(text: &str) -> Result<(DMatrix<f64>, usize)> {
    let file: MatrixFile = serde_json::from_str(text)?;
    let n = file.rows.len();
    if n == 0 {
        return Err(Error::Format("matrix has no rows".into()));
    }
    for row in &file.rows {
        if row.len() != n {
            return Err(Error::NotSquare { rows: n, cols: row.len() });
        }
    }
    if file.d == 0 || (n != 2 * file.d && n != 4 * file.d) {
        return Err(Error::BadBlockSize { size: n, d: file.d });
    }
    let mat = DMatrix::from_fn(n, n, |i, j| file.rows[i][j]);
    Ok((mat, file.d))
}

/// Signal CSV: header `N=<n>,dx=<dx>`, then one `re,im` row per sample.
pub fn signal_to_csv(sig: &SampledSignal) -> String {
    let mut out = format!("N={},dx={}\n", sig.n(), sig.dx);
    for v in &sig.samples {
        out.push_str(&format!("{},{}\n", v.re, v.im));
    }
    out
}

pub fn parse_signal_csv(text: &str) -> Result<SampledSignal> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty signal file".into()))?;
    let mut n: Option<usize> = None;
    let mut dx: Option<f64> = None;
    for field in header.split(',') {
        let mut kv = field.splitn(2, '=');
        match (kv.next().map(str::trim), kv.next().map(str::trim)) {
            (Some("N"), Some(v)) => {
                n = Some(v.parse().map_err(|_| {
                    Error::Format(format!("bad N in signal header: {v:?}"))
                })?)
            }
            (Some("dx"), Some(v)) => {
                dx = Some(v.parse().map_err(|_| {
                    Error::Format(format!("bad dx in signal header: {v:?}"))
                })?)
            }
            _ => {
                return Err(Error::Format(format!(
                    "signal header must be `N=<n>,dx=<dx>`, got {header:?}"
                )))
            }
        }
    }
    let (Some(n), Some(dx)) = (n, dx) else {
        return Err(Error::Format("signal header missing N or dx".into()));
    };
    let mut samples = Vec::with_capacity(n);
    for line in lines {
        let mut cols = line.split(',');
        let re: f64 = cols
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Format(format!("bad sample row: {line:?}")))?;
        let im: f64 = cols
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Format(format!("bad sample row: {line:?}")))?;
        samples.push(Complex64::new(re, im));
    }
    if samples.len() != n {
        return Err(Error::Format(format!(
            "header says N={n} but file has {} samples",
            samples.len()
        )));
    }
    SampledSignal::new(samples, dx)
}

/// Grid CSV: header `x,xi,re,im`, one row per grid point.
pub fn grid_to_csv(grid: &Grid2) -> String {
    let mut out = String::from("x,xi,re,im\n");
    for ix in 0..grid.n {
        let x = grid.coord(ix);
        for iy in 0..grid.n {
            let v = grid.value(ix, iy);
            out.push_str(&format!("{},{},{},{}\n", x, grid.coord(iy), v.re, v.im));
        }
    }
    out
}

/// 16-bit binary PGM of the grid modulus. Rows run over frequency from
/// `+ξ_max` at the top down to `-ξ_max`, columns over time left to right;
/// each pixel is `round(65535·|W|/max)` with `max` recorded in the header.
pub fn grid_to_pgm(grid: &Grid2) -> Vec<u8> {
    let n = grid.n;
    let max = grid
        .values
        .iter()
        .map(|v| v.norm())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(64 + 2 * n * n);
    out.extend_from_slice(b"P5\n");
    out.extend_from_slice(b"# row = xi (top = +xi_max), column = x\n");
    out.extend_from_slice(format!("# pixel = round(65535 * |W| / max), max = {max}\n").as_bytes());
    out.extend_from_slice(format!("{n} {n}\n65535\n").as_bytes());
    for row in 0..n {
        let iy = n - 1 - row;
        for ix in 0..n {
            let pixel = (grid.value(ix, iy).norm() / max * 65535.0).round() as u16;
            out.extend_from_slice(&pixel.to_be_bytes());
        }
    }
    out
}

/// Lattice descriptor inside the frame report.
#[derive(Serialize, Deserialize)]
pub struct LatticeReport {
    pub a: f64,
    pub b: f64,
    pub radius: f64,
    pub points: usize,
}

/// Frame pipeline report: bound estimates, solver effort, lattice, grid size.
#[derive(Serialize, Deserialize)]
pub struct FrameReport {
    pub bounds: (f64, f64),
    pub iterations: usize,
    pub residual: f64,
    pub lattice: LatticeReport,
    #[serde(rename = "N")]
    pub n: usize,
}

impl FrameReport {
    pub fn new(dual: &DualWindow, lattice: &Lattice, n: usize) -> Self {
        Self {
            bounds: (dual.lower, dual.upper),
            iterations: dual.iterations,
            residual: dual.residual,
            lattice: LatticeReport {
                a: lattice.a,
                b: lattice.b,
                radius: lattice.radius,
                points: lattice.len(),
            },
            n,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::stft_projection;

    #[test]
    fn test_matrix_json_round_trip() {
        let a = stft_projection(1);
        let text = matrix_to_json(a.matrix(), a.d()).unwrap();
        let (mat, d) = parse_matrix_json(&text).unwrap();
        assert_eq!(d, 1);
        assert_eq!(&mat, a.matrix());
    }

    #[test]
    fn test_matrix_json_rejects_bad_shapes() {
        assert!(parse_matrix_json(r#"{"d":1,"rows":[[1,0,0],[0,1,0],[0,0,1]]}"#).is_err());
        assert!(parse_matrix_json(r#"{"d":1,"rows":[[1,0],[0]]}"#).is_err());
        assert!(parse_matrix_json("not json").is_err());
    }

    #[test]
    fn test_signal_csv_round_trip_bit_exact() {
        let sig = SampledSignal::from_fn(64, 0.125, |x| {
            Complex64::new((-x * x).exp(), 0.37 * x)
        })
        .unwrap();
        let parsed = parse_signal_csv(&signal_to_csv(&sig)).unwrap();
        assert_eq!(parsed.n(), 64);
        assert_eq!(parsed.dx, 0.125);
        for (a, b) in parsed.samples.iter().zip(&sig.samples) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn test_signal_csv_rejects_bad_input() {
        assert!(parse_signal_csv("").is_err());
        assert!(parse_signal_csv("0.5,0.5\n0.1,0.2\n").is_err());
        let hundred = "N=100,dx=0.1\n".to_string() + &"0,0\n".repeat(100);
        assert!(matches!(
            parse_signal_csv(&hundred),
            Err(Error::NotPowerOfTwo(100))
        ));
        assert!(parse_signal_csv("N=4,dx=0.1\n0,0\n").is_err());
    }

    #[test]
    fn test_grid_csv_shape() {
        let sig = SampledSignal::gaussian_g0(16, 0.25);
        let grid = Grid2::tensor(&sig, &sig, true).unwrap();
        let csv = grid_to_csv(&grid);
        assert_eq!(csv.lines().count(), 1 + 16 * 16);
        assert!(csv.starts_with("x,xi,re,im\n"));
    }

    #[test]
    fn test_pgm_header_and_size() {
        let sig = SampledSignal::gaussian_g0(16, 0.25);
        let grid = Grid2::tensor(&sig, &sig, true).unwrap();
        let pgm = grid_to_pgm(&grid);
        assert!(pgm.starts_with(b"P5\n"));
        let header_end = pgm
            .windows(6)
            .position(|w| w == b"65535\n")
            .map(|p| p + 6)
            .unwrap();
        assert_eq!(pgm.len() - header_end, 2 * 16 * 16);
        let text = String::from_utf8_lossy(&pgm[..header_end]);
        assert!(text.contains("16 16"));
        assert!(text.contains("max = "));
    }

    #[test]
    fn test_frame_report_json() {
        let report = FrameReport {
            bounds: (1.9, 2.1),
            iterations: 14,
            residual: 1e-11,
            lattice: LatticeReport { a: 0.5, b: 0.5, radius: 8.0, points: 1024 },
            n: 256,
        };
        let json = report.to_json().unwrap();
        assert!(json.contains("\"N\": 256"));
        let parsed: FrameReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.iterations, 14);
    }
}
