//! Cell storage and the field dump formats.
//!
//! Binary layout, little endian:
//!
//! ```text
//! magic  b"ISOF"      4 bytes
//! version u32 = 1
//! nx, ny  u64
//! lx, ly, t  f64
//! nx·ny cells, row-major (y outer, x inner), each ρ, ρu, ρv, ρφ as f64
//! ```
//!
//! The CSV dump carries the same information: a `nx,ny,lx,ly,t` header line
//! with its value line, then `rho,rho_u,rho_v,rho_phi` and one line per cell
//! in the same row-major order. Floats are written in shortest round-trip
//! form, so both formats reload bit-exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Grid2D;
use crate::error::{Error, Result};
use crate::riemann::GasState;

const MAGIC: &[u8; 4] = b"ISOF";
const VERSION: u32 = 1;

/// Cell-wise primitive variables with the contact tracer `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub phi: f64,
}

impl Primitive {
    pub const fn new(rho: f64, u: f64, v: f64, phi: f64) -> Self {
        Self { rho, u, v, phi }
    }

    pub fn from_gas(gas: GasState, phi: f64) -> Self {
        Self::new(gas.rho, gas.u, gas.v, phi)
    }

    #[inline]
    pub fn from_conserved(q: &[f64; 4]) -> Self {
        let inv = 1.0 / q[0];
        Self::new(q[0], q[1] * inv, q[2] * inv, q[3] * inv)
    }

    #[inline]
    pub fn to_conserved(&self) -> [f64; 4] {
        [
            self.rho,
            self.rho * self.u,
            self.rho * self.v,
            self.rho * self.phi,
        ]
    }

    pub fn gas(&self) -> GasState {
        GasState::new(self.rho, self.u, self.v)
    }
}

/// Conserved variables `(ρ, ρu, ρv, ρφ)` per cell at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedField {
    pub grid: Grid2D,
    pub t: f64,
    pub cells: Vec<[f64; 4]>,
}

impl ConservedField {
    pub fn uniform(grid: Grid2D, state: Primitive) -> Self {
        Self {
            grid,
            t: 0.0,
            cells: vec![state.to_conserved(); grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, t: f64, mut f: impl FnMut(f64, f64) -> Primitive) -> Self {
        let mut cells = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y_center(j);
            for i in 0..grid.nx {
                cells.push(f(grid.x_center(i), y).to_conserved());
            }
        }
        Self { grid, t, cells }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &[f64; 4] {
        &self.cells[j * self.grid.nx + i]
    }

    pub fn primitive(&self, i: usize, j: usize) -> Primitive {
        Primitive::from_conserved(self.at(i, j))
    }

    pub fn row(&self, j: usize) -> &[[f64; 4]] {
        let nx = self.grid.nx;
        &self.cells[j * nx..(j + 1) * nx]
    }

    /// Checks positivity, finiteness and `|φ| ≤ 1` (with rounding slack).
    pub fn validate(&self) -> Result<()> {
        if self.cells.len() != self.grid.len() {
            return Err(Error::Validation(format!(
                "field has {} cells, grid has {}",
                self.cells.len(),
                self.grid.len()
            )));
        }
        for (k, q) in self.cells.iter().enumerate() {
            let (i, j) = (k % self.grid.nx, k / self.grid.nx);
            if !(q[0] > 0.0) || q.iter().any(|c| !c.is_finite()) {
                return Err(Error::Validation(format!(
                    "cell ({i}, {j}) has invalid state {q:?}"
                )));
            }
            if q[3].abs() > q[0] * (1.0 + 1e-12) {
                return Err(Error::Validation(format!(
                    "cell ({i}, {j}) has tracer |phi| > 1"
                )));
            }
        }
        Ok(())
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.grid.nx as u64).to_le_bytes())?;
        w.write_all(&(self.grid.ny as u64).to_le_bytes())?;
        for x in [self.grid.lx, self.grid.ly, self.t] {
            w.write_all(&x.to_le_bytes())?;
        }
        for q in &self.cells {
            for c in q {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let bad = |message: &str| Error::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        };
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 48 || &bytes[..4] != MAGIC {
            return Err(bad("missing header"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        if u32_at(4) != VERSION {
            return Err(bad("unsupported version"));
        }
        let (nx, ny) = (u64_at(8) as usize, u64_at(16) as usize);
        let (lx, ly, t) = (f64_at(24), f64_at(32), f64_at(40));
        let grid = Grid2D::new(lx, ly, nx, ny).map_err(|e| bad(&e.to_string()))?;
        let expected = nx
            .checked_mul(ny)
            .and_then(|n| n.checked_mul(32))
            .ok_or_else(|| bad("cell count overflows"))?;
        if bytes.len() - 48 != expected {
            return Err(bad(&format!(
                "expected {expected} bytes of cell data, found {}",
                bytes.len() - 48
            )));
        }
        let cells = bytes[48..]
            .chunks_exact(32)
            .map(|c| {
                let mut q = [0.0; 4];
                for (k, v) in q.iter_mut().enumerate() {
                    *v = f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().unwrap());
                }
                q
            })
            .collect();
        Ok(Self { grid, t, cells })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "nx,ny,lx,ly,t")?;
        writeln!(
            w,
            "{},{},{},{},{}",
            self.grid.nx, self.grid.ny, self.grid.lx, self.grid.ly, self.t
        )?;
        writeln!(w, "rho,rho_u,rho_v,rho_phi")?;
        for q in &self.cells {
            writeln!(w, "{},{},{},{}", q[0], q[1], q[2], q[3])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Format {
            path: path.to_path_buf(),
            message: format!("line {line}: {message}"),
        };
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((k, Ok(s))) => Ok((k + 1, s)),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(bad(0, format!("unexpected end of file, expected {what}"))),
            }
        };
        let (n, header) = next("header")?;
        if header.trim() != "nx,ny,lx,ly,t" {
            return Err(bad(n, format!("unexpected header `{header}`")));
        }
        let (n, meta) = next("grid line")?;
        let parts: Vec<&str> = meta.split(',').collect();
        if parts.len() != 5 {
            return Err(bad(n, "grid line needs 5 fields".into()));
        }
        let int = |s: &str| s.trim().parse::<usize>().map_err(|e| bad(n, e.to_string()));
        let float = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(n, e.to_string()));
        let grid = Grid2D::new(
            float(parts[2])?,
            float(parts[3])?,
            int(parts[0])?,
            int(parts[1])?,
        )
        .map_err(|e| bad(n, e.to_string()))?;
        let t = float(parts[4])?;
        let (n, cols) = next("column header")?;
        if cols.trim() != "rho,rho_u,rho_v,rho_phi" {
            return Err(bad(n, format!("unexpected column header `{cols}`")));
        }
        let mut cells = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let (n, line) = next("cell line")?;
            let mut q = [0.0; 4];
            let mut it = line.split(',');
            for v in q.iter_mut() {
                let s = it.next().ok_or_else(|| bad(n, "too few columns".into()))?;
                *v = s
                    .trim()
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| bad(n, e.to_string()))?;
            }
            if it.next().is_some() {
                return Err(bad(n, "too many columns".into()));
            }
            cells.push(q);
        }
        Ok(Self { grid, t, cells })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ConservedField {
        let grid = Grid2D::new(1.5, 1.0, 3, 2).unwrap();
        let mut f = ConservedField::from_fn(grid, 0.25, |x, y| {
            Primitive::new(
                1.0 + x * x,
                x - y,
                0.1 * y,
                if x > 0.0 { 1.0 } else { -1.0 },
            )
        });
        f.cells[4][2] = 1.0 / 3.0;
        f
    }

    #[test]
    fn primitive_round_trip() {
        let p = Primitive::new(2.0, -0.5, 0.25, 1.0);
        assert_eq!(Primitive::from_conserved(&p.to_conserved()), p);
    }

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let f = sample();
        f.write_binary(&path).unwrap();
        assert_eq!(ConservedField::read_binary(&path).unwrap(), f);
        let len = std::fs::metadata(&path).unwrap().len();
        assert_eq!(len, 48 + 6 * 32);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let f = sample();
        f.write_csv(&path).unwrap();
        assert_eq!(ConservedField::read_csv(&path).unwrap(), f);
    }

    #[test]
    fn truncated_dump_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        sample().write_binary(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(
            ConservedField::read_binary(&path),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn validation() {
        let mut f = sample();
        assert!(f.validate().is_ok());
        f.cells[0][0] = -1.0;
        assert!(f.validate().is_err());
    }
}
