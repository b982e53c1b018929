use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Values of a scalar field on a uniform `(x, t)` lattice, stored slice by slice in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceTable {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
    /// `nt × nx`, row `k` holding time `t0 + k·(t1−t0)/(nt−1)`.
    pub values: Vec<f64>,
}

impl SliceTable {
    pub fn x_step(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn t_step(&self) -> f64 {
        (self.t1 - self.t0) / (self.nt - 1) as f64
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        &self.values[k * self.nx..(k + 1) * self.nx]
    }

    /// Cubic Lagrange interpolation in `x`, linear in `t`.
    pub fn interpolate(&self, x: f64, t: f64) -> Result<f64> {
        let eps = 1e-12;
        if !(x >= self.x0 - eps && x <= self.x1 + eps && t >= self.t0 - eps && t <= self.t1 + eps) {
            return Err(Error::Domain(format!(
                "({x}, {t}) outside table [{}, {}] × [{}, {}]",
                self.x0, self.x1, self.t0, self.t1
            )));
        }
        let st = ((t - self.t0) / self.t_step()).clamp(0.0, (self.nt - 1) as f64);
        let k = (st.floor() as usize).min(self.nt - 2);
        let a = st - k as f64;
        let lo = self.cubic_x(k, x);
        if a == 0.0 {
            return Ok(lo);
        }
        Ok((1.0 - a) * lo + a * self.cubic_x(k + 1, x))
    }

    fn cubic_x(&self, k: usize, x: f64) -> f64 {
        let row = self.slice(k);
        let s = ((x - self.x0) / self.x_step()).clamp(0.0, (self.nx - 1) as f64);
        let i0 = (s.floor() as isize - 1).clamp(0, self.nx as isize - 4) as usize;
        let u = s - i0 as f64;
        let mut acc = 0.0;
        for j in 0..4 {
            let mut w = 1.0;
            for m in 0..4 {
                if m != j {
                    w *= (u - m as f64) / (j as f64 - m as f64);
                }
            }
            acc += w * row[i0 + j];
        }
        acc
    }

    /// Writes the header line `table <nx> <nt> <x0> <x1> <t0> <t1>` followed by
    /// little-endian `f64` values.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut buf =
            format!("table {} {} {} {} {} {}\n", self.nx, self.nt, self.x0, self.x1, self.t0, self.t1).into_bytes();
        buf.reserve(self.values.len() * 8);
        for v in &self.values {
            buf.write_all(&v.to_le_bytes()).expect("in-memory write");
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| Error::parse(path, "missing header line"))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::parse(path, "header is not UTF-8"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 7 || fields[0] != "table" {
            return Err(Error::parse(path, format!("bad header `{header}`")));
        }
        let bad = |_| Error::parse(path, format!("bad header `{header}`"));
        let nx: usize = fields[1].parse().map_err(bad)?;
        let nt: usize = fields[2].parse().map_err(bad)?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(path, format!("bad header `{header}`")));
        let (x0, x1, t0, t1) = (num(fields[3])?, num(fields[4])?, num(fields[5])?, num(fields[6])?);
        let body = &bytes[nl + 1..];
        if nx < 4 || nt < 2 || body.len() != nx * nt * 8 {
            return Err(Error::parse(path, "body size does not match header"));
        }
        let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
        Ok(SliceTable { x0, x1, nx, t0, t1, nt, values })
    }
}
