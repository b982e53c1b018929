use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::domain::DomainBox;
use crate::diff::{AnalyticField, Taylor3};
use crate::error::{Error, Result};

/// Lower corner of the Navier–Stokes box in `(x, y, t)`.
pub const NS_LOWER: [f64; 3] = [1.0, -2.0, 0.0];
/// Upper corner of the Navier–Stokes box in `(x, y, t)`.
pub const NS_UPPER: [f64; 3] = [8.0, 2.0, 7.0];

pub fn navier_stokes_box() -> DomainBox {
    DomainBox::new(NS_LOWER.to_vec(), NS_UPPER.to_vec()).expect("valid box")
}

/// Decaying Taylor–Green vortex `(u, v, p)` at `(x, y, t)`.
pub fn taylor_green(nu: f64, x: f64, y: f64, t: f64) -> [f64; 3] {
    let e = (-2.0 * nu * t).exp();
    [-x.cos() * y.sin() * e, x.sin() * y.cos() * e, -0.25 * ((2.0 * x).cos() + (2.0 * y).cos()) * e * e]
}

/// The Taylor–Green vortex as a field with exact jets.
pub fn taylor_green_field(nu: f64) -> AnalyticField {
    AnalyticField::new(3, 3, move |v: &[Taylor3]| {
        let (x, y, t) = (v[0], v[1], v[2]);
        let e = (t * (-2.0 * nu)).exp();
        let u = -(x.cos() * y.sin()) * e;
        let w = x.sin() * y.cos() * e;
        let p = ((x * 2.0).cos() + (y * 2.0).cos()) * (e * e) * -0.25;
        vec![u, w, p]
    })
}

/// Observed `(t, x, y, u, v, p)` rows.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationSet {
    pub rows: Vec<[f64; 6]>,
}

pub const OBSERVATION_HEADER: &str = "t,x,y,u,v,p";

impl ObservationSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row-major `(x, y, t)` coordinates.
    pub fn points(&self) -> Vec<f64> {
        self.rows.iter().flat_map(|r| [r[1], r[2], r[0]]).collect()
    }

    /// Row-major `(u, v, p)` targets.
    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().flat_map(|r| [r[3], r[4], r[5]]).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{OBSERVATION_HEADER}").map_err(io)?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", cells.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
        let header = reader.headers().map_err(|e| Error::parse(path, e.to_string()))?;
        if header.iter().collect::<Vec<_>>().join(",") != OBSERVATION_HEADER {
            return Err(Error::parse(path, format!("expected header `{OBSERVATION_HEADER}`")));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
            let mut row = [0.0; 6];
            if rec.len() != 6 {
                return Err(Error::parse(path, format!("row {} has {} fields", i + 1, rec.len())));
            }
            for (k, cell) in rec.iter().enumerate() {
                row[k] = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(path, format!("row {}: bad number `{cell}`", i + 1)))?;
            }
            rows.push(row);
        }
        Ok(ObservationSet { rows })
    }
}

/// `n_rows` uniform samples of the Taylor–Green vortex in the Navier–Stokes box.
pub fn gen_taylor_green(nu: f64, n_rows: usize, seed: u64) -> ObservationSet {
    let domain = navier_stokes_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = domain.sample(&mut rng, n_rows);
    let rows = pts
        .chunks_exact(3)
        .map(|p| {
            let [u, v, pr] = taylor_green(nu, p[0], p[1], p[2]);
            [p[2], p[0], p[1], u, v, pr]
        })
        .collect();
    ObservationSet { rows }
}
