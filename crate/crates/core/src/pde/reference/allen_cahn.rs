use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use super::table::SliceTable;
use super::ReferenceSolution;
use crate::error::Result;

/// Method-of-lines solver for `u_t = d·u_xx + 5(u − u³)` on `[−1,1]`, with
/// `u(x,0) = x²cos(πx)` and `u(±1,t) = −1`: second-order central differences
/// and classical RK4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AllenCahnSolver {
    pub d: f64,
    /// Grid intervals; nodes are `intervals + 1`.
    pub intervals: usize,
    pub dt: f64,
    pub t_end: f64,
    /// RK4 steps between stored slices.
    pub store_every: usize,
}

impl AllenCahnSolver {
    pub fn new(d: f64) -> Self {
        AllenCahnSolver { d, intervals: 640, dt: 1e-4, t_end: 1.0, store_every: 10 }
    }

    /// Cache file name encoding every grid parameter.
    pub fn cache_key(&self) -> String {
        format!("allen_cahn_d{}_n{}_dt{}_T{}_s{}.bin", self.d, self.intervals, self.dt, self.t_end, self.store_every)
    }

    pub fn solve(&self) -> SliceTable {
        let n = self.intervals;
        let h = 2.0 / n as f64;
        let steps = (self.t_end / self.dt).round() as usize;
        let slices = steps / self.store_every + 1;
        let x: Vec<f64> = (0..=n).map(|i| -1.0 + i as f64 * h).collect();
        let mut u: Vec<f64> = x.iter().map(|x| x * x * (PI * x).cos()).collect();
        u[0] = -1.0;
        u[n] = -1.0;
        let coef = self.d / (h * h);
        let rhs = |u: &[f64], out: &mut [f64]| {
            out[0] = 0.0;
            out[n] = 0.0;
            for i in 1..n {
                let v = u[i];
                out[i] = coef * (u[i + 1] - 2.0 * v + u[i - 1]) + 5.0 * (v - v * v * v);
            }
        };
        let mut values = Vec::with_capacity(slices * (n + 1));
        values.extend_from_slice(&u);
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]);
        let mut tmp = vec![0.0; n + 1];
        let dt = self.dt;
        for step in 1..=steps {
            rhs(&u, &mut k1);
            for i in 0..=n {
                tmp[i] = u[i] + 0.5 * dt * k1[i];
            }
            rhs(&tmp, &mut k2);
            for i in 0..=n {
                tmp[i] = u[i] + 0.5 * dt * k2[i];
            }
            rhs(&tmp, &mut k3);
            for i in 0..=n {
                tmp[i] = u[i] + dt * k3[i];
            }
            rhs(&tmp, &mut k4);
            for i in 0..=n {
                u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if step % self.store_every == 0 {
                values.extend_from_slice(&u);
            }
        }
        SliceTable {
            x0: -1.0,
            x1: 1.0,
            nx: n + 1,
            t0: 0.0,
            t1: (slices - 1) as f64 * self.store_every as f64 * dt,
            nt: slices,
            values,
        }
    }
}

/// Tabulated Allen–Cahn solution.
#[derive(Clone, Debug)]
pub struct AllenCahnReference {
    table: Arc<SliceTable>,
}

fn memo() -> &'static Mutex<HashMap<String, Arc<SliceTable>>> {
    static MEMO: OnceLock<Mutex<HashMap<String, Arc<SliceTable>>>> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

impl AllenCahnReference {
    pub fn from_table(table: SliceTable) -> Self {
        AllenCahnReference { table: Arc::new(table) }
    }

    /// Solves once per process and grid; with `cache_dir`, also reads or
    /// writes the table file named by [`AllenCahnSolver::cache_key`].
    pub fn load_or_build(solver: &AllenCahnSolver, cache_dir: Option<&Path>) -> Result<Self> {
        let key = solver.cache_key();
        if let Some(t) = memo().lock().expect("reference memo").get(&key) {
            return Ok(AllenCahnReference { table: t.clone() });
        }
        let table = match cache_dir.map(|d| d.join(&key)) {
            Some(path) if path.exists() => SliceTable::read(&path)?,
            Some(path) => {
                let t = solver.solve();
                t.write(&path)?;
                t
            }
            None => solver.solve(),
        };
        let table = Arc::new(table);
        memo().lock().expect("reference memo").insert(key, table.clone());
        Ok(AllenCahnReference { table })
    }

    pub fn table(&self) -> &SliceTable {
        &self.table
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        self.table.interpolate(x, t)
    }
}

impl ReferenceSolution for AllenCahnReference {
    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn eval_into(&self, p: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = self.eval(p[0], p[1])?;
        Ok(())
    }
}
