use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::domain::DomainBox;
use super::operators::{AllenCahn, Burgers, NavierStokes, Poisson5};
use super::reference::{AllenCahnReference, AllenCahnSolver, ColeHopf, ExactReference, ReferenceSolution};
use super::residual::ResidualOperator;
use super::taylor_green::{gen_taylor_green, navier_stokes_box, taylor_green, taylor_green_field, ObservationSet};
use crate::diff::{AnalyticField, Taylor3};
use crate::error::{Error, Result};
use crate::network::MlpConfig;

/// The four benchmark problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Burgers,
    AllenCahn,
    Poisson,
    NavierStokes,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] =
        [ProblemKind::Burgers, ProblemKind::AllenCahn, ProblemKind::Poisson, ProblemKind::NavierStokes];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Burgers => "burgers",
            ProblemKind::AllenCahn => "allen_cahn",
            ProblemKind::Poisson => "poisson",
            ProblemKind::NavierStokes => "navier_stokes",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::config(format!("unknown problem `{s}` (expected burgers, allen_cahn, poisson, navier_stokes)"))
        })
    }
}

/// Physical coefficients of the benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemParams {
    /// Burgers viscosity.
    pub nu: f64,
    /// Allen–Cahn diffusion.
    pub d_ac: f64,
    /// True Navier–Stokes convection scale.
    pub lambda1: f64,
    /// True Navier–Stokes viscosity; also the Taylor–Green viscosity.
    pub lambda2: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        ProblemParams { nu: 0.01 / PI, d_ac: 0.001, lambda1: 1.0, lambda2: 0.01 }
    }
}

impl ProblemParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !(self.d_ac > 0.0) {
            return Err(Error::config("nu and d_ac must be positive"));
        }
        if !self.lambda1.is_finite() || !self.lambda2.is_finite() {
            return Err(Error::config("lambda1 and lambda2 must be finite"));
        }
        Ok(())
    }
}

/// Interior, boundary, initial, and observation point counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointCounts {
    pub n_r: usize,
    pub n_bc: usize,
    pub n_ic: usize,
    pub n_ref: usize,
}

/// A learned problem scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseScalar {
    pub name: &'static str,
    pub initial: f64,
    pub truth: f64,
}

/// A face `x_axis = lower` or `x_axis = upper` of the domain box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

/// Dirichlet data: target values for every output at a point.
pub type TargetFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Options that affect how a problem's data is produced.
#[derive(Clone, Debug, Default)]
pub struct ProblemOptions {
    /// Directory for cached reference tables.
    pub cache_dir: Option<PathBuf>,
    /// Observation CSV to use instead of generating one.
    pub observations: Option<PathBuf>,
}

/// A benchmark problem: domain, residual, conditions, and reference.
#[derive(Clone)]
pub struct PdeProblem {
    pub kind: ProblemKind,
    pub params: ProblemParams,
    pub domain: DomainBox,
    /// Axis holding time, if the problem is time dependent.
    pub time_axis: Option<usize>,
    pub output_dim: usize,
    pub residual: Arc<dyn ResidualOperator>,
    pub boundary: TargetFn,
    pub initial: Option<TargetFn>,
    pub reference: Arc<dyn ReferenceSolution>,
    pub counts: PointCounts,
    pub default_hidden: Vec<usize>,
    pub inverse: Vec<InverseScalar>,
    pub output_names: Vec<&'static str>,
    observations: Option<PathBuf>,
}

impl fmt::Debug for PdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeProblem")
            .field("kind", &self.kind)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .field("counts", &self.counts)
            .finish_non_exhaustive()
    }
}

fn poisson_exact(p: &[f64]) -> f64 {
    p.iter().map(|x| (PI * x).sin()).product()
}

impl PdeProblem {
    pub fn build(kind: ProblemKind, params: ProblemParams, options: &ProblemOptions) -> Result<Self> {
        params.validate()?;
        let zero: TargetFn = Arc::new(|_, out: &mut [f64]| out.fill(0.0));
        let problem = match kind {
            ProblemKind::Burgers => PdeProblem {
                kind,
                params,
                domain: DomainBox::new(vec![-1.0, 0.0], vec![1.0, 1.0])?,
                time_axis: Some(1),
                output_dim: 1,
                residual: Arc::new(Burgers { nu: params.nu }),
                boundary: zero,
                initial: Some(Arc::new(|p, out| out[0] = -(PI * p[0]).sin())),
                reference: Arc::new(ColeHopf::new(params.nu)),
                counts: PointCounts { n_r: 2500, n_bc: 80, n_ic: 160, n_ref: 0 },
                default_hidden: vec![64; 4],
                inverse: Vec::new(),
                output_names: vec!["u"],
                observations: None,
            },
            ProblemKind::AllenCahn => PdeProblem {
                kind,
                params,
                domain: DomainBox::new(vec![-1.0, 0.0], vec![1.0, 1.0])?,
                time_axis: Some(1),
                output_dim: 1,
                residual: Arc::new(AllenCahn { d: params.d_ac }),
                boundary: Arc::new(|_, out| out[0] = -1.0),
                initial: Some(Arc::new(|p, out| out[0] = p[0] * p[0] * (PI * p[0]).cos())),
                reference: Arc::new(AllenCahnReference::load_or_build(
                    &AllenCahnSolver::new(params.d_ac),
                    options.cache_dir.as_deref(),
                )?),
                counts: PointCounts { n_r: 2500, n_bc: 80, n_ic: 160, n_ref: 0 },
                default_hidden: vec![64; 4],
                inverse: Vec::new(),
                output_names: vec!["u"],
                observations: None,
            },
            ProblemKind::Poisson => PdeProblem {
                kind,
                params,
                domain: DomainBox::cube(5, -1.0, 1.0)?,
                time_axis: None,
                output_dim: 1,
                residual: Arc::new(Poisson5),
                boundary: Arc::new(|p, out| out[0] = poisson_exact(p)),
                initial: None,
                reference: Arc::new(ExactReference::new(5, 1, |p: &[f64], out: &mut [f64]| out[0] = poisson_exact(p))),
                counts: PointCounts { n_r: 750, n_bc: 750, n_ic: 0, n_ref: 0 },
                default_hidden: vec![64; 4],
                inverse: Vec::new(),
                output_names: vec!["v"],
                observations: None,
            },
            ProblemKind::NavierStokes => {
                let nu = params.lambda2;
                let tg: TargetFn = Arc::new(move |p, out| out.copy_from_slice(&taylor_green(nu, p[0], p[1], p[2])));
                PdeProblem {
                    kind,
                    params,
                    domain: navier_stokes_box(),
                    time_axis: Some(2),
                    output_dim: 3,
                    residual: Arc::new(NavierStokes {
                        lambda1: params.lambda1,
                        lambda2: params.lambda2,
                        learned: true,
                    }),
                    boundary: tg.clone(),
                    initial: Some(tg),
                    reference: Arc::new(ExactReference::new(3, 3, move |p: &[f64], out: &mut [f64]| {
                        out.copy_from_slice(&taylor_green(nu, p[0], p[1], p[2]))
                    })),
                    counts: PointCounts { n_r: 700, n_bc: 200, n_ic: 100, n_ref: 7000 },
                    default_hidden: vec![50; 6],
                    inverse: vec![
                        InverseScalar { name: "lambda1", initial: 0.0, truth: params.lambda1 },
                        InverseScalar { name: "lambda2", initial: 0.0, truth: params.lambda2 },
                    ],
                    output_names: vec!["u", "v", "p"],
                    observations: options.observations.clone(),
                }
            }
        };
        Ok(problem)
    }

    /// The registry entry with default coefficients.
    pub fn registry(kind: ProblemKind) -> Result<Self> {
        Self::build(kind, ProblemParams::default(), &ProblemOptions::default())
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn input_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn net_config(&self, hidden: &[usize]) -> MlpConfig {
        MlpConfig::new(self.input_dim(), self.output_dim, hidden.to_vec())
    }

    pub fn default_net(&self) -> MlpConfig {
        self.net_config(&self.default_hidden)
    }

    /// Closed-form solution satisfying the residual exactly, where one exists.
    pub fn exact_field(&self) -> Option<AnalyticField> {
        match self.kind {
            ProblemKind::Poisson => Some(AnalyticField::new(5, 1, |v: &[Taylor3]| {
                let mut prod = (v[0] * PI).sin();
                for x in &v[1..] {
                    prod = prod * (*x * PI).sin();
                }
                vec![prod]
            })),
            ProblemKind::NavierStokes => Some(taylor_green_field(self.params.lambda2)),
            ProblemKind::AllenCahn => {
                Some(AnalyticField::new(2, 1, |v: &[Taylor3]| vec![Taylor3::constant(v[0].dim, 1.0)]))
            }
            ProblemKind::Burgers => None,
        }
    }

    /// Spatial faces carrying boundary data.
    pub fn boundary_faces(&self) -> Vec<Face> {
        (0..self.input_dim())
            .filter(|&a| Some(a) != self.time_axis)
            .flat_map(|axis| [Face { axis, upper: false }, Face { axis, upper: true }])
            .collect()
    }

    fn face_measure(&self, face: Face) -> f64 {
        (0..self.input_dim()).filter(|&a| a != face.axis).map(|a| self.domain.width(a)).product()
    }

    /// Splits `n` across the boundary faces in proportion to face measure,
    /// largest remainder first, ties to the lower face index.
    pub fn face_allocation(&self, n: usize) -> Vec<usize> {
        let faces = self.boundary_faces();
        let measures: Vec<f64> = faces.iter().map(|&f| self.face_measure(f)).collect();
        let total: f64 = measures.iter().sum();
        let exact: Vec<f64> = measures.iter().map(|m| n as f64 * m / total).collect();
        let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
        let mut order: Vec<usize> = (0..faces.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = exact[a] - exact[a].floor();
            let fb = exact[b] - exact[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        let missing = n - counts.iter().sum::<usize>();
        for &i in order.iter().take(missing) {
            counts[i] += 1;
        }
        counts
    }

    /// `n` seeded points on the boundary faces, row-major.
    pub fn sample_boundary<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let d = self.input_dim();
        let mut out = Vec::with_capacity(n * d);
        for (face, count) in self.boundary_faces().into_iter().zip(self.face_allocation(n)) {
            let value = if face.upper { self.domain.upper()[face.axis] } else { self.domain.lower()[face.axis] };
            for _ in 0..count {
                let start = out.len();
                self.domain.sample_into(rng, &mut out);
                out[start + face.axis] = value;
            }
        }
        out
    }

    /// `n` seeded points on the initial face, row-major; empty without a time axis.
    pub fn sample_initial<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let Some(t) = self.time_axis else {
            return Vec::new();
        };
        let d = self.input_dim();
        let mut out = Vec::with_capacity(n * d);
        for _ in 0..n {
            let start = out.len();
            self.domain.sample_into(rng, &mut out);
            out[start + t] = self.domain.lower()[t];
        }
        out
    }

    pub fn on_boundary(&self, p: &[f64]) -> bool {
        self.domain.contains(p)
            && self
                .boundary_faces()
                .iter()
                .any(|f| p[f.axis] == if f.upper { self.domain.upper()[f.axis] } else { self.domain.lower()[f.axis] })
    }

    pub fn on_initial(&self, p: &[f64]) -> bool {
        match self.time_axis {
            Some(t) => self.domain.contains(p) && p[t] == self.domain.lower()[t],
            None => false,
        }
    }

    /// Evaluates a target function at every point, row-major `n × output_dim`.
    pub fn targets(&self, target: &TargetFn, points: &[f64]) -> Vec<f64> {
        let d = self.input_dim();
        let m = self.output_dim;
        let mut out = vec![0.0; points.len() / d * m];
        for (p, o) in points.chunks_exact(d).zip(out.chunks_exact_mut(m)) {
            target(p, o);
        }
        out
    }

    /// Observation data for the reference-data term: `(points, targets)`.
    ///
    /// Reads the configured observation file, or generates `n` Taylor–Green
    /// rows from `seed`. Problems without observations return `None`.
    pub fn observations(&self, n: usize, seed: u64) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        if self.kind != ProblemKind::NavierStokes || n == 0 {
            return Ok(None);
        }
        let set = match &self.observations {
            Some(path) => {
                let set = ObservationSet::read_csv(path)?;
                if set.len() < n {
                    return Err(Error::config(format!(
                        "{} holds {} observations, {n} requested",
                        path.display(),
                        set.len()
                    )));
                }
                ObservationSet { rows: set.rows[..n].to_vec() }
            }
            None => gen_taylor_green(self.params.lambda2, n, seed),
        };
        if let Some(bad) = set.points().chunks_exact(3).position(|p| !self.domain.contains(p)) {
            return Err(Error::config(format!("observation row {} lies outside the box", bad + 1)));
        }
        Ok(Some((set.points(), set.targets())))
    }
}
