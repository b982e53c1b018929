use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::DomainBox;

/// How a collocation point entered the set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Initial,
    Added,
    Replaced,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Initial => "initial",
            Origin::Added => "added",
            Origin::Replaced => "replaced",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "initial" => Ok(Origin::Initial),
            "added" => Ok(Origin::Added),
            "replaced" => Ok(Origin::Replaced),
            _ => Err(Error::config(format!("unknown origin `{s}`"))),
        }
    }
}

/// Interior points, row-major, with an origin tag per point.
#[derive(Clone, Debug, PartialEq)]
pub struct CollocationSet {
    dim: usize,
    points: Vec<f64>,
    origins: Vec<Origin>,
}

impl CollocationSet {
    /// Every point tagged `origin`.
    pub fn new(dim: usize, points: Vec<f64>, origin: Origin) -> Self {
        assert!(dim > 0 && points.len().is_multiple_of(dim), "points must be row-major with {dim} columns");
        let n = points.len() / dim;
        CollocationSet { dim, points, origins: vec![origin; n] }
    }

    pub fn from_parts(dim: usize, points: Vec<f64>, origins: Vec<Origin>) -> Result<Self> {
        if dim == 0 || points.len() != origins.len() * dim {
            return Err(Error::config("point and origin counts disagree"));
        }
        Ok(CollocationSet { dim, points, origins })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn points_mut(&mut self) -> &mut [f64] {
        &mut self.points
    }

    pub fn origins(&self) -> &[Origin] {
        &self.origins
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, p: &[f64], origin: Origin) {
        assert_eq!(p.len(), self.dim);
        self.points.extend_from_slice(p);
        self.origins.push(origin);
    }

    pub fn set(&mut self, i: usize, p: &[f64], origin: Origin) {
        self.points[i * self.dim..(i + 1) * self.dim].copy_from_slice(p);
        self.origins[i] = origin;
    }

    /// Same points, every tag replaced by `origin`.
    pub fn retag(mut self, origin: Origin) -> Self {
        self.origins.fill(origin);
        self
    }

    /// Index of the first point outside the closed box, if any.
    pub fn first_outside(&self, domain: &DomainBox) -> Option<usize> {
        (0..self.len()).find(|&i| !domain.contains(self.point(i)))
    }

    /// Containment and non-emptiness.
    pub fn validate(&self, domain: &DomainBox) -> Result<()> {
        if self.is_empty() {
            return Err(Error::config("collocation set is empty"));
        }
        if self.dim != domain.dim() {
            return Err(Error::config("collocation set dimension differs from the box"));
        }
        if let Some(i) = self.first_outside(domain) {
            return Err(Error::Domain(format!("collocation point {i} at {:?} lies outside the box", self.point(i))));
        }
        Ok(())
    }
}
