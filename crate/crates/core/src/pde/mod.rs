//! Benchmark problems: residual operators, domains, boundary and initial data, reference solutions.

mod domain;
mod landscape;
mod operators;
mod problem;
pub mod reference;
mod residual;
mod taylor_green;

pub use domain::DomainBox;
pub use landscape::ResidualLandscape;
pub use operators::{AllenCahn, Burgers, NavierStokes, Poisson5};
pub use problem::{Face, InverseScalar, PdeProblem, PointCounts, ProblemKind, ProblemOptions, ProblemParams, TargetFn};
pub use residual::ResidualOperator;
pub use taylor_green::{
    gen_taylor_green, navier_stokes_box, taylor_green, taylor_green_field, ObservationSet, NS_LOWER, NS_UPPER,
    OBSERVATION_HEADER,
};
