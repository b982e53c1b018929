//! Exact input and parameter derivatives of fields built from the network.

mod field;
mod functional;
mod jet;
mod ops;
mod taylor;

pub use field::{AnalyticField, DifferentiableField};
pub use functional::{Bars, PassOutput, PointFunctional};
pub use jet::{Jet2, MAX_DIM};
pub use ops::{eval_jet2, input_gradient_sq_residual, param_gradient, ParamObjective, SquaredResidual};
pub use taylor::Taylor3;
