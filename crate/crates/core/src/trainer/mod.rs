//! Composite PINN loss, parameter optimizers, and the block training schedule.

mod adam;
pub mod lbfgs;
mod loss;
mod run;
mod schedule;

pub use adam::Adam;
pub use lbfgs::{IterationInfo, Lbfgs, LbfgsConfig, StepKind};
pub use loss::{compute_loss, field_loss, supervised_loss, LossBreakdown, LossData, LossEval, LossWeights, Supervised};
pub use run::{write_log, LogRow, Phase, TrainConfig, TrainOutcome, TrainState, Trainer};
pub use schedule::{SamplerChoice, TrainSchedule};
