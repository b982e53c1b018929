//! Gradient-driven movement of collocation points toward large squared residuals.

mod config;
mod golden;
mod inner;
mod movement;

pub use config::{PacmannConfig, PointOptimizer};
pub use golden::{golden_section_move, GoldenBracket, INV_PHI, ONE_MINUS_INV_PHI};
pub use inner::{inner_step, PointState};
pub use movement::pacmann_move;
