//! Dense networks with exact backpropagation, Adam and learning-rate
//! schedules.

mod adam;
mod mlp;
mod schedule;

pub use adam::{AdamState, WeightDecay};
pub use mlp::{Activation, Mlp, OutputTransform, Tape};
pub use schedule::LrSchedule;
