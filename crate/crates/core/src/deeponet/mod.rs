//! RBF-DeepONet: a trainable branch network over far-field data with a fixed
//! Gaussian radial-basis trunk.

mod model;
mod regularizer;
mod train;
mod trunk;

pub use model::{InputEncoding, RbfDeepOnet};
pub use regularizer::{learned_regularizer, regularizer_from_parts, ALPHA_FLOOR};
pub use train::{
    gen_training_set, gen_training_set_with, loss_and_gradient, loss_and_gradient_into, train_deeponet,
    train_deeponet_with, GenOptions, TrainConfig, TrainingSet,
};
pub use trunk::{make_trunk, make_trunk_with, trunk_eval, RbfTrunk, MIN_STABLE_OVERLAP};
