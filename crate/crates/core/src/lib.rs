#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deeponet;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod nn;
pub mod noisenet;
pub mod ntk;
pub mod par;
pub mod regsolve;
pub mod specialfn;

pub use error::{Error, Result};
