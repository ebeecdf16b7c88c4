// `!(x > 0.0)` is used deliberately so that NaN fails bound checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod crm;
pub mod error;
pub mod fit;
pub mod rnn;
pub mod scenario;
pub mod series;

pub use error::{Error, Result};
