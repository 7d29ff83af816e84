#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod cli;
pub mod design;
pub mod error;
pub mod io;
pub mod numeric;
pub mod observables;
pub mod optics;
pub mod oracle;
pub mod soliton;
pub mod state;

pub use error::{Error, Result};
