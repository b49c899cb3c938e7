pub mod ccg;
pub mod error;
pub mod formulation;
pub mod hazard;
pub mod netmodel;
pub mod worstcase;

pub use error::{CoreError, Result};
