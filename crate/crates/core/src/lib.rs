//! Moving frames, zero-curvature residuals, soliton field maps and Lax-pair
//! commutation tests on regular grids.

pub mod error;
pub mod frames;
pub mod grid;
pub mod liealg;
pub mod cases;
pub mod cli;
pub mod solitons;
pub mod zerocurv;

pub use error::{Result, SolgeoError};
