//! Fair-price anchored market maker: swap curve, pool state, quoting and the
//! multi-outcome buy pipeline.

mod pool;
mod swap;

pub use pool::PoolState;
pub use swap::{SwapBranch, SwapCurve, SwapResult};

pub(crate) use pool::fmt_scalar;
