//! Dense networks with manual backpropagation and an Adam optimizer.

mod adam;
mod mlp;

pub use adam::AdamState;
pub use mlp::{ForwardCache, Mlp};
