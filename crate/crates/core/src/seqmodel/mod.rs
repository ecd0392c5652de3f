//! Sequence-model building blocks: parameter storage, reverse-mode
//! differentiation, recurrent and attention cells, and gradient checking.

pub mod cells;
pub mod gradcheck;
pub mod store;
pub mod tape;

pub use store::{Init, ParamId, ParamStore, Tensor};
pub use tape::{Tape, Var};
