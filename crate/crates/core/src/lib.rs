//! Constructing binary sequences and grids that avoid sparse families of
//! forbidden patterns, plus a periodic scaffold that keeps every window
//! rich in fresh bits.

pub mod analysis;
pub mod avoider;
pub mod bits;
pub mod cli;
pub mod forbidden;
pub mod grid;
pub mod lll;
pub mod scaffold;
