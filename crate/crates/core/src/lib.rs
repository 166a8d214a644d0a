//! Locating canard explosions in fast-slow systems from the first Lyapunov
//! coefficient at a singular Hopf point, with a numerical oracle that finds
//! the maximal canard by direct integration.

pub mod canard;
pub mod cli;
pub mod expr;
pub mod hopf;
pub mod lyapunov;
pub mod model;
pub mod multilinear;
pub mod oracle;
pub mod pipeline;
pub mod smallmat;
