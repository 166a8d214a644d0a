//! Direct-simulation check of canard predictions: integrate the full system
//! and bisect the bifurcation parameter on which side trajectories leave
//! the fold region.

pub mod integrator;
pub mod exit;
pub mod sweep;
