//! Floater chains driven by a two-phase drift field.

mod adaptation;
mod chain;
mod config;
mod field;
mod state;
mod xpbd;

pub use adaptation::{update_adaptation, AdaptationModel};
pub use chain::{
    joint_angle, mean_chain_speed, BendConstraint, ChainShape, DistanceConstraint, FloaterChain,
    Particle,
};
pub use config::{AdaptationParams, DriftParams, SimConfig, Span};
pub use field::{DriftField, Phase};
pub use state::{init_simulation, SimState};
pub use xpbd::{project_distance_constraint, Projection};
