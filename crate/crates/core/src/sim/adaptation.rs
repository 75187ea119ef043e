use serde::{Deserialize, Serialize};

use super::config::AdaptationParams;

/// Speed-gated visibility of a floater: still shadows fade out, moving
/// ones recover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptationModel {
    /// Canvas pixels per second.
    pub speed_threshold: f64,
    pub fade_time_constant: f64,
    pub recover_time_constant: f64,
    pub adaptation_period: f64,
}

impl AdaptationModel {
    /// A shadow counts as still when it moves less than its own radius
    /// within one adaptation period.
    pub fn for_radius(radius: f64, params: &AdaptationParams) -> Self {
        Self {
            speed_threshold: radius / params.adaptation_period,
            fade_time_constant: params.fade_time_constant,
            recover_time_constant: params.recover_time_constant,
            adaptation_period: params.adaptation_period,
        }
    }
}

pub fn update_adaptation(alpha: f64, speed: f64, model: &AdaptationModel, dt: f64) -> f64 {
    let next = if speed < model.speed_threshold {
        alpha * (-dt / model.fade_time_constant).exp()
    } else {
        alpha + (1.0 - alpha) * (1.0 - (-dt / model.recover_time_constant).exp())
    };
    next.clamp(0.0, 1.0)
}
