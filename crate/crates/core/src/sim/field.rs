use glam::DVec2;
use serde::{Deserialize, Serialize};

use super::config::DriftParams;
use crate::error::{Error, Result};

/// Phase-boundary slack absorbing accumulated floating-point error in
/// `phase_elapsed`.
const PHASE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Saccade,
    Settling,
}

/// Spatially uniform drift velocity: a saccade along a chosen direction,
/// then downward settling, each decaying exponentially.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftField {
    pub phase: Phase,
    pub phase_elapsed: f64,
    pub saccade_direction: DVec2,
    pub saccade_speed: f64,
    pub settle_speed: f64,
    pub tau_saccade: f64,
    pub tau_settle: f64,
    pub saccade_duration: f64,
    pub settle_duration: f64,
    pub drag_coefficient: f64,
}

impl DriftField {
    pub fn new(params: &DriftParams) -> Self {
        Self {
            phase: Phase::Idle,
            phase_elapsed: 0.0,
            saccade_direction: DVec2::X,
            saccade_speed: params.saccade_speed,
            settle_speed: params.settle_speed,
            tau_saccade: params.tau_saccade,
            tau_settle: params.tau_settle,
            saccade_duration: params.saccade_duration,
            settle_duration: params.settle_duration,
            drag_coefficient: params.drag_coefficient,
        }
    }

    /// Starts a new saccade, discarding whatever phase was running.
    pub fn trigger(&mut self, direction: DVec2) -> Result<()> {
        let len = direction.length();
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::argument(format!(
                "eye movement direction {direction:?} has no length"
            )));
        }
        self.saccade_direction = direction / len;
        self.phase = Phase::Saccade;
        self.phase_elapsed = 0.0;
        Ok(())
    }

    /// Field velocity `phase_elapsed` seconds into the current phase.
    /// Image coordinates: +y points down.
    pub fn velocity_at(&self, phase_elapsed: f64) -> DVec2 {
        match self.phase {
            Phase::Idle => DVec2::ZERO,
            Phase::Saccade => {
                self.saccade_direction
                    * (self.saccade_speed * (-phase_elapsed / self.tau_saccade).exp())
            }
            Phase::Settling => {
                DVec2::Y * (self.settle_speed * (-phase_elapsed / self.tau_settle).exp())
            }
        }
    }

    pub fn velocity(&self) -> DVec2 {
        self.velocity_at(self.phase_elapsed)
    }

    pub fn phase_duration(&self) -> Option<f64> {
        match self.phase {
            Phase::Idle => None,
            Phase::Saccade => Some(self.saccade_duration),
            Phase::Settling => Some(self.settle_duration),
        }
    }

    /// Advances the phase clock, carrying overshoot into the next phase.
    pub fn advance(&mut self, dt: f64) {
        self.phase_elapsed += dt;
        while let Some(duration) = self.phase_duration() {
            if self.phase_elapsed + PHASE_EPSILON < duration {
                break;
            }
            self.phase_elapsed = (self.phase_elapsed - duration).max(0.0);
            if self.phase_elapsed < PHASE_EPSILON {
                self.phase_elapsed = 0.0;
            }
            self.phase = match self.phase {
                Phase::Saccade => Phase::Settling,
                _ => Phase::Idle,
            };
        }
        if self.phase == Phase::Idle {
            self.phase_elapsed = self.phase_elapsed.max(0.0);
        }
    }
}
