use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[min, max]`, serialized as a two-element array.
pub type Span<T> = [T; 2];

/// Drift field parameters. Speeds are in canvas pixels per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftParams {
    pub saccade_speed: f64,
    pub settle_speed: f64,
    pub tau_saccade: f64,
    pub tau_settle: f64,
    pub saccade_duration: f64,
    pub settle_duration: f64,
    /// Rate (1/s) at which particle velocity relaxes toward the field.
    pub drag_coefficient: f64,
}

impl Default for DriftParams {
    fn default() -> Self {
        Self {
            saccade_speed: 150.0,
            settle_speed: 80.0,
            tau_saccade: 1.0,
            tau_settle: 3.0,
            saccade_duration: 3.0,
            settle_duration: 9.0,
            drag_coefficient: 12.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptationParams {
    /// When false, floaters keep their current visibility forever.
    pub enabled: bool,
    /// Neural adaptation period in seconds. A chain whose shadow moves less
    /// than its own radius in this period counts as still.
    pub adaptation_period: f64,
    pub fade_time_constant: f64,
    pub recover_time_constant: f64,
}

impl Default for AdaptationParams {
    fn default() -> Self {
        Self {
            enabled: true,
            adaptation_period: 0.080,
            fade_time_constant: 0.5,
            recover_time_constant: 0.1,
        }
    }
}

/// Simulation configuration. Every field has a default, so a JSON document
/// only needs the keys it wants to change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Canvas size in pixels; width:height must be exactly 3:4.
    pub canvas_width: u32,
    pub canvas_height: u32,
    pub floater_count: usize,
    /// Particles per chain.
    pub chain_length_range: Span<usize>,
    /// Rest length of each link, pixels.
    pub segment_length_range: Span<f64>,
    /// Shadow radius of each particle, pixels.
    pub radius_range: Span<f64>,
    /// Distance-constraint compliance, sampled per joint.
    pub compliance_range: Span<f64>,
    /// Bend-constraint compliance, sampled per joint.
    pub bend_compliance_range: Span<f64>,
    /// Largest turn between consecutive links at spawn, radians.
    pub max_turn_angle: f64,
    pub base_opacity_range: Span<f64>,
    /// Per-particle multiplier on the drag coefficient. Unequal drag across a
    /// chain is what makes chains rotate and deform in a uniform field.
    pub drag_scale_range: Span<f64>,
    /// Visibility of each chain at t = 0. Floaters that have been still
    /// before the first eye movement start fully adapted (0).
    pub initial_alpha: f64,
    pub seed: u64,
    /// Largest substep, seconds.
    pub dt: f64,
    pub solver_iterations: u32,
    pub drift: DriftParams,
    pub adaptation: AdaptationParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            canvas_width: 480,
            canvas_height: 640,
            floater_count: 24,
            chain_length_range: [2, 14],
            segment_length_range: [6.0, 14.0],
            radius_range: [1.5, 2.5],
            compliance_range: [0.0, 1e-5],
            bend_compliance_range: [1e-5, 1e-2],
            max_turn_angle: std::f64::consts::FRAC_PI_3,
            base_opacity_range: [0.25, 0.6],
            drag_scale_range: [0.5, 1.5],
            initial_alpha: 0.0,
            seed: 42,
            dt: 1.0 / 30.0,
            solver_iterations: 8,
            drift: DriftParams::default(),
            adaptation: AdaptationParams::default(),
        }
    }
}

fn check_span(name: &str, span: &Span<f64>, lo: f64, hi: f64, open_lo: bool) -> Result<()> {
    let [a, b] = *span;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::config(format!("{name}: bounds must be finite")));
    }
    if a > b {
        return Err(Error::config(format!("{name}: empty range [{a}, {b}]")));
    }
    let below = if open_lo { a <= lo } else { a < lo };
    if below || b > hi {
        let open = if open_lo { "(" } else { "[" };
        return Err(Error::config(format!(
            "{name}: [{a}, {b}] outside {open}{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::config(format!("{name} must be > 0, got {value}")));
    }
    Ok(())
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SimConfig =
            serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = (self.canvas_width as u64, self.canvas_height as u64);
        if w == 0 || h == 0 || w * 4 != h * 3 {
            return Err(Error::config(format!(
                "canvas {w}x{h} is not width:height = 3:4"
            )));
        }
        let [lmin, lmax] = self.chain_length_range;
        if lmin < 2 || lmin > lmax {
            return Err(Error::config(format!(
                "chain_length_range [{lmin}, {lmax}] must satisfy 2 <= min <= max"
            )));
        }
        check_span(
            "segment_length_range",
            &self.segment_length_range,
            0.0,
            f64::MAX,
            true,
        )?;
        check_span("radius_range", &self.radius_range, 0.0, f64::MAX, true)?;
        check_span(
            "compliance_range",
            &self.compliance_range,
            0.0,
            f64::MAX,
            false,
        )?;
        check_span(
            "bend_compliance_range",
            &self.bend_compliance_range,
            0.0,
            f64::MAX,
            false,
        )?;
        check_span(
            "base_opacity_range",
            &self.base_opacity_range,
            0.0,
            1.0,
            true,
        )?;
        check_span(
            "drag_scale_range",
            &self.drag_scale_range,
            0.0,
            f64::MAX,
            false,
        )?;
        if !(0.0..=std::f64::consts::PI).contains(&self.max_turn_angle) {
            return Err(Error::config("max_turn_angle must lie in [0, pi]"));
        }
        if !(0.0..=1.0).contains(&self.initial_alpha) {
            return Err(Error::config("initial_alpha must lie in [0, 1]"));
        }
        check_positive("dt", self.dt)?;
        if self.solver_iterations == 0 {
            return Err(Error::config("solver_iterations must be >= 1"));
        }

        let d = &self.drift;
        for (name, v) in [
            ("drift.tau_saccade", d.tau_saccade),
            ("drift.tau_settle", d.tau_settle),
            ("drift.saccade_duration", d.saccade_duration),
            ("drift.settle_duration", d.settle_duration),
        ] {
            check_positive(name, v)?;
        }
        for (name, v) in [
            ("drift.saccade_speed", d.saccade_speed),
            ("drift.settle_speed", d.settle_speed),
            ("drift.drag_coefficient", d.drag_coefficient),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("{name} must be >= 0, got {v}")));
            }
        }

        let a = &self.adaptation;
        check_positive("adaptation.adaptation_period", a.adaptation_period)?;
        check_positive("adaptation.fade_time_constant", a.fade_time_constant)?;
        check_positive("adaptation.recover_time_constant", a.recover_time_constant)?;
        Ok(())
    }

    /// Same config with both drift speeds multiplied by `factor`.
    pub fn with_speed_multiplier(mut self, factor: f64) -> Self {
        self.drift.saccade_speed *= factor;
        self.drift.settle_speed *= factor;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_wrong_aspect() {
        let config = SimConfig {
            canvas_width: 640,
            canvas_height: 480,
            ..Default::default()
        };
        assert!(matches!(config.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_empty_range_and_bad_dt() {
        let config = SimConfig {
            radius_range: [3.0, 2.0],
            ..Default::default()
        };
        assert!(config.validate().is_err());
        let config = SimConfig {
            dt: 0.0,
            ..Default::default()
        };
        assert!(config.validate().is_err());
        let config = SimConfig {
            chain_length_range: [1, 4],
            ..Default::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let config =
            SimConfig::from_json(r#"{"floater_count": 3, "drift": {"saccade_speed": 10}}"#)
                .unwrap();
        assert_eq!(config.floater_count, 3);
        assert_eq!(config.drift.saccade_speed, 10.0);
        assert_eq!(config.drift.tau_settle, 3.0);
        assert_eq!(config.canvas_width, 480);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(SimConfig::from_json(r#"{"floaters": 3}"#).is_err());
    }
}
