use serde::{Deserialize, Serialize};

use super::occlusion::OcclusionMap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlayMode {
    /// Pixelwise average of `scale * value`.
    Mean,
    /// Pixelwise `1 - prod(1 - scale * value)`: frames stacked as translucent layers.
    Composite,
}

impl std::str::FromStr for OverlayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(OverlayMode::Mean),
            "composite" => Ok(OverlayMode::Composite),
            other => Err(Error::argument(format!(
                "unknown overlay mode '{other}' (mean|composite)"
            ))),
        }
    }
}

/// Streams frames into a time-averaged overlay without keeping them.
#[derive(Debug, Clone)]
pub struct OverlayAccumulator {
    mode: OverlayMode,
    scale: f64,
    frames: usize,
    // Mean: running sum. Composite: running transmittance.
    buffer: Option<OcclusionMap>,
}

impl OverlayAccumulator {
    pub fn new(per_frame_scale: f64, mode: OverlayMode) -> Result<Self> {
        if !(per_frame_scale > 0.0 && per_frame_scale <= 1.0) {
            return Err(Error::argument(format!(
                "per-frame scale {per_frame_scale} outside (0, 1]"
            )));
        }
        Ok(Self {
            mode,
            scale: per_frame_scale,
            frames: 0,
            buffer: None,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn add(&mut self, map: &OcclusionMap) -> Result<()> {
        let scale = self.scale;
        let mode = self.mode;
        let buffer = self.buffer.get_or_insert_with(|| {
            let init = match mode {
                OverlayMode::Mean => 0.0,
                OverlayMode::Composite => 1.0,
            };
            OcclusionMap::constant(map.width(), map.height(), init)
        });
        buffer.ensure_same_size(map.width(), map.height(), "overlay frame")?;
        for (acc, v) in buffer.values_mut().iter_mut().zip(map.values()) {
            match mode {
                OverlayMode::Mean => *acc += scale * v,
                OverlayMode::Composite => *acc *= 1.0 - scale * v,
            }
        }
        self.frames += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<OcclusionMap> {
        let frames = self.frames;
        let mode = self.mode;
        let mut map = self
            .buffer
            .ok_or_else(|| Error::argument("overlay needs at least one frame"))?;
        for v in map.values_mut() {
            *v = match mode {
                OverlayMode::Mean => *v / frames as f64,
                OverlayMode::Composite => 1.0 - *v,
            }
            .clamp(0.0, 1.0);
        }
        Ok(map)
    }
}

pub fn accumulate_overlay(
    maps: &[OcclusionMap],
    per_frame_scale: f64,
    mode: OverlayMode,
) -> Result<OcclusionMap> {
    let mut acc = OverlayAccumulator::new(per_frame_scale, mode)?;
    for map in maps {
        acc.add(map)?;
    }
    acc.finish()
}
