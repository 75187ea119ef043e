use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-pixel fraction of light blocked, each value in `[0, 1]`. Row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcclusionMap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl OcclusionMap {
    pub fn zeros(width: u32, height: u32) -> Self {
        Self::constant(width, height, 0.0)
    }

    pub fn constant(width: u32, height: u32, value: f64) -> Self {
        Self {
            width,
            height,
            values: vec![value.clamp(0.0, 1.0); width as usize * height as usize],
        }
    }

    pub fn from_values(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(Error::argument(format!(
                "{} values do not fill a {width}x{height} map",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::argument(format!(
                "occlusion value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Every value multiplied by `k`, clamped back into `[0, 1]`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            values: self
                .values
                .iter()
                .map(|v| (v * k).clamp(0.0, 1.0))
                .collect(),
        }
    }

    /// Mean over the half-open pixel rectangle `[x0, x1) x [y0, y1)`, clipped
    /// to the map. The box's first pixel is the pivot, so a constant region
    /// returns that constant exactly.
    pub fn box_mean(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> f64 {
        let (x1, y1) = (x1.min(self.width), y1.min(self.height));
        if x0 >= x1 || y0 >= y1 {
            return 0.0;
        }
        let w = self.width as usize;
        let pivot = self.values[y0 as usize * w + x0 as usize];
        let mut offset = 0.0;
        for y in y0..y1 {
            let row = &self.values[y as usize * w + x0 as usize..y as usize * w + x1 as usize];
            offset += row.iter().map(|v| v - pivot).sum::<f64>();
        }
        let n = ((x1 - x0) as usize * (y1 - y0) as usize) as f64;
        pivot + offset / n
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn ensure_same_size(&self, other_w: u32, other_h: u32, what: &str) -> Result<()> {
        if (self.width, self.height) != (other_w, other_h) {
            return Err(Error::argument(format!(
                "{what}: {}x{} does not match {other_w}x{other_h}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}
