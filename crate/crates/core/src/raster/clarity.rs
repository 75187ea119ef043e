use std::io::Write;

use serde::{Deserialize, Serialize};

use super::occlusion::OcclusionMap;
use crate::error::{Error, Result};

/// Partition of a canvas into `cols x rows` boxes. Leftover pixels go to
/// the last column and the last row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarityGrid {
    pub cols: u32,
    pub rows: u32,
    pub width: u32,
    pub height: u32,
}

impl ClarityGrid {
    pub fn new(cols: u32, rows: u32, width: u32, height: u32) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(Error::argument(format!(
                "clarity grid {cols}x{rows} has no boxes"
            )));
        }
        if cols > width || rows > height {
            return Err(Error::argument(format!(
                "clarity grid {cols}x{rows} is finer than the {width}x{height} canvas"
            )));
        }
        Ok(Self {
            cols,
            rows,
            width,
            height,
        })
    }

    /// Pixel bounds `(x0, y0, x1, y1)` of box `(col, row)`, half-open.
    pub fn bounds(&self, col: u32, row: u32) -> (u32, u32, u32, u32) {
        let bw = self.width / self.cols;
        let bh = self.height / self.rows;
        let x1 = if col + 1 == self.cols {
            self.width
        } else {
            (col + 1) * bw
        };
        let y1 = if row + 1 == self.rows {
            self.height
        } else {
            (row + 1) * bh
        };
        (col * bw, row * bh, x1, y1)
    }
}

/// Per-frame, per-box clarity `1 - mean occlusion`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaritySeries {
    pub grid: ClarityGrid,
    /// One row-major `rows x cols` block per frame.
    frames: Vec<Vec<f64>>,
}

impl ClaritySeries {
    pub fn new(grid: ClarityGrid) -> Self {
        Self {
            grid,
            frames: Vec::new(),
        }
    }

    pub fn push(&mut self, map: &OcclusionMap) -> Result<()> {
        map.ensure_same_size(self.grid.width, self.grid.height, "clarity frame")?;
        let mut boxes = Vec::with_capacity((self.grid.cols * self.grid.rows) as usize);
        for row in 0..self.grid.rows {
            for col in 0..self.grid.cols {
                let (x0, y0, x1, y1) = self.grid.bounds(col, row);
                boxes.push((1.0 - map.box_mean(x0, y0, x1, y1)).clamp(0.0, 1.0));
            }
        }
        self.frames.push(boxes);
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn get(&self, frame: usize, col: u32, row: u32) -> f64 {
        self.frames[frame][(row * self.grid.cols + col) as usize]
    }

    /// Average clarity over all boxes of one frame.
    pub fn frame_mean(&self, frame: usize) -> f64 {
        let boxes = &self.frames[frame];
        boxes.iter().sum::<f64>() / boxes.len() as f64
    }

    /// CSV with header `frame,box_col,box_row,clarity`, rows ordered by
    /// frame, then row, then column.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "frame,box_col,box_row,clarity")?;
        for (f, boxes) in self.frames.iter().enumerate() {
            for row in 0..self.grid.rows {
                for col in 0..self.grid.cols {
                    let v = boxes[(row * self.grid.cols + col) as usize];
                    writeln!(out, "{f},{col},{row},{v}")?;
                }
            }
        }
        Ok(())
    }
}

pub fn clarity_series(maps: &[OcclusionMap], cols: u32, rows: u32) -> Result<ClaritySeries> {
    let first = maps
        .first()
        .ok_or_else(|| Error::argument("clarity series needs at least one map"))?;
    let mut series =
        ClaritySeries::new(ClarityGrid::new(cols, rows, first.width(), first.height())?);
    for map in maps {
        series.push(map)?;
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clear_maps_give_full_clarity() {
        let s = clarity_series(&vec![OcclusionMap::zeros(48, 64); 3], 8, 6).unwrap();
        for f in 0..3 {
            for r in 0..6 {
                for c in 0..8 {
                    assert_eq!(s.get(f, c, r), 1.0);
                }
            }
        }
    }

    #[test]
    fn constant_map_is_exact_complement() {
        for v in [0.5, 0.1, 0.3, 0.7] {
            let s = clarity_series(&[OcclusionMap::constant(50, 67, v)], 8, 6).unwrap();
            for r in 0..6 {
                for c in 0..8 {
                    assert_eq!(s.get(0, c, r), 1.0 - v);
                }
            }
        }
    }

    #[test]
    fn remainder_goes_to_last_box() {
        let g = ClarityGrid::new(8, 6, 50, 67).unwrap();
        assert_eq!(g.bounds(0, 0), (0, 0, 6, 11));
        assert_eq!(g.bounds(7, 5), (42, 55, 50, 67));
    }

    #[test]
    fn zero_grid_is_rejected() {
        let maps = [OcclusionMap::zeros(10, 10)];
        assert!(clarity_series(&maps, 0, 4).is_err());
        assert!(clarity_series(&maps, 4, 0).is_err());
        assert!(clarity_series(&[], 2, 2).is_err());
    }

    #[test]
    fn csv_shape() {
        let s = clarity_series(&vec![OcclusionMap::zeros(16, 12); 2], 4, 3).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "frame,box_col,box_row,clarity");
        assert_eq!(lines.len(), 1 + 2 * 12);
        assert_eq!(lines[1], "0,0,0,1");
    }
}
