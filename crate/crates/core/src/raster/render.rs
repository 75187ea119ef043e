use glam::DVec2;
use image::{GrayImage, Luma};
use serde::{Deserialize, Serialize};

use super::occlusion::OcclusionMap;
use crate::error::Result;
use crate::sim::{FloaterChain, SimState};

/// 8-bit grayscale frame; 255 is white.
pub type FrameImage = GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderOptions {
    /// Luminance of a fully opaque shadow, in `[0, 1)`.
    pub shadow_level: f64,
    /// Width in pixels of the linear ramp outside each stroke.
    pub edge_falloff: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            shadow_level: 0.25,
            edge_falloff: 2.0,
        }
    }
}

/// `page * (1 - alpha) + shadow * alpha`, all on a `[0, 1]` luminance scale.
pub fn blend(page: f64, alpha: f64, shadow_level: f64) -> f64 {
    page * (1.0 - alpha) + shadow_level * alpha
}

fn to_u8(luminance: f64) -> u8 {
    (luminance.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn coverage(distance: f64, radius: f64, falloff: f64) -> f64 {
    if falloff <= 0.0 {
        return if distance <= radius { 1.0 } else { 0.0 };
    }
    ((radius + falloff - distance) / falloff).clamp(0.0, 1.0)
}

/// Stamps one chain as a stroked polyline with round joints. Coverage within
/// the chain is the max over its segments; across chains opacities combine
/// as `1 - prod(1 - opacity * coverage)`.
fn stamp_chain(map: &mut OcclusionMap, chain: &FloaterChain, falloff: f64) {
    let opacity = chain.base_opacity * chain.adaptation_alpha;
    if opacity <= 0.0 || chain.particles.is_empty() {
        return;
    }
    let (w, h) = map.dimensions();
    let reach = |r: f64| r + falloff.max(0.0);

    let mut lo = DVec2::splat(f64::INFINITY);
    let mut hi = DVec2::splat(f64::NEG_INFINITY);
    for p in &chain.particles {
        lo = lo.min(p.position - reach(p.radius));
        hi = hi.max(p.position + reach(p.radius));
    }
    let x0 = lo.x.floor().max(0.0) as i64;
    let y0 = lo.y.floor().max(0.0) as i64;
    let x1 = (hi.x.ceil() as i64).min(w as i64);
    let y1 = (hi.y.ceil() as i64).min(h as i64);
    if x0 >= x1 || y0 >= y1 {
        return;
    }
    let bw = (x1 - x0) as usize;
    let mut local = vec![0.0f64; bw * (y1 - y0) as usize];

    let segments: Vec<(usize, usize)> = if chain.particles.len() == 1 {
        vec![(0, 0)]
    } else {
        (0..chain.particles.len() - 1).map(|i| (i, i + 1)).collect()
    };
    for (ia, ib) in segments {
        let (pa, pb) = (&chain.particles[ia], &chain.particles[ib]);
        let (a, b) = (pa.position, pb.position);
        let seg_lo = a.min(b) - reach(pa.radius.max(pb.radius));
        let seg_hi = a.max(b) + reach(pa.radius.max(pb.radius));
        let sx0 = (seg_lo.x.floor() as i64).max(x0);
        let sy0 = (seg_lo.y.floor() as i64).max(y0);
        let sx1 = (seg_hi.x.ceil() as i64).min(x1);
        let sy1 = (seg_hi.y.ceil() as i64).min(y1);
        let ab = b - a;
        let len2 = ab.length_squared();
        for y in sy0..sy1 {
            for x in sx0..sx1 {
                let q = DVec2::new(x as f64 + 0.5, y as f64 + 0.5);
                let t = if len2 > 0.0 {
                    ((q - a).dot(ab) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let d = q.distance(a + ab * t);
                let r = pa.radius + (pb.radius - pa.radius) * t;
                let c = coverage(d, r, falloff);
                let cell = &mut local[(y - y0) as usize * bw + (x - x0) as usize];
                if c > *cell {
                    *cell = c;
                }
            }
        }
    }

    let values = map.values_mut();
    for (row, y) in (y0..y1).enumerate() {
        for (col, x) in (x0..x1).enumerate() {
            let c = local[row * bw + col];
            if c > 0.0 {
                let v = &mut values[y as usize * w as usize + x as usize];
                let o = opacity * c;
                *v = (*v + o - *v * o).clamp(0.0, 1.0);
            }
        }
    }
}

pub fn render_occlusion(
    floaters: &[FloaterChain],
    width: u32,
    height: u32,
    edge_falloff: f64,
) -> OcclusionMap {
    let mut map = OcclusionMap::zeros(width, height);
    for chain in floaters {
        stamp_chain(&mut map, chain, edge_falloff);
    }
    map
}

/// White canvas darkened toward `shadow_level` by the occlusion.
pub fn shade(occlusion: &OcclusionMap, shadow_level: f64) -> FrameImage {
    let (w, h) = occlusion.dimensions();
    let values = occlusion.values();
    FrameImage::from_fn(w, h, |x, y| {
        let a = values[y as usize * w as usize + x as usize];
        Luma([to_u8(blend(1.0, a, shadow_level))])
    })
}

pub fn render_frame(state: &SimState, options: &RenderOptions) -> (FrameImage, OcclusionMap) {
    let occlusion = render_occlusion(
        &state.floaters,
        state.config.canvas_width,
        state.config.canvas_height,
        options.edge_falloff,
    );
    (shade(&occlusion, options.shadow_level), occlusion)
}

/// Darkens `page` toward `shadow_level` wherever the overlay blocks light.
pub fn composite(
    page: &FrameImage,
    overlay: &OcclusionMap,
    shadow_level: f64,
) -> Result<FrameImage> {
    overlay.ensure_same_size(page.width(), page.height(), "overlay vs page")?;
    let w = page.width() as usize;
    let values = overlay.values();
    Ok(FrameImage::from_fn(page.width(), page.height(), |x, y| {
        let a = values[y as usize * w + x as usize];
        if a == 0.0 {
            return *page.get_pixel(x, y);
        }
        let p = page.get_pixel(x, y)[0] as f64 / 255.0;
        Luma([to_u8(blend(p, a, shadow_level))])
    }))
}
