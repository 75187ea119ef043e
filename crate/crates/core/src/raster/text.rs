//! Black-on-white text pages with ground-truth word boxes.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use fontdue::{Font, FontSettings, Metrics};
use image::Luma;
use serde::{Deserialize, Serialize};

use super::render::FrameImage;
use crate::error::{Error, Result};

const BUNDLED_PREFIX: &str = "bundled:";

/// Open fonts shipped with the crate, addressable as `bundled:<file name>`.
pub const BUNDLED_FONTS: &[(&str, &[u8])] = &[
    (
        "Arimo-Regular.ttf",
        include_bytes!("../../assets/fonts/Arimo-Regular.ttf"),
    ),
    (
        "Cabin-Regular.ttf",
        include_bytes!("../../assets/fonts/Cabin-Regular.ttf"),
    ),
    (
        "DejaVuSans.ttf",
        include_bytes!("../../assets/fonts/DejaVuSans.ttf"),
    ),
    (
        "Inter-Regular.ttf",
        include_bytes!("../../assets/fonts/Inter-Regular.ttf"),
    ),
    (
        "Jost-Regular.ttf",
        include_bytes!("../../assets/fonts/Jost-Regular.ttf"),
    ),
    (
        "NunitoSans-Regular.ttf",
        include_bytes!("../../assets/fonts/NunitoSans-Regular.ttf"),
    ),
];

pub const DEFAULT_FONT: &str = "bundled:Arimo-Regular.ttf";

/// Loads a font from a file path or a `bundled:` name.
pub fn load_font(source: &str) -> Result<Font> {
    let bytes: Vec<u8> = if let Some(name) = source.strip_prefix(BUNDLED_PREFIX) {
        BUNDLED_FONTS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, b)| b.to_vec())
            .ok_or_else(|| Error::Resource {
                path: PathBuf::from(source),
                reason: "no bundled font with that name".into(),
            })?
    } else {
        std::fs::read(Path::new(source)).map_err(|e| Error::Resource {
            path: PathBuf::from(source),
            reason: e.to_string(),
        })?
    };
    Font::from_bytes(bytes, FontSettings::default()).map_err(|e| Error::Resource {
        path: PathBuf::from(source),
        reason: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    SingleColumn,
    NarrowSingleColumn,
    TwoColumns,
    WideSpaced,
}

impl Layout {
    pub const ALL: [Layout; 4] = [
        Layout::SingleColumn,
        Layout::NarrowSingleColumn,
        Layout::TwoColumns,
        Layout::WideSpaced,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Layout::SingleColumn => "single_column",
            Layout::NarrowSingleColumn => "narrow_single_column",
            Layout::TwoColumns => "two_columns",
            Layout::WideSpaced => "wide_spaced",
        }
    }

    /// Column x-extents for a content area `[left, right)`, plus word and
    /// line spacing multipliers.
    pub fn geometry(&self, left: f64, right: f64) -> LayoutGeometry {
        let width = right - left;
        let centered = |fraction: f64| {
            let pad = (1.0 - fraction) * width / 2.0;
            vec![(left + pad, right - pad)]
        };
        match self {
            Layout::SingleColumn => LayoutGeometry::new(centered(0.70), 1.0, 1.0),
            Layout::NarrowSingleColumn => LayoutGeometry::new(centered(0.30), 1.0, 1.0),
            Layout::TwoColumns => LayoutGeometry::new(
                vec![(left, left + 0.45 * width), (left + 0.55 * width, right)],
                1.0,
                1.0,
            ),
            Layout::WideSpaced => LayoutGeometry::new(centered(0.70), 2.0, 1.5),
        }
    }
}

impl std::str::FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Layout::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::argument(format!("unknown layout '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutGeometry {
    pub columns: Vec<(f64, f64)>,
    pub word_spacing: f64,
    pub line_spacing: f64,
}

impl LayoutGeometry {
    fn new(columns: Vec<(f64, f64)>, word_spacing: f64, line_spacing: f64) -> Self {
        Self {
            columns,
            word_spacing,
            line_spacing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextSpec {
    pub text: String,
    /// File path, or `bundled:<name>` for a font shipped with the crate.
    pub font: String,
    /// Points; converted to pixels at `dpi`.
    pub font_size: f32,
    pub dpi: f32,
    pub layout: Layout,
    pub page_width: u32,
    pub page_height: u32,
    /// Pixels on every side.
    pub margin: u32,
    /// Multiple of the font's natural line height.
    pub line_spacing: f32,
}

impl Default for TextSpec {
    fn default() -> Self {
        Self {
            text: String::new(),
            font: DEFAULT_FONT.into(),
            font_size: 12.0,
            dpi: 96.0,
            layout: Layout::SingleColumn,
            page_width: 768,
            page_height: 1024,
            margin: 48,
            line_spacing: 1.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    /// Covered pixel range `(x0, y0, x1, y1)`, half-open.
    pub fn pixel_bounds(&self) -> (u32, u32, u32, u32) {
        (
            self.x0.floor().max(0.0) as u32,
            self.y0.floor().max(0.0) as u32,
            self.x1.ceil().max(0.0) as u32,
            self.y1.ceil().max(0.0) as u32,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthWord {
    pub text: String,
    /// Layout box: pen advance horizontally, line ascent to descent vertically.
    pub bbox: BBox,
    pub column: usize,
    pub line: usize,
}

/// Words actually placed on the page, in reading order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub words: Vec<TruthWord>,
    /// Words that did not fit on the page.
    pub truncated: usize,
}

impl GroundTruth {
    pub fn text(&self) -> String {
        self.words
            .iter()
            .map(|w| w.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

struct GlyphCache<'f> {
    font: &'f Font,
    px: f32,
    glyphs: HashMap<char, (Metrics, Vec<u8>)>,
}

impl<'f> GlyphCache<'f> {
    fn new(font: &'f Font, px: f32) -> Self {
        Self {
            font,
            px,
            glyphs: HashMap::new(),
        }
    }

    fn get(&mut self, c: char) -> &(Metrics, Vec<u8>) {
        let (font, px) = (self.font, self.px);
        self.glyphs
            .entry(c)
            .or_insert_with(|| font.rasterize(c, px))
    }

    fn advance(&mut self, word: &str) -> f64 {
        word.chars()
            .map(|c| self.get(c).0.advance_width as f64)
            .sum()
    }
}

pub fn render_text_page(spec: &TextSpec) -> Result<(FrameImage, GroundTruth)> {
    let font = load_font(&spec.font)?;
    render_text_page_with(spec, &font)
}

/// Like [`render_text_page`] with an already loaded font.
pub fn render_text_page_with(spec: &TextSpec, font: &Font) -> Result<(FrameImage, GroundTruth)> {
    let words: Vec<&str> = spec.text.split_whitespace().collect();
    if words.is_empty() {
        return Err(Error::argument("text page needs at least one word"));
    }
    if !(spec.font_size > 0.0 && spec.dpi > 0.0 && spec.line_spacing > 0.0) {
        return Err(Error::argument(
            "font_size, dpi and line_spacing must be > 0",
        ));
    }
    let (w, h) = (spec.page_width, spec.page_height);
    if 2 * spec.margin >= w || 2 * spec.margin >= h {
        return Err(Error::argument(format!(
            "margin {} leaves no room on a {w}x{h} page",
            spec.margin
        )));
    }

    let px = spec.font_size * spec.dpi / 72.0;
    let lm = font
        .horizontal_line_metrics(px)
        .ok_or_else(|| Error::argument("font has no horizontal line metrics"))?;
    let ascent = lm.ascent as f64;
    let text_height = (lm.ascent - lm.descent) as f64;
    let geometry = spec
        .layout
        .geometry(spec.margin as f64, (w - spec.margin) as f64);
    let line_advance = lm.new_line_size as f64 * spec.line_spacing as f64 * geometry.line_spacing;
    let top = spec.margin as f64;
    let bottom = (h - spec.margin) as f64;

    let mut glyphs = GlyphCache::new(font, px);
    let gap = glyphs.get(' ').0.advance_width as f64 * geometry.word_spacing;

    // Greedy line breaking at the column width.
    let col_width = geometry.columns[0].1 - geometry.columns[0].0;
    let mut lines: Vec<Vec<(usize, f64, f64)>> = Vec::new();
    let mut current: Vec<(usize, f64, f64)> = Vec::new();
    let mut pen = 0.0;
    for (i, word) in words.iter().enumerate() {
        let adv = glyphs.advance(word);
        let x = if current.is_empty() { 0.0 } else { pen + gap };
        if !current.is_empty() && x + adv > col_width {
            lines.push(std::mem::take(&mut current));
            current.push((i, 0.0, adv));
            pen = adv;
        } else {
            current.push((i, x, adv));
            pen = x + adv;
        }
        if adv > col_width {
            log::warn!("word '{word}' is wider than its column");
        }
    }
    lines.push(current);

    // Columns are balanced: each gets ceil(lines / columns), up to what fits.
    let per_column_capacity = if top + text_height > bottom {
        0
    } else {
        ((bottom - text_height - top) / line_advance).floor() as usize + 1
    };
    let n_cols = geometry.columns.len();
    let capacity = per_column_capacity * n_cols;
    let mut truth = GroundTruth::default();
    if lines.len() > capacity {
        truth.truncated = lines[capacity..].iter().map(Vec::len).sum();
        lines.truncate(capacity);
    }
    let per_column = lines.len().div_ceil(n_cols).max(1);
    for (line, entries) in lines.iter().enumerate() {
        let column = line / per_column;
        let x0 = geometry.columns[column].0;
        let y = top + (line % per_column) as f64 * line_advance;
        for &(i, x, adv) in entries {
            truth.words.push(TruthWord {
                text: words[i].to_string(),
                bbox: BBox {
                    x0: x0 + x,
                    y0: y,
                    x1: (x0 + x + adv).min(w as f64),
                    y1: y + text_height,
                },
                column,
                line,
            });
        }
    }
    if truth.truncated > 0 {
        log::warn!(
            "text page full after {} words; {} words truncated",
            truth.words.len(),
            truth.truncated
        );
    }

    let mut page = FrameImage::from_pixel(w, h, Luma([255]));
    for word in &truth.words {
        let baseline = word.bbox.y0 + ascent;
        let mut pen_x = word.bbox.x0;
        for c in word.text.chars() {
            let (m, bitmap) = glyphs.get(c);
            let gx = pen_x.round() as i64 + m.xmin as i64;
            let gy = (baseline.round() as i64) - (m.height as i64 + m.ymin as i64);
            for row in 0..m.height {
                for col in 0..m.width {
                    let cov = bitmap[row * m.width + col];
                    if cov == 0 {
                        continue;
                    }
                    let (x, y) = (gx + col as i64, gy + row as i64);
                    if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                        continue;
                    }
                    let p = page.get_pixel_mut(x as u32, y as u32);
                    p[0] = p[0].min(255 - cov);
                }
            }
            pen_x += m.advance_width as f64;
        }
    }
    Ok((page, truth))
}
