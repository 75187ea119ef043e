use std::fs;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Luma};

use super::occlusion::OcclusionMap;
use super::render::FrameImage;
use crate::error::{Error, Result};

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

pub fn occlusion_file_name(index: usize) -> String {
    format!("occlusion_{index:06}.png")
}

/// Writes numbered frames (and optionally 16-bit occlusion maps) into a
/// directory, one call per frame.
#[derive(Debug)]
pub struct FrameWriter {
    dir: PathBuf,
    next: usize,
}

impl FrameWriter {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, next: 0 })
    }

    pub fn write(
        &mut self,
        frame: &FrameImage,
        occlusion: Option<&OcclusionMap>,
    ) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(2);
        let path = self.dir.join(frame_file_name(self.next));
        frame.save(&path)?;
        written.push(path);
        if let Some(map) = occlusion {
            let path = self.dir.join(occlusion_file_name(self.next));
            save_occlusion_png(map, &path)?;
            written.push(path);
        }
        self.next += 1;
        Ok(written)
    }

    pub fn frames_written(&self) -> usize {
        self.next
    }
}

pub fn export_frames(
    frames: &[FrameImage],
    occlusion: Option<&[OcclusionMap]>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if let Some(maps) = occlusion {
        if maps.len() != frames.len() {
            return Err(Error::argument(format!(
                "{} frames but {} occlusion maps",
                frames.len(),
                maps.len()
            )));
        }
    }
    if frames.is_empty() {
        return Ok(Vec::new());
    }
    let mut writer = FrameWriter::create(dir)?;
    let mut files = Vec::new();
    for (i, frame) in frames.iter().enumerate() {
        files.extend(writer.write(frame, occlusion.map(|m| &m[i]))?);
    }
    Ok(files)
}

/// 16-bit grayscale PNG, value `round(occlusion * 65535)`.
pub fn save_occlusion_png(map: &OcclusionMap, path: &Path) -> Result<()> {
    let (w, h) = map.dimensions();
    let raw: Vec<u16> = map
        .values()
        .iter()
        .map(|v| (v * 65535.0).round() as u16)
        .collect();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(w, h, raw).expect("buffer sized from map dimensions");
    img.save(path)?;
    Ok(())
}

pub fn load_occlusion_png(path: &Path) -> Result<OcclusionMap> {
    let img = image::open(path)?.into_luma16();
    let (w, h) = img.dimensions();
    let values = img
        .into_raw()
        .into_iter()
        .map(|v| v as f64 / 65535.0)
        .collect();
    OcclusionMap::from_values(w, h, values)
}

/// Recovers occlusion from an 8-bit shaded frame by inverting the blend
/// toward `shadow_level`. Quantized to the frame's 8 bits.
pub fn occlusion_from_frame(frame: &FrameImage, shadow_level: f64) -> Result<OcclusionMap> {
    let values = frame
        .pixels()
        .map(|p| ((1.0 - p[0] as f64 / 255.0) / (1.0 - shadow_level)).clamp(0.0, 1.0))
        .collect();
    OcclusionMap::from_values(frame.width(), frame.height(), values)
}

/// Sorted `(index, path)` pairs for files named `<prefix>NNNNNN.png`.
pub fn list_numbered(dir: &Path, prefix: &str) -> Result<Vec<(usize, PathBuf)>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(digits) = name
            .strip_prefix(prefix)
            .and_then(|r| r.strip_suffix(".png"))
        else {
            continue;
        };
        if let Ok(i) = digits.parse::<usize>() {
            found.push((i, path));
        }
    }
    found.sort();
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_count() {
        let dir = tempfile::tempdir().unwrap();
        let frames = vec![FrameImage::from_pixel(4, 3, Luma([255])); 3];
        let files = export_frames(&frames, None, dir.path()).unwrap();
        let names: Vec<String> = files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            ["frame_000000.png", "frame_000001.png", "frame_000002.png"]
        );
    }

    #[test]
    fn no_frames_no_files() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out");
        assert!(export_frames(&[], None, &target).unwrap().is_empty());
        assert!(!target.exists());
    }

    #[test]
    fn re_export_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let frame = FrameImage::from_fn(9, 12, |x, y| Luma([(x * 20 + y) as u8]));
        let map =
            OcclusionMap::from_values(9, 12, (0..108).map(|i| i as f64 / 107.0).collect()).unwrap();
        let a = export_frames(
            std::slice::from_ref(&frame),
            Some(std::slice::from_ref(&map)),
            &dir.path().join("a"),
        )
        .unwrap();
        let b = export_frames(&[frame], Some(&[map]), &dir.path().join("b")).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
    }

    #[test]
    fn occlusion_png_round_trip_is_within_quantum() {
        let dir = tempfile::tempdir().unwrap();
        let map =
            OcclusionMap::from_values(5, 4, (0..20).map(|i| (i as f64 * 0.0371) % 1.0).collect())
                .unwrap();
        let path = dir.path().join("o.png");
        save_occlusion_png(&map, &path).unwrap();
        let back = load_occlusion_png(&path).unwrap();
        for (a, b) in map.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-12);
        }
    }

    #[test]
    fn listing_is_sorted_by_index() {
        let dir = tempfile::tempdir().unwrap();
        for i in [2usize, 0, 1] {
            FrameImage::new(1, 1)
                .save(dir.path().join(frame_file_name(i)))
                .unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let listed: Vec<usize> = list_numbered(dir.path(), "frame_")
            .unwrap()
            .into_iter()
            .map(|(i, _)| i)
            .collect();
        assert_eq!(listed, [0, 1, 2]);
    }
}
