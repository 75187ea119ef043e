//! Rendering, overlay accumulation and clarity analysis.

mod clarity;
mod export;
mod occlusion;
mod overlay;
mod render;
pub mod text;

pub use clarity::{clarity_series, ClarityGrid, ClaritySeries};
pub use export::{
    export_frames, frame_file_name, list_numbered, load_occlusion_png, occlusion_file_name,
    occlusion_from_frame, save_occlusion_png, FrameWriter,
};
pub use occlusion::OcclusionMap;
pub use overlay::{accumulate_overlay, OverlayAccumulator, OverlayMode};
pub use render::{
    blend, composite, render_frame, render_occlusion, shade, FrameImage, RenderOptions,
};
pub use text::{render_text_page, BBox, GroundTruth, Layout, TextSpec, TruthWord};
