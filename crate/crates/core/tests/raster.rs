use floatlab::raster::{
    accumulate_overlay, clarity_series, composite, render_occlusion, render_text_page, shade,
    FrameImage, Layout, OcclusionMap, OverlayMode, TextSpec,
};
use floatlab::sim::{init_simulation, SimConfig};
use glam::DVec2;
use image::Luma;
use proptest::prelude::*;

fn scene(seed: u64, steps: usize) -> (SimConfig, Vec<floatlab::sim::FloaterChain>) {
    let config = SimConfig {
        seed,
        initial_alpha: 1.0,
        ..Default::default()
    };
    let mut state = init_simulation(&config).unwrap();
    state
        .trigger_eye_movement(Some(DVec2::new(1.0, 0.5)))
        .unwrap();
    for _ in 0..steps {
        state.step(1.0 / 30.0).unwrap();
    }
    (config, state.floaters)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn occlusion_stays_in_unit_interval(seed in any::<u64>(), steps in 0usize..60, falloff in 0.0..6.0f64) {
        let (config, floaters) = scene(seed, steps);
        let map = render_occlusion(&floaters, config.canvas_width, config.canvas_height, falloff);
        prop_assert!(map.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn adding_a_floater_never_lowers_occlusion(seed in any::<u64>(), steps in 0usize..30) {
        let (config, floaters) = scene(seed, steps);
        let (w, h) = (config.canvas_width, config.canvas_height);
        let fewer = render_occlusion(&floaters[1..], w, h, 2.0);
        let all = render_occlusion(&floaters, w, h, 2.0);
        prop_assert!(fewer.values().iter().zip(all.values()).all(|(a, b)| b >= a));
    }

    #[test]
    fn clarity_of_constant_map_is_its_complement(c in 0.0..=1.0f64, cols in 1u32..10, rows in 1u32..10) {
        let maps = vec![OcclusionMap::constant(97, 61, c); 2];
        let series = clarity_series(&maps, cols, rows).unwrap();
        for f in 0..2 {
            for r in 0..rows {
                for col in 0..cols {
                    prop_assert_eq!(series.get(f, col, r), 1.0 - c);
                }
            }
        }
    }
}

#[test]
fn composite_and_scaled_mean_agree_at_low_opacity() {
    let maps: Vec<OcclusionMap> = (0..5)
        .map(|i| OcclusionMap::constant(8, 8, 0.002 * (i + 1) as f64 / 5.0))
        .collect();
    let comp = accumulate_overlay(&maps, 1.0, OverlayMode::Composite).unwrap();
    let mean = accumulate_overlay(&maps, 1.0, OverlayMode::Mean).unwrap();
    let n_mean = mean.get(0, 0) * maps.len() as f64;
    assert!((comp.get(0, 0) - n_mean).abs() <= 0.01 * n_mean);
}

#[test]
fn shaded_page_darkens_only_where_occluded() {
    let (page, _) = render_text_page(&TextSpec {
        text: "floaters drift across the page".into(),
        page_width: 300,
        page_height: 400,
        margin: 20,
        ..Default::default()
    })
    .unwrap();
    let mut values = vec![0.0; 300 * 400];
    for v in &mut values[..300 * 10] {
        *v = 1.0;
    }
    let overlay = OcclusionMap::from_values(300, 400, values).unwrap();
    let out = composite(&page, &overlay, 0.25).unwrap();
    for (x, y, p) in out.enumerate_pixels() {
        if y < 10 {
            assert_eq!(p[0], (255.0f64 * 0.25).round() as u8);
        } else {
            assert_eq!(p[0], page.get_pixel(x, y)[0]);
        }
    }
    assert!(composite(&FrameImage::from_pixel(3, 3, Luma([255])), &overlay, 0.25).is_err());
    assert_eq!(
        shade(&OcclusionMap::zeros(2, 2), 0.25).get_pixel(0, 0)[0],
        255
    );
}

#[test]
fn every_layout_keeps_boxes_on_the_page() {
    let text = floatlab::pipeline::generate_random_text(9, 400).unwrap();
    for layout in Layout::ALL {
        let (page, truth) = render_text_page(&TextSpec {
            text: text.clone(),
            layout,
            ..Default::default()
        })
        .unwrap();
        assert!(!truth.words.is_empty());
        for w in &truth.words {
            assert!(w.bbox.x0 >= 0.0 && w.bbox.y0 >= 0.0);
            assert!(w.bbox.x1 <= page.width() as f64 && w.bbox.y1 <= page.height() as f64);
        }
        for pair in truth.words.windows(2) {
            if pair[0].line == pair[1].line {
                assert!(pair[0].bbox.x1 <= pair[1].bbox.x0, "{layout:?}");
            }
        }
    }
}
