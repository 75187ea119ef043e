use std::f64::consts::TAU;

use glam::DVec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adaptation::{update_adaptation, AdaptationModel};
use super::chain::{mean_chain_speed, FloaterChain};
use super::config::{SimConfig, Span};
use super::field::DriftField;
use super::xpbd::project_distance_constraint;
use crate::error::{Error, Result};

/// Full simulation state. Identical config, seed and event sequence give a
/// bit-identical state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub time: f64,
    pub floaters: Vec<FloaterChain>,
    pub field: DriftField,
    pub config: SimConfig,
    last_substep: f64,
    rng: ChaCha8Rng,
}

fn sample(rng: &mut ChaCha8Rng, span: Span<f64>) -> f64 {
    let [lo, hi] = span;
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn spawn_chain(rng: &mut ChaCha8Rng, config: &SimConfig) -> Result<FloaterChain> {
    let [lmin, lmax] = config.chain_length_range;
    let len = rng.random_range(lmin..=lmax);
    let radius = sample(rng, config.radius_range);
    let base_opacity = sample(rng, config.base_opacity_range);
    let anchor = DVec2::new(
        rng.random_range(0.0..config.canvas_width as f64),
        rng.random_range(0.0..config.canvas_height as f64),
    );

    let mut heading = rng.random_range(0.0..TAU);
    let mut points = Vec::with_capacity(len);
    points.push(DVec2::ZERO);
    for i in 1..len {
        if i >= 2 && config.max_turn_angle > 0.0 {
            heading += rng.random_range(-config.max_turn_angle..=config.max_turn_angle);
        }
        let seg = sample(rng, config.segment_length_range);
        let last = points[i - 1];
        points.push(last + DVec2::from_angle(heading) * seg);
    }
    let centroid = points.iter().copied().sum::<DVec2>() / len as f64;
    for p in &mut points {
        *p += anchor - centroid;
    }

    let compliances: Vec<f64> = (0..len - 1)
        .map(|_| sample(rng, config.compliance_range))
        .collect();
    let bend: Vec<f64> = (0..len - 2)
        .map(|_| sample(rng, config.bend_compliance_range))
        .collect();
    let mut chain = FloaterChain::from_points(&points, radius, &compliances, &bend, base_opacity)?;
    for p in &mut chain.particles {
        p.drag_scale = sample(rng, config.drag_scale_range);
    }
    chain.adaptation_alpha = config.initial_alpha;
    Ok(chain)
}

pub fn init_simulation(config: &SimConfig) -> Result<SimState> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let floaters = (0..config.floater_count)
        .map(|_| spawn_chain(&mut rng, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimState {
        time: 0.0,
        floaters,
        field: DriftField::new(&config.drift),
        config: config.clone(),
        last_substep: config.dt,
        rng,
    })
}

impl SimState {
    /// Starts an eye movement. Without a direction, one is drawn uniformly
    /// on the circle from the state's generator.
    pub fn trigger_eye_movement(&mut self, direction: Option<DVec2>) -> Result<()> {
        let direction = match direction {
            Some(d) => d,
            None => DVec2::from_angle(self.rng.random_range(0.0..TAU)),
        };
        self.field.trigger(direction)
    }

    /// Advances by `dt`, split into equal substeps no longer than `config.dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::argument(format!("step dt must be > 0, got {dt}")));
        }
        let substeps = ((dt / self.config.dt) - 1e-9).ceil().max(1.0) as usize;
        let h = dt / substeps as f64;
        for _ in 0..substeps {
            self.substep(h);
        }
        Ok(())
    }

    fn substep(&mut self, h: f64) {
        let target = self.field.velocity();
        let drag = self.field.drag_coefficient;
        let iterations = self.config.solver_iterations;
        let adaptation = &self.config.adaptation;

        for chain in &mut self.floaters {
            for p in &mut chain.particles {
                p.previous_position = p.position;
                if p.is_pinned() {
                    p.velocity = DVec2::ZERO;
                    continue;
                }
                let relax = (-drag * p.drag_scale * h).exp();
                p.velocity = target + (p.velocity - target) * relax;
                p.position += p.velocity * h;
            }

            solve_chain(chain, h, iterations);

            for p in &mut chain.particles {
                p.velocity = (p.position - p.previous_position) / h;
            }

            if adaptation.enabled {
                let model = AdaptationModel::for_radius(chain.mean_radius(), adaptation);
                let speed = mean_chain_speed(chain, h);
                chain.adaptation_alpha =
                    update_adaptation(chain.adaptation_alpha, speed, &model, h);
            }
        }

        self.time += h;
        self.last_substep = h;
        self.field.advance(h);
    }

    pub fn max_distance_residual(&self) -> f64 {
        self.floaters
            .iter()
            .map(FloaterChain::max_distance_residual)
            .fold(0.0, f64::max)
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.floaters.iter().map(FloaterChain::kinetic_energy).sum()
    }

    /// Mean over chains of the mean particle speed in the last substep.
    pub fn mean_floater_speed(&self) -> f64 {
        if self.floaters.is_empty() {
            return 0.0;
        }
        let h = self.last_substep();
        self.floaters
            .iter()
            .map(|c| mean_chain_speed(c, h))
            .sum::<f64>()
            / self.floaters.len() as f64
    }

    /// Mean of all chain centroids.
    pub fn mean_centroid(&self) -> DVec2 {
        if self.floaters.is_empty() {
            return DVec2::ZERO;
        }
        self.floaters
            .iter()
            .map(FloaterChain::centroid)
            .sum::<DVec2>()
            / self.floaters.len() as f64
    }

    /// Length of the most recent substep.
    pub fn last_substep(&self) -> f64 {
        self.last_substep
    }
}

fn solve_chain(chain: &mut FloaterChain, h: f64, iterations: u32) {
    for c in &mut chain.distance_constraints {
        c.lagrange_multiplier = 0.0;
    }
    for b in &mut chain.bend_constraints {
        b.lagrange_multiplier = 0.0;
    }
    let particles = &mut chain.particles;
    for _ in 0..iterations {
        for bend in &mut chain.bend_constraints {
            let [a, _, c] = bend.particles;
            let proj = project_distance_constraint(
                particles[a].position,
                particles[c].position,
                particles[a].inverse_mass,
                particles[c].inverse_mass,
                bend.rest_span,
                bend.compliance,
                h,
                bend.lagrange_multiplier,
            );
            particles[a].position += proj.delta_a;
            particles[c].position += proj.delta_b;
            bend.lagrange_multiplier = proj.lambda;
        }
        for c in &mut chain.distance_constraints {
            let (a, b) = (c.particle_a, c.particle_b);
            let proj = project_distance_constraint(
                particles[a].position,
                particles[b].position,
                particles[a].inverse_mass,
                particles[b].inverse_mass,
                c.rest_length,
                c.compliance,
                h,
                c.lagrange_multiplier,
            );
            particles[a].position += proj.delta_a;
            particles[b].position += proj.delta_b;
            c.lagrange_multiplier = proj.lambda;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn still_config() -> SimConfig {
        SimConfig {
            floater_count: 6,
            ..Default::default()
        }
    }

    #[test]
    fn empty_population() {
        let state = init_simulation(&SimConfig {
            floater_count: 0,
            ..Default::default()
        })
        .unwrap();
        assert!(state.floaters.is_empty());
        assert_eq!(state.time, 0.0);
    }

    #[test]
    fn init_is_deterministic() {
        let config = still_config();
        assert_eq!(
            init_simulation(&config).unwrap(),
            init_simulation(&config).unwrap()
        );
        let other = SimConfig {
            seed: 7,
            ..config.clone()
        };
        assert_ne!(
            init_simulation(&config).unwrap(),
            init_simulation(&other).unwrap()
        );
    }

    #[test]
    fn chain_lengths_respect_bounds() {
        let config = SimConfig {
            floater_count: 100,
            chain_length_range: [4, 9],
            ..Default::default()
        };
        let state = init_simulation(&config).unwrap();
        let lengths: Vec<usize> = state.floaters.iter().map(|c| c.len()).collect();
        assert!(lengths.iter().all(|l| (4..=9).contains(l)));
        // 100 draws over 6 values should hit both ends.
        assert!(lengths.contains(&4) && lengths.contains(&9));
    }

    #[test]
    fn sampled_parameters_lie_in_ranges() {
        let config = SimConfig {
            floater_count: 50,
            ..Default::default()
        };
        let state = init_simulation(&config).unwrap();
        for chain in &state.floaters {
            assert!((0.25..=0.6).contains(&chain.base_opacity));
            assert_eq!(chain.adaptation_alpha, config.initial_alpha);
            for c in &chain.distance_constraints {
                assert!((0.0..=1e-5).contains(&c.compliance));
                assert!((6.0..=14.0).contains(&c.rest_length));
            }
            for p in &chain.particles {
                assert!((1.5..=2.5).contains(&p.radius));
                assert!((0.5..=1.5).contains(&p.drag_scale));
            }
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let bad = SimConfig {
            canvas_width: 500,
            ..Default::default()
        };
        assert!(matches!(init_simulation(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn trigger_with_and_without_direction() {
        let mut state = init_simulation(&still_config()).unwrap();
        state.trigger_eye_movement(Some(DVec2::X)).unwrap();
        assert_eq!(state.field.saccade_direction, DVec2::X);
        assert_eq!(state.field.phase, super::super::field::Phase::Saccade);
        state.trigger_eye_movement(None).unwrap();
        assert!((state.field.saccade_direction.length() - 1.0).abs() < 1e-9);
        assert!(state.trigger_eye_movement(Some(DVec2::ZERO)).is_err());
    }

    #[test]
    fn idle_field_leaves_chains_in_place() {
        let mut state = init_simulation(&still_config()).unwrap();
        let before = state.floaters.clone();
        for _ in 0..200 {
            state.step(1.0 / 30.0).unwrap();
        }
        for (a, b) in before.iter().zip(&state.floaters) {
            for (p, q) in a.particles.iter().zip(&b.particles) {
                assert!(p.position.distance(q.position) < 1e-12);
            }
        }
        assert_eq!(state.kinetic_energy(), 0.0);
    }

    #[test]
    fn step_advances_time_and_rejects_bad_dt() {
        let mut state = init_simulation(&still_config()).unwrap();
        state.step(0.25).unwrap();
        assert!((state.time - 0.25).abs() < 1e-12);
        assert!((state.last_substep() - 0.25 / 8.0).abs() < 1e-15);
        assert!(state.step(0.0).is_err());
        assert!(state.step(-1.0).is_err());
    }

    #[test]
    fn motion_keeps_links_near_rest_length() {
        let config = SimConfig {
            compliance_range: [0.0, 0.0],
            ..still_config()
        };
        let mut state = init_simulation(&config).unwrap();
        state
            .trigger_eye_movement(Some(DVec2::new(1.0, 0.3)))
            .unwrap();
        for _ in 0..120 {
            state.step(1.0 / 30.0).unwrap();
        }
        assert!(state.max_distance_residual() < 0.05);
    }
}
