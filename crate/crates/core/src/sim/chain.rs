use glam::DVec2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: DVec2,
    /// Position at the start of the last substep.
    pub previous_position: DVec2,
    pub velocity: DVec2,
    /// 0 pins the particle in place.
    pub inverse_mass: f64,
    /// Shadow radius in pixels.
    pub radius: f64,
    /// Multiplier on the field's drag coefficient.
    pub drag_scale: f64,
}

impl Particle {
    pub fn new(position: DVec2, radius: f64) -> Self {
        Self {
            position,
            previous_position: position,
            velocity: DVec2::ZERO,
            inverse_mass: 1.0,
            radius,
            drag_scale: 1.0,
        }
    }

    pub fn is_pinned(&self) -> bool {
        self.inverse_mass == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceConstraint {
    pub particle_a: usize,
    pub particle_b: usize,
    pub rest_length: f64,
    pub compliance: f64,
    pub lagrange_multiplier: f64,
}

/// Bending resistance at the middle particle of three consecutive joints.
///
/// The joint angle is held through the span between the outer particles:
/// for adjacent rest lengths `la`, `lb` and interior angle `theta`, the span
/// is `sqrt(la^2 + lb^2 - 2 la lb cos theta)`. A straight run has
/// `theta = pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendConstraint {
    pub particles: [usize; 3],
    pub rest_angle: f64,
    pub compliance: f64,
    pub lagrange_multiplier: f64,
    pub rest_span: f64,
}

impl BendConstraint {
    pub fn new(first: usize, rest_angle: f64, compliance: f64, la: f64, lb: f64) -> Self {
        let rest_angle = rest_angle.clamp(0.0, std::f64::consts::PI);
        let rest_span = (la * la + lb * lb - 2.0 * la * lb * rest_angle.cos())
            .max(0.0)
            .sqrt();
        Self {
            particles: [first, first + 1, first + 2],
            rest_angle,
            compliance,
            lagrange_multiplier: 0.0,
            rest_span,
        }
    }
}

/// Interior angle at `b` between the links to `a` and `c`, in `[0, pi]`.
pub fn joint_angle(a: DVec2, b: DVec2, c: DVec2) -> f64 {
    let (u, w) = (a - b, c - b);
    u.perp_dot(w).abs().atan2(u.dot(w))
}

/// Shape class used when describing a spawned population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainShape {
    Dot,
    Line,
    Web,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloaterChain {
    pub particles: Vec<Particle>,
    pub distance_constraints: Vec<DistanceConstraint>,
    pub bend_constraints: Vec<BendConstraint>,
    pub base_opacity: f64,
    pub adaptation_alpha: f64,
}

impl FloaterChain {
    /// Builds a chain whose current geometry is its rest shape.
    ///
    /// `compliances` has one entry per link and `bend_compliances` one per
    /// interior joint.
    pub fn from_points(
        points: &[DVec2],
        radius: f64,
        compliances: &[f64],
        bend_compliances: &[f64],
        base_opacity: f64,
    ) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::argument(
                "a floater chain needs at least 2 particles",
            ));
        }
        if compliances.len() != n - 1 || bend_compliances.len() != n - 2 {
            return Err(Error::argument(format!(
                "chain of {n} particles needs {} link and {} joint compliances",
                n - 1,
                n - 2
            )));
        }
        if radius.is_nan() || radius <= 0.0 {
            return Err(Error::argument("particle radius must be > 0"));
        }
        if !(base_opacity > 0.0 && base_opacity <= 1.0) {
            return Err(Error::argument("base_opacity must lie in (0, 1]"));
        }

        let particles: Vec<Particle> = points.iter().map(|&p| Particle::new(p, radius)).collect();
        let mut distance_constraints = Vec::with_capacity(n - 1);
        for (i, pair) in points.windows(2).enumerate() {
            let rest_length = pair[0].distance(pair[1]);
            if rest_length.is_nan() || rest_length <= 0.0 {
                return Err(Error::argument(format!("link {i} has zero rest length")));
            }
            distance_constraints.push(DistanceConstraint {
                particle_a: i,
                particle_b: i + 1,
                rest_length,
                compliance: compliances[i],
                lagrange_multiplier: 0.0,
            });
        }
        let bend_constraints = points
            .windows(3)
            .enumerate()
            .map(|(i, w)| {
                let mut bend = BendConstraint::new(
                    i,
                    joint_angle(w[0], w[1], w[2]),
                    bend_compliances[i],
                    distance_constraints[i].rest_length,
                    distance_constraints[i + 1].rest_length,
                );
                // The measured span, so a chain at rest is exactly satisfied.
                bend.rest_span = w[0].distance(w[2]);
                bend
            })
            .collect();

        Ok(Self {
            particles,
            distance_constraints,
            bend_constraints,
            base_opacity,
            adaptation_alpha: 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn centroid(&self) -> DVec2 {
        let sum: DVec2 = self.particles.iter().map(|p| p.position).sum();
        sum / self.particles.len() as f64
    }

    pub fn mean_radius(&self) -> f64 {
        self.particles.iter().map(|p| p.radius).sum::<f64>() / self.particles.len() as f64
    }

    /// Largest `| |pa - pb| - rest |` over the chain's links.
    pub fn max_distance_residual(&self) -> f64 {
        self.distance_constraints
            .iter()
            .map(|c| {
                let d = self.particles[c.particle_a]
                    .position
                    .distance(self.particles[c.particle_b].position);
                (d - c.rest_length).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.particles
            .iter()
            .filter(|p| !p.is_pinned())
            .map(|p| 0.5 * p.velocity.length_squared() / p.inverse_mass)
            .sum()
    }

    /// Two-particle chains are dots; chains whose every joint is at most
    /// `stiff_bend_limit` compliant read as lines; the rest are webs.
    pub fn shape(&self, stiff_bend_limit: f64) -> ChainShape {
        if self.particles.len() == 2 {
            ChainShape::Dot
        } else if self
            .bend_constraints
            .iter()
            .all(|b| b.compliance <= stiff_bend_limit)
        {
            ChainShape::Line
        } else {
            ChainShape::Web
        }
    }
}

/// Mean particle speed over the last substep of length `dt`.
pub fn mean_chain_speed(chain: &FloaterChain, dt: f64) -> f64 {
    if chain.particles.is_empty() {
        return 0.0;
    }
    let total: f64 = chain
        .particles
        .iter()
        .map(|p| p.position.distance(p.previous_position) / dt)
        .sum();
    total / chain.particles.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, spacing: f64) -> FloaterChain {
        let points: Vec<DVec2> = (0..n)
            .map(|i| DVec2::new(i as f64 * spacing, 0.0))
            .collect();
        FloaterChain::from_points(&points, 2.0, &vec![0.0; n - 1], &vec![0.0; n - 2], 0.5).unwrap()
    }

    #[test]
    fn construction_counts() {
        let chain = line(5, 3.0);
        assert_eq!(chain.distance_constraints.len(), 4);
        assert_eq!(chain.bend_constraints.len(), 3);
        assert!(chain.max_distance_residual() < 1e-12);
        for b in &chain.bend_constraints {
            assert!((b.rest_angle - std::f64::consts::PI).abs() < 1e-12);
            assert!((b.rest_span - 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_short_chains_and_bad_opacity() {
        assert!(FloaterChain::from_points(&[DVec2::ZERO], 1.0, &[], &[], 0.5).is_err());
        let pts = [DVec2::ZERO, DVec2::X];
        assert!(FloaterChain::from_points(&pts, 1.0, &[0.0], &[], 0.0).is_err());
        assert!(FloaterChain::from_points(&pts, 0.0, &[0.0], &[], 0.5).is_err());
    }

    #[test]
    fn right_angle_joint() {
        let a = joint_angle(DVec2::new(1.0, 0.0), DVec2::ZERO, DVec2::new(0.0, 1.0));
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let b = BendConstraint::new(0, std::f64::consts::FRAC_PI_2, 0.0, 3.0, 4.0);
        assert!((b.rest_span - 5.0).abs() < 1e-12);
    }

    #[test]
    fn speed_of_stationary_chain_is_zero() {
        assert_eq!(mean_chain_speed(&line(4, 1.0), 0.1), 0.0);
    }

    #[test]
    fn speed_of_uniform_translation() {
        let mut chain = line(4, 1.0);
        let (v, dt) = (7.0, 0.05);
        for p in &mut chain.particles {
            p.previous_position = p.position;
            p.position += DVec2::new(v * dt, 0.0);
        }
        assert!((mean_chain_speed(&chain, dt) - v).abs() < 1e-9);
    }

    #[test]
    fn speed_half_moving() {
        let mut chain = line(4, 1.0);
        let (v, dt) = (3.0, 0.1);
        for p in chain.particles.iter_mut().take(2) {
            p.position += DVec2::new(0.0, 2.0 * v * dt);
        }
        assert!((mean_chain_speed(&chain, dt) - v).abs() < 1e-9);
    }

    #[test]
    fn shape_taxonomy() {
        assert_eq!(line(2, 1.0).shape(1e-4), ChainShape::Dot);
        assert_eq!(line(5, 1.0).shape(1e-4), ChainShape::Line);
        let mut web = line(5, 1.0);
        web.bend_constraints[1].compliance = 1.0;
        assert_eq!(web.shape(1e-4), ChainShape::Web);
    }
}
