//! Compliant distance projection.
//!
//! One Gauss-Seidel XPBD update for `C = |pa - pb| - rest`:
//!
//! ```text
//! alpha~  = compliance / dt^2
//! dlambda = (-C - alpha~ * lambda) / (wa + wb + alpha~)
//! pa     += wa * dlambda * n
//! pb     -= wb * dlambda * n        n = (pa - pb) / |pa - pb|
//! ```

use glam::DVec2;

/// Below this separation the constraint gradient is undefined.
pub const DEGENERATE_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub delta_a: DVec2,
    pub delta_b: DVec2,
    pub lambda: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn project_distance_constraint(
    pa: DVec2,
    pb: DVec2,
    wa: f64,
    wb: f64,
    rest: f64,
    compliance: f64,
    dt: f64,
    lambda: f64,
) -> Projection {
    let alpha_tilde = compliance / (dt * dt);
    let denom = wa + wb + alpha_tilde;
    if denom <= 0.0 {
        return Projection {
            delta_a: DVec2::ZERO,
            delta_b: DVec2::ZERO,
            lambda,
        };
    }

    let diff = pa - pb;
    let dist = diff.length();
    let normal = if dist > DEGENERATE_SEPARATION {
        diff / dist
    } else {
        log::warn!("coincident constraint particles at {pa:?}; projecting along +x");
        DVec2::X
    };

    let c = dist - rest;
    let dlambda = (-c - alpha_tilde * lambda) / denom;
    Projection {
        delta_a: normal * (wa * dlambda),
        delta_b: normal * (-wb * dlambda),
        lambda: lambda + dlambda,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64) -> DVec2 {
        DVec2::new(x, y)
    }

    #[test]
    fn symmetric_equal_mass() {
        let p = project_distance_constraint(
            v(0.0, 0.0),
            v(2.0, 0.0),
            1.0,
            1.0,
            1.0,
            0.0,
            1.0 / 30.0,
            0.0,
        );
        assert!((v(0.0, 0.0) + p.delta_a - v(0.5, 0.0)).length() < 1e-12);
        assert!((v(2.0, 0.0) + p.delta_b - v(1.5, 0.0)).length() < 1e-12);
    }

    #[test]
    fn pinned_endpoint_does_not_move() {
        let p = project_distance_constraint(
            v(0.0, 0.0),
            v(2.0, 0.0),
            0.0,
            1.0,
            1.0,
            0.0,
            1.0 / 30.0,
            0.0,
        );
        assert_eq!(p.delta_a, DVec2::ZERO);
        assert!((v(2.0, 0.0) + p.delta_b - v(1.0, 0.0)).length() < 1e-12);
    }

    #[test]
    fn unit_scaled_compliance() {
        // alpha~ = 1: dlambda = -1 / 3, each end moves 1/3 toward the other.
        let dt = 0.1;
        let p =
            project_distance_constraint(v(0.0, 0.0), v(2.0, 0.0), 1.0, 1.0, 1.0, dt * dt, dt, 0.0);
        assert!((p.lambda + 1.0 / 3.0).abs() < 1e-12);
        let sep = (v(2.0, 0.0) + p.delta_b - (v(0.0, 0.0) + p.delta_a)).length();
        assert!((sep - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_points_use_x_axis() {
        let p = project_distance_constraint(v(1.0, 1.0), v(1.0, 1.0), 1.0, 1.0, 2.0, 0.0, 0.1, 0.0);
        assert!(p.delta_a.is_finite() && p.delta_b.is_finite());
        assert!((p.delta_a - v(1.0, 0.0)).length() < 1e-12);
        assert!((p.delta_b - v(-1.0, 0.0)).length() < 1e-12);
    }

    #[test]
    fn fully_pinned_is_a_no_op() {
        let p = project_distance_constraint(v(0.0, 0.0), v(3.0, 0.0), 0.0, 0.0, 1.0, 0.0, 0.1, 0.5);
        assert_eq!(p.delta_a, DVec2::ZERO);
        assert_eq!(p.lambda, 0.5);
    }

    proptest! {
        #[test]
        fn projection_reduces_violation(
            ax in -50.0..50.0f64, ay in -50.0..50.0f64,
            bx in -50.0..50.0f64, by in -50.0..50.0f64,
            wa in 0.0..2.0f64, wb in 0.01..2.0f64,
            rest in 0.1..40.0f64, compliance in 0.0..1e-2f64,
        ) {
            let (pa, pb) = (v(ax, ay), v(bx, by));
            prop_assume!((pa - pb).length() > 1e-3);
            let before = ((pa - pb).length() - rest).abs();
            let p = project_distance_constraint(pa, pb, wa, wb, rest, compliance, 1.0 / 30.0, 0.0);
            let after = ((pa + p.delta_a - pb - p.delta_b).length() - rest).abs();
            prop_assert!(after <= before + 1e-9);
            if compliance == 0.0 {
                prop_assert!(after < 1e-9 * (1.0 + rest));
            }
        }
    }
}
