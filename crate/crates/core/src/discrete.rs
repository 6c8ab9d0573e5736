//! Discrete-time gradient descent and Lookahead on the game classes.
//!
//! Both players take simultaneous steps with a shared step size; Lookahead
//! runs `k` inner steps from the current outer iterate and interpolates back
//! with weight `alpha`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::games::{GameSpec, JointPoint};

/// Coordinate magnitude at which a run is truncated and flagged divergent.
pub const OVERFLOW_GUARD: f64 = 1e300;

/// Lookahead hyperparameters: inner step count `k`, averaging weight `alpha`,
/// base step size `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookaheadConfig {
    pub k: usize,
    pub alpha: f64,
    pub gamma: f64,
}

impl LookaheadConfig {
    pub fn new(k: usize, alpha: f64, gamma: f64) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self { k, alpha, gamma })
    }
}

/// Trajectory classification outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Converged => write!(f, "converged"),
            Verdict::Diverged => write!(f, "diverged"),
            Verdict::Undecided => write!(f, "undecided"),
        }
    }
}

/// Outer iterates of a Lookahead run together with their distances to the
/// equilibrium. `points[0]` is the initial point.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub points: Vec<JointPoint>,
    pub distances: Vec<f64>,
    pub config: LookaheadConfig,
    pub game_tag: String,
    pub overflow: bool,
}

impl TrajectoryRecord {
    pub fn initial_distance(&self) -> f64 {
        self.distances[0]
    }

    /// Final recorded distance, saturated at the overflow guard.
    pub fn final_distance(&self) -> f64 {
        self.distances[self.distances.len() - 1].min(OVERFLOW_GUARD)
    }
}

/// One simultaneous gradient step `p - gamma * F(p)`.
pub fn gd_step(game: &GameSpec, p: &JointPoint, gamma: f64) -> Result<JointPoint> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let f = game.operator_f(p)?;
    let z = p.z() - gamma * f;
    JointPoint::from_z(&z)
}

fn exceeds_guard(z: &DVector<f64>) -> bool {
    z.iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW_GUARD)
}

/// Runs `n_outer` Lookahead steps from `z0`.
///
/// Each outer step takes `k` gradient steps from the current iterate and sets
/// `z <- z + alpha (z_tilde - z)`. A coordinate exceeding the overflow guard
/// truncates the run and flags it; the recorded distances saturate there.
pub fn lookahead_run(
    game: &GameSpec,
    z0: &JointPoint,
    config: &LookaheadConfig,
    n_outer: usize,
) -> Result<TrajectoryRecord> {
    if n_outer < 1 {
        return Err(Error::InvalidConfig("n_outer must be at least 1".into()));
    }
    if z0.half_dim() != game.half_dim() {
        return Err(Error::DimensionMismatch(format!(
            "z0 has half_dim {}, game has {}",
            z0.half_dim(),
            game.half_dim()
        )));
    }
    let mut points = Vec::with_capacity(n_outer + 1);
    let mut distances = Vec::with_capacity(n_outer + 1);
    let mut current = z0.clone();
    let mut overflow = false;
    points.push(current.clone());
    distances.push(current.distance_to_equilibrium());
    for _ in 0..n_outer {
        let mut fast = current.clone();
        for _ in 0..config.k {
            fast = gd_step(game, &fast, config.gamma)?;
            if exceeds_guard(&fast.z()) {
                overflow = true;
                break;
            }
        }
        if overflow {
            break;
        }
        let z = current.z() + config.alpha * (fast.z() - current.z());
        current = JointPoint::from_z(&z)?;
        points.push(current.clone());
        distances.push(current.distance_to_equilibrium().min(OVERFLOW_GUARD));
        if exceeds_guard(&current.z()) {
            overflow = true;
            break;
        }
    }
    Ok(TrajectoryRecord {
        points,
        distances,
        config: *config,
        game_tag: game.tag(),
        overflow,
    })
}

/// Classifies a finished run.
///
/// Converged when the final distance drops below `conv_tol * max(1, initial)`,
/// Diverged when it exceeds `div_factor * initial` or the run overflowed,
/// Undecided otherwise.
pub fn classify_trajectory(record: &TrajectoryRecord, conv_tol: f64, div_factor: f64) -> Result<Verdict> {
    if record.distances.is_empty() {
        return Err(Error::InvalidConfig("empty trajectory record".into()));
    }
    if !(conv_tol.is_finite() && conv_tol > 0.0 && div_factor.is_finite() && div_factor > 1.0) {
        return Err(Error::InvalidConfig(
            "need conv_tol > 0 and div_factor > 1".into(),
        ));
    }
    if record.overflow {
        return Ok(Verdict::Diverged);
    }
    let initial = record.initial_distance();
    let fin = record.final_distance();
    if fin < conv_tol * initial.max(1.0) {
        Ok(Verdict::Converged)
    } else if fin > div_factor * initial {
        Ok(Verdict::Diverged)
    } else {
        Ok(Verdict::Undecided)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;

    /// Closed-form oracle for bilinear runs with A = a*I: per coordinate pair,
    /// the outer map is multiplication by 1 - alpha + alpha (1 + i a gamma)^k.
    fn bg_outer_multiplier(a: f64, config: &LookaheadConfig) -> Complex64 {
        let inner = Complex64::new(1.0, a * config.gamma).powu(config.k as u32);
        Complex64::new(1.0 - config.alpha, 0.0) + config.alpha * inner
    }

    #[test]
    fn gd_step_on_bilinear_identity() {
        let g = GameSpec::bilinear_identity(1);
        let p = JointPoint::new(DVector::from_vec(vec![1.0]), DVector::from_vec(vec![0.0])).unwrap();
        let q = gd_step(&g, &p, 0.1).unwrap();
        assert!((q.x[0] - 1.0).abs() < 1e-15);
        assert!((q.y[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn origin_is_fixed() {
        let g = GameSpec::beta_game(0.5).unwrap();
        let q = gd_step(&g, &JointPoint::origin(1), 0.3).unwrap();
        assert_eq!(q.distance_to_equilibrium(), 0.0);
    }

    #[test]
    fn gd_distance_grows_by_eigenmode_law() {
        // per eigenmode, ||z_{n+1}||^2 = (1 + gamma^2 a^2) ||z_n||^2
        let g = GameSpec::bilinear_identity(1);
        for gamma in [0.01, 0.1, 0.5] {
            let mut p = JointPoint::ones(1);
            let mut last = p.distance_to_equilibrium();
            for _ in 0..200 {
                p = gd_step(&g, &p, gamma).unwrap();
                let d = p.distance_to_equilibrium();
                let expected = last * (1.0 + gamma * gamma).sqrt();
                assert!((d - expected).abs() < 1e-9 * expected);
                assert!(d > last);
                last = d;
            }
        }
    }

    #[test]
    fn alpha_one_is_plain_gd() {
        let g = GameSpec::beta_game(0.6).unwrap();
        let config = LookaheadConfig::new(4, 1.0, 0.05).unwrap();
        let z0 = JointPoint::ones(1);
        let rec = lookahead_run(&g, &z0, &config, 7).unwrap();
        let mut p = z0;
        for n in 1..=7 {
            for _ in 0..4 {
                p = gd_step(&g, &p, 0.05).unwrap();
            }
            assert!((&rec.points[n].z() - p.z()).amax() < 1e-12);
        }
    }

    #[test]
    fn alpha_zero_is_constant() {
        let g = GameSpec::bilinear_identity(2);
        let config = LookaheadConfig::new(5, 0.0, 0.1).unwrap();
        let rec = lookahead_run(&g, &JointPoint::ones(2), &config, 20).unwrap();
        for d in &rec.distances {
            assert_eq!(*d, 2.0);
        }
        let verdict = classify_trajectory(&rec, 1e-6, 1e3).unwrap();
        assert_eq!(verdict, Verdict::Undecided);
    }

    #[test]
    fn fig2_left_run_matches_complex_oracle() {
        // BG(A = I1), gamma = 0.1, k = 5, alpha = 0.5, 200 outer steps.
        let g = GameSpec::bilinear_identity(1);
        let config = LookaheadConfig::new(5, 0.5, 0.1).unwrap();
        let z0 = JointPoint::ones(1);
        let rec = lookahead_run(&g, &z0, &config, 200).unwrap();
        let m = bg_outer_multiplier(1.0, &config);
        let expected = m.norm().powi(200) * z0.distance_to_equilibrium();
        assert!((rec.final_distance() - expected).abs() < 1e-10 * expected);
        // converges steadily: well below the initial distance
        assert!(rec.final_distance() < 0.05 * rec.initial_distance());
        assert!(rec.distances.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn fig2_left_alpha_09_diverges() {
        let g = GameSpec::bilinear_identity(1);
        let config = LookaheadConfig::new(5, 0.9, 0.1).unwrap();
        let rec = lookahead_run(&g, &JointPoint::ones(1), &config, 200).unwrap();
        let m = bg_outer_multiplier(1.0, &config);
        assert!(m.norm() > 1.0);
        let expected = m.norm().powi(200) * rec.initial_distance();
        assert!((rec.final_distance() - expected).abs() < 1e-9 * expected);
        // growth ratio ~10.1x over 200 steps; diverged under a factor-5 gate
        assert_eq!(classify_trajectory(&rec, 1e-2, 5.0).unwrap(), Verdict::Diverged);
    }

    #[test]
    fn potential_game_converges_at_large_gamma() {
        // A = 0, B = C = I, gamma = 0.5, k = 5, alpha = 0.5: converges even
        // though the first-order condition is violated there.
        let g = GameSpec::potential_identity(1);
        let config = LookaheadConfig::new(5, 0.5, 0.5).unwrap();
        let rec = lookahead_run(&g, &JointPoint::ones(1), &config, 50).unwrap();
        assert_eq!(classify_trajectory(&rec, 1e-2, 1e3).unwrap(), Verdict::Converged);
    }

    #[test]
    fn linearity_of_the_outer_map() {
        let g = GameSpec::bilinear(DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 2.0])).unwrap();
        let config = LookaheadConfig::new(3, 0.6, 0.07).unwrap();
        let z0 = JointPoint::new(DVector::from_vec(vec![1.0, -0.5]), DVector::from_vec(vec![0.25, 2.0])).unwrap();
        let scaled = JointPoint::from_z(&(3.5 * z0.z())).unwrap();
        let r1 = lookahead_run(&g, &z0, &config, 40).unwrap();
        let r2 = lookahead_run(&g, &scaled, &config, 40).unwrap();
        for (p1, p2) in r1.points.iter().zip(&r2.points) {
            let lhs = 3.5 * p1.z();
            let rel = (&lhs - p2.z()).amax() / p2.z().amax().max(1e-30);
            assert!(rel < 1e-10);
        }
    }

    #[test]
    fn hazard_is_monotone_around_the_bg_boundary() {
        // k = 5, gamma = 0.1: all alpha < 0.8 converge, all alpha > 0.8
        // diverge (the boundary cell itself is excluded).
        let g = GameSpec::bilinear_identity(1);
        for i in 1..=19 {
            let alpha = 0.05 * i as f64;
            if (alpha - 0.8).abs() < 1e-9 {
                continue;
            }
            let config = LookaheadConfig::new(5, alpha, 0.1).unwrap();
            let rec = lookahead_run(&g, &JointPoint::ones(1), &config, 200).unwrap();
            let verdict = classify_trajectory(&rec, 0.5, 2.0).unwrap();
            if alpha < 0.8 {
                assert_eq!(verdict, Verdict::Converged, "alpha = {alpha}");
            } else {
                assert_eq!(verdict, Verdict::Diverged, "alpha = {alpha}");
            }
        }
    }

    #[test]
    fn overflow_truncates_and_classifies_diverged() {
        let g = GameSpec::bilinear_identity(1);
        // gamma large enough that iterates blow past the guard quickly
        let config = LookaheadConfig::new(5, 0.9, 3.0).unwrap();
        let rec = lookahead_run(&g, &JointPoint::ones(1), &config, 10_000).unwrap();
        assert!(rec.overflow);
        assert!(rec.points.len() < 10_001);
        assert_eq!(classify_trajectory(&rec, 1e-6, 1e3).unwrap(), Verdict::Diverged);
        assert!(rec.final_distance() <= OVERFLOW_GUARD);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let g = GameSpec::bilinear_identity(1);
        assert!(LookaheadConfig::new(0, 0.5, 0.1).is_err());
        assert!(LookaheadConfig::new(5, 1.5, 0.1).is_err());
        assert!(LookaheadConfig::new(5, 0.5, 0.0).is_err());
        let config = LookaheadConfig::new(5, 0.5, 0.1).unwrap();
        assert!(lookahead_run(&g, &JointPoint::ones(1), &config, 0).is_err());
    }
}
