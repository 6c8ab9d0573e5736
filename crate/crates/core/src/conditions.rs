//! The three convergence conditions and the step-size selection they imply.
//!
//! The bilinear condition is `alpha < (k-1)/k`. The quadratic-game condition
//! comes from the first-order model's scalar reduction: with
//! `c2 = k(k-1) alpha gamma / 2`,
//!
//! ```text
//! m_x = k a C - c2 (C^2 - A^2)      l_x = -k a A + c2 A (B + C)
//! m_y = k a B - c2 (B^2 - A^2)      l_y =  l_x
//! ```
//!
//! and the characteristic polynomial `(g/2 s^2 + s + m_x)(g/2 s^2 + s + m_y)
//! + l_x l_y = 0`; the condition is its binding Routh row,
//! `gamma (m_x - m_y)^2 + 4 (m_x + m_y) - 4 l_x l_y gamma > 0`. On the scalar
//! bilinear game this reduces to `alpha < (k-1)/k` for every step size, and on
//! the beta = 0 potential game to `gamma < 1/(k-1)`.
//!
//! The second-order condition evaluates the five first-column entries of the
//! degree-6 Routh array built from the `(T, L)` scalars of the mixing game.

use crate::discrete::{lookahead_run, LookaheadConfig};
use crate::error::{Error, Result};
use crate::games::{GameSpec, JointPoint};

/// Default upper bound of the admissible-step-size search.
pub const DEFAULT_GAMMA_CAP: f64 = 2.0;

/// Which convergence condition a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    /// `alpha < (k-1)/k` (bilinear games, first-order model).
    BgCond,
    /// Scalar quadratic-game condition (first-order model).
    QdCond,
    /// Degree-6 Routh condition of the second-order model (mixing game).
    QdCond2,
}

impl std::fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConditionKind::BgCond => write!(f, "bg-cond"),
            ConditionKind::QdCond => write!(f, "qd-cond"),
            ConditionKind::QdCond2 => write!(f, "qd-cond-2"),
        }
    }
}

/// An evaluated condition: `satisfied == (margin > 0)`.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub kind: ConditionKind,
    pub satisfied: bool,
    pub margin: f64,
    pub k: usize,
    pub alpha: f64,
    pub gamma: Option<f64>,
    pub game_tag: String,
}

impl ConditionReport {
    fn new(kind: ConditionKind, margin: f64, k: usize, alpha: f64, gamma: Option<f64>, tag: String) -> Self {
        Self {
            kind,
            satisfied: margin > 0.0,
            margin,
            k,
            alpha,
            gamma,
            game_tag: tag,
        }
    }
}

/// The four scalars of the quadratic-game reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdScalars {
    pub m_x: f64,
    pub m_y: f64,
    pub l_x: f64,
    pub l_y: f64,
}

/// `alpha < (k-1)/k`, margin `(k-1)/k - alpha`.
pub fn bg_condition(k: usize, alpha: f64) -> ConditionReport {
    let margin = (k as f64 - 1.0) / k as f64 - alpha;
    ConditionReport::new(ConditionKind::BgCond, margin, k, alpha, None, "bg".into())
}

/// Scalar-game projections of the `T` blocks (see the module docs).
pub fn qd_scalars(game: &GameSpec, config: &LookaheadConfig) -> Result<QdScalars> {
    if !game.is_scalar() {
        return Err(Error::NotScalarGame);
    }
    let a = game.a_mat()[(0, 0)];
    let b = game.b_mat()[(0, 0)];
    let c = game.c_mat()[(0, 0)];
    let (k, alpha, gamma) = (config.k as f64, config.alpha, config.gamma);
    let ka = k * alpha;
    let c2 = 0.5 * k * (k - 1.0) * alpha * gamma;
    let l = -ka * a + c2 * a * (b + c);
    Ok(QdScalars {
        m_x: ka * c - c2 * (c * c - a * a),
        m_y: ka * b - c2 * (b * b - a * a),
        l_x: l,
        l_y: l,
    })
}

/// First-order condition for a scalar quadratic game:
/// margin `gamma (m_x - m_y)^2 + 4 (m_x + m_y) - 4 l_x l_y gamma`.
pub fn qd_condition(game: &GameSpec, config: &LookaheadConfig) -> Result<ConditionReport> {
    let s = qd_scalars(game, config)?;
    let g = config.gamma;
    let margin = g * (s.m_x - s.m_y).powi(2) + 4.0 * (s.m_x + s.m_y) - 4.0 * s.l_x * s.l_y * g;
    Ok(ConditionReport::new(
        ConditionKind::QdCond,
        margin,
        config.k,
        config.alpha,
        Some(g),
        game.tag(),
    ))
}

/// Which transcription of the second-order `L` scalar to use.
///
/// `Printed` follows the published expression verbatim (with its duplicated
/// `8 beta (1-beta)^2` term and the `beta (beta-1)` sign); `Corrected` is the
/// variant obtained by deriving the mixing-game reduction directly, which
/// differs in the sign of the O(gamma) term. `Corrected` is the default: it
/// is the variant under which the step sizes selected by the condition
/// reproduce the negative condition-error behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TlVariant {
    #[default]
    Corrected,
    Printed,
}

/// The `(T, L)` scalars of the second-order condition for the mixing game
/// with parameter `beta`, using the default (corrected) `L` transcription.
pub fn gamma2_tl(beta: f64, config: &LookaheadConfig) -> Result<(f64, f64)> {
    gamma2_tl_variant(beta, config, TlVariant::default())
}

/// Same as [`gamma2_tl`], with the `L` transcription made explicit.
pub fn gamma2_tl_variant(beta: f64, config: &LookaheadConfig, variant: TlVariant) -> Result<(f64, f64)> {
    if config.k < 2 {
        return Err(Error::InvalidK(config.k));
    }
    let (k, alpha, g) = (config.k as f64, config.alpha, config.gamma);
    let b1 = 1.0 - beta;
    let km2 = (k - 2.0) * (k - 2.0);
    let t = 2.0 * alpha * k * b1 - 2.0 * alpha * k * (k - 1.0) * g * b1 * b1
        + alpha * (k * (k - 1.0) / 2.0) * g * beta * beta
        + 8.0 * alpha * km2 * g * g * b1.powi(3)
        - 6.0 * alpha * km2 * g * g * beta * beta * b1;
    let l = match variant {
        TlVariant::Printed => {
            -alpha * beta * k + 2.0 * alpha * k * (k - 1.0) * g * beta * (beta - 1.0)
                - alpha * km2 * g * g * (4.0 * beta * b1 * b1 - beta.powi(3) + 8.0 * beta * b1 * b1)
        }
        TlVariant::Corrected => {
            alpha * beta * k - 2.0 * alpha * k * (k - 1.0) * g * beta * b1
                + alpha * km2 * g * g * (12.0 * beta * b1 * b1 - beta.powi(3))
        }
    };
    Ok((t, l))
}

/// Second-order condition: all five first-column entries of the degree-6
/// Routh array must be positive. The margin is their minimum.
pub fn qd_condition_gamma2(beta: f64, config: &LookaheadConfig) -> Result<ConditionReport> {
    qd_condition_gamma2_variant(beta, config, TlVariant::default())
}

pub fn qd_condition_gamma2_variant(
    beta: f64,
    config: &LookaheadConfig,
    variant: TlVariant,
) -> Result<ConditionReport> {
    let (t, l) = gamma2_tl_variant(beta, config, variant)?;
    let margin = gamma2_first_column(t, l, config.gamma)
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(ConditionReport::new(
        ConditionKind::QdCond2,
        margin,
        config.k,
        config.alpha,
        Some(config.gamma),
        format!("beta({beta})"),
    ))
}

/// The five tested entries `(b1, c1, d1, e1, f1)` of the degree-6 Routh
/// array, by the explicit recurrence. Evaluating them directly keeps the
/// condition well-defined at tiny step sizes, where the polynomial's
/// coefficients span so many orders of magnitude that a scale-relative zero
/// tolerance would misread the high-degree pivots.
pub fn gamma2_first_column(t: f64, l: f64, gamma: f64) -> [f64; 5] {
    let g = gamma;
    let a6 = g.powi(4) / 36.0;
    let a5 = g.powi(3) / 6.0;
    let a4 = 7.0 * g * g / 12.0;
    let a3 = g * g * t / 3.0 + g;
    let a2 = g * t + 1.0;
    let a1 = 2.0 * t;
    let a0 = t * t + l * l;
    let b1 = (a5 * a4 - a6 * a3) / a5;
    let b2 = (a5 * a2 - a6 * a1) / a5;
    let b3 = a0;
    let c1 = (b1 * a3 - a5 * b2) / b1;
    let c2 = (b1 * a1 - a5 * b3) / b1;
    let d1 = (c1 * b2 - b1 * c2) / c1;
    let d2 = a0;
    let e1 = (d1 * c2 - c1 * d2) / d1;
    let f1 = d2;
    [b1, c1, d1, e1, f1].map(|v| if v.is_finite() { v } else { 0.0 })
}

/// What a condition is evaluated against in step-size searches.
#[derive(Debug, Clone, Copy)]
pub enum ConditionTarget<'a> {
    /// A scalar quadratic game (for the first-order condition).
    Game(&'a GameSpec),
    /// The mixing-game parameter (for the second-order condition).
    BetaMix(f64),
}

fn margin_at(kind: ConditionKind, target: ConditionTarget<'_>, k: usize, alpha: f64, gamma: f64) -> Result<f64> {
    let config = LookaheadConfig::new(k, alpha, gamma)?;
    match (kind, target) {
        (ConditionKind::BgCond, _) => Ok(bg_condition(k, alpha).margin),
        (ConditionKind::QdCond, ConditionTarget::Game(game)) => Ok(qd_condition(game, &config)?.margin),
        (ConditionKind::QdCond, ConditionTarget::BetaMix(beta)) => {
            let game = GameSpec::beta_game(beta)?;
            Ok(qd_condition(&game, &config)?.margin)
        }
        (ConditionKind::QdCond2, ConditionTarget::BetaMix(beta)) => {
            Ok(qd_condition_gamma2(beta, &config)?.margin)
        }
        (ConditionKind::QdCond2, ConditionTarget::Game(game)) => {
            if !game.is_scalar() {
                return Err(Error::NotScalarGame);
            }
            // recover beta from the mixing-game block structure
            let beta = game.a_mat()[(0, 0)];
            Ok(qd_condition_gamma2(beta, &config)?.margin)
        }
    }
}

/// Largest `gamma` in `(0, gamma_cap]` satisfying the condition, to 1e-6
/// relative width. Errors with `Unsatisfiable` when the condition fails even
/// at `gamma = 1e-6`.
pub fn max_gamma(kind: ConditionKind, target: ConditionTarget<'_>, k: usize, alpha: f64) -> Result<f64> {
    max_gamma_capped(kind, target, k, alpha, DEFAULT_GAMMA_CAP)
}

pub fn max_gamma_capped(
    kind: ConditionKind,
    target: ConditionTarget<'_>,
    k: usize,
    alpha: f64,
    gamma_cap: f64,
) -> Result<f64> {
    const SCAN: usize = 256;
    let sat = |g: f64| -> Result<bool> { Ok(margin_at(kind, target, k, alpha, g)? > 0.0) };
    if !sat(1e-6)? {
        return Err(Error::Unsatisfiable);
    }
    if sat(gamma_cap)? {
        return Ok(gamma_cap);
    }
    // walk down from the cap to bracket the highest satisfied block, then
    // bisect its upper edge
    let step = (gamma_cap - 1e-6) / SCAN as f64;
    let mut hi = gamma_cap;
    let mut lo = 1e-6;
    for i in (0..SCAN).rev() {
        let g = 1e-6 + i as f64 * step;
        if sat(g)? {
            lo = g;
            hi = g + step;
            break;
        }
    }
    for _ in 0..80 {
        if (hi - lo) <= 1e-6 * hi.max(1e-6) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if sat(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Final-distance difference `d_gamma - d_(1.5 gamma)` after `n_outer`
/// Lookahead steps from the all-ones start. Negative means the
/// condition-selected step size converged faster; divergent runs saturate at
/// the overflow guard.
pub fn condition_error(
    game: &GameSpec,
    k: usize,
    alpha: f64,
    gamma_star: f64,
    n_outer: usize,
) -> Result<f64> {
    if !gamma_star.is_finite() || gamma_star <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "gamma_star must be positive, got {gamma_star}"
        )));
    }
    let z0 = JointPoint::ones(game.half_dim());
    let base = lookahead_run(game, &z0, &LookaheadConfig::new(k, alpha, gamma_star)?, n_outer)?;
    let probe = lookahead_run(
        game,
        &z0,
        &LookaheadConfig::new(k, alpha, 1.5 * gamma_star)?,
        n_outer,
    )?;
    Ok(base.final_distance() - probe.final_distance())
}
