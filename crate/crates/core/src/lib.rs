//! Analysis toolkit for the Lookahead optimizer on bilinear and quadratic
//! min-max games.
//!
//! The crate covers the full pipeline: deterministic discrete runs
//! ([`discrete`]), first- and second-order continuous models of the iteration
//! ([`hrde`]), frequency-domain characteristic polynomials with Routh-Hurwitz
//! and pole-based verdicts ([`stability`]), closed-form trajectories and
//! their numeric validation ([`trajectories`]), and the convergence-condition
//! evaluators with step-size selection ([`conditions`]). Game definitions and
//! their vector fields live in [`games`].
//!
//! ```
//! use lagame_core::conditions::bg_condition;
//! use lagame_core::discrete::{classify_trajectory, lookahead_run, Verdict};
//! use lagame_core::{GameSpec, JointPoint, LookaheadConfig};
//!
//! // plain gradient steps rotate outward on a bilinear game; wrapping them
//! // in Lookahead with alpha < (k-1)/k makes the iteration contract
//! let game = GameSpec::bilinear_identity(2);
//! let config = LookaheadConfig::new(5, 0.5, 0.1)?;
//! let run = lookahead_run(&game, &JointPoint::ones(2), &config, 200)?;
//! assert!(run.final_distance() < run.initial_distance());
//! assert_eq!(classify_trajectory(&run, 0.05, 5.0)?, Verdict::Converged);
//! assert!(bg_condition(config.k, config.alpha).satisfied);
//! # Ok::<(), lagame_core::Error>(())
//! ```

pub mod conditions;
pub mod discrete;
mod error;
pub mod games;
pub mod hrde;
pub mod stability;
pub mod trajectories;

pub use error::{Error, Result};

pub use conditions::{ConditionKind, ConditionReport, ConditionTarget, QdScalars, TlVariant};
pub use discrete::{LookaheadConfig, TrajectoryRecord, Verdict, OVERFLOW_GUARD};
pub use games::{GameSpec, JointPoint};
pub use hrde::{ContinuousTrajectory, HrdeCoeffs, HrdeOrder, PhaseState};
pub use stability::{CharPoly, RouthTable, StabilityClass, StabilityVerdict};
pub use trajectories::{KernelSample, ModeDecomposition};
