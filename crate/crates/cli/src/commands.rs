//! Subcommand implementations: grid expansion, parallel evaluation, CSV/SVG
//! emission. Grid cells run on the rayon pool; results are collected in grid
//! order so identical configs produce byte-identical outputs.

use std::path::{Path, PathBuf};

use lagame_core::conditions::{
    bg_condition, condition_error, gamma2_tl, max_gamma_capped, qd_condition, qd_condition_gamma2,
    ConditionKind, ConditionTarget,
};
use lagame_core::discrete::{classify_trajectory, lookahead_run, LookaheadConfig, Verdict};
use lagame_core::games::{GameSpec, JointPoint};
use lagame_core::hrde::{integrate_hrde, HrdeOrder, PhaseState};
use lagame_core::stability::{
    companion_roots, dominant_pole, gd_char_poly, la2_gamma2_char_poly, la_bg_char_poly,
    la_qd_char_poly, routh_real, CharPoly, StabilityClass,
};
use lagame_core::trajectories::eig_sym;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{line_chart, sci, write_csv, Series};

pub const DEFAULT_CONV_TOL: f64 = 1e-2;
pub const DEFAULT_DIV_FACTOR: f64 = 1e3;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))
}

/// Starting point: all-ones by default, or seeded uniform direction on the
/// unit sphere.
fn starting_point(half_dim: usize, seed: Option<u64>) -> JointPoint {
    match seed {
        None => JointPoint::ones(half_dim),
        Some(seed) => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let d = 2 * half_dim;
            // Box-Muller normals, then normalize
            let mut v = Vec::with_capacity(d);
            while v.len() < d {
                let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                let r = (-2.0 * u1.ln()).sqrt();
                v.push(r * (2.0 * std::f64::consts::PI * u2).cos());
                if v.len() < d {
                    v.push(r * (2.0 * std::f64::consts::PI * u2).sin());
                }
            }
            let z = DVector::from_vec(v);
            let z = &z / z.norm();
            JointPoint::from_z(&z).expect("even length")
        }
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Converged => "converged",
        Verdict::Diverged => "diverged",
        Verdict::Undecided => "undecided",
    }
}

fn stability_str(v: StabilityClass) -> &'static str {
    match v {
        StabilityClass::Stable => "stable",
        StabilityClass::Unstable => "unstable",
        StabilityClass::Marginal => "marginal",
    }
}

pub fn preset(name: &str) -> Result<Config> {
    let text = match name {
        "fig2-left" => {
            "game = bg\nhalf_dim = 2\nk = 5\nalpha = 0.5\nalpha = 0.8\nalpha = 0.9\n\
             gamma = 0.1\nn_outer = 200\nconv_tol = 0.05\ndiv_factor = 5\n"
        }
        "fig2-right" => {
            "game = potential\nhalf_dim = 2\nk = 5\nalpha = 0.5\n\
             gamma = 0.1\ngamma = 0.25\ngamma = 0.5\nn_outer = 50\n"
        }
        other => {
            return Err(CliError::config(format!(
                "unknown preset `{other}` (expected fig2-left or fig2-right)"
            )))
        }
    };
    Config::parse(text)
}

/// `simulate`: one trajectory CSV per grid cell plus a summary with verdicts.
pub fn simulate(cfg: &Config, out: &Path, svg: bool, seed: Option<u64>) -> Result<Vec<String>> {
    cfg.check_keys(&[
        "game", "half_dim", "a_mat", "b_mat", "c_mat", "k", "alpha", "gamma", "n_outer",
        "conv_tol", "div_factor", "seed", "hrde", "step",
    ])?;
    let game = cfg.game()?;
    let ks = some_or(cfg.usizes("k")?, vec![5]);
    let alphas = some_or(cfg.floats("alpha")?, vec![0.5]);
    let gammas = some_or(cfg.floats("gamma")?, vec![0.1]);
    let n_outer = cfg.one_usize("n_outer", 200)?;
    if n_outer == 0 {
        return Err(CliError::config("n_outer must be at least 1"));
    }
    let conv_tol = cfg.one_float("conv_tol", DEFAULT_CONV_TOL)?;
    let div_factor = cfg.one_float("div_factor", DEFAULT_DIV_FACTOR)?;
    let seed = match seed {
        Some(s) => Some(s),
        None => cfg.one("seed")?.map(|v| {
            v.parse::<u64>()
                .map_err(|_| CliError::config(format!("seed `{v}` is not an integer")))
        }).transpose()?,
    };
    let z0 = starting_point(game.half_dim(), seed);
    ensure_dir(out)?;
    let hrde_order = match cfg.one("hrde")? {
        None => None,
        Some("1") => Some(HrdeOrder::First),
        Some("2") => Some(HrdeOrder::Second),
        Some(other) => {
            return Err(CliError::config(format!(
                "hrde must be 1 or 2, got `{other}`"
            )))
        }
    };
    if let Some(order) = hrde_order {
        return simulate_hrde(
            cfg, &game, &z0, &ks, &alphas, &gammas, n_outer, conv_tol, div_factor, order, out, svg,
        );
    }

    let mut grid = Vec::new();
    for &k in &ks {
        for &alpha in &alphas {
            for &gamma in &gammas {
                grid.push((k, alpha, gamma));
            }
        }
    }
    let runs: Vec<_> = grid
        .par_iter()
        .map(|&(k, alpha, gamma)| -> Result<_> {
            let config = LookaheadConfig::new(k, alpha, gamma)?;
            let rec = lookahead_run(&game, &z0, &config, n_outer)?;
            let verdict = classify_trajectory(&rec, conv_tol, div_factor)?;
            Ok((k, alpha, gamma, rec, verdict))
        })
        .collect::<Result<_>>()?;

    let h = game.half_dim();
    let mut header = vec!["run_id".to_string(), "step".to_string()];
    header.extend((0..h).map(|i| format!("x{i}")));
    header.extend((0..h).map(|i| format!("y{i}")));
    header.push("distance".to_string());
    let mut summary = vec![vec![
        "run_id".into(),
        "game".into(),
        "k".into(),
        "alpha".into(),
        "gamma".into(),
        "n_outer".into(),
        "initial_distance".into(),
        "final_distance".into(),
        "verdict".into(),
        "boundary".into(),
    ]];
    let mut series = Vec::new();
    let mut written = Vec::new();
    for (run_id, (k, alpha, gamma, rec, verdict)) in runs.iter().enumerate() {
        let mut rows = vec![header.clone()];
        for (step, (p, d)) in rec.points.iter().zip(&rec.distances).enumerate() {
            let mut row = vec![run_id.to_string(), step.to_string()];
            row.extend(p.x.iter().map(|v| sci(*v)));
            row.extend(p.y.iter().map(|v| sci(*v)));
            row.push(sci(*d));
            rows.push(row);
        }
        let path = out.join(format!("run_{run_id:03}.csv"));
        write_csv(&path, &rows)?;
        written.push(path.display().to_string());
        let boundary = (alpha - (*k as f64 - 1.0) / *k as f64).abs() < 1e-9;
        summary.push(vec![
            run_id.to_string(),
            rec.game_tag.clone(),
            k.to_string(),
            alpha.to_string(),
            gamma.to_string(),
            n_outer.to_string(),
            sci(rec.initial_distance()),
            sci(rec.final_distance()),
            verdict_str(*verdict).into(),
            boundary.to_string(),
        ]);
        series.push(Series {
            label: format!("k={k} a={alpha} g={gamma}"),
            points: rec
                .distances
                .iter()
                .enumerate()
                .map(|(i, d)| (i as f64, d.max(1e-16).log10()))
                .collect(),
        });
    }
    let summary_path = out.join("summary.csv");
    write_csv(&summary_path, &summary)?;
    written.push(summary_path.display().to_string());
    if svg {
        let path = out.join("trajectories.svg");
        std::fs::write(&path, line_chart("distance to equilibrium", "outer step", "log10 distance", &series))
            .map_err(|e| CliError::io(e.to_string()))?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

fn some_or<T>(v: Vec<T>, default: Vec<T>) -> Vec<T> {
    if v.is_empty() {
        default
    } else {
        v
    }
}

/// Continuous counterpart of `simulate`: integrates the requested model to
/// `t_end = n_outer * gamma` and writes a time column in place of the step
/// column. The sample stride matches the outer-iterate times.
#[allow(clippy::too_many_arguments)]
fn simulate_hrde(
    cfg: &Config,
    game: &GameSpec,
    z0: &JointPoint,
    ks: &[usize],
    alphas: &[f64],
    gammas: &[f64],
    n_outer: usize,
    conv_tol: f64,
    div_factor: f64,
    order: HrdeOrder,
    out: &Path,
    svg: bool,
) -> Result<Vec<String>> {
    let per_outer = cfg.one_usize("step", 50)?;
    if per_outer == 0 {
        return Err(CliError::config("step must be at least 1"));
    }
    let mut grid = Vec::new();
    for &k in ks {
        for &alpha in alphas {
            for &gamma in gammas {
                grid.push((k, alpha, gamma));
            }
        }
    }
    let runs: Vec<_> = grid
        .par_iter()
        .map(|&(k, alpha, gamma)| -> Result<_> {
            let config = LookaheadConfig::new(k, alpha, gamma)?;
            let init = PhaseState::from_point(game, z0, order)?;
            let traj = integrate_hrde(
                game,
                &config,
                order,
                &init,
                n_outer as f64 * gamma,
                gamma / per_outer as f64,
            )?;
            Ok((k, alpha, gamma, traj))
        })
        .collect::<Result<_>>()?;
    let h = game.half_dim();
    let mut header = vec!["run_id".to_string(), "time".to_string()];
    header.extend((0..h).map(|i| format!("x{i}")));
    header.extend((0..h).map(|i| format!("y{i}")));
    header.push("distance".to_string());
    let mut summary = vec![vec![
        "run_id".into(),
        "game".into(),
        "k".into(),
        "alpha".into(),
        "gamma".into(),
        "n_outer".into(),
        "initial_distance".into(),
        "final_distance".into(),
        "verdict".into(),
        "boundary".into(),
    ]];
    let mut series = Vec::new();
    let mut written = Vec::new();
    for (run_id, (k, alpha, gamma, traj)) in runs.iter().enumerate() {
        let distances = traj.distances();
        let mut rows = vec![header.clone()];
        // sample at the outer-iterate times t = n * gamma
        for n in 0..=n_outer {
            let idx = n * per_outer;
            if idx >= traj.states.len() {
                break;
            }
            let state = &traj.states[idx];
            let mut row = vec![run_id.to_string(), sci(traj.times[idx])];
            row.extend(state.z.iter().take(h).map(|v| sci(*v)));
            row.extend(state.z.iter().skip(h).map(|v| sci(*v)));
            row.push(sci(distances[idx]));
            rows.push(row);
        }
        let path = out.join(format!("run_{run_id:03}.csv"));
        write_csv(&path, &rows)?;
        written.push(path.display().to_string());
        let initial = distances[0];
        let fin = distances[distances.len() - 1];
        let verdict = if traj.overflow {
            Verdict::Diverged
        } else if fin < conv_tol * initial.max(1.0) {
            Verdict::Converged
        } else if fin > div_factor * initial {
            Verdict::Diverged
        } else {
            Verdict::Undecided
        };
        let boundary = (alpha - (*k as f64 - 1.0) / *k as f64).abs() < 1e-9;
        summary.push(vec![
            run_id.to_string(),
            game.tag(),
            k.to_string(),
            alpha.to_string(),
            gamma.to_string(),
            n_outer.to_string(),
            sci(initial),
            sci(fin),
            verdict_str(verdict).into(),
            boundary.to_string(),
        ]);
        series.push(Series {
            label: format!("k={k} a={alpha} g={gamma}"),
            points: traj
                .times
                .iter()
                .zip(&distances)
                .map(|(t, d)| (*t, d.max(1e-16).log10()))
                .collect(),
        });
    }
    let summary_path = out.join("summary.csv");
    write_csv(&summary_path, &summary)?;
    written.push(summary_path.display().to_string());
    if svg {
        let path = out.join("trajectories.svg");
        std::fs::write(
            &path,
            line_chart("model distance to equilibrium", "time", "log10 distance", &series),
        )
        .map_err(|e| CliError::io(e.to_string()))?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

/// `check`: one conditions-CSV row per grid cell.
pub fn check(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    cfg.check_keys(&[
        "condition", "game", "half_dim", "a_mat", "b_mat", "c_mat", "k", "alpha", "gamma", "beta",
    ])?;
    let kind = match cfg.one("condition")? {
        Some("bg-cond") => ConditionKind::BgCond,
        Some("qd-cond") => ConditionKind::QdCond,
        Some("qd-cond-2") => ConditionKind::QdCond2,
        Some(other) => {
            return Err(CliError::config(format!(
                "unknown condition `{other}` (expected bg-cond, qd-cond, qd-cond-2)"
            )))
        }
        None => return Err(CliError::config("`check` needs a condition key")),
    };
    let ks = some_or(cfg.usizes("k")?, vec![5]);
    let alphas = some_or(cfg.floats("alpha")?, vec![0.5]);
    let gammas = some_or(cfg.floats("gamma")?, vec![0.1]);
    let betas = cfg.floats("beta")?;
    ensure_dir(out)?;
    let mut rows = vec![vec![
        "kind".to_string(),
        "k".into(),
        "alpha".into(),
        "gamma".into(),
        "beta".into(),
        "margin".into(),
        "satisfied".into(),
    ]];
    let mut cells: Vec<(usize, f64, Option<f64>, Option<f64>)> = Vec::new();
    match kind {
        ConditionKind::BgCond => {
            for &k in &ks {
                for &alpha in &alphas {
                    cells.push((k, alpha, None, None));
                }
            }
        }
        _ => {
            for &k in &ks {
                for &alpha in &alphas {
                    for &gamma in &gammas {
                        if betas.is_empty() {
                            cells.push((k, alpha, Some(gamma), None));
                        } else {
                            for &beta in &betas {
                                cells.push((k, alpha, Some(gamma), Some(beta)));
                            }
                        }
                    }
                }
            }
        }
    }
    let game = if betas.is_empty() && kind != ConditionKind::BgCond {
        Some(cfg.game()?)
    } else {
        None
    };
    let reports: Vec<_> = cells
        .par_iter()
        .map(|&(k, alpha, gamma, beta)| -> Result<_> {
            let report = match kind {
                ConditionKind::BgCond => bg_condition(k, alpha),
                ConditionKind::QdCond => {
                    let config = LookaheadConfig::new(k, alpha, gamma.unwrap())?;
                    match beta {
                        Some(b) => qd_condition(&GameSpec::beta_game(b)?, &config)?,
                        None => qd_condition(game.as_ref().expect("game built"), &config)?,
                    }
                }
                ConditionKind::QdCond2 => {
                    let config = LookaheadConfig::new(k, alpha, gamma.unwrap())?;
                    let b = beta.ok_or_else(|| {
                        CliError::config("qd-cond-2 needs a beta grid")
                    })?;
                    qd_condition_gamma2(b, &config)?
                }
            };
            Ok((k, alpha, gamma, beta, report))
        })
        .collect::<Result<_>>()?;
    for (k, alpha, gamma, beta, report) in reports {
        rows.push(vec![
            report.kind.to_string(),
            k.to_string(),
            alpha.to_string(),
            gamma.map(|g| g.to_string()).unwrap_or_default(),
            beta.map(|b| b.to_string()).unwrap_or_default(),
            sci(report.margin),
            report.satisfied.to_string(),
        ]);
    }
    let path = out.join("conditions.csv");
    write_csv(&path, &rows)?;
    Ok(vec![path.display().to_string()])
}

/// `fig3`: per-beta step-size selection and condition error for both
/// conditions, with an optional two-curve SVG.
pub fn fig3(cfg: &Config, out: &Path, svg: bool) -> Result<Vec<String>> {
    cfg.check_keys(&["k", "alpha", "beta", "n_outer", "gamma_cap"])?;
    let k = cfg.one_usize("k", 8)?;
    let alpha = cfg.one_float("alpha", 0.35)?;
    let n_outer = cfg.one_usize("n_outer", 200)?;
    let gamma_cap = cfg.one_float("gamma_cap", 2.0)?;
    let betas = if cfg.all("beta").is_empty() {
        (0..=20).map(|i| i as f64 / 20.0).collect()
    } else {
        cfg.floats("beta")?
    };
    if betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
        return Err(CliError::config("beta values must lie in [0, 1]"));
    }
    if n_outer == 0 {
        return Err(CliError::config("n_outer must be at least 1"));
    }
    ensure_dir(out)?;
    let conditions = [ConditionKind::QdCond, ConditionKind::QdCond2];
    let cells: Vec<(f64, ConditionKind)> = betas
        .iter()
        .flat_map(|&b| conditions.iter().map(move |&c| (b, c)))
        .collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(beta, kind)| -> Result<_> {
            let game = GameSpec::beta_game(beta)?;
            let target = match kind {
                ConditionKind::QdCond => ConditionTarget::Game(&game),
                _ => ConditionTarget::BetaMix(beta),
            };
            match max_gamma_capped(kind, target, k, alpha, gamma_cap) {
                Ok(gstar) => {
                    let err = condition_error(&game, k, alpha, gstar, n_outer)?;
                    Ok((beta, kind, Some((gstar, err))))
                }
                Err(lagame_core::Error::Unsatisfiable) => Ok((beta, kind, None)),
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Result<_>>()?;
    let mut rows = vec![vec![
        "beta".to_string(),
        "condition".into(),
        "gamma_star".into(),
        "error".into(),
    ]];
    let mut curves: Vec<Series> = conditions
        .iter()
        .map(|c| Series {
            label: c.to_string(),
            points: Vec::new(),
        })
        .collect();
    for (beta, kind, cell) in results {
        let (gs, es) = match cell {
            Some((gstar, err)) => (gstar.to_string(), sci(err)),
            None => (String::new(), String::new()),
        };
        rows.push(vec![beta.to_string(), kind.to_string(), gs, es]);
        if let Some((_, err)) = cell {
            let idx = if kind == ConditionKind::QdCond { 0 } else { 1 };
            curves[idx].points.push((beta, err.clamp(-1e3, 1e3)));
        }
    }
    let path = out.join("fig3.csv");
    write_csv(&path, &rows)?;
    let mut written = vec![path.display().to_string()];
    if svg {
        let path = out.join("fig3.svg");
        std::fs::write(
            &path,
            line_chart(
                &format!("condition error, k={k} alpha={alpha}"),
                "beta",
                "d_gamma - d_gamma' (clamped)",
                &curves,
            ),
        )
        .map_err(|e| CliError::io(e.to_string()))?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

/// `poles`: dominant pole and Routh verdict per model and grid cell.
pub fn poles(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    cfg.check_keys(&[
        "model", "game", "half_dim", "a_mat", "b_mat", "c_mat", "lambda", "k", "alpha", "gamma",
        "beta",
    ])?;
    let model = cfg.one("model")?.unwrap_or("la-bg").to_string();
    let ks = some_or(cfg.usizes("k")?, vec![5]);
    let alphas = some_or(cfg.floats("alpha")?, vec![0.5]);
    let gammas = some_or(cfg.floats("gamma")?, vec![0.1]);
    let betas = some_or(cfg.floats("beta")?, vec![1.0]);
    // eigenmodes: an explicit lambda grid, or the spectrum of the game's A
    let lambdas = if cfg.all("lambda").is_empty() {
        let game = cfg.game()?;
        eig_sym(game.a_mat()).map_err(CliError::from)?.lambdas
    } else {
        cfg.floats("lambda")?
    };
    ensure_dir(out)?;
    let mut rows = vec![vec![
        "model".to_string(),
        "mode_index".into(),
        "k".into(),
        "alpha".into(),
        "gamma".into(),
        "dom_re".into(),
        "dom_im".into(),
        "verdict".into(),
    ]];
    let mut push = |model: &str,
                    mode: usize,
                    k: Option<usize>,
                    alpha: Option<f64>,
                    gamma: f64,
                    poly: &CharPoly|
     -> Result<()> {
        let verdict = routh_real(poly).map_err(CliError::from)?.verdict;
        let dominant = dominant_pole(&companion_roots(poly).map_err(CliError::from)?);
        rows.push(vec![
            model.to_string(),
            mode.to_string(),
            k.map(|v| v.to_string()).unwrap_or_default(),
            alpha.map(|v| v.to_string()).unwrap_or_default(),
            gamma.to_string(),
            sci(dominant.re),
            sci(dominant.im),
            stability_str(verdict).into(),
        ]);
        Ok(())
    };
    match model.as_str() {
        "gd" => {
            for (mode, &lambda) in lambdas.iter().enumerate() {
                for &gamma in &gammas {
                    push("gd", mode, None, None, gamma, &gd_char_poly(lambda, gamma))?;
                }
            }
        }
        "la-bg" => {
            for (mode, &lambda) in lambdas.iter().enumerate() {
                for &k in &ks {
                    for &alpha in &alphas {
                        for &gamma in &gammas {
                            let config = LookaheadConfig::new(k, alpha, gamma)?;
                            push("la-bg", mode, Some(k), Some(alpha), gamma, &la_bg_char_poly(lambda, &config))?;
                        }
                    }
                }
            }
        }
        "la-qd" => {
            for (mode, &beta) in betas.iter().enumerate() {
                let game = GameSpec::beta_game(beta)?;
                for &k in &ks {
                    for &alpha in &alphas {
                        for &gamma in &gammas {
                            let config = LookaheadConfig::new(k, alpha, gamma)?;
                            let s = lagame_core::conditions::qd_scalars(&game, &config)?;
                            push(
                                "la-qd",
                                mode,
                                Some(k),
                                Some(alpha),
                                gamma,
                                &la_qd_char_poly(s.m_x, s.m_y, s.l_x, s.l_y, gamma),
                            )?;
                        }
                    }
                }
            }
        }
        "la-gamma2" => {
            for (mode, &beta) in betas.iter().enumerate() {
                for &k in &ks {
                    for &alpha in &alphas {
                        for &gamma in &gammas {
                            let config = LookaheadConfig::new(k, alpha, gamma)?;
                            let (t, l) = gamma2_tl(beta, &config)?;
                            push(
                                "la-gamma2",
                                mode,
                                Some(k),
                                Some(alpha),
                                gamma,
                                &la2_gamma2_char_poly(t, l, gamma),
                            )?;
                        }
                    }
                }
            }
        }
        other => {
            return Err(CliError::config(format!(
                "unknown model `{other}` (expected gd, la-bg, la-qd, la-gamma2)"
            )))
        }
    }
    let path = out.join("stability.csv");
    write_csv(&path, &rows)?;
    Ok(vec![path.display().to_string()])
}

/// `reproduce-all`: the two figure presets plus the sweep, under one root.
pub fn reproduce_all(out: &Path, svg: bool, seed: Option<u64>) -> Result<Vec<String>> {
    let mut written = Vec::new();
    written.extend(simulate(&preset("fig2-left")?, &out.join("fig2-left"), svg, seed)?);
    written.extend(simulate(&preset("fig2-right")?, &out.join("fig2-right"), svg, seed)?);
    written.extend(fig3(&Config::default(), &out.join("fig3"), svg)?);
    let poles_cfg = Config::parse("model = la-bg\nk = 5\nalpha = 0.5\nalpha = 0.9\ngamma = 0.1\nlambda = 1\n")?;
    written.extend(poles(&poles_cfg, &out.join("poles"))?);
    Ok(written)
}

pub fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.unwrap_or_else(|| PathBuf::from("out"))
}
