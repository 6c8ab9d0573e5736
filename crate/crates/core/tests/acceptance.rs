//! Acceptance suite: one test per release criterion, each printing a
//! `ACCEPTANCE <n>: PASS/FAIL` line (run with `--nocapture` to see the lines
//! for passing criteria; failing criteria echo them in the failure output).
//!
//! Criteria 1, 3 and 4 are asserted exactly as specified and are expected to
//! fail; the measured values contradict the specified thresholds. The
//! details, and the nearby statements that do hold, are documented in the
//! README ("Known-red acceptance criteria") and verified by the companion
//! tests in this file and in the unit suites.

use lagame_core::conditions::{
    bg_condition, condition_error, max_gamma, qd_condition, qd_condition_gamma2, ConditionKind,
    ConditionTarget,
};
use lagame_core::discrete::{
    classify_trajectory, gd_step, lookahead_run, LookaheadConfig, Verdict,
};
use lagame_core::games::{GameSpec, JointPoint};
use lagame_core::hrde::{integrate_hrde, HrdeOrder, PhaseState};
use lagame_core::stability::{
    companion_roots, complex_spectrum, gd_char_poly, generalized_hurwitz_quadratic,
    la_block_matrix, routh_real, CharPoly, StabilityClass,
};
use lagame_core::trajectories::{eig_sym, mode_frequencies, potential_closed_form, closed_form_residual, xtf_poles};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

fn random_psd(rng: &mut ChaCha20Rng, n: usize) -> DMatrix<f64> {
    // Q diag(lambda) Q^T with lambda in [0.1, 3]: full-rank PSD
    let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = raw.qr().q();
    let lambdas = DVector::from_fn(n, |_, _| rng.random_range(0.1..3.0));
    &q * DMatrix::from_diagonal(&lambdas) * q.transpose()
}

#[test]
fn acceptance_01_fig2_left_reproduction() {
    // BG(A = I2), gamma = 0.1, k = 5, 200 outer iterations.
    let game = GameSpec::bilinear_identity(2);
    let z0 = JointPoint::ones(2);
    let t0 = std::time::Instant::now();
    let run = |alpha: f64| {
        let config = LookaheadConfig::new(5, alpha, 0.1).unwrap();
        lookahead_run(&game, &z0, &config, 200).unwrap()
    };
    let conv = run(0.5);
    let div = run(0.9);
    let conv_ratio = conv.final_distance() / conv.initial_distance();
    let div_ratio = div.final_distance() / div.initial_distance();
    let elapsed = t0.elapsed();
    let pass = conv_ratio < 1e-2 && div_ratio > 1e3 && elapsed.as_secs_f64() < 1.0;
    println!(
        "ACCEPTANCE 1: {} - alpha=0.5 final/initial = {conv_ratio:.4e} (need < 1e-2), \
         alpha=0.9 final/initial = {div_ratio:.4e} (need > 1e3), runtime {elapsed:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    // the qualitative verdicts hold in the right directions
    assert!(conv_ratio < 1.0 && div_ratio > 1.0, "directions must hold");
    assert!(
        conv_ratio < 1e-2,
        "alpha=0.5 contraction over 200 outer steps is {conv_ratio:.4e}; \
         the exact outer-step modulus |0.5 + 0.5(1+0.1i)^5| = 0.98133 only reaches 1e-2 after ~244 steps"
    );
    assert!(
        div_ratio > 1e3,
        "alpha=0.9 growth over 200 outer steps is {div_ratio:.4e}; \
         the exact modulus 1.01164 only reaches 1e3 after ~600 steps"
    );
}

#[test]
fn acceptance_02_fig2_right_reproduction() {
    // potential game (A = 0, B = C = I), k = 5, alpha = 0.5, 50 iterations
    let game = GameSpec::potential_identity(2);
    let z0 = JointPoint::ones(2);
    let t0 = std::time::Instant::now();
    let mut verdicts = Vec::new();
    for gamma in [0.1, 0.25, 0.5] {
        let config = LookaheadConfig::new(5, 0.5, gamma).unwrap();
        let rec = lookahead_run(&game, &z0, &config, 50).unwrap();
        verdicts.push((gamma, classify_trajectory(&rec, 1e-2, 1e3).unwrap()));
    }
    let elapsed = t0.elapsed();
    let pass = verdicts.iter().all(|(_, v)| *v == Verdict::Converged) && elapsed.as_secs_f64() < 1.0;
    println!(
        "ACCEPTANCE 2: {} - verdicts {verdicts:?}, runtime {elapsed:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    for (gamma, v) in verdicts {
        assert_eq!(v, Verdict::Converged, "gamma = {gamma}");
    }
    assert!(elapsed.as_secs_f64() < 1.0);
}

#[test]
fn acceptance_03_fig3_sign_pattern() {
    // beta grid {0, 0.05, ..., 1}; k = 8, alpha = 0.35 (neither the figure
    // protocol nor the criterion pins them; this is the pair under which the
    // sign pattern is closest to attainable).
    let (k, alpha) = (8usize, 0.35f64);
    let t0 = std::time::Instant::now();
    let mut neg_failures = Vec::new();
    let mut pos_failures = Vec::new();
    let mut rows = Vec::new();
    for i in 0..=20 {
        let beta = i as f64 / 20.0;
        let game = GameSpec::beta_game(beta).unwrap();
        let g2 = max_gamma(ConditionKind::QdCond2, ConditionTarget::BetaMix(beta), k, alpha).unwrap();
        let e2 = condition_error(&game, k, alpha, g2, 200).unwrap();
        if e2 >= 0.0 || e2.is_nan() {
            neg_failures.push((beta, e2));
        }
        let g1 = max_gamma(ConditionKind::QdCond, ConditionTarget::Game(&game), k, alpha).unwrap();
        let e1 = condition_error(&game, k, alpha, g1, 200).unwrap();
        if [0.1, 0.2, 0.3].iter().any(|b| (beta - b).abs() < 1e-9) && (e1 <= 0.0 || e1.is_nan()) {
            pos_failures.push((beta, e1));
        }
        rows.push(format!(
            "beta={beta:.2} gamma2*={g2:.4} err2={e2:+.3e} gamma1*={g1:.4} err1={e1:+.3e}"
        ));
    }
    let elapsed = t0.elapsed();
    let pass = neg_failures.is_empty() && pos_failures.is_empty() && elapsed.as_secs_f64() < 30.0;
    println!(
        "ACCEPTANCE 3: {} - second-order error negative at {}/21 betas (violations: {neg_failures:?}); \
         first-order error positive at beta in {{0.1,0.2,0.3}}: {} (violations: {pos_failures:?}); runtime {elapsed:?}",
        if pass { "PASS" } else { "FAIL" },
        21 - neg_failures.len(),
        pos_failures.is_empty(),
    );
    for row in &rows {
        println!("  {row}");
    }
    assert!(elapsed.as_secs_f64() < 30.0, "runtime {elapsed:?}");
    assert!(
        pos_failures.is_empty(),
        "first-order condition error must be positive at beta in {{0.1, 0.2, 0.3}}: {pos_failures:?}"
    );
    assert!(
        neg_failures.is_empty(),
        "second-order condition error must be negative at every grid beta; violations {neg_failures:?} \
         (at beta = 0.1 the selected step 0.44 sits below the negative-error window, which opens near 0.51 \
         for every (k, alpha) pair searched)"
    );
}

#[test]
fn acceptance_04_block_spectrum_left_of_axis() {
    // 50 random full-rank PSD A (dims 1-8), k in {2,3,5}, alpha in
    // {0.1, 0.5, 0.9}, gamma in {0.01, 0.1, 1.0}: every eigenvalue of the
    // phase-space matrix must satisfy Re < -1e-10.
    let mut rng = ChaCha20Rng::seed_from_u64(20240811);
    let mut violations: Vec<(usize, f64, f64, f64)> = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let n = rng.random_range(1..=8);
        let a = random_psd(&mut rng, n);
        let game = GameSpec::bilinear(a).unwrap();
        for k in [2usize, 3, 5] {
            for alpha in [0.1, 0.5, 0.9] {
                for gamma in [0.01, 0.1, 1.0] {
                    let config = LookaheadConfig::new(k, alpha, gamma).unwrap();
                    let m = la_block_matrix(&game, &config).unwrap();
                    let max_re = complex_spectrum(&m)
                        .iter()
                        .map(|e| e.re)
                        .fold(f64::NEG_INFINITY, f64::max);
                    worst = worst.max(max_re);
                    if max_re >= -1e-10
                        && !violations
                            .iter()
                            .any(|(vk, va, vg, _)| *vk == k && *va == alpha && *vg == gamma)
                    {
                        violations.push((k, alpha, gamma, max_re));
                    }
                }
            }
        }
    }
    let pass = violations.is_empty();
    println!(
        "ACCEPTANCE 4: {} - worst max Re = {worst:.3e}; violating (k, alpha, gamma, maxRe) cells: {violations:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(
        violations.is_empty(),
        "spectrum crosses the axis on cells violating alpha < (k-1)/k (and on the boundary cell k=2, \
         alpha=0.5), consistent with the divergence the same suite requires at alpha = 0.9: {violations:?}"
    );
}

#[test]
fn acceptance_05_gd_divergence() {
    let game = GameSpec::bilinear_identity(2);
    let mut all_unstable = true;
    for gamma in [0.01, 0.1, 0.5] {
        let table = routh_real(&gd_char_poly(1.0, gamma)).unwrap();
        all_unstable &= table.verdict == StabilityClass::Unstable;
        // discrete distances strictly increase
        let mut p = JointPoint::ones(2);
        let mut last = p.distance_to_equilibrium();
        let mut monotone = true;
        for _ in 0..200 {
            p = gd_step(&game, &p, gamma).unwrap();
            let d = p.distance_to_equilibrium();
            monotone &= d > last;
            last = d;
        }
        assert!(monotone, "gamma = {gamma}: GD distance must strictly increase");
        assert_eq!(
            table.verdict,
            StabilityClass::Unstable,
            "gamma = {gamma}: Routh verdict"
        );
    }
    println!("ACCEPTANCE 5: PASS - GD polynomial Unstable and distances strictly increasing for gamma in {{0.01, 0.1, 0.5}}");
    assert!(all_unstable);
}

#[test]
fn acceptance_06_condition_reductions() {
    // (a) scalar bilinear: first-order condition <=> alpha < (k-1)/k
    let bg = GameSpec::bilinear(DMatrix::from_element(1, 1, 1.0)).unwrap();
    let mut checked = 0usize;
    for k in 1..=20usize {
        for i in 0..20 {
            let alpha = (i as f64 + 0.5) / 20.0;
            let cfg = LookaheadConfig::new(k, alpha, 0.1).unwrap();
            let qd = qd_condition(&bg, &cfg).unwrap();
            let bgc = bg_condition(k, alpha);
            if bgc.margin.abs() < 1e-9 || qd.margin.abs() < 1e-9 {
                continue;
            }
            assert_eq!(qd.satisfied, bgc.satisfied, "k={k} alpha={alpha}");
            checked += 1;
        }
    }
    // (b) second-order condition at gamma = 1e-6 <=> first-order condition
    // on the mixing game, over 21 beta points
    for i in 0..=20 {
        let beta = i as f64 / 20.0;
        let cfg = LookaheadConfig::new(5, 0.5, 1e-6).unwrap();
        let second = qd_condition_gamma2(beta, &cfg).unwrap().satisfied;
        let game = GameSpec::beta_game(beta).unwrap();
        let first = qd_condition(&game, &cfg).unwrap().satisfied;
        assert_eq!(second, first, "beta = {beta}");
    }
    // (c) potential-game boundary 1/(k-1) within 1e-4
    let potential = GameSpec::beta_game(0.0).unwrap();
    for k in 2..=6usize {
        let gstar = max_gamma(ConditionKind::QdCond, ConditionTarget::Game(&potential), k, 0.5).unwrap();
        let want = 1.0 / (k as f64 - 1.0);
        assert!(
            (gstar - want).abs() < 1e-4,
            "k = {k}: boundary {gstar} vs {want}"
        );
    }
    println!(
        "ACCEPTANCE 6: PASS - BG reduction on {checked} off-boundary cells, gamma->0 reduction on 21 betas, \
         potential boundary = 1/(k-1) for k in 2..=6"
    );
}

#[test]
fn acceptance_07_oracle_equivalence() {
    let mut rng = ChaCha20Rng::seed_from_u64(7_0811);
    let mut disagreements = 0usize;
    // 500 random real polynomials, degree <= 6, roots >= 1e-6 off the axis
    for _ in 0..500 {
        let n_real = rng.random_range(0..=3usize);
        let n_pairs = rng.random_range(0..=2usize);
        if n_real + 2 * n_pairs == 0 {
            continue;
        }
        let mut coeffs = vec![Complex64::new(rng.random_range(0.2..2.0), 0.0)];
        let mul = |coeffs: &mut Vec<Complex64>, r: Complex64| {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * r;
            }
            *coeffs = next;
        };
        for _ in 0..n_real {
            let mag: f64 = rng.random_range(0.01..3.0);
            let re = if rng.random_bool(0.5) { mag } else { -mag };
            mul(&mut coeffs, Complex64::new(re, 0.0));
        }
        for _ in 0..n_pairs {
            let mag: f64 = rng.random_range(0.01..3.0);
            let re = if rng.random_bool(0.5) { mag } else { -mag };
            let im: f64 = rng.random_range(0.05..3.0);
            mul(&mut coeffs, Complex64::new(re, im));
            mul(&mut coeffs, Complex64::new(re, -im));
        }
        let real: Vec<f64> = coeffs.iter().map(|c| c.re).collect();
        let poly = CharPoly::from_real(&real).unwrap();
        let verdict = routh_real(&poly).unwrap().verdict;
        let roots = companion_roots(&poly).unwrap();
        let stable = roots.iter().all(|r| r.re < 0.0);
        let expected = if stable { StabilityClass::Stable } else { StabilityClass::Unstable };
        if verdict != expected {
            disagreements += 1;
        }
    }
    // 500 random complex-coefficient quadratics off the boundary manifold
    let mut quad_disagreements = 0usize;
    let mut done = 0usize;
    while done < 500 {
        let beta_coef = rng.random_range(0.5..30.0);
        let mu = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        if (mu.re + mu.im * mu.im / (beta_coef * beta_coef)).abs() < 1e-6 {
            continue;
        }
        done += 1;
        let v = generalized_hurwitz_quadratic(beta_coef, mu);
        let poly = CharPoly::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(beta_coef, 0.0),
            -mu,
        ])
        .unwrap();
        let roots = companion_roots(&poly).unwrap();
        let stable = roots.iter().all(|r| r.re < 0.0);
        if (v.verdict == StabilityClass::Stable) != stable {
            quad_disagreements += 1;
        }
    }
    let pass = disagreements == 0 && quad_disagreements == 0;
    println!(
        "ACCEPTANCE 7: {} - Routh vs roots: {disagreements} disagreements; generalized quadratic vs roots: {quad_disagreements}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert_eq!(disagreements, 0);
    assert_eq!(quad_disagreements, 0);
}

#[test]
fn acceptance_08_closed_form_validation() {
    let game = GameSpec::bilinear_identity(1);
    let config = LookaheadConfig::new(5, 0.5, 0.1).unwrap();
    let r1 = closed_form_residual(&game, &config, 2.0, 1e-3).unwrap();
    let r2 = closed_form_residual(&game, &config, 2.0, 5e-4).unwrap();
    let ratio = r2 / r1;
    // potential closed form vs an RK4 oracle of the decoupled mode equation
    let mut worst_mode_err = 0.0f64;
    for &gamma in &[0.05, 0.1, 0.2] {
        for &lambda in &[0.5, 1.0, 2.0] {
            let cfg = LookaheadConfig::new(5, 0.5, gamma).unwrap();
            let a = DMatrix::from_element(1, 1, lambda);
            let d = mode_frequencies(&eig_sym(&a).unwrap(), &cfg);
            let om = d.omegas.as_ref().unwrap()[0];
            let om2 = om.re * om.re - om.im * om.im;
            let stiff = 1.0 / (gamma * gamma) - om2;
            let (mut u, mut v) = (1.0f64, -1.0 / gamma);
            let h = 2e-5;
            let x0 = DVector::from_vec(vec![1.0]);
            let v0 = DVector::from_vec(vec![-1.0 / gamma]);
            let mut t = 0.0;
            while t < 2.0 - 0.5 * h {
                let f = |u: f64, v: f64| (v, -(2.0 / gamma) * v - stiff * u);
                let (k1u, k1v) = f(u, v);
                let (k2u, k2v) = f(u + 0.5 * h * k1u, v + 0.5 * h * k1v);
                let (k3u, k3v) = f(u + 0.5 * h * k2u, v + 0.5 * h * k2v);
                let (k4u, k4v) = f(u + h * k3u, v + h * k3v);
                u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
                v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
                t += h;
            }
            let closed = potential_closed_form(&cfg, &d, &x0, &v0, t).unwrap()[0];
            worst_mode_err = worst_mode_err.max((closed - u).abs());
        }
    }
    let pass = r1 < 1e-3 && ratio <= 0.55 && worst_mode_err < 1e-6;
    println!(
        "ACCEPTANCE 8: {} - residual(1e-3) = {r1:.3e} (< 1e-3), halving ratio = {ratio:.3} (<= 0.55), \
         closed-form vs ODE oracle worst error = {worst_mode_err:.3e} (< 1e-6)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(r1 < 1e-3);
    assert!(ratio <= 0.55);
    assert!(worst_mode_err < 1e-6);
}

#[test]
fn acceptance_09_discrete_hrde_consistency() {
    let game = GameSpec::bilinear_identity(1);
    let gap = |gamma: f64| -> f64 {
        let cfg = LookaheadConfig::new(5, 0.5, gamma).unwrap();
        let z0 = JointPoint::ones(1);
        let rec = lookahead_run(&game, &z0, &cfg, 50).unwrap();
        let init = PhaseState::from_point(&game, &z0, HrdeOrder::First).unwrap();
        let per = 50usize;
        let traj = integrate_hrde(
            &game,
            &cfg,
            HrdeOrder::First,
            &init,
            50.0 * gamma,
            gamma / per as f64,
        )
        .unwrap();
        let mut worst = 0.0f64;
        for n in 0..=50 {
            worst = worst.max((&traj.states[n * per].z - rec.points[n].z()).amax());
        }
        worst
    };
    let g1 = gap(0.1);
    let g2 = gap(0.05);
    let ratio = g1 / g2;
    let pass = ratio >= 1.8;
    println!(
        "ACCEPTANCE 9: {} - sup-norm gap {g1:.5} at gamma=0.1 vs {g2:.5} at gamma=0.05, ratio {ratio:.3} (need >= 1.8)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(ratio >= 1.8);
}

#[test]
fn acceptance_10_pole_spectrum_agreement() {
    let mut rng = ChaCha20Rng::seed_from_u64(10_0811);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let n = rng.random_range(1..=4);
        let a = random_psd(&mut rng, n);
        let game = GameSpec::bilinear(a.clone()).unwrap();
        let k = [2usize, 3, 5][trial % 3];
        let config = LookaheadConfig::new(k, 0.5, 0.1).unwrap();
        let mut spec: Vec<Complex64> =
            complex_spectrum(&la_block_matrix(&game, &config).unwrap());
        let union: Vec<Complex64> = eig_sym(&a)
            .unwrap()
            .lambdas
            .iter()
            .flat_map(|&l| xtf_poles(l, &config))
            .collect();
        assert_eq!(spec.len(), union.len());
        // greedy closest-pair matching (multiplicities included)
        for u in &union {
            let (j, d) = spec
                .iter()
                .enumerate()
                .map(|(j, s)| (j, (u - s).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            worst = worst.max(d);
            spec.swap_remove(j);
        }
    }
    let pass = worst < 1e-6;
    println!(
        "ACCEPTANCE 10: {} - worst pole/spectrum mismatch over 20 random instances = {worst:.3e} (< 1e-6)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(worst < 1e-6);
}
