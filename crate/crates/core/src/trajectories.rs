//! Closed-form trajectories of the first-order model on bilinear games.
//!
//! Diagonalizing `A = U diag(lambda_i) U^T` decouples the model into scalar
//! modes with frequencies `omega_i^2 = 1/gamma^2 - alpha k(k-1) lambda_i^2`.
//! The kernel `G(t) = U diag(e^{-t/g} sinh(omega_i t)/omega_i) U^T` drives the
//! coupled solution
//! `x(t) = -(2 k a / g) (G * y)(t) + C(t) x(0) + G(t) (x'(0) + x(0)/g)`,
//! where `C(t) = U diag(e^{-t/g} cosh(omega_i t)) U^T` and `*` is
//! convolution; `y` swaps the sign of the coupling term. Imaginary
//! frequencies are evaluated through the real trigonometric forms of the same
//! analytic functions, so everything here stays real.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::discrete::LookaheadConfig;
use crate::error::{Error, Result};
use crate::games::{GameSpec, JointPoint};
use crate::hrde::{integrate_hrde, HrdeOrder, PhaseState};
use crate::stability::{companion_roots, la_bg_char_poly};

/// Eigen decomposition of the coupling matrix with optional per-mode
/// frequencies.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    pub u_mat: DMatrix<f64>,
    pub lambdas: Vec<f64>,
    pub omegas: Option<Vec<Complex64>>,
}

/// The kernel matrix `G(t)` at one time.
#[derive(Debug, Clone)]
pub struct KernelSample {
    pub t: f64,
    pub g_mat: DMatrix<f64>,
}

/// Symmetric eigendecomposition with eigenvalues sorted descending and the
/// eigenvector columns permuted to match.
pub fn eig_sym(a_mat: &DMatrix<f64>) -> Result<ModeDecomposition> {
    if a_mat.nrows() != a_mat.ncols() {
        return Err(Error::NotSymmetric);
    }
    let scale = a_mat.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    for i in 0..a_mat.nrows() {
        for j in 0..i {
            if (a_mat[(i, j)] - a_mat[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let eig = SymmetricEigen::new(a_mat.clone());
    let n = a_mat.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut u_mat = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        u_mat.set_column(col, &eig.eigenvectors.column(i));
    }
    debug_assert!({
        let recon = &u_mat * DMatrix::from_diagonal(&DVector::from_vec(lambdas.clone())) * u_mat.transpose();
        (recon - a_mat).amax() < 1e-10 * scale
    });
    Ok(ModeDecomposition {
        u_mat,
        lambdas,
        omegas: None,
    })
}

/// Fills the per-mode frequencies `omega_i = sqrt(1/g^2 - a k(k-1) l_i^2)`,
/// taken as the principal complex square root when the radicand is negative.
pub fn mode_frequencies(decomp: &ModeDecomposition, config: &LookaheadConfig) -> ModeDecomposition {
    let (k, alpha, gamma) = (config.k as f64, config.alpha, config.gamma);
    let omegas = decomp
        .lambdas
        .iter()
        .map(|&l| Complex64::new(1.0 / (gamma * gamma) - alpha * k * (k - 1.0) * l * l, 0.0).sqrt())
        .collect();
    ModeDecomposition {
        u_mat: decomp.u_mat.clone(),
        lambdas: decomp.lambdas.clone(),
        omegas: Some(omegas),
    }
}

/// `e^{-t/g} sinh(omega t) / omega` evaluated in its real form; the
/// `omega -> 0` limit is `e^{-t/g} t`.
fn kernel_entry(omega: Complex64, gamma: f64, t: f64) -> f64 {
    let decay = (-t / gamma).exp();
    if omega.norm() < 1e-9 {
        return decay * t;
    }
    if omega.im.abs() > omega.re.abs() {
        // imaginary branch: sinh(i w t)/(i w) = sin(w t)/w
        let w = omega.im;
        decay * (w * t).sin() / w
    } else {
        let w = omega.re;
        decay * (w * t).sinh() / w
    }
}

/// `e^{-t/g} cosh(omega t)` in its real form.
fn cosh_entry(omega: Complex64, gamma: f64, t: f64) -> f64 {
    let decay = (-t / gamma).exp();
    if omega.im.abs() > omega.re.abs() {
        decay * (omega.im * t).cos()
    } else {
        decay * (omega.re * t).cosh()
    }
}

/// Samples the kernel `G(t)`; requires frequencies to be filled.
pub fn kernel_g(decomp: &ModeDecomposition, config: &LookaheadConfig, t: f64) -> Result<KernelSample> {
    if t < 0.0 {
        return Err(Error::InvalidConfig(format!("t must be >= 0, got {t}")));
    }
    let omegas = decomp.omegas.as_ref().ok_or(Error::OmegasMissing)?;
    let diag: Vec<f64> = omegas
        .iter()
        .map(|&w| kernel_entry(w, config.gamma, t))
        .collect();
    let g_mat = &decomp.u_mat
        * DMatrix::from_diagonal(&DVector::from_vec(diag))
        * decomp.u_mat.transpose();
    Ok(KernelSample { t, g_mat })
}

fn cosh_matrix(decomp: &ModeDecomposition, config: &LookaheadConfig, t: f64) -> Result<DMatrix<f64>> {
    let omegas = decomp.omegas.as_ref().ok_or(Error::OmegasMissing)?;
    let diag: Vec<f64> = omegas
        .iter()
        .map(|&w| cosh_entry(w, config.gamma, t))
        .collect();
    Ok(&decomp.u_mat * DMatrix::from_diagonal(&DVector::from_vec(diag)) * decomp.u_mat.transpose())
}

/// Homogeneous (decoupled) solution of one player:
/// `C(t) x0 + G(t) (v0 + x0 / gamma)`. On a purely potential mode set this is
/// the entire solution.
pub fn potential_closed_form(
    config: &LookaheadConfig,
    decomp: &ModeDecomposition,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>> {
    if x0.len() != decomp.lambdas.len() || v0.len() != x0.len() {
        return Err(Error::DimensionMismatch(format!(
            "x0/v0 lengths {}/{} vs {} modes",
            x0.len(),
            v0.len(),
            decomp.lambdas.len()
        )));
    }
    let c = cosh_matrix(decomp, config, t)?;
    let g = kernel_g(decomp, config, t)?.g_mat;
    Ok(&c * x0 + &g * (v0 + x0 / config.gamma))
}

/// Poles governing the x-player's asymptotics on a bilinear mode: the roots
/// of the per-mode characteristic quartic.
pub fn xtf_poles(lambda: f64, config: &LookaheadConfig) -> Vec<Complex64> {
    companion_roots(&la_bg_char_poly(lambda, config)).expect("degree 4")
}

/// Sup-norm defect of the coupled closed-form solution against a numerical
/// integration of the model, with the default start `z(0) = ones`,
/// `z'(0) = -F(z(0))`.
pub fn closed_form_residual(game: &GameSpec, config: &LookaheadConfig, horizon: f64, h: f64) -> Result<f64> {
    let init = PhaseState::from_point(game, &JointPoint::ones(game.half_dim()), HrdeOrder::First)?;
    closed_form_residual_from(game, config, &init, horizon, h)
}

/// Same as [`closed_form_residual`] with an explicit initial phase state.
///
/// Integrates the first-order model on `[0, horizon]` with step `h`, then
/// evaluates `x(t) + (2 k a / g) (G * y)(t) - hom_x(t)` (and the y-analogue)
/// with the convolution taken by trapezoidal quadrature on the same grid.
/// Returns the sup over grid times of the joint residual norm.
pub fn closed_form_residual_from(
    game: &GameSpec,
    config: &LookaheadConfig,
    init: &PhaseState,
    horizon: f64,
    h: f64,
) -> Result<f64> {
    if !game.is_bilinear() {
        return Err(Error::NotBilinear);
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::InvalidConfig("horizon must be positive".into()));
    }
    let hd = game.half_dim();
    let decomp = mode_frequencies(&eig_sym(game.a_mat())?, config);
    let traj = integrate_hrde(game, config, HrdeOrder::First, init, horizon, h)?;
    let n = traj.states.len();
    let xs: Vec<DVector<f64>> = traj.states.iter().map(|s| s.z.rows(0, hd).into_owned()).collect();
    let ys: Vec<DVector<f64>> = traj.states.iter().map(|s| s.z.rows(hd, hd).into_owned()).collect();
    let kernels: Vec<DMatrix<f64>> = (0..n)
        .map(|i| kernel_g(&decomp, config, i as f64 * h).map(|k| k.g_mat))
        .collect::<Result<_>>()?;
    let x0 = init.z.rows(0, hd).into_owned();
    let y0 = init.z.rows(hd, hd).into_owned();
    let vx0 = init.v.rows(0, hd).into_owned();
    let vy0 = init.v.rows(hd, hd).into_owned();
    let coupling = 2.0 * config.k as f64 * config.alpha / config.gamma;
    let mut worst = 0.0f64;
    for i in 0..n {
        let t = i as f64 * h;
        // trapezoid over tau of G(tau) f(t - tau)
        let conv = |series: &[DVector<f64>]| -> DVector<f64> {
            let mut acc = DVector::zeros(hd);
            if i == 0 {
                return acc;
            }
            for j in 0..=i {
                let weight = if j == 0 || j == i { 0.5 } else { 1.0 };
                acc += weight * h * (&kernels[j] * &series[i - j]);
            }
            acc
        };
        let hom_x = cosh_matrix(&decomp, config, t)? * &x0
            + &kernels[i] * (&vx0 + &x0 / config.gamma);
        let hom_y = cosh_matrix(&decomp, config, t)? * &y0
            + &kernels[i] * (&vy0 + &y0 / config.gamma);
        let rhs_x = -coupling * conv(&ys) + hom_x;
        let rhs_y = coupling * conv(&xs) + hom_y;
        let rx = (&xs[i] - rhs_x).norm();
        let ry = (&ys[i] - rhs_y).norm();
        worst = worst.max(rx).max(ry);
    }
    Ok(worst)
}
