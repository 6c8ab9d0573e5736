//! Characteristic polynomials, Routh-Hurwitz verdicts, and pole finding.
//!
//! Every model in scope reduces to a low-degree polynomial in the complex
//! frequency `s`; a trajectory decays iff all roots lie strictly in the left
//! half-plane. Verdicts come from the Routh array (real coefficients) or the
//! generalized Hurwitz test (the complex-coefficient quadratic from the
//! phase-space reduction), with companion-matrix eigenvalues as the numeric
//! root oracle throughout.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::discrete::LookaheadConfig;
use crate::error::{Error, Result};
use crate::games::GameSpec;

/// Stability classification of a polynomial or linear system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StabilityClass::Stable => write!(f, "stable"),
            StabilityClass::Unstable => write!(f, "unstable"),
            StabilityClass::Marginal => write!(f, "marginal"),
        }
    }
}

/// Polynomial in `s`, coefficients highest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    coeffs: Vec<Complex64>,
}

impl CharPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        let scale = coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
        if coeffs.is_empty() || scale == 0.0 || coeffs[0].norm() <= 1e-14 * scale {
            return Err(Error::DegenerateLeadingCoefficient);
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Real parts of the coefficients; error when any imaginary part is
    /// non-negligible.
    pub fn real_coeffs(&self) -> Result<Vec<f64>> {
        let scale = self.coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
        if self.coeffs.iter().any(|c| c.im.abs() > 1e-12 * scale) {
            return Err(Error::InvalidConfig(
                "polynomial has complex coefficients".into(),
            ));
        }
        Ok(self.coeffs.iter().map(|c| c.re).collect())
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    fn derivative_eval(&self, s: Complex64) -> Complex64 {
        let n = self.degree();
        self.coeffs[..n]
            .iter()
            .enumerate()
            .fold(Complex64::new(0.0, 0.0), |acc, (i, &c)| {
                acc * s + c * (n - i) as f64
            })
    }
}

/// Eigenvalues of a general real matrix, robust to badly scaled inputs.
///
/// The stock Schur iteration is run without an iteration cap and can stall on
/// stiff phase-space matrices whose entries span several orders of magnitude.
/// This balances the matrix first (Parlett-Reinsch diagonal similarity) and
/// bounds the iteration count, escalating the convergence tolerance on the
/// rare non-converged case.
pub fn complex_spectrum(m: &DMatrix<f64>) -> Vec<Complex64> {
    let balanced = balance(m);
    let n = balanced.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Complex64::new(balanced[(0, 0)], 0.0)];
    }
    let complexified = balanced.map(|v| Complex64::new(v, 0.0));
    let h = nalgebra::linalg::Hessenberg::new(complexified).unpack_h();
    hessenberg_eigenvalues(h)
}

/// Single-shift QR iteration on a complex upper-Hessenberg matrix, with
/// Wilkinson shifts and an exceptional shift every ten stalled sweeps so the
/// iteration cannot cycle.
fn hessenberg_eigenvalues(mut h: DMatrix<Complex64>) -> Vec<Complex64> {
    let n = h.nrows();
    let mut eigs = vec![Complex64::new(0.0, 0.0); n];
    let mut end = n - 1;
    let mut stalls = 0usize;
    let mut sweeps = 0usize;
    let two_by_two = |h: &DMatrix<Complex64>, i: usize| -> (Complex64, Complex64) {
        let (a, b, c, d) = (h[(i, i)], h[(i, i + 1)], h[(i + 1, i)], h[(i + 1, i + 1)]);
        let tr = a + d;
        let disc = ((a - d) * (a - d) + 4.0 * b * c).sqrt();
        ((tr + disc) / 2.0, (tr - disc) / 2.0)
    };
    'outer: while end > 0 {
        // deflate negligible subdiagonals
        let mut low = 0;
        for l in (1..=end).rev() {
            let off = h[(l, l - 1)].norm();
            let local = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if off <= f64::EPSILON * local.max(1e-300) {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                if l == end {
                    eigs[end] = h[(end, end)];
                    end -= 1;
                    stalls = 0;
                    continue 'outer;
                }
                if l == end - 1 {
                    // l >= 1, so end >= 2 here
                    let (e1, e2) = two_by_two(&h, end - 1);
                    eigs[end - 1] = e1;
                    eigs[end] = e2;
                    end -= 2;
                    stalls = 0;
                    continue 'outer;
                }
                low = l;
                break;
            }
        }
        if end == 1 && low == 0 {
            let (e1, e2) = two_by_two(&h, 0);
            eigs[0] = e1;
            eigs[1] = e2;
            return eigs;
        }
        sweeps += 1;
        if sweeps > 300 * n {
            // safety net; with exceptional shifts this is unreachable in
            // practice
            for i in 0..=end {
                eigs[i] = h[(i, i)];
            }
            return eigs;
        }
        // Wilkinson shift from the trailing 2x2 of the active block, replaced
        // by an ad-hoc magnitude shift when the iteration stalls
        stalls += 1;
        let shift = if stalls.is_multiple_of(10) {
            let mag = h[(end, end - 1)].norm() + if end >= 2 { h[(end - 1, end - 2)].norm() } else { 0.0 };
            h[(end, end)] + Complex64::new(0.75 * mag, 0.0)
        } else {
            let (e1, e2) = two_by_two(&h, end - 1);
            let hnn = h[(end, end)];
            if (e1 - hnn).norm() <= (e2 - hnn).norm() {
                e1
            } else {
                e2
            }
        };
        // explicit single-shift QR sweep on the active block via Givens
        // rotations: H - sI = QR, then H <- RQ + sI
        let mut rows = Vec::with_capacity(end - low + 1);
        for i in low..=end {
            h[(i, i)] -= shift;
        }
        for i in low..end {
            let (a, b) = (h[(i, i)], h[(i + 1, i)]);
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r < 1e-300 {
                (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
            } else {
                (a.conj() / r, b.conj() / r)
            };
            // premultiply rows i, i+1
            for j in i..=end {
                let (x, y) = (h[(i, j)], h[(i + 1, j)]);
                h[(i, j)] = c * x + s * y;
                h[(i + 1, j)] = -s.conj() * x + c.conj() * y;
            }
            rows.push((i, c, s));
        }
        for &(i, c, s) in &rows {
            // postmultiply columns i, i+1 by the adjoint rotation
            for j in low..=(i + 1).min(end) {
                let (x, y) = (h[(j, i)], h[(j, i + 1)]);
                h[(j, i)] = x * c.conj() + y * s.conj();
                h[(j, i + 1)] = -x * s + y * c;
            }
        }
        for i in low..=end {
            h[(i, i)] += shift;
        }
    }
    eigs[0] = h[(0, 0)];
    eigs
}

/// Parlett-Reinsch balancing: a diagonal similarity with radix-2 scale
/// factors that roughly equalizes row and column norms. Leaves the spectrum
/// unchanged.
fn balance(m: &DMatrix<f64>) -> DMatrix<f64> {
    const RADIX: f64 = 2.0;
    let mut a = m.clone();
    let n = a.nrows();
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut r = 0.0f64;
            let mut c = 0.0f64;
            for j in 0..n {
                if j != i {
                    r += a[(i, j)].abs();
                    c += a[(j, i)].abs();
                }
            }
            if c == 0.0 || r == 0.0 || !c.is_finite() || !r.is_finite() {
                continue;
            }
            let s = c + r;
            let mut f = 1.0f64;
            let mut c_scaled = c;
            let g = r / RADIX;
            while c_scaled < g {
                f *= RADIX;
                c_scaled *= RADIX * RADIX;
            }
            let g = r * RADIX;
            while c_scaled > g {
                f /= RADIX;
                c_scaled /= RADIX * RADIX;
            }
            if (c_scaled + r) / f < 0.95 * s && f != 1.0 {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    a
}

/// Roots of the monic normalization via companion-matrix eigenvalues.
///
/// Real-coefficient polynomials go through the real companion matrix; a
/// complex-coefficient quadratic uses the closed-form formula, and higher
/// complex degrees fall back to Durand-Kerner iteration. All roots get a
/// short Newton polish and are returned sorted by (Re, Im).
pub fn companion_roots(poly: &CharPoly) -> Result<Vec<Complex64>> {
    if poly.degree() < 1 {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    let lead = poly.coeffs[0];
    let monic: Vec<Complex64> = poly.coeffs.iter().map(|c| c / lead).collect();
    let n = poly.degree();
    let mut roots = if let Ok(real) = poly.real_coeffs() {
        let lead = real[0];
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -real[n - i] / lead;
        }
        complex_spectrum(&companion)
    } else if n == 2 {
        let (b, c) = (monic[1], monic[2]);
        let disc = (b * b - 4.0 * c).sqrt();
        vec![(-b + disc) / 2.0, (-b - disc) / 2.0]
    } else {
        durand_kerner(&monic)
    };
    for root in &mut roots {
        newton_polish(poly, root);
    }
    roots.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(roots)
}

fn newton_polish(poly: &CharPoly, root: &mut Complex64) {
    for _ in 0..3 {
        let d = poly.derivative_eval(*root);
        if d.norm() < 1e-300 {
            return;
        }
        let step = poly.eval(*root) / d;
        if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 1.0 {
            return;
        }
        *root -= step;
    }
}

fn durand_kerner(monic: &[Complex64]) -> Vec<Complex64> {
    let n = monic.len() - 1;
    let eval = |s: Complex64| monic.iter().fold(Complex64::new(0.0, 0.0), |a, &c| a * s + c);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(0.4, 0.9).powu(i as u32 + 1))
        .collect();
    for _ in 0..200 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 {
            break;
        }
    }
    roots
}

/// Routh array of a real-coefficient polynomial with its first-column verdict.
#[derive(Debug, Clone)]
pub struct RouthTable {
    pub rows: Vec<Vec<f64>>,
    pub first_column: Vec<f64>,
    pub verdict: StabilityClass,
    /// Index of a first-column pivot that vanished, when the recurrence had
    /// to stop early.
    pub marginal_row: Option<usize>,
}

/// Builds the Routh array and classifies the first column.
///
/// The sign tolerance is `1e-12 * max|coeff|`. A vanishing pivot is reported
/// as a Marginal verdict rather than epsilon-perturbed.
pub fn routh_real(poly: &CharPoly) -> Result<RouthTable> {
    let coeffs = poly.real_coeffs()?;
    let n = poly.degree();
    let tol = 1e-12 * coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let width = n / 2 + 1;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut row0 = vec![0.0; width];
    let mut row1 = vec![0.0; width];
    for (i, &c) in coeffs.iter().enumerate() {
        if i % 2 == 0 {
            row0[i / 2] = c;
        } else {
            row1[i / 2] = c;
        }
    }
    rows.push(row0);
    if n >= 1 {
        rows.push(row1);
    }
    let mut marginal_row = None;
    while rows.len() < n + 1 {
        let prev2 = &rows[rows.len() - 2];
        let prev1 = &rows[rows.len() - 1];
        let pivot = prev1[0];
        if pivot.abs() <= tol {
            marginal_row = Some(rows.len() - 1);
            break;
        }
        let mut next = vec![0.0; width];
        for j in 0..width - 1 {
            next[j] = (pivot * prev2[j + 1] - prev2[0] * prev1[j + 1]) / pivot;
        }
        rows.push(next);
    }
    let first_column: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let verdict = if marginal_row.is_some() {
        StabilityClass::Marginal
    } else if first_column.iter().all(|&v| v > tol) {
        StabilityClass::Stable
    } else if first_column.iter().any(|&v| v < -tol) {
        StabilityClass::Unstable
    } else {
        StabilityClass::Marginal
    };
    Ok(RouthTable {
        rows,
        first_column,
        verdict,
        marginal_row,
    })
}

/// Verdict with the dominant pole and a short description of the witness.
#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    pub verdict: StabilityClass,
    pub dominant_pole: Complex64,
    pub witness: String,
}

/// Stability of `lambda^2 + beta_coef * lambda - mu` with complex `mu`.
///
/// The generalized Hurwitz array reduces to: stable iff
/// `Re(mu) < -Im(mu)^2 / beta_coef^2`. The verdict is cross-checked against
/// the closed-form roots of the same quadratic.
pub fn generalized_hurwitz_quadratic(beta_coef: f64, mu: Complex64) -> StabilityVerdict {
    assert!(beta_coef > 0.0, "beta_coef must be positive");
    let margin = -mu.im * mu.im / (beta_coef * beta_coef) - mu.re;
    let tol = 1e-12 * mu.norm().max(1.0);
    let poly = CharPoly::new(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(beta_coef, 0.0),
        -mu,
    ])
    .expect("leading coefficient is 1");
    let roots = companion_roots(&poly).expect("degree 2");
    let dominant = dominant_pole(&roots);
    let verdict = if margin > tol {
        StabilityClass::Stable
    } else if margin < -tol {
        StabilityClass::Unstable
    } else {
        StabilityClass::Marginal
    };
    let witness = format!(
        "hurwitz margin {margin:.6e}, dominant root {:.6e}{:+.6e}i",
        dominant.re, dominant.im
    );
    debug_assert!(
        verdict == StabilityClass::Marginal
            || (verdict == StabilityClass::Stable) == (dominant.re < 0.0),
        "hurwitz test disagrees with root oracle"
    );
    StabilityVerdict {
        verdict,
        dominant_pole: dominant,
        witness,
    }
}

/// Phase-space coefficient matrix of the first-order Lookahead model on a
/// bilinear game, in coordinates `(x, y, dx, dy)`:
///
/// ```text
/// [       0              0         I       0   ]
/// [       0              0         0       I   ]
/// [ -k(k-1)a A^2   -(2ka/g) A   -(2/g)I    0   ]
/// [  (2ka/g) A     -k(k-1)a A^2    0    -(2/g)I ]
/// ```
pub fn la_block_matrix(game: &GameSpec, config: &LookaheadConfig) -> Result<DMatrix<f64>> {
    if !game.is_bilinear() {
        return Err(Error::NotBilinear);
    }
    let h = game.half_dim();
    let a = game.a_mat();
    let a2 = a * a;
    let (k, alpha, gamma) = (config.k as f64, config.alpha, config.gamma);
    let mut m = DMatrix::zeros(4 * h, 4 * h);
    for i in 0..2 * h {
        m[(i, 2 * h + i)] = 1.0;
    }
    let damp = -2.0 / gamma;
    for i in 0..2 * h {
        m[(2 * h + i, 2 * h + i)] = damp;
    }
    let qa2 = -k * (k - 1.0) * alpha * &a2;
    let ra = (2.0 * k * alpha / gamma) * a;
    m.view_mut((2 * h, 0), (h, h)).copy_from(&qa2);
    m.view_mut((2 * h, h), (h, h)).copy_from(&(-&ra));
    m.view_mut((3 * h, 0), (h, h)).copy_from(&ra);
    m.view_mut((3 * h, h), (h, h)).copy_from(&qa2);
    Ok(m)
}

/// Left side minus right side of the concluding inequality of the spectral
/// argument: `||Ax||^2 + ||Ay||^2 - 4 (alpha k / (k-1)) |conj(x)^T A y|^2`.
/// Diagnostic only; the convergence claim itself is checked spectrally.
pub fn mode_coupling_margin(
    a_mat: &DMatrix<f64>,
    x: &DVector<Complex64>,
    y: &DVector<Complex64>,
    config: &LookaheadConfig,
) -> f64 {
    assert!(config.k >= 2, "margin requires k >= 2");
    let ac = a_mat.map(|v| Complex64::new(v, 0.0));
    let ax = &ac * x;
    let ay = &ac * y;
    let lhs = ax.iter().map(|v| v.norm_sqr()).sum::<f64>()
        + ay.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let cross: Complex64 = x.iter().zip(ay.iter()).map(|(xi, ayi)| xi.conj() * ayi).sum();
    let k = config.k as f64;
    lhs - 4.0 * (config.alpha * k / (k - 1.0)) * cross.norm_sqr()
}

/// Gradient-descent characteristic polynomial for the mode `lambda_i`:
/// `s^4 + (2/g)(1 + lambda) s^3 + (4/g^2) lambda s^2 + 0 s - 4/g^2`.
pub fn gd_char_poly(lambda: f64, gamma: f64) -> CharPoly {
    assert!(gamma > 0.0);
    CharPoly::from_real(&[
        1.0,
        2.0 / gamma * (1.0 + lambda),
        4.0 / (gamma * gamma) * lambda,
        0.0,
        -4.0 / (gamma * gamma),
    ])
    .expect("leading 1")
}

/// Lookahead-on-bilinear characteristic polynomial per mode: the expansion of
/// `(s^2 + (2/g) s + a k(k-1) lambda^2)^2 + ((2 k a / g) lambda)^2`.
pub fn la_bg_char_poly(lambda: f64, config: &LookaheadConfig) -> CharPoly {
    let (k, alpha, gamma) = (config.k as f64, config.alpha, config.gamma);
    let q = alpha * k * (k - 1.0) * lambda * lambda;
    let r = 2.0 * k * alpha * lambda / gamma;
    CharPoly::from_real(&[
        1.0,
        4.0 / gamma,
        4.0 / (gamma * gamma) + 2.0 * q,
        4.0 * q / gamma,
        q * q + r * r,
    ])
    .expect("leading 1")
}

/// Quadratic-game characteristic polynomial from the scalar reduction:
/// the expansion of `(g/2 s^2 + s + m_x)(g/2 s^2 + s + m_y) + l_x l_y`.
pub fn la_qd_char_poly(m_x: f64, m_y: f64, l_x: f64, l_y: f64, gamma: f64) -> CharPoly {
    assert!(gamma > 0.0);
    let g = gamma;
    CharPoly::from_real(&[
        g * g / 4.0,
        g,
        1.0 + 0.5 * g * (m_x + m_y),
        m_x + m_y,
        m_x * m_y + l_x * l_y,
    ])
    .expect("leading g^2/4 > 0")
}

/// Degree-6 characteristic polynomial of the second-order model:
/// `(g^2/6 s^3 + g/2 s^2 + s + T)^2 + L^2` with coefficients
/// `a6 = g^4/36, a5 = g^3/6, a4 = 7g^2/12, a3 = g^2 T/3 + g, a2 = g T + 1,
/// a1 = 2T, a0 = T^2 + L^2`.
pub fn la2_gamma2_char_poly(t: f64, l: f64, gamma: f64) -> CharPoly {
    assert!(gamma > 0.0);
    let g = gamma;
    CharPoly::from_real(&[
        g.powi(4) / 36.0,
        g.powi(3) / 6.0,
        7.0 * g * g / 12.0,
        g * g * t / 3.0 + g,
        g * t + 1.0,
        2.0 * t,
        t * t + l * l,
    ])
    .expect("leading g^4/36 > 0")
}

/// Root with the largest real part; ties broken toward larger |Im|, then
/// toward positive Im.
pub fn dominant_pole(roots: &[Complex64]) -> Complex64 {
    assert!(!roots.is_empty(), "dominant_pole needs at least one root");
    let mut best = roots[0];
    for &r in &roots[1..] {
        let key = (r.re, r.im.abs(), r.im);
        let best_key = (best.re, best.im.abs(), best.im);
        if key.partial_cmp(&best_key) == Some(std::cmp::Ordering::Greater) {
            best = r;
        }
    }
    best
}
