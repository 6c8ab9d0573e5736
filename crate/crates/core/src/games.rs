//! Game classes and their vector-field quantities.
//!
//! A quadratic min-max game is `min_x max_y <x, Ay> + 1/2 <x, Cx> - 1/2 <y, By>`
//! with `x, y` of length `half_dim` and `B`, `C` positive semi-definite. The
//! bilinear game is the special case `B = C = 0`. All games here are affine in
//! the joint variable `z = (x, y)`, have their unique equilibrium at the
//! origin, and are immutable after construction.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalue floor for the PSD validation of `B` and `C`.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// A validated quadratic game, defined by its three coefficient blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    a_mat: DMatrix<f64>,
    b_mat: DMatrix<f64>,
    c_mat: DMatrix<f64>,
    half_dim: usize,
}

/// A joint point `(x, y)` of the two players.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPoint {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

impl JointPoint {
    pub fn new(x: DVector<f64>, y: DVector<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "x has length {}, y has length {}",
                x.len(),
                y.len()
            )));
        }
        Ok(Self { x, y })
    }

    /// Both players set to the all-ones vector.
    pub fn ones(half_dim: usize) -> Self {
        Self {
            x: DVector::from_element(half_dim, 1.0),
            y: DVector::from_element(half_dim, 1.0),
        }
    }

    pub fn origin(half_dim: usize) -> Self {
        Self {
            x: DVector::zeros(half_dim),
            y: DVector::zeros(half_dim),
        }
    }

    pub fn half_dim(&self) -> usize {
        self.x.len()
    }

    /// Concatenated joint vector `z = (x, y)` of length `2 * half_dim`.
    pub fn z(&self) -> DVector<f64> {
        let mut z = DVector::zeros(2 * self.x.len());
        z.rows_mut(0, self.x.len()).copy_from(&self.x);
        z.rows_mut(self.x.len(), self.y.len()).copy_from(&self.y);
        z
    }

    pub fn from_z(z: &DVector<f64>) -> Result<Self> {
        if !z.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "joint vector length {} is odd",
                z.len()
            )));
        }
        let h = z.len() / 2;
        Ok(Self {
            x: z.rows(0, h).into_owned(),
            y: z.rows(h, h).into_owned(),
        })
    }

    /// Euclidean distance to the equilibrium (the origin), computed
    /// overflow-safely for very large coordinates.
    pub fn distance_to_equilibrium(&self) -> f64 {
        safe_norm2(self.x.iter().chain(self.y.iter()).copied())
    }
}

/// Euclidean norm that rescales by the largest magnitude first, so coordinates
/// near the overflow guard do not square to infinity.
pub(crate) fn safe_norm2(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return if m == 0.0 { 0.0 } else { f64::INFINITY };
    }
    let s: f64 = values.map(|v| (v / m) * (v / m)).sum();
    m * s.sqrt()
}

fn check_square_same_dim(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<usize> {
    for (name, m) in [("A", a), ("B", b), ("C", c)] {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    if a.nrows() != b.nrows() || a.nrows() != c.nrows() || a.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "A, B, C have dims {}, {}, {}",
            a.nrows(),
            b.nrows(),
            c.nrows()
        )));
    }
    Ok(a.nrows())
}

fn check_symmetric_psd(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let eig = SymmetricEigen::new(m.clone());
    if let Some(min) = eig.eigenvalues.iter().cloned().reduce(f64::min) {
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPsd { eigenvalue: min });
        }
    }
    Ok(())
}

impl GameSpec {
    /// Builds and validates a quadratic game from its `A`, `B`, `C` blocks.
    ///
    /// `B` and `C` must be symmetric with eigenvalues no smaller than
    /// `-PSD_TOLERANCE`; all three blocks must be square of equal dimension.
    pub fn quadratic(a_mat: DMatrix<f64>, b_mat: DMatrix<f64>, c_mat: DMatrix<f64>) -> Result<Self> {
        let half_dim = check_square_same_dim(&a_mat, &b_mat, &c_mat)?;
        check_symmetric_psd(&b_mat)?;
        check_symmetric_psd(&c_mat)?;
        Ok(Self {
            a_mat,
            b_mat,
            c_mat,
            half_dim,
        })
    }

    /// Bilinear game `min_x max_y <x, Ay>`, i.e. `B = C = 0`.
    pub fn bilinear(a_mat: DMatrix<f64>) -> Result<Self> {
        let n = a_mat.nrows();
        Self::quadratic(a_mat, DMatrix::zeros(n, n), DMatrix::zeros(n, n))
    }

    /// Bilinear game with `A` the identity of the given dimension.
    pub fn bilinear_identity(half_dim: usize) -> Self {
        Self::bilinear(DMatrix::identity(half_dim, half_dim)).expect("identity is valid")
    }

    /// The scalar mixing game with loss `(1-beta) x^2 + beta x y - (1-beta) y^2`.
    ///
    /// Its gradient field requires `A = [beta]` and `B = C = [2(1-beta)]`:
    /// the quadratic form carries a 1/2 that the mixing loss does not.
    /// `beta = 1` is the scalar bilinear game, `beta = 0` is purely potential.
    pub fn beta_game(beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidConfig(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
        let a = DMatrix::from_element(1, 1, beta);
        let bc = DMatrix::from_element(1, 1, 2.0 * (1.0 - beta));
        Self::quadratic(a, bc.clone(), bc)
    }

    /// Purely potential game `A = 0`, `B = C = I` of the given dimension.
    pub fn potential_identity(half_dim: usize) -> Self {
        let eye = DMatrix::identity(half_dim, half_dim);
        Self::quadratic(DMatrix::zeros(half_dim, half_dim), eye.clone(), eye)
            .expect("identity blocks are valid")
    }

    pub fn a_mat(&self) -> &DMatrix<f64> {
        &self.a_mat
    }

    pub fn b_mat(&self) -> &DMatrix<f64> {
        &self.b_mat
    }

    pub fn c_mat(&self) -> &DMatrix<f64> {
        &self.c_mat
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    pub fn is_bilinear(&self) -> bool {
        self.b_mat.iter().all(|v| *v == 0.0) && self.c_mat.iter().all(|v| *v == 0.0)
    }

    pub fn is_scalar(&self) -> bool {
        self.half_dim == 1
    }

    /// Loss value `<x, Ay> + 1/2 <x, Cx> - 1/2 <y, By>`.
    pub fn loss(&self, p: &JointPoint) -> Result<f64> {
        self.check_point(p)?;
        let xay = p.x.dot(&(&self.a_mat * &p.y));
        let xcx = p.x.dot(&(&self.c_mat * &p.x));
        let yby = p.y.dot(&(&self.b_mat * &p.y));
        Ok(xay + 0.5 * xcx - 0.5 * yby)
    }

    fn check_point(&self, p: &JointPoint) -> Result<()> {
        if p.half_dim() != self.half_dim {
            return Err(Error::DimensionMismatch(format!(
                "point has half_dim {}, game has {}",
                p.half_dim(),
                self.half_dim
            )));
        }
        Ok(())
    }

    /// The VI operator `F(z) = (Cx + Ay, -Ax + By)`; `(Ay, -Ax)` on bilinear games.
    pub fn operator_f(&self, p: &JointPoint) -> Result<DVector<f64>> {
        self.check_point(p)?;
        let fx = &self.c_mat * &p.x + &self.a_mat * &p.y;
        let fy = -(&self.a_mat * &p.x) + &self.b_mat * &p.y;
        Ok(stack(&fx, &fy))
    }

    /// The constant Jacobian of `F`: the block matrix `[C A; -A B]`.
    pub fn jacobian_f(&self) -> DMatrix<f64> {
        let h = self.half_dim;
        let mut j = DMatrix::zeros(2 * h, 2 * h);
        j.view_mut((0, 0), (h, h)).copy_from(&self.c_mat);
        j.view_mut((0, h), (h, h)).copy_from(&self.a_mat);
        j.view_mut((h, 0), (h, h)).copy_from(&(-&self.a_mat));
        j.view_mut((h, h), (h, h)).copy_from(&self.b_mat);
        j
    }

    /// First block column `T_x = [C; -A]` of the operator, `F = T_x x + T_y y`.
    pub fn t_x(&self) -> DMatrix<f64> {
        vstack(&self.c_mat, &(-&self.a_mat))
    }

    /// Second block column `T_y = [A; B]`.
    pub fn t_y(&self) -> DMatrix<f64> {
        vstack(&self.a_mat, &self.b_mat)
    }

    /// Closed-form x-column of `JF * F`: `T'_x = [CC - AA; -(AC + BA)]`.
    pub fn t_prime_x(&self) -> DMatrix<f64> {
        let top = &self.c_mat * &self.c_mat - &self.a_mat * &self.a_mat;
        let bottom = -(&self.a_mat * &self.c_mat + &self.b_mat * &self.a_mat);
        vstack(&top, &bottom)
    }

    /// Closed-form y-column of `JF * F`: `T'_y = [CA + AB; BB - AA]`.
    pub fn t_prime_y(&self) -> DMatrix<f64> {
        let top = &self.c_mat * &self.a_mat + &self.a_mat * &self.b_mat;
        let bottom = &self.b_mat * &self.b_mat - &self.a_mat * &self.a_mat;
        vstack(&top, &bottom)
    }

    /// `JF(z) * F(z)`, assembled from the closed-form blocks; on bilinear
    /// games this reduces to `(-A^2 x, -A^2 y)`.
    pub fn jf_product(&self, p: &JointPoint) -> Result<DVector<f64>> {
        self.check_point(p)?;
        Ok(self.t_prime_x() * &p.x + self.t_prime_y() * &p.y)
    }

    /// The `F^T H F` contraction appearing in the second-order model.
    ///
    /// `H` is the derivative of the Jacobian; every game in scope is affine,
    /// so this is identically zero. The operation exists so the second-order
    /// right-hand side is assembled term by term as written.
    pub fn hessian_contraction(&self, p: &JointPoint) -> Result<DVector<f64>> {
        self.check_point(p)?;
        Ok(DVector::zeros(self.dim()))
    }

    /// Short descriptor used in sweep outputs.
    pub fn tag(&self) -> String {
        if self.is_scalar() {
            let (a, b, c) = (self.a_mat[(0, 0)], self.b_mat[(0, 0)], self.c_mat[(0, 0)]);
            if self.is_bilinear() {
                return format!("bg(a={a})");
            }
            // recognize the mixing game: b = c = 2(1 - a)
            if (b - c).abs() == 0.0 && (b - 2.0 * (1.0 - a)).abs() < 1e-12 {
                return format!("beta({a})");
            }
            return format!("qd(a={a},b={b},c={c})");
        }
        if self.is_bilinear() {
            format!("bg(dim={})", self.half_dim)
        } else {
            format!("qd(dim={})", self.half_dim)
        }
    }
}

fn stack(top: &DVector<f64>, bottom: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(top.len() + bottom.len());
    out.rows_mut(0, top.len()).copy_from(top);
    out.rows_mut(top.len(), bottom.len()).copy_from(bottom);
    out
}

fn vstack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), (top.nrows(), top.ncols())).copy_from(top);
    out.view_mut((top.nrows(), 0), (bottom.nrows(), bottom.ncols()))
        .copy_from(bottom);
    out
}
