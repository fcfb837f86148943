//! Dense complex matrices with ℤ/2-grading support.
//!
//! Everything here works on `nalgebra::DMatrix<Complex<f64>>`. Subspaces of a
//! matrix space are always taken with respect to the Frobenius inner product
//! `⟨A, B⟩ = tr(A* B)`, and numerical rank is decided relative to the largest
//! singular value.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default relative rank threshold.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Default residual threshold used for membership and validation checks.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("grading is not a self-adjoint involution (residual {residual:.3e})")]
    NotAGrading { residual: f64 },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("operator is not self-adjoint (residual {residual:.3e})")]
    NotSelfAdjoint { residual: f64 },
}

/// Rank threshold and residual threshold, carried together through every
/// computation that has to decide "zero or not".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: DEFAULT_RANK_TOL,
            residual: DEFAULT_RESIDUAL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    /// Parity of a product.
    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// A self-adjoint involution.
#[derive(Debug, Clone, PartialEq)]
pub struct Grading(CMatrix);

impl Grading {
    pub fn new(mat: CMatrix, tol: f64) -> Result<Self, LinalgError> {
        ensure_square(&mat)?;
        ensure_finite(&mat)?;
        let n = mat.nrows();
        let inv = (&mat * &mat - CMatrix::identity(n, n)).norm();
        let sa = (&mat - mat.adjoint()).norm();
        let residual = inv.max(sa);
        if residual > tol {
            return Err(LinalgError::NotAGrading { residual });
        }
        Ok(Self(mat))
    }

    /// Diagonal grading from a list of signs; nonnegative entries count as +1.
    pub fn from_signs(signs: &[f64]) -> Self {
        let diag: Vec<C64> = signs
            .iter()
            .map(|&s| C64::new(if s >= 0.0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        Self(CMatrix::from_diagonal(&CVector::from_vec(diag)))
    }

    pub fn trivial(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// `‖γ a γ − s·a‖_F` with `s = ±1` for the requested parity.
    pub fn parity_residual(&self, a: &CMatrix, parity: Parity) -> f64 {
        (&self.0 * a * &self.0 - a * C64::from(parity.sign())).norm()
    }
}

/// A square operator with a declared parity.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedOperator {
    pub mat: CMatrix,
    pub parity: Parity,
}

impl GradedOperator {
    pub fn new(mat: CMatrix, parity: Parity) -> Self {
        Self { mat, parity }
    }

    pub fn even(mat: CMatrix) -> Self {
        Self::new(mat, Parity::Even)
    }

    pub fn odd(mat: CMatrix) -> Self {
        Self::new(mat, Parity::Odd)
    }
}

pub fn ensure_square(a: &CMatrix) -> Result<(), LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

pub fn ensure_finite(a: &CMatrix) -> Result<(), LinalgError> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

fn ensure_same_shape(a: &CMatrix, b: &CMatrix) -> Result<(), LinalgError> {
    if a.shape() != b.shape() {
        return Err(LinalgError::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

/// Ungraded commutator `ab − ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `ab + ba`.
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// `[a, b] = ab − (−1)^{∂a ∂b} ba`.
pub fn graded_commutator(a: &GradedOperator, b: &GradedOperator) -> Result<CMatrix, LinalgError> {
    ensure_square(&a.mat)?;
    ensure_same_shape(&a.mat, &b.mat)?;
    let ab = &a.mat * &b.mat;
    let ba = &b.mat * &a.mat;
    Ok(match (a.parity, b.parity) {
        (Parity::Odd, Parity::Odd) => ab + ba,
        _ => ab - ba,
    })
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `a ⊗ 1` on `H_a ⊗ ℂ^right_dim`.
pub fn left_lift(a: &CMatrix, right_dim: usize) -> CMatrix {
    a.kronecker(&identity(right_dim))
}

/// Graded `1 ⊗ b`, realised as `γ_left^{∂b} ⊗ b`.
pub fn graded_right_lift(b: &GradedOperator, gamma_left: &Grading) -> CMatrix {
    match b.parity {
        Parity::Even => identity(gamma_left.dim()).kronecker(&b.mat),
        Parity::Odd => gamma_left.matrix().kronecker(&b.mat),
    }
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    to_faer(a)
        .singular_values()
        .expect("SVD of a finite matrix converges")
        .into_iter()
        .fold(0.0, f64::max)
}

/// `‖a − b‖_F / max(1, ‖a‖_F)`.
pub fn relative_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / a.norm().max(1.0)
}

/// `‖a − a*‖_F`.
pub fn self_adjoint_residual(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMatrix, tol: f64) -> Result<Vec<f64>, LinalgError> {
    ensure_square(a)?;
    let residual = self_adjoint_residual(a);
    if residual > tol * a.norm().max(1.0) {
        return Err(LinalgError::NotSelfAdjoint { residual });
    }
    let sym = (a + a.adjoint()) * C64::from(0.5);
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Column-major flattening; matches the storage order nalgebra uses.
pub fn vectorize(a: &CMatrix) -> CVector {
    CVector::from_column_slice(a.as_slice())
}

pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Rotate `v` so that its first entry of non-negligible modulus is real and
/// positive.
fn normalize_phase(v: &mut CVector) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

fn to_faer(a: &CMatrix) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        faer::c64::new(z.re, z.im)
    })
}

fn from_faer(a: faer::MatRef<'_, faer::c64>) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        C64::new(z.re, z.im)
    })
}

/// Thin SVD sorted by descending singular value: `(σ, u columns, v* rows)`.
/// Requires `rows ≥ cols` for a full set of right singular vectors.
fn sorted_svd(a: &CMatrix) -> (Vec<f64>, CMatrix, CMatrix) {
    if a.is_empty() {
        return (Vec::new(), CMatrix::zeros(a.nrows(), 0), CMatrix::zeros(0, a.ncols()));
    }
    let svd = to_faer(a).thin_svd().expect("SVD of a finite matrix converges");
    let s = svd.S().column_vector();
    let u = from_faer(svd.U());
    let v = from_faer(svd.V());
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&i, &j| s[j].re.total_cmp(&s[i].re));
    let sigma = order.iter().map(|&i| s[i].re).collect();
    let u_sorted = CMatrix::from_columns(&order.iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>());
    let v_sorted = CMatrix::from_rows(&order.iter().map(|&i| v.column(i).adjoint()).collect::<Vec<_>>());
    (sigma, u_sorted, v_sorted)
}

/// Frobenius-orthonormal basis of a subspace of `rows × cols` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    rows: usize,
    cols: usize,
    rank_tol: f64,
    basis: Vec<CMatrix>,
}

impl SubspaceBasis {
    pub fn empty(rows: usize, cols: usize, rank_tol: f64) -> Self {
        Self {
            rows,
            cols,
            rank_tol,
            basis: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.basis
    }

    fn check_shape(&self, a: &CMatrix) -> Result<(), LinalgError> {
        if a.shape() != (self.rows, self.cols) {
            return Err(LinalgError::ShapeMismatch {
                left: a.shape(),
                right: (self.rows, self.cols),
            });
        }
        Ok(())
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, a: &CMatrix) -> Result<CMatrix, LinalgError> {
        self.check_shape(a)?;
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for e in &self.basis {
            out += e * e.dotc(a);
        }
        Ok(out)
    }

    /// `a` minus its orthogonal projection onto the span.
    pub fn complement(&self, a: &CMatrix) -> Result<CMatrix, LinalgError> {
        Ok(a - self.project(a)?)
    }

    /// Frobenius distance to the span, normalised by `max(1, ‖a‖_F)`.
    pub fn membership_residual(&self, a: &CMatrix) -> Result<f64, LinalgError> {
        Ok(self.complement(a)?.norm() / a.norm().max(1.0))
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dotc(b) - C64::from(target)).norm());
            }
        }
        worst
    }
}

/// Orthonormal basis of `span(mats)`.
///
/// Singular directions with `σ ≤ rank_tol · σ_max` are discarded. The result
/// is deterministic: directions come in descending singular value order and
/// each one is phase-normalised.
pub fn subspace_basis(mats: &[CMatrix], rank_tol: f64) -> Result<SubspaceBasis, LinalgError> {
    let Some(first) = mats.first() else {
        return Ok(SubspaceBasis::empty(0, 0, rank_tol));
    };
    let (rows, cols) = first.shape();
    for m in mats {
        ensure_same_shape(first, m)?;
    }
    let columns: Vec<CVector> = mats.iter().map(vectorize).collect();
    let stacked = CMatrix::from_columns(&columns);
    let (sigma, u, _) = sorted_svd(&stacked);
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let mut basis = Vec::new();
    if sigma_max > 0.0 {
        for (k, &s) in sigma.iter().enumerate() {
            if s <= rank_tol * sigma_max {
                break;
            }
            let mut v = u.column(k).into_owned();
            normalize_phase(&mut v);
            basis.push(unvectorize(&v, rows, cols));
        }
    }
    Ok(SubspaceBasis {
        rows,
        cols,
        rank_tol,
        basis,
    })
}

/// Orthonormal basis of the numerical null space of `l`.
pub fn solve_kernel(l: &CMatrix, rank_tol: f64) -> Vec<CVector> {
    let (rows, cols) = l.shape();
    if cols == 0 {
        return Vec::new();
    }
    // Pad with zero rows so the SVD returns a full set of right singular vectors.
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(l);
        p
    } else {
        l.clone()
    };
    let (sigma, _, v_t) = sorted_svd(&padded);
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| sigma_max == 0.0 || s <= rank_tol * sigma_max)
        .map(|(k, _)| {
            let mut v: CVector = v_t.row(k).adjoint();
            normalize_phase(&mut v);
            v
        })
        .collect()
}

/// Least-squares solver for coordinates against a fixed family of vectors,
/// via a precomputed pseudo-inverse.
#[derive(Debug, Clone)]
pub struct CoordinateSolver {
    pinv: CMatrix,
    frame: CMatrix,
}

impl CoordinateSolver {
    pub fn new(vectors: &[CVector], rank_tol: f64) -> Self {
        let frame = CMatrix::from_columns(vectors);
        let (sigma, u, v_t) = sorted_svd(&frame);
        let sigma_max = sigma.first().copied().unwrap_or(0.0);
        let mut pinv = CMatrix::zeros(frame.ncols(), frame.nrows());
        for (k, &s) in sigma.iter().enumerate() {
            if s > rank_tol * sigma_max && s > 0.0 {
                pinv += v_t.row(k).adjoint() * u.column(k).adjoint() * C64::from(1.0 / s);
            }
        }
        Self { pinv, frame }
    }

    /// Coordinates and the absolute residual `‖frame·c − v‖`.
    pub fn solve(&self, v: &CVector) -> (CVector, f64) {
        let c = &self.pinv * v;
        let residual = (&self.frame * &c - v).norm();
        (c, residual)
    }
}
