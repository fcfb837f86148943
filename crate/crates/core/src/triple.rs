//! Finite-dimensional spectral triples `(𝓑, H, D)` with grading.

use std::sync::OnceLock;

use thiserror::Error;

use crate::check::{Check, ValidationReport};
use crate::linalg::{
    self, commutator, spectral_norm, CMatrix, CVector, CoordinateSolver, Grading, LinalgError,
    Tolerances, C64,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TripleError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("algebra basis is empty")]
    EmptyBasis,
    #[error("{what} has shape {got:?}, expected {expected:?}")]
    Dimension {
        what: String,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("matrix is not in the algebra (relative residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },
    #[error("first basis element is not the identity (residual {residual:.3e})")]
    MissingUnit { residual: f64 },
    #[error("algebra element has {got} coordinates, basis has {expected}")]
    CoordinateLength { got: usize, expected: usize },
}

/// Coordinates of an algebra element in the triple's distinguished basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub coeffs: CVector,
}

impl AlgebraElement {
    pub fn new(coeffs: CVector) -> Self {
        Self { coeffs }
    }

    pub fn from_slice(coeffs: &[C64]) -> Self {
        Self::new(CVector::from_column_slice(coeffs))
    }

    pub fn zero(d: usize) -> Self {
        Self::new(CVector::zeros(d))
    }

    /// The `k`-th basis vector (zero-based).
    pub fn unit(d: usize, k: usize) -> Self {
        let mut c = CVector::zeros(d);
        c[k] = C64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn one(d: usize) -> Self {
        Self::unit(d, 0)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self::new(&self.coeffs * alpha)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.coeffs + &other.coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(&self.coeffs - &other.coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|z| *z == C64::new(0.0, 0.0))
    }
}

/// Structure constants: coordinates of `b_i b_j` and of `b_i*`.
#[derive(Debug, Clone)]
pub(crate) struct Structure {
    pub(crate) mult: Vec<CVector>,
    pub(crate) star: Vec<CVector>,
}

#[derive(Debug, Clone)]
pub struct SpectralTriple {
    gamma: Grading,
    basis: Vec<CMatrix>,
    dirac: CMatrix,
    dirac_sq: CMatrix,
    comm_d: Vec<CMatrix>,
    comm_d2: Vec<CMatrix>,
    tol: Tolerances,
    solver: CoordinateSolver,
    structure: OnceLock<Result<Structure, TripleError>>,
}

/// Zeroes pseudo-inverse round-off so exact structure constants stay exact.
fn snap(mut v: CVector) -> CVector {
    let scale = v.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    for z in v.iter_mut() {
        if z.norm() < 1e-13 * scale {
            *z = C64::new(0.0, 0.0);
        }
    }
    v
}

impl SpectralTriple {
    /// Checks shapes only; the algebraic invariants are reported by
    /// [`SpectralTriple::validate`].
    pub fn new(
        gamma: Grading,
        basis: Vec<CMatrix>,
        dirac: CMatrix,
        tol: Tolerances,
    ) -> Result<Self, TripleError> {
        if basis.is_empty() {
            return Err(TripleError::EmptyBasis);
        }
        let n = gamma.dim();
        let expect = |what: String, m: &CMatrix| -> Result<(), TripleError> {
            if m.shape() != (n, n) {
                return Err(TripleError::Dimension {
                    what,
                    got: m.shape(),
                    expected: (n, n),
                });
            }
            linalg::ensure_finite(m)?;
            Ok(())
        };
        expect("dirac".into(), &dirac)?;
        for (k, b) in basis.iter().enumerate() {
            expect(format!("basis[{k}]"), b)?;
        }
        let dirac_sq = &dirac * &dirac;
        let comm_d = basis.iter().map(|b| commutator(&dirac, b)).collect();
        let comm_d2 = basis.iter().map(|b| commutator(&dirac_sq, b)).collect();
        let vecs: Vec<CVector> = basis.iter().map(linalg::vectorize).collect();
        let solver = CoordinateSolver::new(&vecs, tol.rank);
        Ok(Self {
            gamma,
            basis,
            dirac,
            dirac_sq,
            comm_d,
            comm_d2,
            tol,
            solver,
            structure: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.gamma.dim()
    }

    /// Dimension of the algebra.
    pub fn d(&self) -> usize {
        self.basis.len()
    }

    pub fn gamma(&self) -> &Grading {
        &self.gamma
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn dirac(&self) -> &CMatrix {
        &self.dirac
    }

    pub fn dirac_sq(&self) -> &CMatrix {
        &self.dirac_sq
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// `[D, b_k]`.
    pub fn comm_d(&self, k: usize) -> &CMatrix {
        &self.comm_d[k]
    }

    pub fn comm_d_all(&self) -> &[CMatrix] {
        &self.comm_d
    }

    pub fn comm_d2_all(&self) -> &[CMatrix] {
        &self.comm_d2
    }

    /// `[D², b_k]`.
    pub fn comm_d2(&self, k: usize) -> &CMatrix {
        &self.comm_d2[k]
    }

    /// Same triple with `D` replaced by `t·D`.
    pub fn scaled(&self, t: f64) -> Self {
        Self::new(self.gamma.clone(), self.basis.clone(), &self.dirac * C64::from(t), self.tol)
            .expect("scaling preserves shapes")
    }

    pub fn check_element(&self, a: &AlgebraElement) -> Result<(), TripleError> {
        if a.dim() != self.d() {
            return Err(TripleError::CoordinateLength {
                got: a.dim(),
                expected: self.d(),
            });
        }
        Ok(())
    }

    /// `Σ c_k b_k`.
    pub fn matrix_of(&self, a: &AlgebraElement) -> CMatrix {
        let n = self.n();
        let mut out = CMatrix::zeros(n, n);
        for (c, b) in a.coeffs.iter().zip(&self.basis) {
            if *c != C64::new(0.0, 0.0) {
                out += b * *c;
            }
        }
        out
    }

    /// Least-squares coordinates of `m`, failing when the relative residual
    /// exceeds the residual tolerance.
    pub fn algebra_coords(&self, m: &CMatrix) -> Result<AlgebraElement, TripleError> {
        let n = self.n();
        if m.shape() != (n, n) {
            return Err(TripleError::Dimension {
                what: "matrix".into(),
                got: m.shape(),
                expected: (n, n),
            });
        }
        let (c, abs) = self.solver.solve(&linalg::vectorize(m));
        let residual = abs / m.norm().max(1.0);
        if residual > self.tol.residual {
            return Err(TripleError::NotInAlgebra { residual });
        }
        Ok(AlgebraElement::new(c))
    }

    pub(crate) fn structure(&self) -> Result<&Structure, TripleError> {
        self.structure
            .get_or_init(|| self.compute_structure())
            .as_ref()
            .map_err(Clone::clone)
    }

    fn compute_structure(&self) -> Result<Structure, TripleError> {
        let unit_residual = (&self.basis[0] - linalg::identity(self.n())).norm();
        if unit_residual > self.tol.residual {
            return Err(TripleError::MissingUnit {
                residual: unit_residual,
            });
        }
        let d = self.d();
        let mut mult = Vec::with_capacity(d * d);
        for bi in &self.basis {
            for bj in &self.basis {
                mult.push(snap(self.algebra_coords(&(bi * bj))?.coeffs));
            }
        }
        let star = self
            .basis
            .iter()
            .map(|b| self.algebra_coords(&b.adjoint()).map(|a| snap(a.coeffs)))
            .collect::<Result<_, _>>()?;
        Ok(Structure { mult, star })
    }

    /// Product in the algebra, through the structure constants.
    pub fn product(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement, TripleError> {
        self.check_element(a)?;
        self.check_element(b)?;
        let s = self.structure()?;
        let d = self.d();
        let mut out = CVector::zeros(d);
        for (i, ai) in a.coeffs.iter().enumerate() {
            if *ai == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                if *bj == C64::new(0.0, 0.0) {
                    continue;
                }
                out += &s.mult[i * d + j] * (ai * bj);
            }
        }
        Ok(AlgebraElement::new(out))
    }

    /// Involution in the algebra, through the structure constants.
    pub fn star(&self, a: &AlgebraElement) -> Result<AlgebraElement, TripleError> {
        self.check_element(a)?;
        let s = self.structure()?;
        let mut out = CVector::zeros(self.d());
        for (i, ai) in a.coeffs.iter().enumerate() {
            out += &s.star[i] * ai.conj();
        }
        Ok(AlgebraElement::new(out))
    }

    /// Checks every defining invariant and reports residuals against `tol`.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.n();
        let d_scale = self.dirac.norm().max(1.0);

        report.push(Check::at_most(
            "dirac.self_adjoint",
            linalg::self_adjoint_residual(&self.dirac) / d_scale,
            tol,
        ));
        report.push(Check::at_most(
            "dirac.odd",
            self.gamma.parity_residual(&self.dirac, linalg::Parity::Odd) / d_scale,
            tol,
        ));
        report.push(Check::at_most(
            "basis.unit",
            (&self.basis[0] - linalg::identity(n)).norm(),
            tol,
        ));
        let even = self
            .basis
            .iter()
            .map(|b| self.gamma.parity_residual(b, linalg::Parity::Even) / b.norm().max(1.0))
            .fold(0.0, f64::max);
        report.push(Check::at_most("basis.even", even, tol));

        // Independence: smallest relative singular value of the vectorised basis.
        let stacked = CMatrix::from_columns(&self.basis.iter().map(linalg::vectorize).collect::<Vec<_>>());
        let sv = stacked.singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let rel = if smax > 0.0 { smin / smax } else { 0.0 };
        report.push(Check::at_least("basis.independent", rel, self.tol.rank));

        let span = linalg::subspace_basis(&self.basis, self.tol.rank).expect("shapes checked");
        let mut closed_mult: f64 = 0.0;
        for bi in &self.basis {
            for bj in &self.basis {
                closed_mult = closed_mult.max(span.membership_residual(&(bi * bj)).expect("shapes checked"));
            }
        }
        report.push(Check::at_most("algebra.closed_under_product", closed_mult, tol));
        let closed_star = self
            .basis
            .iter()
            .map(|b| span.membership_residual(&b.adjoint()).expect("shapes checked"))
            .fold(0.0, f64::max);
        report.push(Check::at_most("algebra.closed_under_adjoint", closed_star, tol));
        report
    }

    /// `‖[[a, 0], [[D, a], a]]‖`.
    pub fn c1_norm(&self, a: &AlgebraElement) -> f64 {
        let am = self.matrix_of(a);
        spectral_norm(&block_lower(&am, &commutator(&self.dirac, &am), &am))
    }

    /// `max(‖π¹(a)‖, ‖π²(a)‖, ‖π²(a*)‖)` with
    /// `π²(a) = [[(D+i) a (D+i)⁻¹, 0], [[D², a](D+i)⁻¹, a]]`.
    pub fn c2_norm(&self, a: &AlgebraElement) -> f64 {
        let am = self.matrix_of(a);
        let n = self.n();
        let shifted = &self.dirac + linalg::identity(n) * C64::new(0.0, 1.0);
        // D self-adjoint, so D + i is invertible.
        let resolvent = shifted.clone().lu().try_inverse().expect("D + i is invertible");
        let pi2 = |x: &CMatrix| {
            block_lower(
                &(&shifted * x * &resolvent),
                &(commutator(&self.dirac_sq, x) * &resolvent),
                x,
            )
        };
        let astar = am.adjoint();
        self.c1_norm(a)
            .max(spectral_norm(&pi2(&am)))
            .max(spectral_norm(&pi2(&astar)))
    }
}

/// `[[top, 0], [lower, bottom]]`.
fn block_lower(top: &CMatrix, lower: &CMatrix, bottom: &CMatrix) -> CMatrix {
    let n = top.nrows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(top);
    out.view_mut((n, 0), (n, n)).copy_from(lower);
    out.view_mut((n, n), (n, n)).copy_from(bottom);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn two_point_validates() {
        let st = fixtures::two_point();
        let report = st.validate(1e-10);
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn non_self_adjoint_dirac_fails() {
        let mut d = CMatrix::zeros(2, 2);
        d[(0, 1)] = C64::new(1.0, 0.0);
        let st = fixtures::two_point_with(Grading::from_signs(&[1.0, -1.0]), d);
        let report = st.validate(1e-10);
        assert!(!report.get("dirac.self_adjoint").unwrap().passed);
    }

    #[test]
    fn trivial_grading_breaks_oddness() {
        let st = fixtures::two_point_with(Grading::trivial(2), fixtures::flip());
        let report = st.validate(1e-10);
        assert!(!report.get("dirac.odd").unwrap().passed);
        assert!(report.get("dirac.self_adjoint").unwrap().passed);
    }

    #[test]
    fn shape_mismatch_is_hard_failure() {
        let err = SpectralTriple::new(
            Grading::from_signs(&[1.0, -1.0]),
            vec![linalg::identity(2)],
            linalg::identity(3),
            Tolerances::default(),
        );
        assert!(matches!(err, Err(TripleError::Dimension { .. })));
    }

    #[test]
    fn algebra_coords_examples() {
        let st = fixtures::two_point();
        let b2 = st.basis()[1].clone();
        let e2 = st.algebra_coords(&b2).unwrap();
        assert!((e2.coeffs.clone() - AlgebraElement::unit(2, 1).coeffs).norm() < 1e-12);
        let sq = st.algebra_coords(&(&b2 * &b2)).unwrap();
        assert!((sq.coeffs - AlgebraElement::unit(2, 1).coeffs).norm() < 1e-12);
        match st.algebra_coords(st.dirac()) {
            Err(TripleError::NotInAlgebra { residual }) => assert!((residual - 1.0).abs() < 1e-12),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn norm_examples() {
        let st = fixtures::two_point();
        let one = AlgebraElement::one(2);
        let zero = AlgebraElement::zero(2);
        assert!((st.c1_norm(&one) - 1.0).abs() < 1e-12);
        assert!((st.c2_norm(&one) - 1.0).abs() < 1e-12);
        assert_eq!(st.c1_norm(&zero), 0.0);
        assert_eq!(st.c2_norm(&zero), 0.0);
        // numpy oracle (oracles/two_point.py): both equal sqrt(2)
        let b2 = AlgebraElement::unit(2, 1);
        assert!((st.c1_norm(&b2) - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((st.c2_norm(&b2) - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(st.c2_norm(&b2) >= st.c1_norm(&b2) - 1e-12);
    }

    #[test]
    fn structure_products_match_matrices() {
        let st = fixtures::three_point();
        let a = AlgebraElement::from_slice(&[C64::new(0.5, 0.1), C64::new(-1.0, 0.0), C64::new(0.0, 2.0)]);
        let b = AlgebraElement::from_slice(&[C64::new(1.0, 0.0), C64::new(0.3, -0.3), C64::new(0.0, 0.0)]);
        let ab = st.product(&a, &b).unwrap();
        assert!((st.matrix_of(&ab) - st.matrix_of(&a) * st.matrix_of(&b)).norm() < 1e-12);
        let astar = st.star(&a).unwrap();
        assert!((st.matrix_of(&astar) - st.matrix_of(&a).adjoint()).norm() < 1e-12);
    }

    #[test]
    fn missing_unit_is_reported() {
        let gamma = Grading::from_signs(&[1.0, -1.0]);
        let basis = vec![CMatrix::from_diagonal_element(2, 2, C64::new(2.0, 0.0))];
        let st = SpectralTriple::new(gamma, basis, fixtures::flip(), Tolerances::default()).unwrap();
        assert!(!st.validate(1e-10).get("basis.unit").unwrap().passed);
        assert!(matches!(st.structure(), Err(TripleError::MissingUnit { .. })));
    }
}
