//! Curvature operators of connections on projective modules.
//!
//! With `M = 1 ⊗_∇ D` and `N = 1 ⊗_∇ D²` the curvature is `R = M² − N`.
//! The closed formula `P[D̃,P][D̃,P]P + A_D² + P([D̃, A_D]₊ − A_D2)P` is an
//! independent second route; both agree whenever `A` is compressed by `P`.

use serde::Serialize;
use thiserror::Error;

use crate::check::{Check, ValidationReport};
use crate::fgp::{self, ModuleError, ProjectiveModule, UniversalConnectionForm};
use crate::forms::{self, FormsError};
use crate::linalg::{self, CMatrix, LinalgError, SubspaceBasis};
use crate::triple::{AlgebraElement, SpectralTriple, TripleError};

/// The reported curvature is `R = M² − N`; the opposite convention
/// `N − M²` is obtained by a global sign flip.
pub const SIGN_CONVENTION: &str = "R = (1 (x)_nabla D)^2 - 1 (x)_nabla D^2";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Triple(#[from] TripleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("vertical operator: {what} residual {residual:.3e}")]
    Vertical { what: &'static str, residual: f64 },
}

/// `M² − N`.
pub fn curvature_direct(st: &SpectralTriple, module: &ProjectiveModule, conn: &UniversalConnectionForm) -> Result<CMatrix, CurvatureError> {
    let m = fgp::product_operator(st, module, conn)?.mat;
    let n = fgp::product_operator_sq_lift(st, module, conn)?.mat;
    Ok(&m * &m - n)
}

/// `P[D̃,P][D̃,P]P + A_D² + P([D̃, A_D]₊ − A_D2)P`.
pub fn curvature_formula(st: &SpectralTriple, module: &ProjectiveModule, conn: &UniversalConnectionForm) -> Result<CMatrix, CurvatureError> {
    let rep = conn.represent(st, module)?;
    let p = module.projector();
    let dt = module.lifted_dirac(st);
    let dp = linalg::commutator(&dt, p);
    let da = linalg::anticommutator(&dt, &rep.a_d) - &rep.a_d2;
    Ok(p * &dp * &dp * p + &rep.a_d * &rep.a_d + p * da * p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    #[serde(skip)]
    pub r: CMatrix,
    pub route_residual: f64,
    pub symmetry_residual: f64,
    pub evenness_residual: f64,
    pub support_residual: f64,
    /// Spectral norm of `R`.
    pub norm: f64,
    #[serde(skip)]
    pub junk_canonical: CMatrix,
    pub junk_dim: usize,
}

impl CurvatureReport {
    /// Route equality at `route_tol` (relative), the structural invariants
    /// at `tol` (absolute Frobenius); symmetry only for Hermitian `A`.
    pub fn checks(&self, route_tol: f64, tol: f64, hermitian: bool) -> ValidationReport {
        let mut report = ValidationReport::default();
        report.push(Check::at_most("curvature.route_equality", self.route_residual, route_tol));
        report.push(Check::at_most("curvature.even", self.evenness_residual, tol));
        report.push(Check::at_most("curvature.support", self.support_residual, tol));
        if hermitian {
            report.push(Check::at_most("curvature.symmetric", self.symmetry_residual, tol));
        }
        report
    }
}

/// Both routes, residuals and the canonical representative modulo
/// lifted junk.
pub fn curvature_report(st: &SpectralTriple, module: &ProjectiveModule, conn: &UniversalConnectionForm) -> Result<CurvatureReport, CurvatureError> {
    let r = curvature_direct(st, module, conn)?;
    let formula = curvature_formula(st, module, conn)?;
    let junk = lifted_junk_space(st, module)?;
    let p = module.projector();
    let g = module.total_grading(st);
    Ok(CurvatureReport {
        route_residual: linalg::relative_distance(&r, &formula),
        symmetry_residual: linalg::self_adjoint_residual(&r),
        evenness_residual: (&g * &r * &g - &r).norm(),
        support_residual: (p * &r * p - &r).norm(),
        norm: linalg::spectral_norm(&r),
        junk_canonical: junk.complement(&r)?,
        junk_dim: junk.dim(),
        r,
    })
}

/// `span{ P (E_kl ⊗ J) P }` over a basis of `J²` and all positions.
pub fn lifted_junk_space(st: &SpectralTriple, module: &ProjectiveModule) -> Result<SubspaceBasis, CurvatureError> {
    let junk = forms::junk_space(st)?;
    let m = module.m();
    let n = st.n();
    let p = module.projector();
    let mut gens = Vec::with_capacity(m * m * junk.dim());
    for j in junk.basis.elements() {
        for k in 0..m {
            for l in 0..m {
                let mut e = CMatrix::zeros(m * n, m * n);
                e.view_mut((k * n, l * n), (n, n)).copy_from(j);
                let g = p * e * p;
                if g.norm() > 0.0 {
                    gens.push(g);
                }
            }
        }
    }
    Ok(forms::span_of(&gens, m * n, st.tolerances().rank)?)
}

/// Distance of `r1 − r2` from the lifted junk space, relative to
/// `max(1, ‖r1 − r2‖_F)`.
pub fn junk_coset_residual(r1: &CMatrix, r2: &CMatrix, junk: &SubspaceBasis) -> Result<f64, CurvatureError> {
    Ok(junk.membership_residual(&(r1 - r2))?)
}

/// An odd self-adjoint endomorphism `S ∈ pM_m(𝓑)p`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalOperator {
    entries: Vec<AlgebraElement>,
    mat: CMatrix,
}

impl VerticalOperator {
    /// Checks `S̃* = S̃`, `PS̃P = S̃` and oddness for `Γ ⊗ γ`, each relative
    /// to `max(1, ‖S̃‖_F)`.
    pub fn new(st: &SpectralTriple, module: &ProjectiveModule, entries: Vec<AlgebraElement>, tol: f64) -> Result<Self, CurvatureError> {
        let m = module.m();
        if entries.len() != m * m {
            return Err(ModuleError::EntryCount {
                expected: m * m,
                got: entries.len(),
            }
            .into());
        }
        for e in &entries {
            st.check_element(e)?;
        }
        let mat = fgp::assemble_blocks(m, st.n(), |i, j| st.matrix_of(&entries[i * m + j]));
        let scale = mat.norm().max(1.0);
        let p = module.projector();
        let g = module.total_grading(st);
        let residuals = [
            ("self_adjoint", linalg::self_adjoint_residual(&mat)),
            ("compressed", (p * &mat * p - &mat).norm()),
            ("odd", (&g * &mat * &g + &mat).norm()),
        ];
        for (what, residual) in residuals {
            if residual / scale > tol {
                return Err(CurvatureError::Vertical {
                    what,
                    residual: residual / scale,
                });
            }
        }
        Ok(Self { entries, mat })
    }

    pub fn zero(st: &SpectralTriple, module: &ProjectiveModule) -> Self {
        let m = module.m();
        let n = st.n();
        Self {
            entries: vec![AlgebraElement::zero(st.d()); m * m],
            mat: CMatrix::zeros(m * n, m * n),
        }
    }

    pub fn entries(&self) -> &[AlgebraElement] {
        &self.entries
    }

    /// Assembled `S̃`.
    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

/// `(S̃ + M)² − S̃² − N`.
pub fn correspondence_curvature(
    st: &SpectralTriple,
    module: &ProjectiveModule,
    conn: &UniversalConnectionForm,
    s: &VerticalOperator,
) -> Result<CMatrix, CurvatureError> {
    let m = fgp::product_operator(st, module, conn)?.mat;
    let n = fgp::product_operator_sq_lift(st, module, conn)?.mat;
    let sm = s.matrix() + &m;
    Ok(&sm * &sm - s.matrix() * s.matrix() - n)
}

/// `‖R_(S,∇) − (R_∇ + [S̃, M]₊)‖_F`.
pub fn correspondence_decomposition_residual(
    st: &SpectralTriple,
    module: &ProjectiveModule,
    conn: &UniversalConnectionForm,
    s: &VerticalOperator,
) -> Result<f64, CurvatureError> {
    let full = correspondence_curvature(st, module, conn, s)?;
    let direct = curvature_direct(st, module, conn)?;
    let m = fgp::product_operator(st, module, conn)?.mat;
    Ok((full - direct - linalg::anticommutator(s.matrix(), &m)).norm())
}

/// `‖[S̃, M]₊‖ / (‖S̃‖ + 1)`, spectral norms.
pub fn anticommutator_diagnostic(
    st: &SpectralTriple,
    module: &ProjectiveModule,
    conn: &UniversalConnectionForm,
    s: &VerticalOperator,
) -> Result<f64, CurvatureError> {
    let m = fgp::product_operator(st, module, conn)?.mat;
    let ac = linalg::anticommutator(s.matrix(), &m);
    Ok(linalg::spectral_norm(&ac) / (linalg::spectral_norm(s.matrix()) + 1.0))
}

/// `(D₁⊗1 + γ₁⊗D₂)² − D₁²⊗1 − 1⊗D₂²` on `H₁ ⊗ H₂`.
pub fn external_product_defect(st1: &SpectralTriple, st2: &SpectralTriple) -> CMatrix {
    external_defect(st1, st2, st1.gamma().matrix())
}

/// Same as [`external_product_defect`] without the grading twist; equals
/// `2 D₁ ⊗ D₂`.
pub fn external_product_defect_ungraded(st1: &SpectralTriple, st2: &SpectralTriple) -> CMatrix {
    external_defect(st1, st2, &linalg::identity(st1.n()))
}

fn external_defect(st1: &SpectralTriple, st2: &SpectralTriple, twist: &CMatrix) -> CMatrix {
    let one1 = linalg::identity(st1.n());
    let one2 = linalg::identity(st2.n());
    let sum = linalg::kron(st1.dirac(), &one2) + linalg::kron(twist, st2.dirac());
    &sum * &sum - linalg::kron(st1.dirac_sq(), &one2) - linalg::kron(&one1, st2.dirac_sq())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::forms::UniversalOneForm;
    use crate::linalg::C64;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn free_module_flat() {
        let st = fixtures::three_point();
        let module = ProjectiveModule::free(&st, vec![1.0, -1.0]);
        let zero = UniversalConnectionForm::zero(2, 3);
        assert!(curvature_direct(&st, &module, &zero).unwrap().norm() < 1e-14);
        assert!(curvature_formula(&st, &module, &zero).unwrap().norm() < 1e-14);
    }

    #[test]
    fn two_point_module_desk_check() {
        let st = fixtures::two_point();
        let module = fixtures::two_point_module(&st);
        let zero = UniversalConnectionForm::zero(2, 2);
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.), c(0.), c(0.), c(-1.)]));
        let direct = curvature_direct(&st, &module, &zero).unwrap();
        let formula = curvature_formula(&st, &module, &zero).unwrap();
        assert!((&direct - &expected).norm() < 1e-14);
        assert!((&formula - &expected).norm() < 1e-14);
        let report = curvature_report(&st, &module, &zero).unwrap();
        assert!((report.norm - 1.0).abs() < 1e-14);
        assert!(report.route_residual < 1e-14);
        assert_eq!(report.junk_dim, 0);
        assert_eq!(report.junk_canonical, report.r);
        assert!(report.checks(1e-9, 1e-10, true).all_passed());
    }

    #[test]
    fn zero_connection_formula_reduces_to_grassmann() {
        let st = fixtures::three_point();
        let b = st.basis();
        // p = diag(b2, b3) with Γ = diag(1, 1); projections in a commutative algebra
        let module = ProjectiveModule::new(
            &st,
            vec![AlgebraElement::unit(3, 1), AlgebraElement::zero(3), AlgebraElement::zero(3), AlgebraElement::unit(3, 2)],
            vec![1.0, 1.0],
            1e-10,
        )
        .unwrap();
        assert_eq!(b.len(), 3);
        let zero = UniversalConnectionForm::zero(2, 3);
        let p = module.projector();
        let dp = linalg::commutator(&module.lifted_dirac(&st), p);
        let grassmann = p * &dp * &dp * p;
        let direct = curvature_direct(&st, &module, &zero).unwrap();
        assert!((direct - grassmann).norm() < 1e-13);
    }

    #[test]
    fn free_module_delta_connection() {
        let st = fixtures::three_point();
        let module = ProjectiveModule::free(&st, vec![1.0]);
        let w = UniversalOneForm::delta(&st, &AlgebraElement::unit(3, 1)).unwrap();
        let conn = UniversalConnectionForm::new(1, vec![w], false).unwrap();
        let rep = conn.represent(&st, &module).unwrap();
        let expected = &rep.a_d * &rep.a_d + linalg::anticommutator(st.dirac(), &rep.a_d) - &rep.a_d2;
        let formula = curvature_formula(&st, &module, &conn).unwrap();
        assert!((&formula - expected).norm() < 1e-13);
        let direct = curvature_direct(&st, &module, &conn).unwrap();
        assert!(linalg::relative_distance(&direct, &formula) < 1e-13);
    }

    #[test]
    fn three_point_routes_agree_with_hermitian_connection() {
        let st = fixtures::three_point();
        let module = ProjectiveModule::free(&st, vec![1.0, 1.0]);
        let a = AlgebraElement::from_slice(&[c(0.3), C64::new(0.0, 1.0), c(-0.7)]);
        let b = AlgebraElement::from_slice(&[c(0.0), c(1.0), C64::new(0.5, 2.0)]);
        let w = UniversalOneForm::delta(&st, &b).unwrap().left_mult(&st, &a).unwrap();
        let z = UniversalOneForm::zero(3);
        let conn = UniversalConnectionForm::new(2, vec![w.clone(), w, z.clone(), z], false)
            .unwrap()
            .hermitian_part(&st)
            .unwrap();
        let report = curvature_report(&st, &module, &conn).unwrap();
        assert!(report.checks(1e-9, 1e-10, true).all_passed(), "{report:?}");
        assert!(report.norm > 1e-3);
    }

    #[test]
    fn junk_coset_examples() {
        let st = fixtures::three_point();
        let module = ProjectiveModule::free(&st, vec![1.0]);
        let junk = lifted_junk_space(&st, &module).unwrap();
        assert_eq!(junk.dim(), 2);
        let w = UniversalOneForm::delta(&st, &AlgebraElement::unit(3, 1)).unwrap();
        let conn = UniversalConnectionForm::new(1, vec![w.clone()], false).unwrap();
        let r1 = curvature_direct(&st, &module, &conn).unwrap();
        assert_eq!(junk_coset_residual(&r1, &r1, &junk).unwrap(), 0.0);

        let kernel = forms::junk_kernel(&st).unwrap();
        let lifted = UniversalConnectionForm::new(1, vec![w.add(&kernel[0].scale(c(1.7)))], false).unwrap();
        let r2 = curvature_direct(&st, &module, &lifted).unwrap();
        assert!((&r1 - &r2).norm() > 1e-3);
        assert!(junk_coset_residual(&r1, &r2, &junk).unwrap() < 1e-8);
        let c1 = junk.complement(&r1).unwrap();
        let c2 = junk.complement(&r2).unwrap();
        assert!((c1 - c2).norm() < 1e-10);

        // a two-form outside the junk span
        let outside = junk.complement(&st.comm_d(1).clone().pow(2)).unwrap();
        assert!(outside.norm() > 1e-3);
        assert!(junk_coset_residual(&r1, &(&r1 + &outside), &junk).unwrap() > 0.1);
    }

    #[test]
    fn vertical_operator_checks() {
        let st = fixtures::two_point();
        let module = ProjectiveModule::free(&st, vec![1.0, -1.0]);
        let one = AlgebraElement::one(2);
        let zero = AlgebraElement::zero(2);
        let s = VerticalOperator::new(&st, &module, vec![zero.clone(), one.clone(), one.clone(), zero.clone()], 1e-10).unwrap();
        let conn = UniversalConnectionForm::zero(2, 2);
        // S̃ = σ_x ⊗ 1 anticommutes with D̃ = Γ ⊗ D
        let r = correspondence_curvature(&st, &module, &conn, &s).unwrap();
        assert!(r.norm() < 1e-14);
        assert!(correspondence_decomposition_residual(&st, &module, &conn, &s).unwrap() < 1e-14);
        assert!(anticommutator_diagnostic(&st, &module, &conn, &s).unwrap() < 1e-14);

        let even = VerticalOperator::new(&st, &module, vec![one.clone(), zero.clone(), zero.clone(), one.clone()], 1e-10);
        assert!(matches!(even, Err(CurvatureError::Vertical { what: "odd", .. })));
        let i = AlgebraElement::one(2).scale(C64::new(0.0, 1.0));
        let skew = VerticalOperator::new(&st, &module, vec![zero.clone(), i.clone(), i, zero], 1e-10);
        assert!(matches!(skew, Err(CurvatureError::Vertical { what: "self_adjoint", .. })));
    }

    #[test]
    fn zero_vertical_operator_gives_direct_curvature() {
        let st = fixtures::two_point();
        let module = fixtures::two_point_module(&st);
        let conn = UniversalConnectionForm::zero(2, 2);
        let s = VerticalOperator::zero(&st, &module);
        let full = correspondence_curvature(&st, &module, &conn, &s).unwrap();
        assert_eq!(full, curvature_direct(&st, &module, &conn).unwrap());
        assert_eq!(correspondence_decomposition_residual(&st, &module, &conn, &s).unwrap(), 0.0);
    }

    #[test]
    fn external_product_examples() {
        let (a, b) = fixtures::two_point_pair();
        assert!(linalg::spectral_norm(&external_product_defect(&a, &b)) < 1e-12);
        let ungraded = external_product_defect_ungraded(&a, &b);
        let expected = linalg::kron(a.dirac(), b.dirac()) * c(2.0);
        assert!((&ungraded - &expected).norm() < 1e-14);
        assert!(linalg::spectral_norm(&ungraded) > 1.0);
        let silent = fixtures::two_point_with(b.gamma().clone(), CMatrix::zeros(2, 2));
        assert_eq!(external_product_defect(&a, &silent).norm(), 0.0);
    }
}
