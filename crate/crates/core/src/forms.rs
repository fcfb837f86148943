//! Universal and represented differential forms of degree one and two.
//!
//! A universal one-form `ω = Σ c_ij b_i ⊗ b_j` is stored as its `d × d`
//! coefficient table over the algebra basis. Since the algebra is spanned by
//! its basis, these tables cover all of `Ω¹_u(𝓑)` once restricted to
//! `ker m`.

use thiserror::Error;

use crate::linalg::{self, anticommutator, CMatrix, CVector, LinalgError, SubspaceBasis, C64};
use crate::triple::{AlgebraElement, SpectralTriple, TripleError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error(transparent)]
    Triple(#[from] TripleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("coefficient table is {got}x{got}, algebra has dimension {expected}")]
    TableSize { got: usize, expected: usize },
    #[error("two-form routes disagree (residual {residual:.3e})")]
    Inconsistent { residual: f64 },
}

/// Relative slack for the built-in two-form cross-check.
pub const TWO_FORM_CROSSCHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct UniversalOneForm {
    pub coeffs: CMatrix,
}

impl UniversalOneForm {
    pub fn new(coeffs: CMatrix) -> Self {
        Self { coeffs }
    }

    pub fn zero(d: usize) -> Self {
        Self::new(CMatrix::zeros(d, d))
    }

    pub fn d(&self) -> usize {
        self.coeffs.nrows()
    }

    fn check(&self, st: &SpectralTriple) -> Result<(), FormsError> {
        if self.coeffs.nrows() != st.d() || self.coeffs.ncols() != st.d() {
            return Err(FormsError::TableSize {
                got: self.coeffs.nrows(),
                expected: st.d(),
            });
        }
        Ok(())
    }

    /// `δ(b) = 1 ⊗ b − b ⊗ 1`.
    pub fn delta(st: &SpectralTriple, b: &AlgebraElement) -> Result<Self, FormsError> {
        st.check_element(b)?;
        let d = st.d();
        let mut c = CMatrix::zeros(d, d);
        for (j, bj) in b.coeffs.iter().enumerate() {
            c[(0, j)] += bj;
            c[(j, 0)] -= bj;
        }
        Ok(Self::new(c))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.coeffs + &other.coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(&self.coeffs - &other.coeffs)
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self::new(&self.coeffs * alpha)
    }

    /// `a · ω`.
    pub fn left_mult(&self, st: &SpectralTriple, a: &AlgebraElement) -> Result<Self, FormsError> {
        self.check(st)?;
        let d = st.d();
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            let row = self.coeffs.row(i);
            if row.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            let abi = st.product(a, &AlgebraElement::unit(d, i))?;
            // (a b_i) ⊗ b_j = Σ_k coord_k(a b_i) b_k ⊗ b_j
            out += &abi.coeffs * row;
        }
        Ok(Self::new(out))
    }

    /// `ω · a`.
    pub fn right_mult(&self, st: &SpectralTriple, a: &AlgebraElement) -> Result<Self, FormsError> {
        self.check(st)?;
        let d = st.d();
        let mut out = CMatrix::zeros(d, d);
        for j in 0..d {
            let col = self.coeffs.column(j);
            if col.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            let bja = st.product(&AlgebraElement::unit(d, j), a)?;
            out += col * bja.coeffs.transpose();
        }
        Ok(Self::new(out))
    }

    /// Involution `Σ c_ij b_i ⊗ b_j ↦ Σ c̄_ij b_j* ⊗ b_i*`, chosen so that
    /// `π_D(ω♯) = π_D(ω)*` and `π_{D²}(ω♯) = π_{D²}(ω)*` on `ker m`.
    pub fn sharp(&self, st: &SpectralTriple) -> Result<Self, FormsError> {
        self.check(st)?;
        let d = st.d();
        let stars: Vec<CVector> = (0..d)
            .map(|k| st.star(&AlgebraElement::unit(d, k)).map(|a| a.coeffs))
            .collect::<Result<_, _>>()?;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let c = self.coeffs[(i, j)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                out += &stars[j] * stars[i].transpose() * c.conj();
            }
        }
        Ok(Self::new(out))
    }

    /// `Σ c_ij left_i right_j`.
    fn contract(&self, left: &[CMatrix], right: &[CMatrix], n: usize) -> CMatrix {
        let mut out = CMatrix::zeros(n, n);
        for (i, l) in left.iter().enumerate() {
            for (j, r) in right.iter().enumerate() {
                let c = self.coeffs[(i, j)];
                if c != C64::new(0.0, 0.0) {
                    out += l * r * c;
                }
            }
        }
        out
    }

    /// `‖Σ c_ij b_i b_j‖_F`.
    pub fn mult_residual(&self, st: &SpectralTriple) -> Result<f64, FormsError> {
        self.check(st)?;
        let b = st.basis();
        Ok(self.contract(b, b, st.n()).norm())
    }

    /// `π_D(ω) = Σ c_ij b_i [D, b_j]`.
    pub fn pi_d(&self, st: &SpectralTriple) -> Result<CMatrix, FormsError> {
        self.check(st)?;
        let b = st.basis();
        Ok(self.contract(b, st.comm_d_all(), st.n()))
    }

    /// `π_{D²}(ω) = Σ c_ij b_i [D², b_j]`.
    pub fn pi_d2(&self, st: &SpectralTriple) -> Result<CMatrix, FormsError> {
        self.check(st)?;
        let b = st.basis();
        Ok(self.contract(b, st.comm_d2_all(), st.n()))
    }

    /// `Σ c_ij [D, b_i][D, b_j]`, the represented `δω`.
    fn two_form_direct(&self, st: &SpectralTriple) -> CMatrix {
        self.contract(st.comm_d_all(), st.comm_d_all(), st.n())
    }

    /// Returns `Σ c_ij [D,b_i][D,b_j]` and the relative residual against
    /// `[D, π_D(ω)]₊ − π_{D²}(ω)`.
    pub fn two_form_with_residual(&self, st: &SpectralTriple) -> Result<(CMatrix, f64), FormsError> {
        self.check(st)?;
        let direct = self.two_form_direct(st);
        let pi = self.pi_d(st)?;
        let pi2 = self.pi_d2(st)?;
        let via = anticommutator(st.dirac(), &pi) - &pi2;
        let scale = direct.norm().max(via.norm()).max(pi2.norm()).max(1.0);
        let residual = (&direct - via).norm() / scale;
        Ok((direct, residual))
    }

    /// Represented two-form `m∘(π_D⊗π_D)(δω)`, cross-checked against the
    /// anticommutator route.
    pub fn two_form_of(&self, st: &SpectralTriple) -> Result<CMatrix, FormsError> {
        let (direct, residual) = self.two_form_with_residual(st)?;
        if residual > TWO_FORM_CROSSCHECK_TOL {
            return Err(FormsError::Inconsistent { residual });
        }
        Ok(direct)
    }

    /// `Σ c_ij [D, b_i] b_j`; vanishes whenever `Σ c b_i b_j = Σ c b_i [D,b_j] = 0`.
    pub fn third_junk_condition(&self, st: &SpectralTriple) -> Result<CMatrix, FormsError> {
        self.check(st)?;
        let b = st.basis();
        Ok(self.contract(st.comm_d_all(), b, st.n()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormDegree {
    Zero,
    One,
    Two,
    Junk,
}

impl FormDegree {
    pub fn label(self) -> &'static str {
        match self {
            FormDegree::Zero => "0",
            FormDegree::One => "1",
            FormDegree::Two => "2",
            FormDegree::Junk => "junk",
        }
    }
}

/// A space of represented forms with an orthonormal Frobenius basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FormSpace {
    pub degree: FormDegree,
    pub basis: SubspaceBasis,
}

impl FormSpace {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn membership_residual(&self, m: &CMatrix) -> Result<f64, FormsError> {
        Ok(self.basis.membership_residual(m)?)
    }
}

pub(crate) fn span_of(mats: &[CMatrix], n: usize, rank_tol: f64) -> Result<SubspaceBasis, LinalgError> {
    if mats.is_empty() {
        Ok(SubspaceBasis::empty(n, n, rank_tol))
    } else {
        linalg::subspace_basis(mats, rank_tol)
    }
}

fn space(st: &SpectralTriple, degree: FormDegree, mats: &[CMatrix]) -> Result<FormSpace, FormsError> {
    Ok(FormSpace {
        degree,
        basis: span_of(mats, st.n(), st.tolerances().rank)?,
    })
}

/// The algebra itself as a subspace of `M_n(ℂ)`.
pub fn algebra_space(st: &SpectralTriple) -> Result<FormSpace, FormsError> {
    space(st, FormDegree::Zero, st.basis())
}

/// `Ω¹_D = span{ b_k [D, b_j] }`.
pub fn one_form_space(st: &SpectralTriple) -> Result<FormSpace, FormsError> {
    let b = st.basis();
    let gens: Vec<CMatrix> = b
        .iter()
        .flat_map(|bk| (0..st.d()).map(move |j| bk * st.comm_d(j)))
        .collect();
    space(st, FormDegree::One, &gens)
}

/// `Ω²_D = span{ b_k [D, b_i][D, b_j] }`.
pub fn two_form_space(st: &SpectralTriple) -> Result<FormSpace, FormsError> {
    let d = st.d();
    let mut gens = Vec::with_capacity(d * d * d);
    for bk in st.basis() {
        for i in 0..d {
            let left = bk * st.comm_d(i);
            for j in 0..d {
                gens.push(&left * st.comm_d(j));
            }
        }
    }
    space(st, FormDegree::Two, &gens)
}

/// Orthonormal basis of `ker m ∩ ker π_D` in coefficient space, as forms.
pub fn junk_kernel(st: &SpectralTriple) -> Result<Vec<UniversalOneForm>, FormsError> {
    let d = st.d();
    let n = st.n();
    let b = st.basis();
    // Column (i, j) stacks vec(b_i b_j) over vec(b_i [D, b_j]).
    let mut l = CMatrix::zeros(2 * n * n, d * d);
    for i in 0..d {
        for j in 0..d {
            let col = i * d + j;
            let prod = linalg::vectorize(&(&b[i] * &b[j]));
            let form = linalg::vectorize(&(&b[i] * st.comm_d(j)));
            l.view_mut((0, col), (n * n, 1)).copy_from(&prod);
            l.view_mut((n * n, col), (n * n, 1)).copy_from(&form);
        }
    }
    Ok(linalg::solve_kernel(&l, st.tolerances().rank)
        .into_iter()
        .map(|v| UniversalOneForm::new(CMatrix::from_fn(d, d, |i, j| v[i * d + j])))
        .collect())
}

/// `J² = span π_{D²}(ker m ∩ ker π_D)`.
pub fn junk_space(st: &SpectralTriple) -> Result<FormSpace, FormsError> {
    let gens = junk_kernel(st)?
        .iter()
        .map(|w| w.pi_d2(st))
        .collect::<Result<Vec<_>, _>>()?;
    space(st, FormDegree::Junk, &gens)
}

/// Canonical representative of `m` modulo junk: remove its orthogonal
/// projection onto the junk span.
pub fn project_mod_junk(m: &CMatrix, junk: &FormSpace) -> Result<CMatrix, FormsError> {
    Ok(junk.basis.complement(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn mat2(rows: [[f64; 2]; 2]) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(rows[0][0], 0.), c(rows[0][1], 0.), c(rows[1][0], 0.), c(rows[1][1], 0.)])
    }

    #[test]
    fn delta_examples() {
        let st = fixtures::two_point();
        let d1 = UniversalOneForm::delta(&st, &AlgebraElement::one(2)).unwrap();
        assert_eq!(d1.coeffs.norm(), 0.0);
        let d2 = UniversalOneForm::delta(&st, &AlgebraElement::unit(2, 1)).unwrap();
        assert_eq!(d2.coeffs, mat2([[0., 1.], [-1., 0.]]));
        let alpha = c(0.3, -2.0);
        let scaled = UniversalOneForm::delta(&st, &AlgebraElement::unit(2, 1).scale(alpha)).unwrap();
        assert!((&scaled.coeffs - &d2.coeffs * alpha).norm() < 1e-15);
        assert_eq!(d2.mult_residual(&st).unwrap(), 0.0);
    }

    #[test]
    fn left_mult_examples() {
        let st = fixtures::two_point();
        let w = UniversalOneForm::delta(&st, &AlgebraElement::unit(2, 1)).unwrap();
        assert!((w.left_mult(&st, &AlgebraElement::one(2)).unwrap().coeffs - &w.coeffs).norm() < 1e-14);
        assert_eq!(w.left_mult(&st, &AlgebraElement::zero(2)).unwrap().coeffs.norm(), 0.0);
        // b2 δ(b2) = b2 ⊗ b2 − b2 ⊗ 1
        let bw = w.left_mult(&st, &AlgebraElement::unit(2, 1)).unwrap();
        assert!((bw.coeffs - mat2([[0., 0.], [-1., 1.]])).norm() < 1e-12);
    }

    #[test]
    fn mult_residual_examples() {
        let st = fixtures::two_point();
        let mut t = CMatrix::zeros(2, 2);
        t[(0, 0)] = c(1., 0.);
        let w = UniversalOneForm::new(t);
        assert!((w.mult_residual(&st).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let s = UniversalOneForm::delta(&st, &AlgebraElement::unit(2, 1))
            .unwrap()
            .add(&UniversalOneForm::delta(&st, &AlgebraElement::from_slice(&[c(0.5, 1.), c(-2., 0.)])).unwrap());
        assert!(s.mult_residual(&st).unwrap() < 1e-14);
    }

    #[test]
    fn pi_d_examples() {
        let st = fixtures::two_point();
        let w = UniversalOneForm::delta(&st, &AlgebraElement::unit(2, 1)).unwrap();
        assert!((w.pi_d(&st).unwrap() - mat2([[0., -1.], [1., 0.]])).norm() < 1e-14);
        let one = UniversalOneForm::delta(&st, &AlgebraElement::one(2)).unwrap();
        assert_eq!(one.pi_d(&st).unwrap().norm(), 0.0);
        let bw = w.left_mult(&st, &AlgebraElement::unit(2, 1)).unwrap();
        assert!((bw.pi_d(&st).unwrap() - mat2([[0., -1.], [0., 0.]])).norm() < 1e-14);
    }

    #[test]
    fn pi_d2_examples() {
        let st = fixtures::two_point();
        let w = UniversalOneForm::delta(&st, &AlgebraElement::unit(2, 1)).unwrap();
        assert!(w.pi_d2(&st).unwrap().norm() < 1e-14);
        let one = UniversalOneForm::delta(&st, &AlgebraElement::one(2)).unwrap();
        assert_eq!(one.pi_d2(&st).unwrap().norm(), 0.0);

        let st3 = fixtures::three_point();
        let b = AlgebraElement::unit(3, 1);
        let w3 = UniversalOneForm::delta(&st3, &b).unwrap();
        let expected = linalg::commutator(st3.dirac_sq(), &st3.basis()[1]);
        assert!((w3.pi_d2(&st3).unwrap() - expected).norm() < 1e-13);
    }

    #[test]
    fn two_form_examples() {
        let st = fixtures::two_point();
        let w = UniversalOneForm::delta(&st, &AlgebraElement::unit(2, 1)).unwrap();
        let bw = w.left_mult(&st, &AlgebraElement::unit(2, 1)).unwrap();
        let tf = bw.two_form_of(&st).unwrap();
        assert!((tf + linalg::identity(2)).norm() < 1e-14);
        let one = UniversalOneForm::delta(&st, &AlgebraElement::one(2)).unwrap();
        assert_eq!(one.two_form_of(&st).unwrap().norm(), 0.0);
        assert_eq!(w.scale(c(0., 0.)).two_form_of(&st).unwrap().norm(), 0.0);
    }

    #[test]
    fn space_dimensions_two_point() {
        let st = fixtures::two_point();
        assert_eq!(one_form_space(&st).unwrap().dim(), 2);
        assert_eq!(two_form_space(&st).unwrap().dim(), 2);
        assert_eq!(junk_space(&st).unwrap().dim(), 0);
    }

    #[test]
    fn space_dimensions_degenerate() {
        let scalars = fixtures::scalars_only();
        assert_eq!(one_form_space(&scalars).unwrap().dim(), 0);
        assert_eq!(two_form_space(&scalars).unwrap().dim(), 0);
        assert_eq!(junk_space(&scalars).unwrap().dim(), 0);

        let commuting = fixtures::commuting_dirac();
        assert_eq!(one_form_space(&commuting).unwrap().dim(), 0);
        assert_eq!(two_form_space(&commuting).unwrap().dim(), 0);
    }

    #[test]
    fn three_point_junk_matches_oracle() {
        // numpy oracle (oracles/two_point.py): dims (4, 5, 2)
        let st = fixtures::three_point();
        assert_eq!(one_form_space(&st).unwrap().dim(), 4);
        assert_eq!(two_form_space(&st).unwrap().dim(), 5);
        let junk = junk_space(&st).unwrap();
        assert_eq!(junk.dim(), 2);
        let omega2 = two_form_space(&st).unwrap();
        for j in junk.basis.elements() {
            assert!(omega2.membership_residual(j).unwrap() < 1e-8);
        }
    }

    #[test]
    fn project_mod_junk_examples() {
        let st = fixtures::three_point();
        let junk = junk_space(&st).unwrap();
        let j0 = junk.basis.elements()[0].clone() * c(2.0, 1.0);
        assert!(project_mod_junk(&j0, &junk).unwrap().norm() < 1e-12);

        let m = CMatrix::from_fn(3, 3, |i, j| c(i as f64 - 0.5 * j as f64, 0.25 * (i * j) as f64));
        let perp = project_mod_junk(&m, &junk).unwrap();
        assert!((project_mod_junk(&(&perp + &j0), &junk).unwrap() - &perp).norm() < 1e-12);

        let empty = junk_space(&fixtures::two_point()).unwrap();
        let m2 = mat2([[1., 2.], [3., 4.]]);
        assert_eq!(project_mod_junk(&m2, &empty).unwrap(), m2);
    }

    #[test]
    fn sharp_represents_adjoint() {
        let st = fixtures::three_point();
        let a = AlgebraElement::from_slice(&[c(0.2, 0.4), c(-1., 0.3), c(0.0, 0.9)]);
        let b = AlgebraElement::from_slice(&[c(1.0, 0.0), c(0.1, -0.7), c(0.5, 0.5)]);
        let w = UniversalOneForm::delta(&st, &b).unwrap().left_mult(&st, &a).unwrap();
        let ws = w.sharp(&st).unwrap();
        assert!(ws.mult_residual(&st).unwrap() < 1e-12);
        assert!((ws.pi_d(&st).unwrap() - w.pi_d(&st).unwrap().adjoint()).norm() < 1e-12);
        assert!((ws.pi_d2(&st).unwrap() - w.pi_d2(&st).unwrap().adjoint()).norm() < 1e-12);
    }

    #[test]
    fn table_size_checked() {
        let st = fixtures::two_point();
        let w = UniversalOneForm::zero(3);
        assert!(matches!(w.pi_d(&st), Err(FormsError::TableSize { .. })));
    }
}
