//! Small hand-checkable triples and modules.

use crate::fgp::ProjectiveModule;
use crate::linalg::{CMatrix, Grading, Tolerances, C64};
use crate::triple::{AlgebraElement, SpectralTriple};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn diag(entries: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        entries.len(),
        entries.iter().map(|&x| c(x, 0.0)),
    ))
}

/// `[[0, 1], [1, 0]]`.
pub fn flip() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

/// Two points: `ℂ²` acting diagonally on `ℂ²`, basis `{1, diag(1, 0)}`.
pub fn two_point_with(gamma: Grading, dirac: CMatrix) -> SpectralTriple {
    let basis = vec![diag(&[1., 1.]), diag(&[1., 0.])];
    SpectralTriple::new(gamma, basis, dirac, Tolerances::default()).expect("fixture shapes")
}

/// Two points with `γ = diag(1, -1)` and `D = flip`.
pub fn two_point() -> SpectralTriple {
    two_point_with(Grading::from_signs(&[1.0, -1.0]), flip())
}

/// Three points on `ℂ³` with `γ = diag(1, 1, -1)`.
pub fn three_point() -> SpectralTriple {
    let mut d = CMatrix::zeros(3, 3);
    d[(0, 2)] = c(0.7, 0.2);
    d[(1, 2)] = c(-0.4, 0.9);
    d[(2, 0)] = d[(0, 2)].conj();
    d[(2, 1)] = d[(1, 2)].conj();
    let basis = vec![diag(&[1., 1., 1.]), diag(&[1., 0., 0.]), diag(&[0., 1., 0.])];
    SpectralTriple::new(Grading::from_signs(&[1.0, 1.0, -1.0]), basis, d, Tolerances::default())
        .expect("fixture shapes")
}

/// Scalars only: every one-form vanishes.
pub fn scalars_only() -> SpectralTriple {
    SpectralTriple::new(
        Grading::from_signs(&[1.0, -1.0]),
        vec![diag(&[1., 1.])],
        flip(),
        Tolerances::default(),
    )
    .expect("fixture shapes")
}

/// Two copies of the flip triple; `D` commutes with the algebra.
pub fn commuting_dirac() -> SpectralTriple {
    let mut d = CMatrix::zeros(4, 4);
    d.view_mut((0, 0), (2, 2)).copy_from(&flip());
    d.view_mut((2, 2), (2, 2)).copy_from(&flip());
    let basis = vec![diag(&[1., 1., 1., 1.]), diag(&[1., 1., 0., 0.])];
    SpectralTriple::new(
        Grading::from_signs(&[1.0, -1.0, 1.0, -1.0]),
        basis,
        d,
        Tolerances::default(),
    )
    .expect("fixture shapes")
}

/// `p = diag(b₂, 1 − b₂)` over [`two_point`] with `Γ = diag(1, -1)`.
pub fn two_point_module(st: &SpectralTriple) -> ProjectiveModule {
    let d = st.d();
    let b2 = AlgebraElement::unit(d, 1);
    let rest = AlgebraElement::one(d).sub(&b2);
    let zero = AlgebraElement::zero(d);
    ProjectiveModule::new(st, vec![b2, zero.clone(), zero, rest], vec![1.0, -1.0], 1e-10)
        .expect("fixture projection")
}

/// The pair used for the external product example: [`two_point`] twice.
pub fn two_point_pair() -> (SpectralTriple, SpectralTriple) {
    (two_point(), two_point())
}
