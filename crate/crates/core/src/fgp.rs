//! Finitely generated projective modules `X = p𝓑^m`, connection forms and
//! the product operator `1 ⊗_∇ D` on `P(ℂ^m ⊗ H)`.
//!
//! Block `(i, j)` of an assembled `mn × mn` matrix is the `n × n` operator
//! in generator position `(i, j)`, so `Γ ⊗ X` is `kron(Γ, X)`. The frame is
//! always the standard one, `x_i = p e_i`.

use thiserror::Error;

use crate::forms::{FormsError, UniversalOneForm};
use crate::linalg::{self, CMatrix, Grading, GradedOperator, LinalgError, C64};
use crate::triple::{AlgebraElement, SpectralTriple, TripleError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuleError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Triple(#[from] TripleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("p is not a projection (residual {residual:.3e})")]
    NotProjection { residual: f64 },
    #[error("p is not self-adjoint (residual {residual:.3e})")]
    NotSelfAdjoint { residual: f64 },
    #[error("p does not commute with the module grading (residual {residual:.3e})")]
    NotEven { residual: f64 },
    #[error("connection form is not compressed by P (residual {residual:.3e})")]
    NotCompressed { residual: f64 },
    #[error("connection form is not odd (residual {residual:.3e})")]
    NotOdd { residual: f64 },
    #[error("operator is not symmetric on range(P) (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },
}

/// Assemble an `mn × mn` matrix from `n × n` blocks.
pub fn assemble_blocks(m: usize, n: usize, block: impl Fn(usize, usize) -> CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..m {
            out.view_mut((i * n, j * n), (n, n)).copy_from(&block(i, j));
        }
    }
    out
}

/// Block `(i, j)` of an assembled matrix.
pub fn block_of(a: &CMatrix, n: usize, i: usize, j: usize) -> CMatrix {
    a.view((i * n, j * n), (n, n)).into_owned()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveModule {
    m: usize,
    entries: Vec<AlgebraElement>,
    signs: Vec<f64>,
    projector: CMatrix,
}

impl ProjectiveModule {
    /// Builds the module from row-major projection entries and the diagonal
    /// grading signs, checking `P² = P`, `P* = P` and evenness at `tol`
    /// (relative to `max(1, ‖P‖_F)`).
    pub fn new(st: &SpectralTriple, entries: Vec<AlgebraElement>, signs: Vec<f64>, tol: f64) -> Result<Self, ModuleError> {
        let m = signs.len();
        if entries.len() != m * m {
            return Err(ModuleError::EntryCount {
                expected: m * m,
                got: entries.len(),
            });
        }
        for e in &entries {
            st.check_element(e)?;
        }
        let signs: Vec<f64> = signs.iter().map(|&s| if s >= 0.0 { 1.0 } else { -1.0 }).collect();
        let n = st.n();
        let projector = assemble_blocks(m, n, |i, j| st.matrix_of(&entries[i * m + j]));
        let module = Self {
            m,
            entries,
            signs,
            projector,
        };
        module.check(tol)?;
        Ok(module)
    }

    /// Reads the entries of an assembled projector back into algebra
    /// coordinates.
    pub fn from_projector(st: &SpectralTriple, projector: &CMatrix, signs: Vec<f64>, tol: f64) -> Result<Self, ModuleError> {
        let m = signs.len();
        let n = st.n();
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                entries.push(st.algebra_coords(&block_of(projector, n, i, j))?);
            }
        }
        Self::new(st, entries, signs, tol)
    }

    /// Free module `𝓑^m` with the given grading.
    pub fn free(st: &SpectralTriple, signs: Vec<f64>) -> Self {
        let m = signs.len();
        let d = st.d();
        let entries = (0..m * m)
            .map(|k| if k / m == k % m { AlgebraElement::one(d) } else { AlgebraElement::zero(d) })
            .collect();
        Self::new(st, entries, signs, f64::INFINITY).expect("identity is a projection")
    }

    fn check(&self, tol: f64) -> Result<(), ModuleError> {
        let p = &self.projector;
        let scale = p.norm().max(1.0);
        let residual = (p * p - p).norm() / scale;
        if residual > tol {
            return Err(ModuleError::NotProjection { residual });
        }
        let residual = linalg::self_adjoint_residual(p) / scale;
        if residual > tol {
            return Err(ModuleError::NotSelfAdjoint { residual });
        }
        let g = self.sign_lift();
        let residual = (&g * p * &g - p).norm() / scale;
        if residual > tol {
            return Err(ModuleError::NotEven { residual });
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn entry(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.entries[i * self.m + j]
    }

    pub fn entries(&self) -> &[AlgebraElement] {
        &self.entries
    }

    /// Assembled projector `P`.
    pub fn projector(&self) -> &CMatrix {
        &self.projector
    }

    pub fn rank(&self) -> usize {
        self.projector.trace().re.round().max(0.0) as usize
    }

    pub fn grading(&self) -> Grading {
        Grading::from_signs(&self.signs)
    }

    /// `Γ ⊗ 1_n`, built lazily from the signs.
    fn sign_lift(&self) -> CMatrix {
        let n = self.projector.nrows() / self.m.max(1);
        linalg::left_lift(self.grading().matrix(), n)
    }

    /// `Γ ⊗ γ`.
    pub fn total_grading(&self, st: &SpectralTriple) -> CMatrix {
        linalg::kron(self.grading().matrix(), st.gamma().matrix())
    }

    /// `D̃ = Γ ⊗ D`, the graded lift of the Dirac operator.
    pub fn lifted_dirac(&self, st: &SpectralTriple) -> CMatrix {
        linalg::graded_right_lift(&GradedOperator::odd(st.dirac().clone()), &self.grading())
    }

    /// `1 ⊗ X` for an even operator `X` on `H`.
    pub fn lift_even(&self, x: &CMatrix) -> CMatrix {
        linalg::kron(&linalg::identity(self.m), x)
    }
}

/// An `m × m` table of universal one-forms, `ω = ∇ − ∇^Grassmann`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniversalConnectionForm {
    m: usize,
    entries: Vec<UniversalOneForm>,
    pub hermitian: bool,
}

impl UniversalConnectionForm {
    pub fn zero(m: usize, d: usize) -> Self {
        Self {
            m,
            entries: vec![UniversalOneForm::zero(d); m * m],
            hermitian: true,
        }
    }

    pub fn new(m: usize, entries: Vec<UniversalOneForm>, hermitian: bool) -> Result<Self, ModuleError> {
        if entries.len() != m * m {
            return Err(ModuleError::EntryCount {
                expected: m * m,
                got: entries.len(),
            });
        }
        Ok(Self { m, entries, hermitian })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &UniversalOneForm {
        &self.entries[i * self.m + j]
    }

    pub fn entries(&self) -> &[UniversalOneForm] {
        &self.entries
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: self.m,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
            hermitian: self.hermitian && other.hermitian,
        }
    }

    /// Largest `mult_residual` over all entries.
    pub fn mult_residual(&self, st: &SpectralTriple) -> Result<f64, ModuleError> {
        let mut worst: f64 = 0.0;
        for e in &self.entries {
            worst = worst.max(e.mult_residual(st)?);
        }
        Ok(worst)
    }

    /// `p A p` computed on the universal level.
    pub fn compress(&self, st: &SpectralTriple, module: &ProjectiveModule) -> Result<Self, ModuleError> {
        let m = self.m;
        let d = st.d();
        // (A p)_kj = Σ_l A_kl p_lj
        let mut ap = vec![UniversalOneForm::zero(d); m * m];
        for k in 0..m {
            for j in 0..m {
                for l in 0..m {
                    let p = module.entry(l, j);
                    if !p.is_zero() {
                        ap[k * m + j] = ap[k * m + j].add(&self.entry(k, l).right_mult(st, p)?);
                    }
                }
            }
        }
        let mut out = vec![UniversalOneForm::zero(d); m * m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let p = module.entry(i, k);
                    if !p.is_zero() {
                        out[i * m + j] = out[i * m + j].add(&ap[k * m + j].left_mult(st, p)?);
                    }
                }
            }
        }
        Ok(Self {
            m,
            entries: out,
            hermitian: self.hermitian,
        })
    }

    /// `½(A + A♯)` with `(A♯)_ij = (A_ji)♯`; the represented forms of the
    /// result are self-adjoint at both the `D` and `D²` level.
    pub fn hermitian_part(&self, st: &SpectralTriple) -> Result<Self, ModuleError> {
        let m = self.m;
        let half = C64::new(0.5, 0.0);
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let sharp = self.entry(j, i).sharp(st)?;
                out.push(self.entry(i, j).add(&sharp).scale(half));
            }
        }
        Ok(Self {
            m,
            entries: out,
            hermitian: true,
        })
    }

    /// Entrywise `π_D` and `π_{D²}` assembled to `mn × mn`, without checks.
    pub fn represent_unchecked(&self, st: &SpectralTriple) -> Result<RepresentedConnection, ModuleError> {
        let n = st.n();
        let m = self.m;
        let mut a_d = CMatrix::zeros(m * n, m * n);
        let mut a_d2 = CMatrix::zeros(m * n, m * n);
        for i in 0..m {
            for j in 0..m {
                let e = self.entry(i, j);
                a_d.view_mut((i * n, j * n), (n, n)).copy_from(&e.pi_d(st)?);
                a_d2.view_mut((i * n, j * n), (n, n)).copy_from(&e.pi_d2(st)?);
            }
        }
        Ok(RepresentedConnection { a_d, a_d2 })
    }

    /// Represented connection form, checking that it is compressed by `P`
    /// and odd for `Γ ⊗ γ`.
    pub fn represent(&self, st: &SpectralTriple, module: &ProjectiveModule) -> Result<RepresentedConnection, ModuleError> {
        if self.m != module.m() {
            return Err(ModuleError::EntryCount {
                expected: module.m() * module.m(),
                got: self.m * self.m,
            });
        }
        let rep = self.represent_unchecked(st)?;
        let tol = st.tolerances().residual;
        let p = module.projector();
        for a in [&rep.a_d, &rep.a_d2] {
            let residual = (p * a * p - a).norm() / a.norm().max(1.0);
            if residual > tol {
                return Err(ModuleError::NotCompressed { residual });
            }
        }
        let g = module.total_grading(st);
        let residual = (&g * &rep.a_d * &g + &rep.a_d).norm() / rep.a_d.norm().max(1.0);
        if residual > tol {
            return Err(ModuleError::NotOdd { residual });
        }
        Ok(rep)
    }
}

/// `(A_D, A_D2)`: entrywise `π_D` and `π_{D²}` of a connection form.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentedConnection {
    pub a_d: CMatrix,
    pub a_d2: CMatrix,
}

/// An operator on `ℂ^m ⊗ H` supported on `range(P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductOperator {
    pub mat: CMatrix,
    pub projector: CMatrix,
    pub grading: CMatrix,
}

impl ProductOperator {
    pub fn symmetry_residual(&self) -> f64 {
        linalg::self_adjoint_residual(&self.mat)
    }

    /// `‖G M + M G‖_F`.
    pub fn oddness_residual(&self) -> f64 {
        linalg::anticommutator(&self.grading, &self.mat).norm()
    }

    /// `‖G M − M G‖_F`.
    pub fn evenness_residual(&self) -> f64 {
        linalg::commutator(&self.grading, &self.mat).norm()
    }

    /// `‖P M P − M‖_F`.
    pub fn support_residual(&self) -> f64 {
        (&self.projector * &self.mat * &self.projector - &self.mat).norm()
    }
}

/// `P (Γ ⊗ D) P`.
pub fn grassmann_product_operator(st: &SpectralTriple, module: &ProjectiveModule) -> ProductOperator {
    let p = module.projector();
    ProductOperator {
        mat: p * module.lifted_dirac(st) * p,
        projector: p.clone(),
        grading: module.total_grading(st),
    }
}

/// `1 ⊗_∇ D = P (Γ ⊗ D) P + A_D`.
pub fn product_operator(st: &SpectralTriple, module: &ProjectiveModule, conn: &UniversalConnectionForm) -> Result<ProductOperator, ModuleError> {
    let rep = conn.represent(st, module)?;
    let mut op = grassmann_product_operator(st, module);
    op.mat += rep.a_d;
    Ok(op)
}

/// `1 ⊗_∇ D² = P (1 ⊗ D²) P + A_D2`; no grading twist since `D²` is even.
pub fn product_operator_sq_lift(st: &SpectralTriple, module: &ProjectiveModule, conn: &UniversalConnectionForm) -> Result<ProductOperator, ModuleError> {
    let rep = conn.represent(st, module)?;
    let p = module.projector();
    Ok(ProductOperator {
        mat: p * module.lift_even(st.dirac_sq()) * p + rep.a_d2,
        projector: p.clone(),
        grading: module.total_grading(st),
    })
}

/// Largest block defect of the represented Hermitian identity
/// `⟨γx_i, ∇x_j⟩ − ⟨∇(γx_i), x_j⟩ − [D, ⟨x_i, x_j⟩]` over frame pairs, with
/// `∇ = ∇^Grassmann + A` and the pairing `⟨x ⊗ ω, y⟩ = ω* ⟨x, y⟩`.
pub fn hermitian_residual(st: &SpectralTriple, module: &ProjectiveModule, conn: &UniversalConnectionForm) -> Result<f64, ModuleError> {
    let n = st.n();
    let m = module.m();
    let p = module.projector();
    let sign = linalg::left_lift(module.grading().matrix(), n);
    let dp = linalg::commutator(&module.lift_even(st.dirac()), p);
    let a_d = conn.represent_unchecked(st)?.a_d;
    // Column j of g holds the components of ∇_D(x_j).
    let g = &sign * p * &dp + a_d;
    let first = p * &sign * &g;
    let second = &sign * g.adjoint() * p;
    let defect = first - second - dp;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            worst = worst.max(block_of(&defect, n, i, j).norm());
        }
    }
    Ok(worst)
}

/// Eigenvalues of the operator restricted to `range(P)`, ascending.
pub fn spectrum(op: &ProductOperator, tol: f64) -> Result<Vec<f64>, ModuleError> {
    let residual = op.symmetry_residual() / op.mat.norm().max(1.0);
    if residual > tol {
        return Err(ModuleError::NotSymmetric { residual });
    }
    let eig = nalgebra::SymmetricEigen::new(op.projector.clone());
    let cols: Vec<_> = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] > 0.5)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        return Ok(Vec::new());
    }
    let q = CMatrix::from_columns(&cols);
    let restricted = q.adjoint() * &op.mat * &q;
    Ok(linalg::hermitian_eigenvalues(&restricted, tol.max(1e-12))?)
}
