//! Seeded scenario generator `chacha8-unit-disc-v1`.
//!
//! Every case draws from its own ChaCha8 stream `(seed, case)`, so results do
//! not depend on evaluation order. Scalars are uniform in the closed complex
//! unit disc.
//!
//! * Triple: `n ∈ {2, 4, 6}` with `γ = diag(1_k, −1_k)`, `k = n/2`, and
//!   `D = [[0, Q*], [Q, 0]]`. The algebra is diagonal: each slot carries a
//!   point label in `0..d`, every label is used, and the basis is `1` plus
//!   the indicators of labels `1..d`. When `n = 4` and `d = 4` a coin flip
//!   replaces it with `M₂(ℂ)` acting as `diag(a, a)` with basis
//!   `{1, E₁₁, E₁₂, E₂₁}`.
//! * Module: `m ∈ [1, 4]` random grading signs; `p` is the positive
//!   spectral projection of a random even self-adjoint `h ∈ M_m(𝓑)`,
//!   resampled while its spectral gap is below `1e−3`.
//! * Connection: entries `a₁δ(b₁) + a₂δ(b₂)` on the `Γ_i = Γ_j` blocks,
//!   compressed by `p` and replaced by their Hermitian part.
//! * Vertical operator: `p(x + x*)p` with `x` supported on `Γ_i ≠ Γ_j`.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curvature::{CurvatureError, VerticalOperator};
use crate::fgp::{self, ModuleError, ProjectiveModule, UniversalConnectionForm};
use crate::forms::{self, UniversalOneForm};
use crate::linalg::{self, CMatrix, CVector, Grading, Tolerances, C64};
use crate::triple::{AlgebraElement, SpectralTriple};

pub const GENERATOR: &str = "chacha8-unit-disc-v1";

/// Smallest admissible `min |λ(h)|` before the spectral projection is taken.
pub const SPECTRAL_GAP: f64 = 1e-3;

const MAX_RESAMPLES: usize = 64;

/// Independent stream for case `case` of a sweep seeded by `seed`.
pub fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case);
    rng
}

pub fn unit_disc(rng: &mut impl Rng) -> C64 {
    let r = rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    C64::from_polar(r, theta)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| unit_disc(rng))
}

pub fn random_element(rng: &mut impl Rng, d: usize) -> AlgebraElement {
    AlgebraElement::new(CVector::from_fn(d, |_, _| unit_disc(rng)))
}

/// Arbitrary coefficient table, not necessarily in `ker m`.
pub fn random_one_form(rng: &mut impl Rng, d: usize) -> UniversalOneForm {
    UniversalOneForm::new(random_matrix(rng, d, d))
}

/// Size bounds for [`random_triple`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripleShape {
    pub min_d: usize,
    pub max_d: usize,
    pub max_n: usize,
}

impl Default for TripleShape {
    fn default() -> Self {
        Self {
            min_d: 1,
            max_d: 4,
            max_n: 6,
        }
    }
}

fn diag_indicator(labels: &[usize], t: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        labels.len(),
        labels.iter().map(|&l| C64::new(if l == t { 1.0 } else { 0.0 }, 0.0)),
    ))
}

fn matrix_unit_pair(i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(2, 2);
    e[(i, j)] = C64::new(1.0, 0.0);
    linalg::kron(&linalg::identity(2), &e)
}

pub fn random_triple(rng: &mut impl Rng, shape: TripleShape, tol: Tolerances) -> SpectralTriple {
    let k = rng.gen_range(1..=shape.max_n / 2);
    let n = 2 * k;
    let max_d = shape.max_d.min(n).max(shape.min_d.min(n));
    let d = rng.gen_range(shape.min_d.min(max_d)..=max_d);
    let q = random_matrix(rng, k, k);
    let mut dirac = CMatrix::zeros(n, n);
    dirac.view_mut((k, 0), (k, k)).copy_from(&q);
    dirac.view_mut((0, k), (k, k)).copy_from(&q.adjoint());
    let signs: Vec<f64> = (0..n).map(|s| if s < k { 1.0 } else { -1.0 }).collect();

    let basis = if n == 4 && d == 4 && rng.gen_bool(0.5) {
        vec![linalg::identity(4), matrix_unit_pair(0, 0), matrix_unit_pair(0, 1), matrix_unit_pair(1, 0)]
    } else {
        let mut labels: Vec<usize> = (0..n).map(|s| if s < d { s } else { rng.gen_range(0..d) }).collect();
        for s in (1..n).rev() {
            labels.swap(s, rng.gen_range(0..=s));
        }
        std::iter::once(linalg::identity(n))
            .chain((1..d).map(|t| diag_indicator(&labels, t)))
            .collect()
    };
    SpectralTriple::new(Grading::from_signs(&signs), basis, dirac, tol).expect("generated shapes are consistent")
}

pub fn random_signs(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect()
}

/// Random element of `M_m(𝓑)` supported on the positions allowed by `keep`.
fn random_table(rng: &mut impl Rng, st: &SpectralTriple, m: usize, keep: impl Fn(usize, usize) -> bool) -> CMatrix {
    let n = st.n();
    let entries: Vec<CMatrix> = (0..m * m)
        .map(|idx| {
            let x = random_element(rng, st.d());
            if keep(idx / m, idx % m) {
                st.matrix_of(&x)
            } else {
                CMatrix::zeros(n, n)
            }
        })
        .collect();
    fgp::assemble_blocks(m, n, |i, j| entries[i * m + j].clone())
}

/// Random even projection module with `m` generators.
pub fn random_module(rng: &mut impl Rng, st: &SpectralTriple, m: usize) -> Result<ProjectiveModule, ModuleError> {
    let signs = random_signs(rng, m);
    let mut last = None;
    for _ in 0..MAX_RESAMPLES {
        let x = random_table(rng, st, m, |i, j| signs[i] == signs[j]);
        let h = (&x + x.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let gap = eig.eigenvalues.iter().fold(f64::INFINITY, |g, l| g.min(l.abs()));
        if gap < SPECTRAL_GAP {
            continue;
        }
        let mut p = CMatrix::zeros(m * st.n(), m * st.n());
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > 0.0 {
                let v = eig.eigenvectors.column(k);
                p += v * v.adjoint();
            }
        }
        match ProjectiveModule::from_projector(st, &p, signs.clone(), st.tolerances().residual) {
            Ok(module) => return Ok(module),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or(ModuleError::NotProjection { residual: f64::NAN }))
}

/// Hermitian connection form compressed by `p`, odd for `Γ ⊗ γ`.
pub fn random_connection(rng: &mut impl Rng, st: &SpectralTriple, module: &ProjectiveModule) -> Result<UniversalConnectionForm, ModuleError> {
    let m = module.m();
    let d = st.d();
    let signs = module.signs();
    let mut entries = Vec::with_capacity(m * m);
    for idx in 0..m * m {
        let mut w = UniversalOneForm::zero(d);
        for _ in 0..2 {
            let a = random_element(rng, d);
            let b = random_element(rng, d);
            let term = UniversalOneForm::delta(st, &b)?.left_mult(st, &a)?;
            if signs[idx / m] == signs[idx % m] {
                w = w.add(&term);
            }
        }
        entries.push(w);
    }
    UniversalConnectionForm::new(m, entries, false)?
        .compress(st, module)?
        .hermitian_part(st)
}

/// `conn + κ` with `κ` built from `ker m ∩ ker π_D`: the same represented
/// `A_D`, generally a different `A_D2`. Returns `None` when the kernel is
/// trivial.
pub fn junk_lift(
    rng: &mut impl Rng,
    st: &SpectralTriple,
    module: &ProjectiveModule,
    conn: &UniversalConnectionForm,
) -> Result<Option<UniversalConnectionForm>, ModuleError> {
    let kernel = forms::junk_kernel(st)?;
    if kernel.is_empty() {
        return Ok(None);
    }
    let m = module.m();
    let d = st.d();
    let mut entries = Vec::with_capacity(m * m);
    for _ in 0..m * m {
        let mut w = UniversalOneForm::zero(d);
        for k in &kernel {
            w = w.add(&k.scale(unit_disc(rng)));
        }
        entries.push(w);
    }
    let kappa = UniversalConnectionForm::new(m, entries, false)?
        .compress(st, module)?
        .hermitian_part(st)?;
    Ok(Some(conn.add(&kappa)))
}

/// Odd self-adjoint `p(x + x*)p`.
pub fn random_vertical(rng: &mut impl Rng, st: &SpectralTriple, module: &ProjectiveModule) -> Result<VerticalOperator, CurvatureError> {
    let m = module.m();
    let n = st.n();
    let signs = module.signs();
    let x = random_table(rng, st, m, |i, j| signs[i] != signs[j]);
    let p = module.projector();
    let s = p * (&x + x.adjoint()) * p;
    let mut entries = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            entries.push(st.algebra_coords(&fgp::block_of(&s, n, i, j))?);
        }
    }
    VerticalOperator::new(st, module, entries, st.tolerances().residual)
}

/// One complete random curvature scenario.
#[derive(Debug, Clone)]
pub struct RandomScenario {
    pub triple: SpectralTriple,
    pub module: ProjectiveModule,
    pub connection: UniversalConnectionForm,
}

impl RandomScenario {
    pub fn generate(rng: &mut impl Rng, shape: TripleShape, max_m: usize, tol: Tolerances) -> Result<Self, CurvatureError> {
        let triple = random_triple(rng, shape, tol);
        let m = rng.gen_range(1..=max_m);
        let module = random_module(rng, &triple, m)?;
        let connection = random_connection(rng, &triple, &module)?;
        Ok(Self {
            triple,
            module,
            connection,
        })
    }
}
