//! Pointwise invariants of a Riemannian submersion read off the structure
//! constants of an orthonormal frame `{e_1..e_p, f_1..f_q}`, vertical first.
//!
//! Indices are zero-based. Vertical index `a` is frame index `a`; horizontal
//! index `i` is frame index `dim_f + i`.

use serde::Serialize;
use thiserror::Error;

pub const ANTISYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubmersionError {
    #[error("need 0 < dim_f < dim_m, got dim_f = {dim_f}, dim_m = {dim_m}")]
    Dimensions { dim_m: usize, dim_f: usize },
    #[error("structure constants: expected {expected} entries, got {got}")]
    Length { expected: usize, got: usize },
    #[error("structure constants are not antisymmetric (residual {residual:.3e})")]
    NotAntisymmetric { residual: f64 },
    #[error("structure constants must be finite")]
    NonFinite,
    #[error("invalid frame parameter: {0}")]
    Parameter(String),
}

/// Dense real 3-tensor, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor3 {
    pub shape: [usize; 3],
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(shape: [usize; 3]) -> Self {
        Self {
            shape,
            data: vec![0.0; shape[0] * shape[1] * shape[2]],
        }
    }

    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Structure constants `[E_i, E_j] = Σ_k c[k][i][j] E_k` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePoint {
    dim_m: usize,
    dim_f: usize,
    c: Tensor3,
}

impl FramePoint {
    pub fn new(dim_m: usize, dim_f: usize, c: Vec<f64>) -> Result<Self, SubmersionError> {
        if dim_f == 0 || dim_f >= dim_m {
            return Err(SubmersionError::Dimensions { dim_m, dim_f });
        }
        let expected = dim_m.pow(3);
        if c.len() != expected {
            return Err(SubmersionError::Length { expected, got: c.len() });
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(SubmersionError::NonFinite);
        }
        let fp = Self {
            dim_m,
            dim_f,
            c: Tensor3 {
                shape: [dim_m; 3],
                data: c,
            },
        };
        let residual = fp.antisymmetry_residual();
        if residual > ANTISYMMETRY_TOL {
            return Err(SubmersionError::NotAntisymmetric { residual });
        }
        Ok(fp)
    }

    /// Sets `c[k][i][j] = v` and `c[k][j][i] = −v`.
    fn with_bracket(mut self, k: usize, i: usize, j: usize, v: f64) -> Self {
        self.c.set(k, i, j, v);
        self.c.set(k, j, i, -v);
        self
    }

    fn empty(dim_m: usize, dim_f: usize) -> Self {
        Self {
            dim_m,
            dim_f,
            c: Tensor3::zeros([dim_m; 3]),
        }
    }

    pub fn dim_m(&self) -> usize {
        self.dim_m
    }

    pub fn dim_f(&self) -> usize {
        self.dim_f
    }

    /// Number of horizontal directions.
    pub fn dim_h(&self) -> usize {
        self.dim_m - self.dim_f
    }

    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c.get(k, i, j)
    }

    pub fn constants(&self) -> &Tensor3 {
        &self.c
    }

    /// Every structure constant multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.c.data.iter_mut().for_each(|x| *x *= alpha);
        out
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim_m;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.c(k, i, j) + self.c(k, j, i)).abs());
                }
            }
        }
        worst
    }

    /// Largest cyclic sum `Σ_l c[l][i][j] c[m][l][k] + (ijk cyclic)`.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim_m;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for m in 0..n {
                        let s: f64 = (0..n)
                            .map(|l| {
                                self.c(l, i, j) * self.c(m, l, k)
                                    + self.c(l, j, k) * self.c(m, l, i)
                                    + self.c(l, k, i) * self.c(m, l, j)
                            })
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Nilpotent frame: `[f₁, f₂] = e₁`.
    pub fn heisenberg() -> Self {
        Self::empty(3, 1).with_bracket(0, 1, 2, 1.0)
    }

    /// Berger-scaled Hopf frame on `S³`: `X₁, X₂` horizontal, vertical unit
    /// vector `X₃ / λ`, with `[X_i, X_j] = 2ε_ijk X_k`.
    pub fn hopf(lambda: f64) -> Result<Self, SubmersionError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(SubmersionError::Parameter(format!("hopf scale must be positive, got {lambda}")));
        }
        Ok(Self::empty(3, 1)
            .with_bracket(0, 1, 2, 2.0 * lambda)
            .with_bracket(1, 2, 0, 2.0 / lambda)
            .with_bracket(2, 0, 1, 2.0 / lambda))
    }

    /// Warped torus `dt² + f(t)² ds²` at a point: `e = ∂_s / f`,
    /// `f₁ = ∂_t`, `[f₁, e] = −(f′/f) e`.
    pub fn warped_torus(f: f64, f_prime: f64) -> Result<Self, SubmersionError> {
        if !(f.is_finite() && f > 0.0 && f_prime.is_finite()) {
            return Err(SubmersionError::Parameter(format!("warping needs f > 0 and finite f', got ({f}, {f_prime})")));
        }
        Ok(Self::empty(2, 1).with_bracket(0, 1, 0, -f_prime / f))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmersionInvariants {
    /// `[a][b][i]`: vertical, vertical, horizontal.
    pub s_pi: Tensor3,
    /// `[i]`.
    pub k: Vec<f64>,
    /// `[i][j][a]`: horizontal, horizontal, vertical.
    pub omega: Tensor3,
}

impl SubmersionInvariants {
    pub fn compute(fp: &FramePoint) -> Self {
        let s_pi = second_fundamental_form(fp);
        Self {
            k: trace(&s_pi),
            s_pi,
            omega: fibration_curvature(fp),
        }
    }

    /// `max |S[a][b][i] − S[b][a][i]|`.
    pub fn s_pi_symmetry_residual(&self) -> f64 {
        let [p, _, q] = self.s_pi.shape;
        let mut worst: f64 = 0.0;
        for a in 0..p {
            for b in 0..p {
                for i in 0..q {
                    worst = worst.max((self.s_pi.get(a, b, i) - self.s_pi.get(b, a, i)).abs());
                }
            }
        }
        worst
    }

    /// `max |Ω[i][j][a] + Ω[j][i][a]|`.
    pub fn omega_antisymmetry_residual(&self) -> f64 {
        let [q, _, p] = self.omega.shape;
        let mut worst: f64 = 0.0;
        for i in 0..q {
            for j in 0..q {
                for a in 0..p {
                    worst = worst.max((self.omega.get(i, j, a) + self.omega.get(j, i, a)).abs());
                }
            }
        }
        worst
    }
}

/// `S[a][b][i] = −½(⟨[f_i, e_a], e_b⟩ + ⟨[f_i, e_b], e_a⟩)`.
pub fn second_fundamental_form(fp: &FramePoint) -> Tensor3 {
    let p = fp.dim_f();
    let q = fp.dim_h();
    let mut s = Tensor3::zeros([p, p, q]);
    for a in 0..p {
        for b in 0..p {
            for i in 0..q {
                let h = p + i;
                s.set(a, b, i, -0.5 * (fp.c(b, h, a) + fp.c(a, h, b)));
            }
        }
    }
    s
}

/// `k[i] = Σ_a S[a][a][i]`.
pub fn mean_curvature(fp: &FramePoint) -> Vec<f64> {
    trace(&second_fundamental_form(fp))
}

fn trace(s: &Tensor3) -> Vec<f64> {
    let [p, _, q] = s.shape;
    (0..q).map(|i| (0..p).map(|a| s.get(a, a, i)).sum()).collect()
}

/// `Ω[i][j][a] = −⟨[f_i, f_j], e_a⟩`.
pub fn fibration_curvature(fp: &FramePoint) -> Tensor3 {
    let p = fp.dim_f();
    let q = fp.dim_h();
    let mut omega = Tensor3::zeros([q, q, p]);
    for i in 0..q {
        for j in 0..q {
            for a in 0..p {
                omega.set(i, j, a, -fp.c(a, p + i, p + j));
            }
        }
    }
    omega
}
