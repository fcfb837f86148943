//! Seeded property sweeps. Each case draws from its own stream, and results
//! are returned in case order under either execution mode.

use serde::Serialize;

use crate::check::{Check, ValidationReport};
use crate::curvature::{self, CurvatureError};
use crate::fgp::{self, ProjectiveModule, UniversalConnectionForm};
use crate::fixtures;
use crate::linalg::{self, Tolerances};
use crate::random::{self, RandomScenario, TripleShape};
use crate::submersion::{FramePoint, SubmersionInvariants};

/// Relative route residual between the direct and closed-formula curvature.
pub const ROUTE_TOL: f64 = 1e-9;
/// Relative two-form cross-check residual.
pub const AJUNKIE_TOL: f64 = 1e-9;
/// Junk coset membership and canonical-representative agreement.
pub const JUNK_TOL: f64 = 1e-8;
/// Absolute Frobenius residual of the correspondence decomposition.
pub const CORRESPONDENCE_TOL: f64 = 1e-10;
/// External defect spectral norm over `(‖D₁‖ + ‖D₂‖)²`.
pub const EXTERNAL_TOL: f64 = 1e-12;
/// Lower bound for the ungraded external control.
pub const EXTERNAL_CONTROL_MIN: f64 = 0.01;
/// Symmetry, oddness, evenness and support residuals.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Submersion values.
pub const SUBMERSION_TOL: f64 = 1e-12;

pub const MAX_M: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon when the `parallel` feature is enabled, sequential otherwise.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `f(0), …, f(cases − 1)` in order.
pub fn sweep<T, F>(exec: Execution, cases: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..cases).map(f).collect(),
        Execution::Parallel => parallel_map(cases, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(cases: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..cases).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(cases: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..cases).map(f).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub case: u64,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CaseOutcome {
    fn at_most(case: u64, residual: f64, threshold: f64) -> Self {
        Self {
            case,
            residual,
            threshold,
            passed: residual <= threshold,
            note: None,
        }
    }

    fn failed(case: u64, threshold: f64, note: String) -> Self {
        Self {
            case,
            residual: f64::NAN,
            threshold,
            passed: false,
            note: Some(note),
        }
    }

    fn from_result(case: u64, threshold: f64, r: Result<f64, CurvatureError>) -> Self {
        match r {
            Ok(residual) => Self::at_most(case, residual, threshold),
            Err(e) => Self::failed(case, threshold, e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub name: &'static str,
    pub seed: u64,
    pub cases: Vec<CaseOutcome>,
}

impl Sweep {
    pub fn run(name: &'static str, seed: u64, count: u64, exec: Execution, case: fn(u64, u64) -> CaseOutcome) -> Self {
        Self {
            name,
            seed,
            cases: sweep(exec, count, |k| case(seed, k)),
        }
    }

    pub fn all_passed(&self) -> bool {
        !self.cases.is_empty() && self.cases.iter().all(|c| c.passed)
    }

    /// Largest residual; NaN (an erroring case) dominates.
    pub fn worst(&self) -> f64 {
        self.cases
            .iter()
            .map(|c| c.residual)
            .fold(0.0, |w, r| if r.is_nan() || w.is_nan() { f64::NAN } else { w.max(r) })
    }

    pub fn threshold(&self) -> f64 {
        self.cases.first().map_or(0.0, |c| c.threshold)
    }

    pub fn to_check(&self) -> Check {
        Check {
            name: format!("{}[{}]", self.name, self.cases.len()),
            residual: self.worst(),
            threshold: self.threshold(),
            passed: self.all_passed(),
        }
    }
}

fn scenario(seed: u64, case: u64) -> Result<(RandomScenario, rand_chacha::ChaCha8Rng), CurvatureError> {
    let mut rng = random::case_rng(seed, case);
    let sc = RandomScenario::generate(&mut rng, TripleShape::default(), MAX_M, Tolerances::default())?;
    Ok((sc, rng))
}

/// Direct and closed-formula curvature agree for a Hermitian random
/// connection.
pub fn route_equality_case(seed: u64, case: u64) -> CaseOutcome {
    CaseOutcome::from_result(
        case,
        ROUTE_TOL,
        scenario(seed, case).and_then(|(sc, _)| {
            let direct = curvature::curvature_direct(&sc.triple, &sc.module, &sc.connection)?;
            let formula = curvature::curvature_formula(&sc.triple, &sc.module, &sc.connection)?;
            Ok(linalg::relative_distance(&direct, &formula))
        }),
    )
}

/// Curvature is self-adjoint, even and supported on `range(P)`.
pub fn curvature_structure_case(seed: u64, case: u64) -> CaseOutcome {
    CaseOutcome::from_result(
        case,
        STRUCTURE_TOL,
        scenario(seed, case).and_then(|(sc, _)| {
            let r = curvature::curvature_direct(&sc.triple, &sc.module, &sc.connection)?;
            let p = sc.module.projector();
            let g = sc.module.total_grading(&sc.triple);
            Ok(linalg::self_adjoint_residual(&r)
                .max((&g * &r * &g - &r).norm())
                .max((p * &r * p - &r).norm()))
        }),
    )
}

/// `Σ c [D,b_i][D,b_j] = [D, π_D(ω)]₊ − π_{D²}(ω)` for an arbitrary table.
pub fn ajunkie_case(seed: u64, case: u64) -> CaseOutcome {
    let mut rng = random::case_rng(seed, case);
    let st = random::random_triple(&mut rng, TripleShape::default(), Tolerances::default());
    let w = random::random_one_form(&mut rng, st.d());
    match w.two_form_with_residual(&st) {
        Ok((_, residual)) => CaseOutcome::at_most(case, residual, AJUNKIE_TOL),
        Err(e) => CaseOutcome::failed(case, AJUNKIE_TOL, e.to_string()),
    }
}

const JUNK_ATTEMPTS: u64 = 32;

/// Two universal lifts with equal `A_D` give curvatures in the same junk
/// coset and the same canonical representative. Sub-streams are tried until
/// the kernel and the projection are both nontrivial.
pub fn junk_invariance_case(seed: u64, case: u64) -> CaseOutcome {
    let shape = TripleShape {
        min_d: 3,
        ..TripleShape::default()
    };
    for attempt in 0..JUNK_ATTEMPTS {
        let mut rng = random::case_rng(seed ^ attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15), case);
        let mut run = || -> Result<Option<f64>, CurvatureError> {
            let sc = RandomScenario::generate(&mut rng, shape, 3, Tolerances::default())?;
            if sc.module.rank() == 0 {
                return Ok(None);
            }
            let Some(lift) = random::junk_lift(&mut rng, &sc.triple, &sc.module, &sc.connection)? else {
                return Ok(None);
            };
            let r1 = curvature::curvature_direct(&sc.triple, &sc.module, &sc.connection)?;
            let r2 = curvature::curvature_direct(&sc.triple, &sc.module, &lift)?;
            if (&r1 - &r2).norm() < 1e-6 {
                return Ok(None);
            }
            let junk = curvature::lifted_junk_space(&sc.triple, &sc.module)?;
            let coset = curvature::junk_coset_residual(&r1, &r2, &junk)?;
            let c1 = junk.complement(&r1)?;
            let c2 = junk.complement(&r2)?;
            Ok(Some(coset.max(linalg::relative_distance(&c1, &c2))))
        };
        match run() {
            Ok(Some(residual)) => {
                let mut out = CaseOutcome::at_most(case, residual, JUNK_TOL);
                out.note = (attempt > 0).then(|| format!("attempt {attempt}"));
                return out;
            }
            Ok(None) => continue,
            Err(e) => return CaseOutcome::failed(case, JUNK_TOL, e.to_string()),
        }
    }
    CaseOutcome::failed(case, JUNK_TOL, "no scenario with distinct lifts".into())
}

/// `R_(S,∇) = R_∇ + [S̃, M]₊`.
pub fn correspondence_case(seed: u64, case: u64) -> CaseOutcome {
    CaseOutcome::from_result(
        case,
        CORRESPONDENCE_TOL,
        scenario(seed, case).and_then(|(sc, mut rng)| {
            let s = random::random_vertical(&mut rng, &sc.triple, &sc.module)?;
            curvature::correspondence_decomposition_residual(&sc.triple, &sc.module, &sc.connection, &s)
        }),
    )
}

/// Graded external product squares without cross terms.
pub fn external_case(seed: u64, case: u64) -> CaseOutcome {
    let mut rng = random::case_rng(seed, case);
    let a = random::random_triple(&mut rng, TripleShape::default(), Tolerances::default());
    let b = random::random_triple(&mut rng, TripleShape::default(), Tolerances::default());
    let scale = (linalg::spectral_norm(a.dirac()) + linalg::spectral_norm(b.dirac())).powi(2);
    let defect = linalg::spectral_norm(&curvature::external_product_defect(&a, &b));
    CaseOutcome::at_most(case, defect / scale.max(f64::MIN_POSITIVE), EXTERNAL_TOL)
}

fn product_operator_residual(st: &crate::triple::SpectralTriple, module: &ProjectiveModule, conn: &UniversalConnectionForm) -> Result<f64, CurvatureError> {
    let op = fgp::product_operator(st, module, conn)?;
    Ok(op.symmetry_residual().max(op.oddness_residual()))
}

/// The product operator is symmetric and odd, with `A = 0` and with a
/// Hermitian `A`.
pub fn grassmann_symmetry_case(seed: u64, case: u64) -> CaseOutcome {
    CaseOutcome::from_result(
        case,
        STRUCTURE_TOL,
        scenario(seed, case).and_then(|(sc, _)| {
            let zero = UniversalConnectionForm::zero(sc.module.m(), sc.triple.d());
            let flat = product_operator_residual(&sc.triple, &sc.module, &zero)?;
            let curved = product_operator_residual(&sc.triple, &sc.module, &sc.connection)?;
            Ok(flat.max(curved))
        }),
    )
}

/// The Hermitian identity holds for the symmetrized random connection.
pub fn hermitian_case(seed: u64, case: u64) -> CaseOutcome {
    CaseOutcome::from_result(
        case,
        STRUCTURE_TOL,
        scenario(seed, case).and_then(|(sc, _)| Ok(fgp::hermitian_residual(&sc.triple, &sc.module, &sc.connection)?)),
    )
}

/// Largest curvature spectral norm over `samples` seeded `A = 0` modules
/// with `m` generators. Reported, never asserted.
pub fn growth_proxy(seed: u64, max_m: usize, samples: u64, exec: Execution) -> Vec<(usize, f64)> {
    (1..=max_m)
        .map(|m| {
            let norms = sweep(exec, samples, |k| {
                let mut rng = random::case_rng(seed.wrapping_add(m as u64), k);
                let st = random::random_triple(&mut rng, TripleShape::default(), Tolerances::default());
                let module = random::random_module(&mut rng, &st, m).ok()?;
                let zero = UniversalConnectionForm::zero(m, st.d());
                curvature::curvature_direct(&st, &module, &zero).ok().map(|r| linalg::spectral_norm(&r))
            });
            (m, norms.into_iter().flatten().fold(0.0, f64::max))
        })
        .collect()
}

/// Case counts of the full invariant suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSize {
    pub route: u64,
    pub ajunkie: u64,
    pub junk: u64,
    pub correspondence: u64,
    pub external: u64,
    pub grassmann: u64,
}

impl SuiteSize {
    pub const FULL: SuiteSize = SuiteSize {
        route: 200,
        ajunkie: 200,
        junk: 50,
        correspondence: 100,
        external: 20,
        grassmann: 100,
    };
}

/// Every seeded sweep of the suite, in a fixed order.
pub fn suite(seed: u64, size: SuiteSize, exec: Execution) -> Vec<Sweep> {
    vec![
        Sweep::run("route_equality", seed, size.route, exec, route_equality_case),
        Sweep::run("curvature_structure", seed, size.route, exec, curvature_structure_case),
        Sweep::run("ajunkie", seed, size.ajunkie, exec, ajunkie_case),
        Sweep::run("junk_invariance", seed, size.junk, exec, junk_invariance_case),
        Sweep::run("correspondence", seed, size.correspondence, exec, correspondence_case),
        Sweep::run("external_product", seed, size.external, exec, external_case),
        Sweep::run("grassmann_symmetry", seed, size.grassmann, exec, grassmann_symmetry_case),
        Sweep::run("hermitian_connection", seed, size.grassmann, exec, hermitian_case),
    ]
}

/// Desk values on the shipped fixtures.
pub fn fixture_checks() -> ValidationReport {
    let mut report = ValidationReport::default();
    let st = fixtures::two_point();
    for c in st.validate(STRUCTURE_TOL).checks {
        report.push(Check { name: format!("two_point.{}", c.name), ..c });
    }
    let dims = (|| -> Result<_, crate::forms::FormsError> {
        Ok((
            crate::forms::one_form_space(&st)?.dim(),
            crate::forms::two_form_space(&st)?.dim(),
            crate::forms::junk_space(&st)?.dim(),
        ))
    })();
    report.push(Check::flag("two_point.dims(2,2,0)", dims == Ok((2, 2, 0))));

    let module = fixtures::two_point_module(&st);
    let zero = UniversalConnectionForm::zero(2, 2);
    match curvature::curvature_report(&st, &module, &zero) {
        Ok(r) => {
            let expected = -module.projector();
            report.push(Check::at_most("two_point_module.R=-P", (&r.r - expected).norm(), STRUCTURE_TOL));
            report.push(Check::at_most("two_point_module.norm", (r.norm - 1.0).abs(), STRUCTURE_TOL));
            report.push(Check::at_most("two_point_module.route", r.route_residual, ROUTE_TOL));
        }
        Err(e) => report.push(Check::flag(format!("two_point_module.curvature: {e}"), false)),
    }
    for (name, m) in [("two_point_module", &module), ("two_point_free", &ProjectiveModule::free(&st, vec![1.0, -1.0]))] {
        let op = fgp::grassmann_product_operator(&st, m);
        report.push(Check::at_most(format!("{name}.grassmann_symmetric"), op.symmetry_residual(), STRUCTURE_TOL));
        report.push(Check::at_most(format!("{name}.grassmann_odd"), op.oddness_residual(), STRUCTURE_TOL));
    }

    let (a, b) = fixtures::two_point_pair();
    let scale = (linalg::spectral_norm(a.dirac()) + linalg::spectral_norm(b.dirac())).powi(2);
    report.push(Check::at_most(
        "two_point_pair.external_defect",
        linalg::spectral_norm(&curvature::external_product_defect(&a, &b)),
        EXTERNAL_TOL * scale,
    ));
    report.push(Check::at_least(
        "two_point_pair.ungraded_control",
        linalg::spectral_norm(&curvature::external_product_defect_ungraded(&a, &b)),
        EXTERNAL_CONTROL_MIN,
    ));

    let heis = SubmersionInvariants::compute(&FramePoint::heisenberg());
    report.push(Check::at_most(
        "heisenberg.values",
        heis.s_pi.max_abs().max(heis.k.iter().fold(0.0, |m, x| m.max(x.abs()))).max((heis.omega.get(0, 1, 0) + 1.0).abs()),
        SUBMERSION_TOL,
    ));
    if let Ok(hopf) = FramePoint::hopf(1.0) {
        let inv = SubmersionInvariants::compute(&hopf);
        report.push(Check::at_most(
            "hopf(1).values",
            inv.s_pi.max_abs().max((inv.omega.get(0, 1, 0) + 2.0).abs()),
            SUBMERSION_TOL,
        ));
    }
    if let Ok(warped) = FramePoint::warped_torus(2.0, 1.0) {
        let inv = SubmersionInvariants::compute(&warped);
        report.push(Check::at_most("warped_torus(2,1).k", (inv.k[0] - 0.5).abs(), SUBMERSION_TOL));
    }
    report
}

/// Fixture checks followed by one check per sweep.
pub fn selftest(seed: u64, size: SuiteSize, exec: Execution) -> (ValidationReport, Vec<Sweep>) {
    let mut report = fixture_checks();
    let sweeps = suite(seed, size, exec);
    for s in &sweeps {
        report.push(s.to_check());
    }
    (report, sweeps)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: SuiteSize = SuiteSize {
        route: 8,
        ajunkie: 8,
        junk: 3,
        correspondence: 6,
        external: 4,
        grassmann: 6,
    };

    #[test]
    fn sweep_preserves_case_order() {
        let seq = sweep(Execution::Sequential, 50, |k| k * k);
        let par = sweep(Execution::Parallel, 50, |k| k * k);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }

    #[test]
    fn fixture_checks_pass() {
        let report = fixture_checks();
        assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn small_suite_passes_in_both_modes() {
        let (seq, seq_sweeps) = selftest(42, SMALL, Execution::Sequential);
        let (par, par_sweeps) = selftest(42, SMALL, Execution::Parallel);
        assert!(seq.all_passed(), "{:?}", seq.failures().collect::<Vec<_>>());
        assert_eq!(seq_sweeps, par_sweeps);
        assert_eq!(seq, par);
    }

    #[test]
    fn growth_proxy_reports_every_m() {
        let g = growth_proxy(3, 3, 4, Execution::default());
        assert_eq!(g.iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(g.iter().all(|x| x.1.is_finite() && x.1 >= 0.0));
    }
}
