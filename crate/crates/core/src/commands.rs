//! Command dispatch from a parsed scenario to a [`ResultDocument`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::check::Check;
use crate::curvature::{self, CurvatureError, VerticalOperator};
use crate::fgp::{self, ModuleError};
use crate::forms::{self, FormsError};
use crate::harness::{self, Execution, SuiteSize};
use crate::linalg;
use crate::report::ResultDocument;
use crate::scenario::Scenario;
use crate::submersion::{SubmersionInvariants, ANTISYMMETRY_TOL};
use crate::triple::AlgebraElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Forms,
    Junk,
    Curvature,
    Correspondence,
    External,
    ProductSpectrum,
    Submersion,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Validate,
        Command::Forms,
        Command::Junk,
        Command::Curvature,
        Command::Correspondence,
        Command::External,
        Command::ProductSpectrum,
        Command::Submersion,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Forms => "forms",
            Command::Junk => "junk",
            Command::Curvature => "curvature",
            Command::Correspondence => "correspondence",
            Command::External => "external",
            Command::ProductSpectrum => "product-spectrum",
            Command::Submersion => "submersion",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command '{s}'"))
    }
}

/// Input problems; the CLI maps these to exit code 2.
#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{command} needs {what} in the scenario")]
    Missing { command: Command, what: &'static str },
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

impl From<ModuleError> for CommandError {
    fn from(e: ModuleError) -> Self {
        CommandError::Curvature(e.into())
    }
}

impl From<FormsError> for CommandError {
    fn from(e: FormsError) -> Self {
        CommandError::Curvature(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub emit_matrices: bool,
    pub execution: Execution,
    pub suite: SuiteSize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            emit_matrices: false,
            execution: Execution::default(),
            suite: SuiteSize::FULL,
        }
    }
}

pub fn run(command: Command, sc: &Scenario, opts: RunOptions) -> Result<ResultDocument, CommandError> {
    let mut doc = ResultDocument::new(command.name(), &sc.name, &sc.digest, sc.seed);
    match command {
        Command::Validate => validate(sc, &mut doc)?,
        Command::Forms => forms_cmd(sc, &mut doc, opts)?,
        Command::Junk => junk(sc, &mut doc, opts)?,
        Command::Curvature => curvature_cmd(sc, &mut doc, opts)?,
        Command::Correspondence => correspondence(sc, &mut doc, opts)?,
        Command::External => external(sc, &mut doc, opts),
        Command::ProductSpectrum => product_spectrum(sc, &mut doc, opts)?,
        Command::Submersion => submersion(sc, &mut doc)?,
        Command::Selftest => selftest(sc, &mut doc, opts),
    }
    Ok(doc)
}

fn tol(sc: &Scenario) -> f64 {
    sc.tolerances.residual
}

fn validate(sc: &Scenario, doc: &mut ResultDocument) -> Result<(), CommandError> {
    let t = tol(sc);
    doc.checks(sc.triple.validate(t).checks);
    doc.dim("n", sc.triple.n());
    doc.dim("d", sc.triple.d());
    if let Some(st2) = &sc.second_triple {
        doc.checks(st2.validate(t).checks.into_iter().map(|c| Check {
            name: format!("second_triple.{}", c.name),
            ..c
        }));
    }
    if let Some(module) = &sc.module {
        doc.dim("module.m", module.m());
        doc.dim("module.rank", module.rank());
        let conn = sc.connection_or_zero().expect("module present");
        match conn.represent(&sc.triple, module) {
            Ok(_) => doc.check(Check::flag("connection.compressed_and_odd", true)),
            Err(e) => {
                doc.check(Check::flag("connection.compressed_and_odd", false));
                doc.note(format!("connection: {e}"));
            }
        }
        if conn.hermitian {
            doc.check(Check::at_most(
                "connection.hermitian",
                fgp::hermitian_residual(&sc.triple, module, &conn)?,
                t,
            ));
        }
    }
    if sc.vertical.is_some() {
        doc.check(Check::flag("vertical.odd_self_adjoint_compressed", true));
    }
    if let Some(fp) = &sc.frame {
        doc.check(Check::at_most("frame.antisymmetric", fp.antisymmetry_residual(), ANTISYMMETRY_TOL));
    }
    Ok(())
}

fn forms_cmd(sc: &Scenario, doc: &mut ResultDocument, opts: RunOptions) -> Result<(), CommandError> {
    let st = &sc.triple;
    let spaces = [
        ("omega0", forms::algebra_space(st)?),
        ("omega1", forms::one_form_space(st)?),
        ("omega2", forms::two_form_space(st)?),
        ("junk2", forms::junk_space(st)?),
    ];
    for (name, space) in &spaces {
        doc.dim(name, space.dim());
        doc.check(Check::at_most(format!("{name}.orthonormal"), space.basis.orthonormality_residual(), tol(sc)));
        if opts.emit_matrices {
            for (k, e) in space.basis.elements().iter().enumerate() {
                doc.matrix(&format!("{name}.basis[{k}]"), e);
            }
        }
    }
    let d = st.d();
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let w = forms::UniversalOneForm::delta(st, &AlgebraElement::unit(d, k))?;
        let (two, residual) = w.two_form_with_residual(st)?;
        worst = worst.max(residual);
        let in_omega2 = spaces[2].1.membership_residual(&two)?;
        doc.check(Check::at_most(format!("delta(b{k}).two_form_in_omega2"), in_omega2, tol(sc)));
    }
    doc.check(Check::at_most("two_form_identity", worst, forms::TWO_FORM_CROSSCHECK_TOL));
    let c1: Vec<f64> = (0..d).map(|k| st.c1_norm(&AlgebraElement::unit(d, k))).collect();
    let c2: Vec<f64> = (0..d).map(|k| st.c2_norm(&AlgebraElement::unit(d, k))).collect();
    doc.value("c1_norm", c1);
    doc.value("c2_norm", c2);
    Ok(())
}

fn junk(sc: &Scenario, doc: &mut ResultDocument, opts: RunOptions) -> Result<(), CommandError> {
    let st = &sc.triple;
    let omega2 = forms::two_form_space(st)?;
    let junk = forms::junk_space(st)?;
    let kernel = forms::junk_kernel(st)?;
    doc.dim("omega1", forms::one_form_space(st)?.dim());
    doc.dim("omega2", omega2.dim());
    doc.dim("junk2", junk.dim());
    doc.dim("junk_kernel", kernel.len());
    let mut third: f64 = 0.0;
    let mut inside: f64 = 0.0;
    for w in &kernel {
        third = third.max(w.third_junk_condition(st)?.norm());
        inside = inside.max(omega2.membership_residual(&w.pi_d2(st)?)?);
    }
    doc.check(Check::at_most("junk.third_condition", third, tol(sc)));
    doc.check(Check::at_most("junk.inside_omega2", inside, tol(sc)));
    if opts.emit_matrices {
        for (k, e) in junk.basis.elements().iter().enumerate() {
            doc.matrix(&format!("junk2.basis[{k}]"), e);
        }
    }
    Ok(())
}

fn module_of(sc: &Scenario, command: Command) -> Result<&crate::fgp::ProjectiveModule, CommandError> {
    sc.module.as_ref().ok_or(CommandError::Missing { command, what: "a module" })
}

fn curvature_cmd(sc: &Scenario, doc: &mut ResultDocument, opts: RunOptions) -> Result<(), CommandError> {
    let module = module_of(sc, Command::Curvature)?;
    let conn = sc.connection_or_zero().expect("module present");
    if sc.connection.is_none() {
        doc.note("no connection given; using A = 0");
    }
    doc.note(format!("sign convention: {}", curvature::SIGN_CONVENTION));
    let report = curvature::curvature_report(&sc.triple, module, &conn)?;
    doc.checks(report.checks(harness::ROUTE_TOL, harness::STRUCTURE_TOL, conn.hermitian).checks);
    doc.norm("curvature.spectral", report.norm);
    doc.norm("curvature.frobenius", report.r.norm());
    doc.norm("junk_canonical.frobenius", report.junk_canonical.norm());
    doc.dim("module.m", module.m());
    doc.dim("module.rank", module.rank());
    doc.dim("lifted_junk", report.junk_dim);
    doc.value("route_residual", report.route_residual);
    if opts.emit_matrices {
        doc.matrix("R", &report.r);
        doc.matrix("junk_canonical", &report.junk_canonical);
    }
    Ok(())
}

fn correspondence(sc: &Scenario, doc: &mut ResultDocument, opts: RunOptions) -> Result<(), CommandError> {
    let module = module_of(sc, Command::Correspondence)?;
    let conn = sc.connection_or_zero().expect("module present");
    let s = match &sc.vertical {
        Some(s) => s.clone(),
        None => {
            doc.note("no vertical operator given; using S = 0");
            VerticalOperator::zero(&sc.triple, module)
        }
    };
    doc.note(format!("sign convention: {}", curvature::SIGN_CONVENTION));
    let r = curvature::correspondence_curvature(&sc.triple, module, &conn, &s)?;
    let residual = curvature::correspondence_decomposition_residual(&sc.triple, module, &conn, &s)?;
    doc.check(Check::at_most("correspondence.decomposition", residual, harness::CORRESPONDENCE_TOL));
    doc.norm("correspondence.spectral", linalg::spectral_norm(&r));
    doc.norm(
        "anticommutator_diagnostic",
        curvature::anticommutator_diagnostic(&sc.triple, module, &conn, &s)?,
    );
    if opts.emit_matrices {
        doc.matrix("R_correspondence", &r);
        doc.matrix("S", s.matrix());
    }
    Ok(())
}

fn external(sc: &Scenario, doc: &mut ResultDocument, opts: RunOptions) {
    let st1 = &sc.triple;
    let st2 = match &sc.second_triple {
        Some(t) => t,
        None => {
            doc.note("no second triple given; using the first one twice");
            st1
        }
    };
    let defect = curvature::external_product_defect(st1, st2);
    let control = curvature::external_product_defect_ungraded(st1, st2);
    let scale = (linalg::spectral_norm(st1.dirac()) + linalg::spectral_norm(st2.dirac())).powi(2);
    let norm = linalg::spectral_norm(&defect);
    doc.check(Check::at_most("external.defect", norm, harness::EXTERNAL_TOL * scale.max(1.0)));
    doc.norm("external.defect", norm);
    doc.norm("external.ungraded_control", linalg::spectral_norm(&control));
    doc.norm("external.scale", scale);
    doc.dim("n", st1.n() * st2.n());
    if opts.emit_matrices {
        doc.matrix("defect", &defect);
        doc.matrix("ungraded_control", &control);
    }
}

fn product_spectrum(sc: &Scenario, doc: &mut ResultDocument, opts: RunOptions) -> Result<(), CommandError> {
    let module = module_of(sc, Command::ProductSpectrum)?;
    let conn = sc.connection_or_zero().expect("module present");
    let op = fgp::product_operator(&sc.triple, module, &conn)?;
    doc.check(Check::at_most("product.symmetric", op.symmetry_residual(), tol(sc)));
    doc.check(Check::at_most("product.odd", op.oddness_residual(), tol(sc)));
    doc.check(Check::at_most("product.support", op.support_residual(), tol(sc)));
    match fgp::spectrum(&op, tol(sc)) {
        Ok(ev) => {
            doc.dim("range_p", ev.len());
            doc.value("spectrum", ev);
        }
        Err(e) => doc.note(format!("spectrum unavailable: {e}")),
    }
    doc.norm("product.spectral", linalg::spectral_norm(&op.mat));
    if opts.emit_matrices {
        doc.matrix("M", &op.mat);
    }
    Ok(())
}

fn submersion(sc: &Scenario, doc: &mut ResultDocument) -> Result<(), CommandError> {
    let fp = sc.frame.as_ref().ok_or(CommandError::Missing {
        command: Command::Submersion,
        what: "a frame",
    })?;
    let inv = SubmersionInvariants::compute(fp);
    doc.check(Check::at_most("s_pi.symmetric", inv.s_pi_symmetry_residual(), ANTISYMMETRY_TOL));
    doc.check(Check::at_most("omega.antisymmetric", inv.omega_antisymmetry_residual(), ANTISYMMETRY_TOL));
    let jacobi = fp.jacobi_residual();
    if sc.canned_frame {
        doc.check(Check::at_most("frame.jacobi", jacobi, ANTISYMMETRY_TOL));
    } else {
        doc.norm("frame.jacobi", jacobi);
    }
    doc.dim("dim_m", fp.dim_m());
    doc.dim("dim_f", fp.dim_f());
    doc.note("indices are zero-based; s_pi[a][b][i], k[i], omega[i][j][a] with a, b vertical and i, j horizontal");
    doc.value("s_pi", &inv.s_pi);
    doc.value("k", &inv.k);
    doc.value("omega", &inv.omega);
    Ok(())
}

fn selftest(sc: &Scenario, doc: &mut ResultDocument, opts: RunOptions) {
    let (report, sweeps) = harness::selftest(sc.seed, opts.suite, opts.execution);
    doc.checks(report.checks);
    for s in &sweeps {
        doc.value(&format!("sweep.{}", s.name), serde_json::json!({
            "cases": s.cases.len(),
            "worst": s.worst(),
            "threshold": s.threshold(),
        }));
    }
    doc.note(format!("generator {}", crate::random::GENERATOR));
    let growth = harness::growth_proxy(sc.seed, harness::MAX_M, 8, opts.execution);
    doc.value("growth_proxy", growth);
    doc.note("growth_proxy lists the largest curvature norm per generator count; it is reported, not asserted");
}
