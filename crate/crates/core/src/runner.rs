//! Scenario execution and machine-readable reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::dualband::DualBandSpace;
use crate::error::{Error, Result};
use crate::extension::{Extension, SymbolForm, KERNEL_RESIDUAL};
use crate::factorization::{self as fact, FactorizationResult, ShiftInput};
use crate::grid::C64;
use crate::hankel;
use crate::linalg::{self, CVec};
use crate::scenario::{Scenario, SpaceMode, Task, TaskSet};
use crate::spectra::{self, ShiftData, EIGVEC_RESIDUAL};
use crate::symbol::LaurentSymbol;

pub const SCHEMA: u32 = 1;
/// Operator identities of the dual-band module.
const IDENTITY_RESIDUAL: f64 = 1e-10;
/// Agreement between the Hankel, block and direct norms.
const NORM_AGREEMENT: f64 = 1e-8;
/// Agreement of analytic spectra and triangular inverses with direct computation.
const ANALYTIC_AGREEMENT: f64 = 1e-8;
/// Pairing of determinant roots with matrix eigenvalues.
const PAIRING: f64 = 1e-7;
/// Residual of the resolvent equation.
const RESOLVENT_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub grid: Option<usize>,
    pub contract_tol: Option<f64>,
    pub tasks: Option<TaskSet>,
    pub fail_fast: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Skipped,
    ContractViolation,
    InputError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// A residual against a numeric bound; the bound can be overridden.
    Residual,
    /// A yes/no agreement between two computations.
    Agreement,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskOutcome {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub checks: Vec<Check>,
    pub result: Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub toolkit: String,
    pub scenario: ScenarioInfo,
    pub status: Status,
    pub space: Json,
    pub tasks: BTreeMap<String, TaskOutcome>,
    /// Wall-clock milliseconds per task; the only nondeterministic block.
    pub timings: BTreeMap<String, f64>,
    #[serde(skip)]
    pub eigs_csv: Option<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok | Status::Skipped => 0,
            Status::ContractViolation => 2,
            Status::InputError => 3,
        }
    }

    /// Pretty JSON; `timings` false drops the timing block for golden files.
    pub fn to_json(&self, timings: bool) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if !timings {
            v.as_object_mut().expect("object").remove("timings");
        }
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn failing_tasks(&self) -> Vec<String> {
        self.tasks.iter().filter(|(_, o)| o.status > Status::Skipped).map(|(k, _)| k.clone()).collect()
    }
}

/// Collected output of one task.
struct Body {
    checks: Vec<Check>,
    result: Json,
    csv: Option<String>,
}

struct Ctx<'a> {
    sc: &'a Scenario,
    space: Option<&'a DualBandSpace>,
    grid: Option<usize>,
    contract_tol: Option<f64>,
}

impl Ctx<'_> {
    fn residual(&self, checks: &mut Vec<Check>, name: impl Into<String>, value: f64, bound: f64) {
        let bound = self.contract_tol.unwrap_or(bound);
        checks.push(Check { name: name.into(), kind: CheckKind::Residual, value, bound, passed: value <= bound });
    }

    fn space(&self) -> Result<&DualBandSpace> {
        self.space.ok_or_else(|| Error::Invalid("task requires a finite Blaschke space".into()))
    }

    fn shift_input(&self) -> Result<ShiftInput> {
        match self.space {
            Some(sp) => ShiftInput::from_space(sp),
            None => {
                let s = &self.sc.space;
                match (&s.aplus, &s.aminus) {
                    (Some(ap), Some(am)) => Ok(ShiftInput::new(s.theta.clone(), ap.clone(), am.clone())),
                    _ => Err(Error::MissingDecomposition),
                }
            }
        }
    }

    /// Grid for extension symbols: the explicit grid, else one sized for the cutoff.
    fn extension_grid(&self) -> Option<usize> {
        self.grid.or(self.sc.cutoff.map(|c| (2 * (c + 1)).next_power_of_two().max(8)))
    }
}

fn agreement(checks: &mut Vec<Check>, name: impl Into<String>, ok: bool) {
    checks.push(Check {
        name: name.into(),
        kind: CheckKind::Agreement,
        value: if ok { 0.0 } else { 1.0 },
        bound: 0.0,
        passed: ok,
    });
}

fn error_status(e: &Error) -> Status {
    match e {
        Error::Contract { .. } | Error::NotInKernel { .. } | Error::CutoffInadequate { .. } | Error::NoConvergence(_) => {
            Status::ContractViolation
        }
        _ => Status::InputError,
    }
}

fn cplx(z: C64) -> Json {
    json!([z.re, z.im])
}

fn cvec(v: &CVec) -> Json {
    Json::Array(v.iter().map(|z| cplx(*z)).collect())
}

fn to_json<T: Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("result serializes")
}

/// Build the space for a scenario; None in pointwise mode.
pub fn build_space(sc: &Scenario) -> Result<Option<DualBandSpace>> {
    let s = &sc.space;
    let dec = s.aplus.clone().zip(s.aminus.clone());
    match s.mode {
        SpaceMode::Realized => Ok(Some(DualBandSpace::build(
            &s.theta,
            s.phi.clone().expect("checked at parse"),
            s.psi.clone().expect("checked at parse"),
            dec,
            &sc.tol,
        )?)),
        SpaceMode::Free => {
            let (ap, am) = dec.expect("checked at parse");
            Ok(Some(DualBandSpace::free_symbol(&s.theta, ap, am, &sc.tol)?))
        }
        SpaceMode::Pointwise => Ok(None),
    }
}

fn space_json(sc: &Scenario, space: Option<&DualBandSpace>) -> Json {
    match space {
        Some(sp) => json!({
            "mode": sc.space.mode,
            "dimension": 2 * sp.n(),
            "theta": sp.theta().describe(),
            "validation": to_json(sp.validation()),
        }),
        None => json!({ "mode": sc.space.mode, "theta": sc.space.theta.describe() }),
    }
}

/// Run a parsed scenario.
pub fn run(sc: &Scenario, opts: &RunOptions) -> Report {
    let mut report = Report {
        schema: SCHEMA,
        toolkit: format!("dualband {}", env!("CARGO_PKG_VERSION")),
        scenario: ScenarioInfo { name: sc.name.clone(), digest: sc.digest.clone() },
        status: Status::Ok,
        space: Json::Null,
        tasks: BTreeMap::new(),
        timings: BTreeMap::new(),
        eigs_csv: None,
    };
    let tasks = match sc.selected_tasks(opts.tasks.as_ref()) {
        Ok(t) => t,
        Err((t, why)) => {
            report.status = Status::InputError;
            report.space = json!({ "error": format!("task '{t}' {why}") });
            return report;
        }
    };
    let space = match build_space(sc) {
        Ok(s) => s,
        Err(e) => {
            report.status = Status::InputError;
            report.space = json!({ "error": e.to_string() });
            return report;
        }
    };
    report.space = space_json(sc, space.as_ref());
    let ctx = Ctx {
        sc,
        space: space.as_ref(),
        grid: opts.grid.or(sc.grid),
        contract_tol: opts.contract_tol.or(sc.contract_tol),
    };
    let timed = |t: Task| -> (Task, TaskOutcome, Option<String>, f64) {
        let start = Instant::now();
        let (o, csv) = run_task(&ctx, t);
        (t, o, csv, start.elapsed().as_secs_f64() * 1e3)
    };
    let results: Vec<(Task, TaskOutcome, Option<String>, f64)> = if opts.fail_fast {
        let mut out = Vec::new();
        let mut failed = false;
        for t in tasks {
            if failed {
                let o = TaskOutcome {
                    status: Status::Skipped,
                    message: Some("skipped after an earlier failure".into()),
                    checks: Vec::new(),
                    result: Json::Null,
                };
                out.push((t, o, None, 0.0));
                continue;
            }
            let r = timed(t);
            failed = r.1.status > Status::Skipped;
            out.push(r);
        }
        out
    } else {
        tasks.par_iter().map(|t| timed(*t)).collect()
    };
    for (t, o, csv, ms) in results {
        report.status = report.status.max(o.status);
        if csv.is_some() {
            report.eigs_csv = csv;
        }
        report.tasks.insert(t.name().to_string(), o);
        report.timings.insert(t.name().to_string(), ms);
    }
    if report.status == Status::Skipped {
        report.status = Status::Ok;
    }
    report
}

fn run_task(ctx: &Ctx, task: Task) -> (TaskOutcome, Option<String>) {
    let body = match task {
        Task::Validate => task_validate(ctx),
        Task::Spectrum => task_spectrum(ctx),
        Task::Kernel => task_kernel(ctx),
        Task::Factorize => task_factorize(ctx),
        Task::Resolvent => task_resolvent(ctx),
        Task::Norm => task_norm(ctx),
    };
    match body {
        Ok(b) => {
            let failed: Vec<&str> = b.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            let (status, message) = if failed.is_empty() {
                (Status::Ok, None)
            } else {
                (Status::ContractViolation, Some(format!("failed checks: {}", failed.join(", "))))
            };
            (TaskOutcome { status, message, checks: b.checks, result: b.result }, b.csv)
        }
        Err(e) => (
            TaskOutcome { status: error_status(&e), message: Some(e.to_string()), checks: Vec::new(), result: Json::Null },
            None,
        ),
    }
}

fn task_validate(ctx: &Ctx) -> Result<Body> {
    let sp = ctx.space()?;
    let g = ctx.sc.g.clone().unwrap_or_else(|| LaurentSymbol::mono(1));
    let mut checks = Vec::new();
    let eq = sp.unitary_equiv_check(&g)?;
    ctx.residual(&mut checks, "unitary_equivalence", eq, IDENTITY_RESIDUAL);
    let t = sp.dualband_matrix(&g)?;
    let adj = t.adjoint().max_diff(&sp.dualband_matrix(&g.conj())?)?;
    ctx.residual(&mut checks, "adjoint_symbol", adj, IDENTITY_RESIDUAL);
    let cm = sp.cm_symmetry_residual(&g)?;
    ctx.residual(&mut checks, "cm_symmetry", cm, IDENTITY_RESIDUAL);
    let w = sp.block_w(&g)?.entries;
    let n = sp.n();
    let blocks: Vec<f64> = [(0, 0), (0, n), (n, 0), (n, n)]
        .iter()
        .map(|&(r, c)| linalg::max_abs(&w.view((r, c), (n, n)).into_owned()))
        .collect();
    let t_zero = t.max_abs() <= IDENTITY_RESIDUAL;
    let w_zero = blocks.iter().all(|b| *b <= IDENTITY_RESIDUAL);
    agreement(&mut checks, "zero_operator_equivalence", t_zero == w_zero);
    Ok(Body {
        checks,
        result: json!({
            "g": g.describe(),
            "operator_max_entry": t.max_abs(),
            "block_max_entries": blocks,
        }),
        csv: None,
    })
}

fn eigs_csv(points: &[spectra::Eigenvalue]) -> String {
    let mut s = String::from("re,im,ker_dim,residual\n");
    for e in points {
        s.push_str(&format!("{},{},{},{:e}\n", e.lambda.re, e.lambda.im, e.ker_dim, e.residual));
    }
    s
}

fn task_spectrum(ctx: &Ctx) -> Result<Body> {
    let sc = ctx.sc;
    let tol = &sc.tol;
    let mut checks = Vec::new();
    let theta = &sc.space.theta;
    let adc = sc
        .adc_points
        .iter()
        .map(|p| spectra::adc_test(theta, *p).map(|r| to_json(&r)).or_else(|e| Ok::<_, Error>(json!({ "lambda": cplx(*p), "error": e.to_string() }))))
        .collect::<Result<Vec<_>>>()?;
    match ctx.space {
        Some(sp) => {
            let rep = spectra::spectrum_report(sp, &sc.spectrum_queries)?;
            ctx.residual(&mut checks, "pairing_distance", rep.pairing_distance, PAIRING);
            agreement(&mut checks, "pairing_counts", rep.pairing_counts_match);
            let worst = rep.point_spectrum.iter().map(|e| e.residual).fold(0.0, f64::max);
            ctx.residual(&mut checks, "eigenvector_residual", worst, EIGVEC_RESIDUAL);
            for c in &rep.classifications {
                if let Some(ok) = c.matrix_agrees {
                    agreement(&mut checks, format!("matrix_agrees@{}", c.lambda), ok);
                }
            }
            let csv = eigs_csv(&rep.point_spectrum);
            Ok(Body { checks, result: json!({ "report": to_json(&rep), "adc": adc }), csv: Some(csv) })
        }
        None => {
            let data = match (&sc.space.aplus, &sc.space.aminus) {
                (Some(ap), Some(am)) => Some(ShiftData::new(
                    theta.clone(),
                    crate::dualband::constant_coeff(ap, tol)?,
                    crate::dualband::constant_coeff(am, tol)?,
                )),
                _ => None,
            };
            let mut qs = sc.spectrum_queries.clone();
            qs.sort_by(linalg::cmp_complex);
            let classifications = match &data {
                Some(d) => qs.iter().map(|l| spectra::classify(d, *l, tol).map(|c| to_json(&c))).collect::<Result<Vec<_>>>()?,
                None => Vec::new(),
            };
            let ess = spectra::essential_spectrum(theta);
            Ok(Body {
                checks,
                result: json!({ "essential_spectrum": to_json(&ess), "classifications": classifications, "adc": adc }),
                csv: None,
            })
        }
    }
}

fn task_kernel(ctx: &Ctx) -> Result<Body> {
    let sp = ctx.space()?;
    let tol = &ctx.sc.tol;
    let g = ctx.sc.g.clone().expect("checked at parse");
    let mut checks = Vec::new();
    let t = sp.dualband_matrix(&g)?.entries;
    let ker = linalg::null_space(&t, tol.rank);
    let coker = linalg::null_space(&t.adjoint(), tol.rank);
    agreement(&mut checks, "index_zero", ker.len() == coker.len());
    let ext = Extension::new(sp, SymbolForm::General(g.clone()), ctx.extension_grid())?;
    let (mut rh, mut pl, mut lp, mut adj_rh, mut adj_el) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for v in &ker {
        let f = ext.lift(v)?;
        rh = rh.max(ext.rh_residual(&f));
        pl = pl.max((ext.project_unchecked(&f) - v).norm() / v.norm());
        let (chi, r) = ext.adjoint_kernel_map(&f)?;
        adj_rh = adj_rh.max(r);
        let w = ext.adjoint_element(&chi);
        if w.norm() > 0.0 {
            adj_el = adj_el.max((t.adjoint() * &w).norm() / w.norm());
        }
    }
    ctx.residual(&mut checks, "lift_rh_residual", rh, KERNEL_RESIDUAL);
    ctx.residual(&mut checks, "project_after_lift", pl, KERNEL_RESIDUAL);
    ctx.residual(&mut checks, "adjoint_map_rh_residual", adj_rh, KERNEL_RESIDUAL);
    ctx.residual(&mut checks, "adjoint_element_residual", adj_el, KERNEL_RESIDUAL);
    let section = match ext.section_kernel(tol.rank) {
        Ok(fs) => {
            agreement(&mut checks, "section_kernel_dimension", fs.len() == ker.len());
            for f in &fs {
                let v = ext.project_unchecked(f);
                let back = ext.lift(&v)?;
                lp = lp.max(back.distance(f) / f.norm());
            }
            ctx.residual(&mut checks, "lift_after_project", lp, KERNEL_RESIDUAL);
            json!({ "dimension": fs.len(), "cutoff": fs.first().map(|f| f.cutoff) })
        }
        Err(e) => json!({ "unavailable": e.to_string() }),
    };
    Ok(Body {
        checks,
        result: json!({
            "g": g.describe(),
            "kernel_dimension": ker.len(),
            "cokernel_dimension": coker.len(),
            "kernel_basis": ker.iter().map(cvec).collect::<Vec<_>>(),
            "extension_cutoff": ext.cutoff(),
            "finite_section": section,
        }),
        csv: None,
    })
}

fn factor_json(f: &FactorizationResult) -> Json {
    json!({
        "kind": f.kind,
        "lambda": f.lambda.map(cplx),
        "partial_indices": f.partial_indices,
        "accepted": f.accepted(),
        "diagnostics": to_json(&f.diagnostics),
        "warnings": f.warnings,
    })
}

fn factor_checks(ctx: &Ctx, checks: &mut Vec<Check>, label: &str, f: &FactorizationResult) {
    let d = &f.diagnostics;
    let (res, tail) = match f.kind {
        fact::FactorKind::L2Generic | fact::FactorKind::L2Exceptional => (fact::L2_RESIDUAL, fact::L2_RESIDUAL),
        _ => (fact::PRODUCT_RESIDUAL, fact::TAIL_BOUND),
    };
    ctx.residual(checks, format!("{label}.product_residual"), d.product_residual, res);
    if f.kind != fact::FactorKind::Meromorphic {
        ctx.residual(checks, format!("{label}.plus_tail"), d.max_plus_tail, tail);
        ctx.residual(checks, format!("{label}.minus_tail"), d.max_minus_tail, tail);
    }
    if d.det_expected.is_some() {
        ctx.residual(checks, format!("{label}.determinant"), d.det_minus_deviation, fact::PRODUCT_RESIDUAL);
    }
}

fn task_factorize(ctx: &Ctx) -> Result<Body> {
    let sc = ctx.sc;
    let tol = &sc.tol;
    let mut checks = Vec::new();
    let mut canonical = Vec::new();
    let mut rational = Vec::new();
    if !sc.factor_lambdas.is_empty() || !sc.factor_r.is_empty() {
        let input = ctx.shift_input()?;
        for l in &sc.factor_lambdas {
            let f = fact::canonical_factors(&input, *l, tol, ctx.grid)?;
            factor_checks(ctx, &mut checks, &format!("canonical@{l}"), &f);
            canonical.push(factor_json(&f));
        }
        for r in &sc.factor_r {
            let label = format!("meromorphic[{}]", r.describe());
            let f = fact::meromorphic_factors(&input, r, tol)?;
            factor_checks(ctx, &mut checks, &label, &f);
            let split = fact::hminus_split(&input, r, tol)?;
            ctx.residual(&mut checks, format!("split[{}].residual", r.describe()), split.residual, fact::PRODUCT_RESIDUAL);
            ctx.residual(&mut checks, format!("split[{}].det", r.describe()), split.det_deviation, fact::PRODUCT_RESIDUAL);
            rational.push(json!({
                "r": r.describe(),
                "meromorphic": factor_json(&f),
                "split": { "residual": split.residual, "det_deviation": split.det_deviation },
            }));
        }
    }
    let mut l2 = Vec::new();
    for p in &sc.l2_points {
        let f = fact::l2_factors_tilde(&sc.space.theta, *p, tol, ctx.grid)?;
        let label = format!("l2@{p}");
        factor_checks(ctx, &mut checks, &label, &f);
        agreement(&mut checks, format!("{label}.index_sum_zero"), f.index_sum() == 0);
        l2.push(factor_json(&f));
    }
    Ok(Body { checks, result: json!({ "canonical": canonical, "rational": rational, "l2": l2 }), csv: None })
}

fn task_resolvent(ctx: &Ctx) -> Result<Body> {
    let sp = ctx.space()?;
    let dim = 2 * sp.n();
    let h = match &ctx.sc.h {
        Some(v) if v.len() != dim => return Err(Error::DimensionMismatch { expected: dim, got: v.len() }),
        Some(v) => CVec::from_vec(v.clone()),
        None => CVec::from_element(dim, C64::new(1.0, 0.0)),
    };
    let mut checks = Vec::new();
    let mut out = Vec::new();
    for l in &ctx.sc.resolvent_lambdas {
        let r = fact::resolvent_apply(sp, *l, &h)?;
        ctx.residual(&mut checks, format!("resolvent@{l}.relative_difference"), r.relative_difference, fact::RESOLVENT_AGREEMENT);
        ctx.residual(&mut checks, format!("resolvent@{l}.residual"), r.residual, RESOLVENT_RESIDUAL);
        let mut j = to_json(&r);
        j["solution"] = cvec(&r.solution);
        out.push(j);
    }
    Ok(Body { checks, result: json!({ "h": cvec(&h), "results": out }), csv: None })
}

fn task_norm(ctx: &Ctx) -> Result<Body> {
    let sp = ctx.space()?;
    let g = ctx.sc.g.clone().expect("checked at parse");
    let mut checks = Vec::new();
    let norms = match hankel::norm_report(sp, &g) {
        Ok(rep) => {
            ctx.residual(&mut checks, "norm_spread", rep.spread, NORM_AGREEMENT);
            to_json(&rep)
        }
        // Without an analytic block symbol only the block and direct norms are comparable.
        Err(e @ Error::NotAnalytic { .. }) => {
            let w_norm = linalg::spectral_norm(&sp.block_w(&g)?.entries);
            let t_norm = linalg::spectral_norm(&sp.dualband_matrix(&g)?.entries);
            ctx.residual(&mut checks, "norm_spread", (w_norm - t_norm).abs(), NORM_AGREEMENT);
            json!({ "hankel_norm": null, "hankel_not_applicable": e.to_string(), "w_norm": w_norm, "t_norm": t_norm })
        }
        Err(e) => return Err(e),
    };
    let analytic = match hankel::analytic_spectrum(sp, &g) {
        Ok(a) => {
            ctx.residual(&mut checks, "analytic_spectrum_pairing", a.pairing_distance, ANALYTIC_AGREEMENT);
            agreement(&mut checks, "analytic_spectrum_counts", a.counts_match);
            let inv = match hankel::triangular_inverse_check(sp, &g) {
                Ok(d) => {
                    ctx.residual(&mut checks, "triangular_inverse", d, ANALYTIC_AGREEMENT);
                    json!(d)
                }
                Err(e) => json!({ "unavailable": e.to_string() }),
            };
            json!({ "spectrum": to_json(&a), "triangular_inverse_difference": inv })
        }
        Err(e @ (Error::Hypothesis(_) | Error::NotAnalytic { .. })) => json!({ "not_applicable": e.to_string() }),
        Err(e) => return Err(e),
    };
    Ok(Body { checks, result: json!({ "g": g.describe(), "norms": norms, "analytic": analytic }), csv: None })
}

/// Which artifacts to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Both,
}

/// Write `<name>.report.json` and, when a spectrum was computed, `<name>.eigs.csv`.
pub fn write_artifacts(report: &Report, out: &Path, format: Format) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let name = &report.scenario.name;
    if format != Format::Csv {
        let p = out.join(format!("{name}.report.json"));
        std::fs::write(&p, report.to_json(true))?;
        written.push(p);
    }
    if format != Format::Json {
        if let Some(csv) = &report.eigs_csv {
            let p = out.join(format!("{name}.eigs.csv"));
            std::fs::write(&p, csv)?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Scenario files (`*.scn`) in a directory, sorted by path.
pub fn scenario_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    v.sort();
    Ok(v)
}

/// Result of a regold attempt.
#[derive(Debug)]
pub enum Regold {
    Written(Vec<PathBuf>),
    /// Scenarios that failed a contract or could not be read, with reasons.
    Refused(Vec<(PathBuf, String)>),
}

/// Run every scenario in `dir` and rewrite `golden/<name>.report.json`
/// (without timings), refusing when any scenario fails.
pub fn regold(dir: &Path, golden: &Path, opts: &RunOptions) -> std::io::Result<Regold> {
    let files = scenario_files(dir)?;
    let outcomes: Vec<(PathBuf, std::result::Result<Report, String>)> = files
        .into_iter()
        .map(|p| {
            let r = std::fs::read_to_string(&p)
                .map_err(|e| e.to_string())
                .and_then(|src| Scenario::parse(&src).map_err(|e| e.to_string()))
                .map(|sc| run(&sc, opts));
            (p, r)
        })
        .collect();
    let mut refused = Vec::new();
    for (p, r) in &outcomes {
        match r {
            Err(e) => refused.push((p.clone(), e.clone())),
            Ok(rep) if rep.status != Status::Ok => {
                let why = match rep.failing_tasks() {
                    v if v.is_empty() => rep.space["error"].as_str().unwrap_or("input error").to_string(),
                    v => format!("failing tasks: {}", v.join(", ")),
                };
                refused.push((p.clone(), why));
            }
            Ok(_) => {}
        }
    }
    if !refused.is_empty() {
        return Ok(Regold::Refused(refused));
    }
    std::fs::create_dir_all(golden)?;
    let mut written = Vec::new();
    for (_, r) in outcomes {
        let rep = r.expect("checked above");
        let p = golden.join(format!("{}.report.json", rep.scenario.name));
        std::fs::write(&p, rep.to_json(false))?;
        written.push(p);
    }
    Ok(Regold::Written(written))
}
