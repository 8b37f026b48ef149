//! One function per subcommand. Each returns its CSV table, a JSON detail
//! object and the tasks that failed numerically.

use magspec_core::branches::{
    detect_zeros, fit_exponential_decay, fit_power_law, simultaneous_crossings, trace_branches,
    BranchSpec,
};
use magspec_core::ids::{box_cutoff, correction_term, fiber_ids, sweep_point, weyl_ids};
use magspec_core::oracle2d::{build_2d, count_interval};
use magspec_core::perturbation::{compute, derivative_coeffs, omega2_closed_form};
use magspec_core::verify::{run_criterion, ALL, QUICK};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{num, Table, TaskError};

pub struct Outcome {
    pub table: Table,
    pub details: Value,
    pub errors: Vec<TaskError>,
    /// A check ran and failed (verify only).
    pub failed: bool,
}

impl Outcome {
    fn new(table: Table, details: Value) -> Self {
        Outcome {
            table,
            details,
            errors: Vec::new(),
            failed: false,
        }
    }

    fn error(&mut self, task: impl Into<String>, e: impl std::fmt::Display) {
        self.errors.push(TaskError {
            task: task.into(),
            error: e.to_string(),
        });
    }
}

pub fn run(name: &str, cfg: &RunConfig) -> Outcome {
    match name {
        "branch" => branch(cfg),
        "fit-kappa" => fit_kappa(cfg),
        "fit-decay" => fit_decay(cfg),
        "zeros" => zeros(cfg),
        "perturb" => perturb(cfg),
        "ids" => ids(cfg),
        "weyl" => weyl(cfg),
        "corr" => corr(cfg),
        "sweep" => sweep(cfg),
        "oracle2d" => oracle2d(cfg),
        "verify" => verify(cfg),
        _ => unreachable!("clap restricts subcommands"),
    }
}

fn branch(cfg: &RunConfig) -> Outcome {
    let c = &cfg.branch;
    let mut t = Table::new(&[
        "nu",
        "ell",
        "eta",
        "n",
        "lambda",
        "error_estimate",
        "clamped",
    ]);
    let mut spec = BranchSpec::pilot(c.nu, c.ell);
    spec.alpha = c.alpha;
    spec.beta = c.beta;
    let mut out = Outcome::new(Table::default(), Value::Null);
    match trace_branches(&spec, &c.eta.points(), c.n_branches, &cfg.settings) {
        Ok(b) => {
            for (i, &eta) in b.eta_grid.iter().enumerate() {
                for n in 0..b.n_branches() {
                    t.push(
                        "branch",
                        vec![
                            c.nu.to_string(),
                            c.ell.to_string(),
                            num(eta),
                            n.to_string(),
                            num(b.values[n][i]),
                            num(b.error_estimates[n][i]),
                            b.clamped[i].to_string(),
                        ],
                    );
                }
            }
            let v = b.continuity_violations();
            out.details = json!({ "points": b.eta_grid.len(), "continuity_violations": v });
        }
        Err(e) => out.error(format!("branch nu={} l={}", c.nu, c.ell), e),
    }
    out.table = t;
    out
}

fn fit_kappa(cfg: &RunConfig) -> Outcome {
    let c = &cfg.fit_kappa;
    let grid = c.eta.points();
    let window = (c.eta.min, c.eta.max);
    let results: Vec<_> = c
        .cases
        .par_iter()
        .map(|&(nu, l)| {
            let b = trace_branches(
                &BranchSpec::pilot(nu, l),
                &grid,
                l as usize + 1,
                &cfg.settings,
            )?;
            let f = fit_power_law(&b, l as usize, window)?;
            let k = compute(nu, l)?.kappa;
            Ok::<_, magspec_core::Error>((nu, l, f, k))
        })
        .collect();
    let mut t = Table::new(&[
        "nu",
        "ell",
        "exponent",
        "exponent_ref",
        "coefficient",
        "coefficient_ref",
        "max_rel_residual",
    ]);
    let mut out = Outcome::new(Table::default(), json!({ "window": window }));
    for (r, &(nu, l)) in results.into_iter().zip(&c.cases) {
        match r {
            Ok((nu, l, f, k)) => t.push(
                "fit-kappa",
                vec![
                    nu.to_string(),
                    l.to_string(),
                    num(f.exponent),
                    num(-2.0 / nu as f64),
                    num(f.coefficient),
                    num(k),
                    num(f.max_relative_residual),
                ],
            ),
            Err(e) => out.error(format!("fit-kappa nu={nu} l={l}"), e),
        }
    }
    out.table = t;
    out
}

fn fit_decay(cfg: &RunConfig) -> Outcome {
    let c = &cfg.fit_decay;
    let mut t = Table::new(&[
        "nu",
        "exponent",
        "coefficient",
        "derivative_lower",
        "derivative_upper",
        "monotone",
        "dropped",
    ]);
    let mut out = Outcome::new(Table::default(), Value::Null);
    let r = trace_branches(
        &BranchSpec::pilot(c.nu, 0),
        &c.eta.points(),
        1,
        &cfg.settings,
    )
    .and_then(|b| fit_exponential_decay(&b, (c.eta.min, c.eta.max)));
    match r {
        Ok(d) => {
            t.push(
                "fit-decay",
                vec![
                    c.nu.to_string(),
                    num(d.fit.exponent),
                    num(d.fit.coefficient),
                    num(d.derivative_lower),
                    num(d.derivative_upper),
                    d.monotone.to_string(),
                    d.dropped.to_string(),
                ],
            );
            out.details = json!({ "expected_exponent": (c.nu as f64 + 1.0) / c.nu as f64 });
        }
        Err(e) => out.error(format!("fit-decay nu={}", c.nu), e),
    }
    out.table = t;
    out
}

fn zeros(cfg: &RunConfig) -> Outcome {
    let c = &cfg.zeros;
    let mut t = Table::new(&[
        "nu",
        "ell",
        "branch",
        "eta_bar",
        "order_r",
        "alpha_local",
        "rounding_gap",
        "ambiguous",
    ]);
    let mut out = Outcome::new(Table::default(), Value::Null);
    let r = trace_branches(
        &BranchSpec::pilot(c.nu, c.ell),
        &c.eta.points(),
        c.n_branches,
        &cfg.settings,
    )
    .and_then(|b| detect_zeros(&b));
    match r {
        Ok(z) => {
            for x in &z {
                t.push(
                    "zeros",
                    vec![
                        c.nu.to_string(),
                        c.ell.to_string(),
                        x.branch.to_string(),
                        num(x.eta_bar),
                        x.order_r.to_string(),
                        num(x.alpha_local),
                        num(x.rounding_gap),
                        x.ambiguous.to_string(),
                    ],
                );
            }
            let sim = simultaneous_crossings(&z, c.simultaneous_tol);
            out.details = json!({ "crossings": z.len(), "simultaneous": sim.len() });
        }
        Err(e) => out.error(format!("zeros nu={} l={}", c.nu, c.ell), e),
    }
    out.table = t;
    out
}

fn perturb(cfg: &RunConfig) -> Outcome {
    let c = &cfg.perturb;
    let cases: Vec<(u32, u32)> =
        c.nu.iter()
            .flat_map(|&nu| c.ell.iter().map(move |&l| (nu, l)))
            .collect();
    let results: Vec<_> = cases
        .par_iter()
        .map(|&(nu, l)| Ok::<_, magspec_core::Error>((compute(nu, l)?, derivative_coeffs(nu, l)?)))
        .collect();
    let mut t = Table::new(&[
        "nu",
        "ell",
        "omega2",
        "omega2_value",
        "closed_form",
        "matches",
        "kappa",
        "kappa1",
        "kappa2",
        "kappa3",
        "kappa4",
    ]);
    let mut out = Outcome::new(Table::default(), Value::Null);
    let mut mismatches = 0;
    for (r, &(nu, l)) in results.into_iter().zip(&cases) {
        match r {
            Ok((p, k)) => {
                let closed = omega2_closed_form(nu, l);
                let ok = p.omega2 == closed;
                mismatches += usize::from(!ok);
                t.push(
                    "perturb",
                    vec![
                        nu.to_string(),
                        l.to_string(),
                        p.omega2.to_string(),
                        num(p.omega2.to_f64().unwrap_or(f64::NAN)),
                        closed.to_string(),
                        ok.to_string(),
                        num(p.kappa),
                        num(k.kappa1),
                        num(k.kappa2),
                        num(k.kappa3),
                        num(k.kappa4),
                    ],
                );
            }
            Err(e) => out.error(format!("perturb nu={nu} l={l}"), e),
        }
    }
    out.details = json!({ "cases": cases.len(), "mismatches": mismatches });
    out.table = t;
    out
}

fn ids(cfg: &RunConfig) -> Outcome {
    let c = &cfg.ids;
    let mut t = Table::new(&[
        "nu",
        "ell",
        "mu",
        "h",
        "tau",
        "value",
        "error",
        "xi_lo",
        "xi_hi",
        "breakpoints",
    ]);
    let mut out = Outcome::new(Table::default(), Value::Null);
    match fiber_ids(&c.params, &c.psi, c.tau, &c.options) {
        Ok(r) => t.push(
            "ids",
            vec![
                c.params.nu.to_string(),
                c.params.ell.to_string(),
                num(c.params.mu),
                num(c.params.h),
                num(c.tau),
                num(r.value),
                num(r.error),
                num(r.window.0),
                num(r.window.1),
                r.breakpoints.to_string(),
            ],
        ),
        Err(e) => out.error("ids", e),
    }
    out.table = t;
    out
}

fn weyl(cfg: &RunConfig) -> Outcome {
    let c = &cfg.weyl;
    let mut t = Table::new(&[
        "nu",
        "ell",
        "mu",
        "h",
        "tau",
        "value",
        "error",
        "level_count_value",
        "l_pm",
        "cut_radius",
    ]);
    let mut out = Outcome::new(Table::default(), Value::Null);
    match weyl_ids(&c.params, &c.psi, c.tau, &c.options) {
        Ok(r) => {
            t.push(
                "weyl",
                vec![
                    c.params.nu.to_string(),
                    c.params.ell.to_string(),
                    num(c.params.mu),
                    num(c.params.h),
                    num(c.tau),
                    num(r.value),
                    num(r.error),
                    r.level_count_value.map(num).unwrap_or_default(),
                    r.l_pm.map(|v| v.to_string()).unwrap_or_default(),
                    num(r.cut_radius),
                ],
            );
            out.details = json!({ "count_field": r.count_field });
        }
        Err(e) => out.error("weyl", e),
    }
    out.table = t;
    out
}

fn corr(cfg: &RunConfig) -> Outcome {
    let c = &cfg.corr;
    let mut t = Table::new(&["x2", "correction"]);
    let mut out = Outcome::new(Table::default(), Value::Null);
    match correction_term(&c.params, &c.psi2, c.extent, c.tau, &c.options) {
        Ok(r) => {
            for &(x2, e) in &r.per_x2 {
                t.push("corr", vec![num(x2), num(e)]);
            }
            out.details = json!({
                "value": r.value,
                "error": r.error,
                "fiber": r.fiber,
                "weyl": r.weyl,
                "xi_window": r.xi_window,
                "x1_window": r.x1_window,
            });
        }
        Err(e) => out.error("corr", e),
    }
    out.table = t;
    out
}

fn sweep(cfg: &RunConfig) -> Outcome {
    let c = &cfg.sweep;
    let params = c.params();
    let results: Vec<_> = params
        .par_iter()
        .map(|p| sweep_point(p, &box_cutoff(p, &c.options.oracle), c.tau, &c.options))
        .collect();
    let mut t = Table::new(&[
        "nu",
        "ell",
        "mu",
        "h",
        "coupling",
        "regime",
        "oracle",
        "oracle_error",
        "fiber_ids",
        "weyl",
        "remainder_ri",
        "normalized_remainder",
        "quadrature_error",
        "discretization_error",
        "skipped",
    ]);
    let mut out = Outcome::new(Table::default(), Value::Null);
    let mut skipped = 0;
    for (r, p) in results.into_iter().zip(&params) {
        match r {
            Ok(s) => {
                skipped += usize::from(s.skipped.is_some());
                t.push(
                    "sweep",
                    vec![
                        p.nu.to_string(),
                        p.ell.to_string(),
                        num(p.mu),
                        num(p.h),
                        num(p.coupling()),
                        s.regime.to_string(),
                        num(s.oracle),
                        num(s.oracle_error),
                        num(s.fiber_ids),
                        num(s.weyl),
                        num(s.remainder_ri),
                        num(s.normalized_remainder),
                        num(s.quadrature_error),
                        num(s.discretization_error),
                        s.skipped.unwrap_or_default(),
                    ],
                );
            }
            Err(e) => out.error(format!("sweep mu={} h={}", p.mu, p.h), e),
        }
    }
    out.details = json!({ "points": params.len(), "skipped": skipped });
    out.table = t;
    out
}

fn oracle2d(cfg: &RunConfig) -> Outcome {
    let c = &cfg.oracle2d;
    let bx = c.domain.box_for(&c.params);
    let mut t = Table::new(&[
        "x1_lo", "x1_hi", "x2_lo", "x2_hi", "n1", "n2", "tau", "count", "count_lo", "count_hi",
    ]);
    let mut out = Outcome::new(Table::default(), Value::Null);
    match build_2d(&c.params, &bx, c.domain.cap).and_then(|m| count_interval(&m, c.tau, c.delta)) {
        Ok(k) => t.push(
            "oracle2d",
            vec![
                num(bx.x1.0),
                num(bx.x1.1),
                num(bx.x2.0),
                num(bx.x2.1),
                bx.n1.to_string(),
                bx.n2.to_string(),
                num(c.tau),
                k.count.to_string(),
                k.lo.to_string(),
                k.hi.to_string(),
            ],
        ),
        Err(e) => out.error("oracle2d", e),
    }
    out.table = t;
    out
}

pub fn verify_ids(cfg: &RunConfig) -> Vec<u32> {
    if cfg.verify.quick {
        QUICK.to_vec()
    } else if cfg.verify.criteria.is_empty() {
        ALL.to_vec()
    } else {
        cfg.verify.criteria.clone()
    }
}

fn verify(cfg: &RunConfig) -> Outcome {
    let mut t = Table::new(&[
        "case",
        "quantity",
        "value",
        "reference",
        "tolerance",
        "passed",
    ]);
    let mut out = Outcome::new(Table::default(), Value::Null);
    let mut report = Vec::new();
    for id in verify_ids(cfg) {
        let r = match run_criterion(id, &cfg.verify.suite) {
            Ok(r) => r,
            Err(e) => {
                out.error(format!("criterion-{id}"), e);
                continue;
            }
        };
        eprintln!("{}", r.line());
        for c in &r.checks {
            t.push(
                format!("criterion-{id}"),
                vec![
                    c.case.clone(),
                    c.quantity.clone(),
                    num(c.value),
                    num(c.reference),
                    num(c.tolerance),
                    c.passed.to_string(),
                ],
            );
        }
        if let Some(e) = &r.error {
            out.error(format!("criterion-{id}"), e);
        }
        out.failed |= !r.passed;
        report.push(json!({
            "id": r.id,
            "name": r.name,
            "passed": r.passed,
            "checks": r.checks.len(),
            "failed_checks": r.checks.iter().filter(|c| !c.passed).count(),
            "error": r.error,
            "seconds": r.seconds,
            "budget_seconds": r.budget_seconds,
        }));
    }
    out.details = json!({ "criteria": report, "passed": !out.failed && out.errors.is_empty() });
    out.table = t;
    out
}
