//! Dispatch of a [`RunConfig`] to the core library.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use warpband_core::band::{
    foliation_sweep, hypothesis_report, rigidity_report, ComparisonMap, SliceFlags,
};
use warpband_core::cone::{
    cone_foliation_leaf, cone_tensor_components, cone_tensor_components_numeric, critical_exponent,
    cross_section_condition, eta_hat_sign_estimate, leaf_profile, ConeModel,
};
use warpband_core::convergence::convergence_order;
use warpband_core::geometry::spectral_scalar_curvature;
use warpband_core::model::{build_model_profile, model_coefficients, model_ode_residual};
use warpband_core::stability::ltilde_spectrum;
use warpband_core::variation::{
    first_variation_check, integral_identity_check, linearized_eta_check, QuadraticFormReport,
    VariationFamily,
};
use warpband_core::{Error as CoreError, ModelSign, ModelSpec, Shape};

use crate::config::{
    CheckBandParams, Command, ConeParams, ModelParams, RunConfig, SpectrumParams, Tolerances,
    VerifyParams,
};
use crate::error::ConfigError;
use crate::output::{Emitted, Table};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug)]
pub struct RunOutcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub emitted: Emitted,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_VIOLATED
        }
    }
}

pub fn exit_code(result: &Result<RunOutcome, ConfigError>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(_) => EXIT_CONFIG,
    }
}

/// Runs the checks and writes `<dir>/<command>.jsonl` and `<dir>/<command>.csv`.
pub fn run_config(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome, ConfigError> {
    cfg.tolerances.validate()?;
    let (passed, emitted) = evaluate(cfg)?;
    let files = emitted.write(out_dir, cfg.command.name())?;
    Ok(RunOutcome {
        passed,
        files,
        emitted,
    })
}

/// Runs the checks without touching the filesystem.
pub fn evaluate(cfg: &RunConfig) -> Result<(bool, Emitted), ConfigError> {
    let mut out = Emitted::default();
    let tol = cfg.tolerances;
    let passed = match &cfg.command {
        Command::Model(p) => run_model(p, tol, &mut out)?,
        Command::Spectrum(p) => run_spectrum(p, tol, &mut out)?,
        Command::Verify(p) => run_verify(p, tol, &mut out)?,
        Command::Cone(p) => run_cone(p, tol, &mut out)?,
        Command::CheckBand(p) => run_check_band(p, tol, &mut out)?,
    };
    out.record(
        "summary",
        &json!({ "command": cfg.command.name(), "passed": passed }),
    );
    Ok((passed, out))
}

/// A failed computation is a violated check, not a configuration error.
fn check_failure(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::NonConvergence { .. } | CoreError::Precondition(_)
    )
}

fn failure_record(out: &mut Emitted, what: &str, e: &CoreError) {
    out.record("failure", &json!({ "check": what, "error": e.to_string() }));
}

fn run_model(p: &ModelParams, tol: Tolerances, out: &mut Emitted) -> Result<bool, ConfigError> {
    let domain = match (p.domain, p.sign) {
        (Some(d), _) => d,
        (None, ModelSign::Positive) => {
            let probe = ModelSpec::new(p.n, p.gamma, p.lambda, [0.0, 1.0], p.sign);
            let shape =
                warpband_core::model::model_shape(probe.n, probe.gamma, probe.lambda, probe.sign)?;
            match shape {
                Shape::Sin { b, .. } => [0.0, PI / b],
                _ => unreachable!("positive models are sine profiles"),
            }
        }
        (None, _) => {
            return Err(ConfigError::Invalid(
                "`domain` is required for non-positive models".into(),
            ))
        }
    };
    let spec = ModelSpec::new(p.n, p.gamma, p.lambda, domain, p.sign);
    let metric = build_model_profile(&spec)?;
    let band = metric.band()?;

    let mut table = Table::new(&["t", "xi", "xi_d1", "u", "m", "ode_residual", "lambda_error"]);
    table.comment("n", p.n);
    table.comment("gamma", p.gamma);
    table.comment("lambda", spec.target_lambda());
    match metric.xi.shape() {
        Shape::Sin { a, b, .. } | Shape::Sinh { a, b, .. } => {
            table.comment("a", a);
            table.comment("b", b);
        }
        Shape::Linear { a, .. } => table.comment("slope", a),
        _ => {}
    }
    if p.gamma > 0.0 {
        let (a, b) = model_coefficients(p.n, p.gamma, p.lambda)?;
        out.record("coefficients", &json!({ "a": a, "b": b }));
    }

    let [lo, hi] = spec.domain;
    let samples = p.samples.max(2);
    let mut max_ode: f64 = 0.0;
    let mut max_lambda: f64 = 0.0;
    for i in 0..samples {
        let t = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let xi = metric.xi.eval(t)?;
        if xi.value.abs() < 1e-12 {
            continue;
        }
        let ode = model_ode_residual(&metric.xi, p.n, p.gamma, spec.target_lambda(), t)?;
        let lam = spectral_scalar_curvature(&band, t)? - spec.target_lambda();
        let (m, _) = warpband_core::Prescription::eval(&metric.m, t)?;
        max_ode = max_ode.max(ode.abs());
        max_lambda = max_lambda.max(lam.abs());
        table.push(&[t, xi.value, xi.d1, metric.u.value(t)?, m, ode, lam]);
    }
    let passed = max_ode <= tol.residual && max_lambda <= tol.residual;
    out.record(
        "model",
        &json!({
            "spec": spec,
            "max_ode_residual": max_ode,
            "max_lambda_error": max_lambda,
            "m_monotone": metric.m_monotone(samples)?,
            "passed": passed,
        }),
    );
    out.table = Some(table);
    Ok(passed)
}

fn run_spectrum(
    p: &SpectrumParams,
    tol: Tolerances,
    out: &mut Emitted,
) -> Result<bool, ConfigError> {
    let spectrum = ltilde_spectrum(p.n, p.gamma, p.radius, p.xi, p.k_max)?;
    let mut table = Table::new(&["k", "multiplicity", "eigenvalue"]);
    for e in &spectrum {
        table.push_cells(vec![
            e.k.to_string(),
            e.multiplicity.to_string(),
            crate::output::fmt_f64(e.eigenvalue),
        ]);
    }
    let lambda0 = spectrum[0].eigenvalue;
    let passed = lambda0 >= -tol.residual;
    out.record(
        "spectrum",
        &json!({ "lambda0": lambda0, "nonnegative": passed, "entries": spectrum }),
    );
    out.table = Some(table);
    Ok(passed)
}

#[derive(Serialize)]
struct CheckRecord<'a> {
    check: &'a str,
    passed: bool,
    fitted_order: Option<f64>,
    exact: bool,
    #[serde(flatten)]
    report: &'a QuadraticFormReport,
}

fn run_verify(p: &VerifyParams, tol: Tolerances, out: &mut Emitted) -> Result<bool, ConfigError> {
    let mut reports: Vec<(&str, warpband_core::Result<QuadraticFormReport>)> = vec![
        (
            "first_variation",
            first_variation_check(&p.band, &p.mu, p.slice, p.h_fd),
        ),
        (
            "linearized_eta",
            linearized_eta_check(&p.band, &p.mu, p.slice, p.eps),
        ),
    ];
    if let Some(delta) = &p.delta {
        reports.push((
            "vary_u",
            integral_identity_check(&p.band, VariationFamily::VaryU, delta, p.eps),
        ));
        reports.push((
            "vary_g",
            integral_identity_check(&p.band, VariationFamily::VaryG, delta, p.eps),
        ));
    }

    let mut table = Table::new(&["check", "h", "residual"]);
    let mut passed = true;
    for (name, r) in reports {
        let r = match r {
            Ok(r) => r,
            Err(e) if check_failure(&e) => {
                failure_record(out, name, &e);
                passed = false;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let record = convergence_order(&r.h_values, &r.residuals)?;
        let ok = record.fitted_order.at_least(p.min_order)
            || r.residuals.iter().all(|x| x.abs() <= tol.residual);
        passed &= ok;
        for (h, res) in r.h_values.iter().zip(&r.residuals) {
            table.push_cells(vec![
                name.to_string(),
                crate::output::fmt_f64(*h),
                crate::output::fmt_f64(*res),
            ]);
        }
        out.record(
            "check",
            &CheckRecord {
                check: name,
                passed: ok,
                fitted_order: record.fitted_order.fitted(),
                exact: record.fitted_order.fitted().is_none(),
                report: &r,
            },
        );
    }
    out.table = Some(table);
    Ok(passed)
}

fn run_cone(p: &ConeParams, tol: Tolerances, out: &mut Emitted) -> Result<bool, ConfigError> {
    let alpha = p.alpha.unwrap_or_else(|| critical_exponent(p.gamma));
    let cone = ConeModel::new(p.n, p.gamma, p.aperture, alpha)?;
    let mut passed = true;

    let cross = cross_section_condition(p.n, p.gamma, p.aperture)?;
    passed &= cross.holds;
    out.record("cross_section", &cross);

    // Reported side by side; the two do not agree and neither gates the run.
    let closed = cone_tensor_components(&cone)?;
    let numeric = cone_tensor_components_numeric(&cone)?;
    out.record(
        "tensor_components",
        &json!({
            "closed_form": [closed.0, closed.1],
            "from_definition": [numeric.0, numeric.1],
            "agree": (closed.0 - numeric.0).abs() <= 1e-10 && (closed.1 - numeric.1).abs() <= 1e-10,
        }),
    );

    if let Some(g1) = &p.perturbation {
        match cone_foliation_leaf(&cone, g1, p.t, p.modes) {
            Ok(leaf) => {
                let ok = leaf.residual <= tol.residual;
                passed &= ok;
                let mut table = Table::new(&["theta", "v"]);
                for i in 0..=180 {
                    let th = PI * i as f64 / 180.0;
                    table.push(&[th, leaf_profile(&cone, &leaf.coefficients, th)]);
                }
                out.table = Some(table);
                out.record("leaf", &json!({ "t": p.t, "passed": ok, "solution": leaf }));
            }
            Err(e) if check_failure(&e) => {
                failure_record(out, "leaf", &e);
                passed = false;
            }
            Err(e) => return Err(e.into()),
        }
    }

    if let Some(c) = &p.comparison {
        let cmp = ConeModel::new(
            p.n,
            p.gamma,
            c.aperture,
            c.alpha.unwrap_or_else(|| critical_exponent(p.gamma)),
        )?;
        match eta_hat_sign_estimate(&cone, &cmp, p.t) {
            Ok(est) => {
                let ok = !est.hypotheses_hold || est.value <= tol.residual;
                passed &= ok;
                out.record("sign_estimate", &json!({ "passed": ok, "estimate": est }));
            }
            Err(e) if check_failure(&e) => {
                failure_record(out, "sign_estimate", &e);
                passed = false;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(passed)
}

fn flag_counts(flags: &[SliceFlags]) -> serde_json::Value {
    let count = |f: fn(&SliceFlags) -> bool| flags.iter().filter(|s| !f(s)).count();
    json!({
        "slices": flags.len(),
        "false_umbilic": count(|s| s.umbilic),
        "false_rho_matches": count(|s| s.rho_matches),
        "false_unit_speed": count(|s| s.unit_speed),
        "false_w_nu_matches": count(|s| s.w_nu_matches),
        "false_lambda_saturated": count(|s| s.lambda_saturated),
    })
}

fn run_check_band(
    p: &CheckBandParams,
    tol: Tolerances,
    out: &mut Emitted,
) -> Result<bool, ConfigError> {
    let map = match &p.map {
        Some(m) => m.clone(),
        None => {
            let (lo, hi) = p.band.domain();
            ComparisonMap::identity(lo, hi)?
        }
    };
    let report = hypothesis_report(&p.band, &p.model, &map, tol.residual)?;
    let mut passed = report.verdict.holds();
    out.record("hypothesis_report", &report);
    if !passed {
        return Ok(false);
    }

    if p.sweep {
        match foliation_sweep(&p.band, &p.model, &map) {
            Ok(sweep) => {
                let ok = sweep.first_violation.is_none();
                passed &= ok;
                let mut table = Table::new(&["t", "eta", "q", "integral", "monotone"]);
                for r in &sweep.rows {
                    table.push(&[r.t, r.eta, r.q, r.integral, r.monotone]);
                }
                out.table = Some(table);
                out.record(
                    "sweep",
                    &json!({
                        "passed": ok,
                        "max_abs_eta": sweep.max_abs_eta,
                        "max_increase": sweep.max_increase,
                        "first_violation": sweep.first_violation,
                    }),
                );
            }
            Err(e) if check_failure(&e) => {
                failure_record(out, "sweep", &e);
                passed = false;
            }
            Err(e) => return Err(e.into()),
        }
    }

    // Equality flags are informational; a band can pass without being rigid.
    match rigidity_report(&p.band, &p.model, &map, tol.equality) {
        Ok(rigidity) => out.record(
            "rigidity",
            &json!({
                "all_true": rigidity.all_true,
                "constant_multiple": rigidity.constant_multiple,
                "flags": flag_counts(&rigidity.flags),
            }),
        ),
        Err(e) if check_failure(&e) => failure_record(out, "rigidity", &e),
        Err(e) => return Err(e.into()),
    }
    Ok(passed)
}
