//! Hypothesis checks, foliation sweep and rigidity detection for a band
//! compared against a model through a symmetric map `(t, x) ↦ (τ(t), x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{slice_geometry, spectral_scalar_curvature, SymmetricBand};
use crate::model::{build_model_profile, ModelMetric, ModelSpec};
use crate::profile::{Prescription, Shape, WarpingProfile};
use crate::quadrature::simpson;

/// Default tolerance for equality flags and hypothesis margins.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Tolerance on the non-increasing property of the monotone quantity.
pub const MONOTONE_TOLERANCE: f64 = 1e-7;
pub const DEFAULT_GRID: usize = 1001;
pub const DEFAULT_FLAG_SLICES: usize = 201;
pub const BARRIER_TOLERANCE: f64 = 1e-6;

/// Fraction of the band length cut off at a singular end of a sweep.
const SINGULAR_END_OFFSET: f64 = 1e-3;
/// Fraction of the band length left out of the `Λ` grid at a conical end.
pub const CONICAL_COLLAR: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMap {
    pub tau: WarpingProfile,
}

impl ComparisonMap {
    pub fn new(tau: WarpingProfile) -> Self {
        Self { tau }
    }

    /// `τ = id` on `[lo, hi]`.
    pub fn identity(lo: f64, hi: f64) -> Result<Self> {
        Ok(Self {
            tau: WarpingProfile::new(Shape::identity(), lo, hi)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Lambda,
    BoundaryPlus,
    BoundaryMinus,
    Map,
    MonotoneM,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub at: Option<f64>,
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "violations", rename_all = "snake_case")]
pub enum Verdict {
    AllHold,
    Violated(Vec<Violation>),
    /// All hypotheses hold with every margin zero and `ρ = ξ∘τ`, `τ′ = 1`.
    RigidityCase,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::Violated(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginSample {
    pub t: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `Λ_{g,u} − Λ_model∘τ` on the grid, singular slices omitted.
    pub lambda_margin: Vec<MarginSample>,
    pub lambda_margin_min: f64,
    /// `H + γu′/u − m(τ(t+))`; `None` when that slice is singular.
    pub boundary_plus_margin: Option<f64>,
    /// `m(τ(t−)) − (H + γu′/u)`; `None` when that slice is singular.
    pub boundary_minus_margin: Option<f64>,
    pub map_admissible: bool,
    pub m_monotone: bool,
    pub verdict: Verdict,
}

fn check_match(band: &SymmetricBand, model: &ModelSpec) -> Result<()> {
    if band.n() != model.n {
        return Err(Error::ParameterRange(format!(
            "band dimension {} differs from model dimension {}",
            band.n(),
            model.n
        )));
    }
    if (band.gamma() - model.gamma).abs() > 1e-12 {
        return Err(Error::ParameterRange(format!(
            "band gamma {} differs from model gamma {}",
            band.gamma(),
            model.gamma
        )));
    }
    Ok(())
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let last = points.max(2) - 1;
    (0..=last).map(move |i| lo + (hi - lo) * i as f64 / last as f64)
}

fn is_singular(e: &Error) -> bool {
    matches!(e, Error::SingularSlice { .. })
}

/// Shared evaluation context for a band, its model and a map.
struct Comparison<'a> {
    band: &'a SymmetricBand,
    model: ModelMetric,
    map: &'a ComparisonMap,
}

impl<'a> Comparison<'a> {
    fn new(band: &'a SymmetricBand, spec: &ModelSpec, map: &'a ComparisonMap) -> Result<Self> {
        check_match(band, spec)?;
        let model = build_model_profile(spec)?;
        let (lo, hi) = band.domain();
        let (mlo, mhi) = map.tau.domain();
        if mlo > lo + 1e-12 || mhi < hi - 1e-12 {
            return Err(Error::InvalidProfile(format!(
                "map defined on [{mlo}, {mhi}] does not cover the band [{lo}, {hi}]"
            )));
        }
        Ok(Self { band, model, map })
    }

    /// `τ(t)` clamped into the model interval, with `τ′(t)`.
    fn tau(&self, t: f64) -> Result<(f64, f64, f64)> {
        let j = self.map.tau.eval(t)?;
        let (slo, shi) = self.model.domain();
        Ok((j.value, j.value.clamp(slo, shi), j.d1))
    }

    /// `(m(τ), m′(τ))`.
    fn m_at(&self, t: f64) -> Result<(f64, f64)> {
        let (_, s, _) = self.tau(t)?;
        self.model.m.eval(s)
    }

    fn xi_at(&self, t: f64) -> Result<f64> {
        let (_, s, _) = self.tau(t)?;
        self.model.xi.value(s)
    }

    fn lambda_margin(&self, t: f64) -> Result<f64> {
        Ok(spectral_scalar_curvature(self.band, t)? - self.model.spec.target_lambda())
    }

    fn weighted_mean_curvature(&self, t: f64) -> Result<f64> {
        Ok(slice_geometry(self.band, t, 0.0)?.weighted_mean_curvature)
    }

    /// Skips singular slices; other errors propagate.
    fn optional<T>(r: Result<T>) -> Result<Option<T>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e) if is_singular(&e) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Whether `t` is a conical end of the band or is sent to one of the model.
    fn singular_end(&self, t: f64) -> Result<bool> {
        let (lo, hi) = self.band.domain();
        let (clo, chi) = self.band.conical_ends();
        if (t == lo && clo) || (t == hi && chi) {
            return Ok(true);
        }
        let (_, s, _) = self.tau(t)?;
        Ok(self.model.xi.value(s)?.abs() < 1e-12)
    }

    /// Band interval with singular ends moved inwards.
    fn regular_range(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.band.domain();
        let cut = SINGULAR_END_OFFSET * (hi - lo);
        let a = if self.singular_end(lo)? { lo + cut } else { lo };
        let b = if self.singular_end(hi)? { hi - cut } else { hi };
        Ok((a, b))
    }
}

pub fn hypothesis_report(
    band: &SymmetricBand,
    model: &ModelSpec,
    map: &ComparisonMap,
    tol: f64,
) -> Result<HypothesisReport> {
    let cmp = Comparison::new(band, model, map)?;
    let (lo, hi) = band.domain();
    let mut violations = Vec::new();

    let mut lambda_margin = Vec::with_capacity(DEFAULT_GRID);
    // Near a conical end `Λ` is a difference of `O(t⁻²)` terms; a collar keeps
    // the rounding error of the margin below 1e-10.
    let (clo, chi) = band.conical_ends();
    let collar = CONICAL_COLLAR * (hi - lo);
    let a = if clo { lo + collar } else { lo };
    let b = if chi { hi - collar } else { hi };
    for t in grid(a, b, DEFAULT_GRID) {
        if let Some(margin) = Comparison::optional(cmp.lambda_margin(t))? {
            lambda_margin.push(MarginSample { t, margin });
        }
    }
    let worst = lambda_margin
        .iter()
        .copied()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .ok_or_else(|| Error::InvalidProfile("no regular slice in the band".into()))?;
    if worst.margin < -tol {
        violations.push(Violation {
            kind: ViolationKind::Lambda,
            at: Some(worst.t),
            margin: worst.margin,
            detail: "spectral scalar curvature below the model value".into(),
        });
    }

    let boundary = |t: f64, plus: bool| -> Result<Option<f64>> {
        if cmp.singular_end(t)? {
            return Ok(None);
        }
        let hw = Comparison::optional(cmp.weighted_mean_curvature(t))?;
        let m = Comparison::optional(cmp.m_at(t))?;
        Ok(match (hw, m) {
            (Some(hw), Some((m, _))) => Some(if plus { hw - m } else { m - hw }),
            _ => None,
        })
    };
    let boundary_plus_margin = boundary(hi, true)?;
    let boundary_minus_margin = boundary(lo, false)?;
    for (margin, kind, t) in [
        (boundary_plus_margin, ViolationKind::BoundaryPlus, hi),
        (boundary_minus_margin, ViolationKind::BoundaryMinus, lo),
    ] {
        if let Some(margin) = margin {
            if margin < -tol {
                violations.push(Violation {
                    kind,
                    at: Some(t),
                    margin,
                    detail: "weighted mean curvature on the wrong side of m".into(),
                });
            }
        }
    }

    let (map_violations, rho_tight, unit_speed) = map_check(&cmp, tol)?;
    let map_admissible = map_violations.is_empty();
    violations.extend(map_violations);

    let m_monotone = cmp.model.m_monotone(DEFAULT_GRID)?;
    if !m_monotone {
        violations.push(Violation {
            kind: ViolationKind::MonotoneM,
            at: None,
            margin: 0.0,
            detail: "m is not strictly decreasing on the model interval".into(),
        });
    }

    let verdict = if !violations.is_empty() {
        Verdict::Violated(violations)
    } else {
        let zero = |m: Option<f64>| m.is_none_or(|v| v.abs() <= tol);
        let saturated = lambda_margin.iter().all(|s| s.margin.abs() <= tol)
            && zero(boundary_plus_margin)
            && zero(boundary_minus_margin)
            && rho_tight
            && unit_speed;
        if saturated {
            Verdict::RigidityCase
        } else {
            Verdict::AllHold
        }
    };

    Ok(HypothesisReport {
        lambda_margin,
        lambda_margin_min: worst.margin,
        boundary_plus_margin,
        boundary_minus_margin,
        map_admissible,
        m_monotone,
        verdict,
    })
}

/// Returns violations plus whether `ρ = ξ∘τ` and `τ′ = 1` hold everywhere.
fn map_check(cmp: &Comparison, tol: f64) -> Result<(Vec<Violation>, bool, bool)> {
    let (lo, hi) = cmp.band.domain();
    let (slo, shi) = cmp.model.domain();
    let mut out = Vec::new();
    let mut push = |at: Option<f64>, margin: f64, detail: String| {
        out.push(Violation {
            kind: ViolationKind::Map,
            at,
            margin,
            detail,
        })
    };

    let (tau_lo, _, _) = cmp.tau(lo)?;
    let (tau_hi, _, _) = cmp.tau(hi)?;
    if (tau_lo - slo).abs() > tol {
        push(
            Some(lo),
            -(tau_lo - slo).abs(),
            format!("tau(t-) = {tau_lo}, model starts at {slo}"),
        );
    }
    if (tau_hi - shi).abs() > tol {
        push(
            Some(hi),
            -(tau_hi - shi).abs(),
            format!("tau(t+) = {tau_hi}, model ends at {shi}"),
        );
    }

    let mut worst_speed: Option<(f64, f64)> = None;
    let mut worst_order: Option<(f64, f64)> = None;
    let mut worst_rho: Option<(f64, f64)> = None;
    let mut worst_range: Option<(f64, f64)> = None;
    let mut rho_tight = true;
    let mut unit_speed = true;
    let lower = |slot: &mut Option<(f64, f64)>, t: f64, m: f64| {
        if slot.is_none_or(|(_, w)| m < w) {
            *slot = Some((t, m));
        }
    };
    for t in grid(lo, hi, DEFAULT_GRID) {
        let (raw, _, dtau) = cmp.tau(t)?;
        lower(&mut worst_speed, t, 1.0 - dtau.abs());
        lower(&mut worst_order, t, dtau);
        lower(&mut worst_range, t, (raw - slo).min(shi - raw));
        let gap = cmp.band.rho().value(t)? - cmp.xi_at(t)?;
        lower(&mut worst_rho, t, gap);
        rho_tight &= gap.abs() <= tol;
        unit_speed &= (dtau - 1.0).abs() <= tol;
    }
    let checks = [
        (worst_speed, "|tau'| exceeds 1"),
        (worst_order, "tau is not monotone"),
        (worst_range, "tau leaves the model interval"),
        (worst_rho, "rho falls below xi o tau"),
    ];
    for (slot, what) in checks {
        if let Some((t, m)) = slot {
            if m < -tol {
                push(Some(t), m, what.into());
            }
        }
    }
    Ok((out, rho_tight, unit_speed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Swept interval; defaults to the band with singular ends cut off.
    pub range: Option<(f64, f64)>,
    pub points: usize,
    /// Tolerance on the hypotheses checked along the sweep.
    pub tol: f64,
    pub monotone_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            range: None,
            points: DEFAULT_GRID,
            tol: DEFAULT_TOLERANCE,
            monotone_tol: MONOTONE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub eta: f64,
    /// `Q(t)`; with constant `ψ_t` this is `q(t) = (nμ − γu′/u)/(n−1)`.
    pub q: f64,
    /// `∫ Q`, shifted so that its maximum over the sweep is 0.
    pub integral: f64,
    /// `η · exp(∫ Q)`.
    pub monotone: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrajectory {
    pub rows: Vec<SweepRow>,
    pub max_abs_eta: f64,
    /// Largest step `M(t_{i+1}) − M(t_i)` of the monotone quantity.
    pub max_increase: f64,
    /// First slice where the monotone quantity increases beyond tolerance.
    pub first_violation: Option<f64>,
}

pub fn foliation_sweep(
    band: &SymmetricBand,
    model: &ModelSpec,
    map: &ComparisonMap,
) -> Result<SweepTrajectory> {
    foliation_sweep_with(band, model, map, &SweepOptions::default())
}

pub fn foliation_sweep_with(
    band: &SymmetricBand,
    model: &ModelSpec,
    map: &ComparisonMap,
    opts: &SweepOptions,
) -> Result<SweepTrajectory> {
    let cmp = Comparison::new(band, model, map)?;
    let (a, b) = match opts.range {
        Some(r) => r,
        None => cmp.regular_range()?,
    };
    if !(b > a) {
        return Err(Error::Precondition(format!("empty sweep range [{a}, {b}]")));
    }
    let (lo, hi) = band.domain();
    if a < lo || b > hi {
        return Err(Error::Domain {
            t: if a < lo { a } else { b },
            lo,
            hi,
        });
    }
    let n = band.n() as f64;
    let gamma = band.gamma();

    // η, q and the hypotheses needed for η′ ≤ −qη at one slice.
    let slice = |t: f64| -> Result<(f64, f64)> {
        let (mu, dm) = cmp.m_at(t)?;
        let (_, _, dtau) = cmp.tau(t)?;
        let lm = cmp.lambda_margin(t)?;
        let gap = band.rho().value(t)? - cmp.xi_at(t)?;
        let speed = dm * (dtau - 1.0);
        for (v, what) in [
            (lm, "spectral scalar curvature below the model value"),
            (gap, "rho below xi o tau"),
            (speed, "m'(tau)(tau' - 1) negative"),
        ] {
            if v < -opts.tol {
                return Err(Error::Precondition(format!(
                    "sweep aborted at t = {t}: {what} (margin {v:e})"
                )));
            }
        }
        let sg = slice_geometry(band, t, mu)?;
        let w1 = band.u_jet(t)?.log_d1();
        Ok((sg.eta, (n * mu - gamma * w1) / (n - 1.0)))
    };
    let q_only = |t: f64| -> Result<f64> {
        let (mu, _) = cmp.m_at(t)?;
        let w1 = band.u_jet(t)?.log_d1();
        Ok((n * mu - gamma * w1) / (n - 1.0))
    };

    let ts: Vec<f64> = grid(a, b, opts.points).collect();
    let mut rows = Vec::with_capacity(ts.len());
    let mut integral = 0.0;
    for (i, &t) in ts.iter().enumerate() {
        if i > 0 {
            integral += simpson(ts[i - 1], t, 3, &q_only)?;
        }
        let (eta, q) = slice(t)?;
        rows.push(SweepRow {
            t,
            eta,
            q,
            integral,
            monotone: 0.0,
        });
    }
    let peak = rows
        .iter()
        .map(|r| r.integral)
        .fold(f64::NEG_INFINITY, f64::max);
    for r in &mut rows {
        r.integral -= peak;
        r.monotone = r.eta * r.integral.exp();
    }

    let mut max_increase = f64::NEG_INFINITY;
    let mut first_violation = None;
    for w in rows.windows(2) {
        let step = w[1].monotone - w[0].monotone;
        max_increase = max_increase.max(step);
        if step > opts.monotone_tol && first_violation.is_none() {
            first_violation = Some(w[1].t);
        }
    }
    let max_abs_eta = rows.iter().map(|r| r.eta.abs()).fold(0.0, f64::max);
    Ok(SweepTrajectory {
        rows,
        max_abs_eta,
        max_increase,
        first_violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceFlags {
    pub t: f64,
    /// `|A⁰| = 0`; always true for rotationally symmetric slices.
    pub umbilic: bool,
    pub rho_matches: bool,
    pub unit_speed: bool,
    pub w_nu_matches: bool,
    pub lambda_saturated: bool,
}

impl SliceFlags {
    pub fn all(&self) -> bool {
        self.umbilic
            && self.rho_matches
            && self.unit_speed
            && self.w_nu_matches
            && self.lambda_saturated
    }
}

/// Per-slice equality flags, without checking the hypotheses first.
pub fn equality_flags(
    band: &SymmetricBand,
    model: &ModelSpec,
    map: &ComparisonMap,
    tol: f64,
) -> Result<Vec<SliceFlags>> {
    let cmp = Comparison::new(band, model, map)?;
    let (a, b) = cmp.regular_range()?;
    let n = band.n() as f64;
    let gamma = band.gamma();
    let denom = 2.0 * (n - 1.0) - (n - 2.0) * gamma;
    let mut out = Vec::with_capacity(DEFAULT_FLAG_SLICES);
    for t in grid(a, b, DEFAULT_FLAG_SLICES) {
        let (mu, _) = cmp.m_at(t)?;
        let (_, _, dtau) = cmp.tau(t)?;
        let sg = slice_geometry(band, t, mu)?;
        let w1 = band.u_jet(t)?.log_d1();
        out.push(SliceFlags {
            t,
            umbilic: sg.a0_norm2.sqrt() <= tol,
            rho_matches: (band.rho().value(t)? - cmp.xi_at(t)?).abs() <= tol,
            unit_speed: (dtau - 1.0).abs() <= tol,
            w_nu_matches: (w1 - mu / denom).abs() <= tol,
            lambda_saturated: cmp.lambda_margin(t)?.abs() <= tol,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub flags: Vec<SliceFlags>,
    pub all_true: bool,
    /// `c` with `u = c·u_ξ∘τ` when every flag holds.
    pub constant_multiple: Option<f64>,
}

pub fn rigidity_report(
    band: &SymmetricBand,
    model: &ModelSpec,
    map: &ComparisonMap,
    tol: f64,
) -> Result<RigidityReport> {
    let report = hypothesis_report(band, model, map, tol)?;
    if let Verdict::Violated(v) = &report.verdict {
        return Err(Error::Precondition(format!(
            "hypotheses violated ({} item(s)); rigidity analysis needs them to hold",
            v.len()
        )));
    }
    let flags = equality_flags(band, model, map, tol)?;
    let all_true = flags.iter().all(SliceFlags::all);
    let constant_multiple = if all_true {
        let cmp = Comparison::new(band, model, map)?;
        let mut sum = 0.0;
        for f in &flags {
            let (_, s, _) = cmp.tau(f.t)?;
            sum += band.u().value(f.t)? / cmp.model.u.value(s)?;
        }
        Some(sum / flags.len() as f64)
    } else {
        None
    };
    Ok(RigidityReport {
        flags,
        all_true,
        constant_multiple,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierClass {
    StrictBarrier,
    ApproximateBarrier,
    NotBarrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub class: BarrierClass,
    /// Extrapolated limit of `s·(H_w − C/s)` as `s = t − t− → 0`.
    pub margin: f64,
    /// `s·(H_w − C/s)` at the requested level.
    pub defect_at_level: f64,
}

/// Compares `H + γu′/u` near the conical end `t−` with `C/s`, `C` the model's
/// coefficient of `ξ′/ξ`. A negative limit of `s·defect` is a strict barrier.
pub fn barrier_classifier(
    band: &SymmetricBand,
    model: &ModelSpec,
    t_level: f64,
) -> Result<BarrierReport> {
    check_match(band, model)?;
    if !band.conical_ends().0 {
        return Err(Error::Precondition("band has no conical end at t-".into()));
    }
    let (lo, hi) = band.domain();
    if !(t_level > lo && t_level <= hi) {
        return Err(Error::Domain { t: t_level, lo, hi });
    }
    let c = model.m_coefficient();
    let s_defect = |t: f64| -> Result<f64> {
        let s = t - lo;
        Ok(s * slice_geometry(band, t, 0.0)?.weighted_mean_curvature - c)
    };
    let h = t_level - lo;
    let d0 = s_defect(lo + h)?;
    let d1 = s_defect(lo + h / 2.0)?;
    let d2 = s_defect(lo + h / 4.0)?;
    let r1 = 2.0 * d1 - d0;
    let r2 = 2.0 * d2 - d1;
    let margin = (4.0 * r2 - r1) / 3.0;
    let class = if margin < -BARRIER_TOLERANCE {
        BarrierClass::StrictBarrier
    } else if margin <= BARRIER_TOLERANCE {
        BarrierClass::ApproximateBarrier
    } else {
        BarrierClass::NotBarrier
    };
    Ok(BarrierReport {
        class,
        margin,
        defect_at_level: d0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSign;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn model_pair(
        n: usize,
        gamma: f64,
        lambda: f64,
        lo: f64,
        hi: f64,
    ) -> (ModelSpec, SymmetricBand, ComparisonMap) {
        let spec = ModelSpec::new(n, gamma, lambda, [lo, hi], ModelSign::Positive);
        let band = build_model_profile(&spec).unwrap().band().unwrap();
        let map = ComparisonMap::identity(lo, hi).unwrap();
        (spec, band, map)
    }

    fn frequency(n: usize, gamma: f64, lambda: f64) -> f64 {
        if gamma == 0.0 {
            (2.0 * lambda / (n * (n - 1)) as f64).sqrt()
        } else {
            crate::model::model_coefficients(n, gamma, lambda)
                .unwrap()
                .1
                .abs()
        }
    }

    fn full_sphere_model(
        n: usize,
        gamma: f64,
        lambda: f64,
    ) -> (ModelSpec, SymmetricBand, ComparisonMap) {
        model_pair(n, gamma, lambda, 0.0, PI / frequency(n, gamma, lambda))
    }

    /// Model band with `u` multiplied by `exp(−εb²(t − t_a)²/2)`, `b` the model
    /// frequency; `Λ` grows and `η = −γεb²(t − t_a)`.
    fn slack_band(
        n: usize,
        gamma: f64,
        lambda: f64,
        eps: f64,
    ) -> (ModelSpec, SymmetricBand, ComparisonMap) {
        let b = frequency(n, gamma, lambda);
        let eps = eps * b * b;
        let (lo, hi) = (0.2 / b, 1.2 / b);
        let (spec, band, map) = model_pair(n, gamma, lambda, lo, hi);
        let x = Shape::Linear {
            a: 1.0,
            offset: -lo,
        };
        let bump = x.clone().times(x).scaled(-0.5 * eps).exp();
        let u = band.u().map_shape(|s| s.times(bump.clone())).unwrap();
        (spec, band.with_u(u).unwrap(), map)
    }

    #[test]
    fn model_is_rigidity_case() {
        let (spec, band, map) = full_sphere_model(3, 1.0, 2.0);
        let r = hypothesis_report(&band, &spec, &map, 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::RigidityCase);
        assert!(r.lambda_margin.iter().all(|s| s.margin.abs() < 1e-10));
        assert!(r.boundary_plus_margin.is_none() && r.boundary_minus_margin.is_none());
        assert!(r.map_admissible && r.m_monotone);
    }

    #[test]
    fn model_band_with_boundary_has_zero_margins() {
        let (spec, band, map) = model_pair(4, 0.5, 3.0, 0.3, 1.5);
        let r = hypothesis_report(&band, &spec, &map, 1e-10).unwrap();
        assert_eq!(r.verdict, Verdict::RigidityCase);
        assert!(r.boundary_plus_margin.unwrap().abs() < 1e-12);
        assert!(r.boundary_minus_margin.unwrap().abs() < 1e-12);
    }

    #[test]
    fn dilated_sphere_violates_lambda() {
        let spec = ModelSpec::new(3, 0.0, 3.0, [0.0, PI], ModelSign::Positive);
        let rho = WarpingProfile::new(
            Shape::Sin {
                a: 1.1,
                b: 1.0,
                offset: 0.0,
            },
            0.0,
            PI,
        )
        .unwrap();
        let u = WarpingProfile::new(Shape::constant(1.0), 0.0, PI).unwrap();
        let band = SymmetricBand::new(3, rho, u, 0.0).unwrap();
        let map = ComparisonMap::identity(0.0, PI).unwrap();
        let r = hypothesis_report(&band, &spec, &map, DEFAULT_TOLERANCE).unwrap();
        let expected = 0.5 * (4.0 + 2.0 / 1.21) - 3.0;
        let mid = r
            .lambda_margin
            .iter()
            .find(|s| (s.t - PI / 2.0).abs() < 1e-12)
            .unwrap();
        assert_relative_eq!(mid.margin, expected, epsilon = 1e-12);
        assert_relative_eq!(expected, -0.17355, epsilon = 1e-5);
        match r.verdict {
            Verdict::Violated(v) => assert!(v.iter().any(|x| x.kind == ViolationKind::Lambda)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fast_map_is_rejected() {
        let (spec, band, _) = model_pair(3, 1.0, 2.0, 0.3, 1.5);
        // τ(t) = t + 0.05 sin(2π(t − 0.3)/1.2): same endpoints, τ′ > 1 in places
        let w = 2.0 * PI / 1.2;
        let tau = Shape::identity().plus(Shape::Sin {
            a: 0.05,
            b: w,
            offset: -0.3 * w,
        });
        let map = ComparisonMap::new(WarpingProfile::new(tau, 0.3, 1.5).unwrap());
        let r = hypothesis_report(&band, &spec, &map, DEFAULT_TOLERANCE).unwrap();
        assert!(!r.map_admissible);
        match r.verdict {
            Verdict::Violated(v) => assert!(v.iter().any(|x| x.kind == ViolationKind::Map)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mismatched_dimension_is_error() {
        let (_, band, map) = model_pair(3, 1.0, 2.0, 0.3, 1.5);
        let spec = ModelSpec::new(4, 1.0, 2.0, [0.3, 1.5], ModelSign::Positive);
        assert!(hypothesis_report(&band, &spec, &map, 1e-8).is_err());
    }

    #[test]
    fn model_sweep_is_flat() {
        for (n, gamma, lambda) in [(3, 1.0, 2.0), (4, 0.5, 3.0), (3, 0.0, 3.0)] {
            let (spec, band, map) = full_sphere_model(n, gamma, lambda);
            let s = foliation_sweep(&band, &spec, &map).unwrap();
            assert!(s.max_abs_eta < 1e-10, "{n} {gamma}: {}", s.max_abs_eta);
            assert!(s.rows.iter().all(|r| r.monotone.abs() < 1e-10));
            assert!(s.first_violation.is_none());
        }
    }

    #[test]
    fn slack_sweep_decreases_from_zero() {
        let (spec, band, map) = slack_band(3, 1.0, 2.0, 0.1);
        let s = foliation_sweep(&band, &spec, &map).unwrap();
        assert!(s.rows[0].eta.abs() < 1e-12);
        assert!(s.rows.iter().skip(1).all(|r| r.eta < 0.0));
        let last = s.rows.last().unwrap();
        let b2 = frequency(3, 1.0, 2.0).powi(2);
        assert_relative_eq!(
            last.eta,
            -0.1 * b2 * (last.t - s.rows[0].t),
            epsilon = 1e-10
        );
        assert!(s.first_violation.is_none());
        assert!(s.max_increase <= 0.0);
    }

    #[test]
    fn sweep_rejects_empty_range_and_failed_hypothesis() {
        let (spec, band, map) = model_pair(3, 1.0, 2.0, 0.3, 1.5);
        let opts = SweepOptions {
            range: Some((1.0, 1.0)),
            ..SweepOptions::default()
        };
        assert!(matches!(
            foliation_sweep_with(&band, &spec, &map, &opts),
            Err(Error::Precondition(_))
        ));
        let rho = band.rho().map_shape(|s| s.scaled(1.1)).unwrap();
        let bigger = band.with_rho(rho).unwrap();
        let err = foliation_sweep(&bigger, &spec, &map).unwrap_err();
        assert!(err.to_string().contains("sweep aborted"), "{err}");
    }

    #[test]
    fn scaled_weight_is_rigid() {
        let (spec, band, map) = model_pair(3, 1.0, 2.0, 0.3, 1.5);
        let band3 = band.scale_u(3.0).unwrap();
        let r = rigidity_report(&band3, &spec, &map, DEFAULT_TOLERANCE).unwrap();
        assert!(r.all_true);
        assert_relative_eq!(r.constant_multiple.unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn perturbed_weight_breaks_w_nu_flag() {
        let (spec, band, map) = model_pair(3, 1.0, 2.0, 0.3, 1.5);
        let factor = Shape::constant(1.0).plus(Shape::Sin {
            a: 0.1,
            b: 1.0,
            offset: 0.0,
        });
        let band = band
            .with_u(band.u().map_shape(|s| s.times(factor.clone())).unwrap())
            .unwrap();
        let flags = equality_flags(&band, &spec, &map, DEFAULT_TOLERANCE).unwrap();
        assert!(flags.iter().any(|f| !f.w_nu_matches));
        assert!(flags.iter().all(|f| f.rho_matches && f.umbilic));
    }

    #[test]
    fn rigidity_report_needs_hypotheses() {
        let (spec, band, map) = slack_band(3, 1.0, 2.0, 0.1);
        // the slack band fails the outer boundary condition
        assert!(rigidity_report(&band, &spec, &map, DEFAULT_TOLERANCE).is_err());
        let flags = equality_flags(&band, &spec, &map, DEFAULT_TOLERANCE).unwrap();
        assert!(flags.iter().any(|f| !f.lambda_saturated));
    }

    fn cone_band(n: usize, gamma: f64, alpha: f64) -> SymmetricBand {
        let rho = WarpingProfile::new(
            Shape::Linear {
                a: 0.8,
                offset: 0.0,
            },
            0.0,
            1.0,
        )
        .unwrap();
        let u = WarpingProfile::new(Shape::identity().powf(alpha), 0.0, 1.0).unwrap();
        SymmetricBand::new(n, rho, u, gamma).unwrap()
    }

    #[test]
    fn barrier_classes() {
        let (spec, band, _) = full_sphere_model(3, 1.0, 2.0);
        let r = barrier_classifier(&band, &spec, 0.1).unwrap();
        assert_eq!(r.class, BarrierClass::ApproximateBarrier, "{r:?}");

        let spec = ModelSpec::new(3, 1.0, 2.0, [0.0, 1.0], ModelSign::Positive);
        let exact = barrier_classifier(&cone_band(3, 1.0, 1.0), &spec, 0.5).unwrap();
        assert_eq!(exact.class, BarrierClass::ApproximateBarrier);
        let strict = barrier_classifier(&cone_band(3, 1.0, 0.7), &spec, 0.5).unwrap();
        assert_eq!(strict.class, BarrierClass::StrictBarrier);
        assert_relative_eq!(strict.margin, -0.3, epsilon = 1e-12);
        let not = barrier_classifier(&cone_band(3, 1.0, 1.4), &spec, 0.5).unwrap();
        assert_eq!(not.class, BarrierClass::NotBarrier);

        let (spec, smooth, _) = model_pair(3, 1.0, 2.0, 0.3, 1.5);
        assert!(barrier_classifier(&smooth, &spec, 0.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn report_ignores_weight_scale(c in 0.1f64..20.0, gamma in 0.2f64..1.8, lambda in 0.5f64..5.0) {
            let (spec, band, map) = slack_band(3, gamma, lambda, 0.05);
            let a = hypothesis_report(&band, &spec, &map, DEFAULT_TOLERANCE).unwrap();
            let b = hypothesis_report(&band.scale_u(c).unwrap(), &spec, &map, DEFAULT_TOLERANCE).unwrap();
            prop_assert_eq!(a.verdict.holds(), b.verdict.holds());
            for (x, y) in a.lambda_margin.iter().zip(&b.lambda_margin) {
                prop_assert!((x.margin - y.margin).abs() < 1e-9 * (1.0 + x.margin.abs()));
            }
            let (p, q) = (a.boundary_plus_margin.unwrap(), b.boundary_plus_margin.unwrap());
            prop_assert!((p - q).abs() < 1e-12 * (1.0 + p.abs()));
        }

        #[test]
        fn model_margins_vanish(n in 3usize..=4, gamma in 0.0f64..1.9, lambda in 0.5f64..5.0) {
            let (spec, band, map) = full_sphere_model(n, gamma, lambda);
            let r = hypothesis_report(&band, &spec, &map, 1e-10).unwrap();
            prop_assert!(r.lambda_margin.iter().all(|s| s.margin.abs() < 1e-10));
            let s = foliation_sweep(&band, &spec, &map).unwrap();
            prop_assert!(s.max_abs_eta < 1e-10);
        }

        #[test]
        fn slack_sweeps_are_monotone(n in 3usize..=4, gamma in 0.2f64..1.8, lambda in 0.5f64..5.0, eps in 0.01f64..0.2) {
            let (spec, band, map) = slack_band(n, gamma, lambda, eps);
            let s = foliation_sweep(&band, &spec, &map).unwrap();
            prop_assert!(s.first_violation.is_none(), "{:?}", s.max_increase);
            let flags = equality_flags(&band, &spec, &map, DEFAULT_TOLERANCE).unwrap();
            prop_assert!(flags.iter().any(|f| !f.all()));
        }
    }
}
