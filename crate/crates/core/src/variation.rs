//! Finite-difference and quadrature checks of the variational formulas:
//! the band energy and its first variation, the linearisation of `η`, the
//! rewrite of the slice operator `L`, and the integral identities for
//! variations of `u` and of `g` with the tensors `𝓡` and `𝓐`.

use serde::{Deserialize, Serialize};

use crate::convergence::{convergence_order, ConvergenceOrder};
use crate::error::{Error, Result};
use crate::geometry::{
    radial_laplacian, slice_geometry, spectral_scalar_curvature_from_jets, SymmetricBand,
};
use crate::profile::{Jet, Prescription, WarpingProfile};
use crate::quadrature::{gauss_legendre, simpson};
use crate::sphere::{axisymmetric_laplacian, unit_sphere_volume};

pub const DEFAULT_NODES: usize = 2001;
pub const DEFAULT_EPS: f64 = 1e-4;
/// Refinement levels used for every fitted order.
pub const LEVELS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub grid_h: f64,
    pub convergence_order: ConvergenceOrder,
    pub h_values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Richardson combination `(4 r(h/4) − r(h/2))/3` of the two finest
    /// residuals, removing the leading `h²` term.
    pub extrapolated_residual: f64,
}

impl QuadraticFormReport {
    /// Builds a report from `(h, lhs, rhs)` at successively finer levels; the
    /// reported sides are those of the first (coarsest, nominal) level.
    fn from_levels(levels: &[(f64, f64, f64)]) -> Result<Self> {
        let h_values: Vec<f64> = levels.iter().map(|l| l.0).collect();
        let residuals: Vec<f64> = levels.iter().map(|l| l.1 - l.2).collect();
        let record = convergence_order(&h_values, &residuals)?;
        let (h, lhs, rhs) = levels[0];
        let k = residuals.len();
        let extrapolated_residual = (4.0 * residuals[k - 1] - residuals[k - 2]) / 3.0;
        Ok(Self {
            extrapolated_residual,
            lhs,
            rhs,
            residual: lhs - rhs,
            grid_h: h,
            convergence_order: record.fitted_order,
            h_values,
            residuals,
        })
    }
}

fn weighted_area(band: &SymmetricBand, rho: Jet, u: Jet) -> f64 {
    let n1 = band.n() as i32 - 1;
    unit_sphere_volume(band.n() - 1) * u.value.powf(band.gamma()) * rho.value.powi(n1)
}

fn bulk_integrand(band: &SymmetricBand, mu: &dyn Prescription, t: f64) -> Result<f64> {
    let rho = band.rho().eval(t)?;
    if rho.value == 0.0 {
        return Ok(0.0);
    }
    let u = band.u().eval(t)?;
    let (m, _) = mu.eval(t)?;
    Ok(u.value.powf(band.gamma()) * m * rho.value.powi(band.n() as i32 - 1))
}

fn boundary_term(band: &SymmetricBand, s: f64) -> Result<f64> {
    let rho = band.rho().eval(s)?;
    let u = band.u().eval(s)?;
    Ok(weighted_area(band, rho, u))
}

/// `E({t ≤ s}) = ω_{n−1}[u^γ ρ^{n−1}(s) − ∫_{t−}^{s} u^γ μ ρ^{n−1} dt]`.
pub fn energy_functional(band: &SymmetricBand, mu: &dyn Prescription, s: f64) -> Result<f64> {
    energy_functional_with_nodes(band, mu, s, DEFAULT_NODES)
}

pub fn energy_functional_with_nodes(
    band: &SymmetricBand,
    mu: &dyn Prescription,
    s: f64,
    nodes: usize,
) -> Result<f64> {
    let (lo, hi) = band.domain();
    if !(s > lo && s <= hi) {
        return Err(Error::Domain { t: s, lo, hi });
    }
    let bulk = simpson(lo, s, nodes, |t| bulk_integrand(band, mu, t))?;
    let omega = unit_sphere_volume(band.n() - 1);
    Ok(boundary_term(band, s)? - omega * bulk)
}

fn stencil_inside(band: &SymmetricBand, s: f64, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::ParameterRange(format!("finite-difference step {h}")));
    }
    let (lo, hi) = band.domain();
    for t in [s - h, s + h] {
        if t <= lo || t > hi {
            return Err(Error::Domain { t, lo, hi });
        }
    }
    Ok(())
}

/// Centred difference of `E` at `s` against `ω_{n−1} η u^γ ρ^{n−1}`.
///
/// The difference `E(s+h) − E(s−h)` is formed from the boundary terms and the
/// bulk integral over `[s−h, s+h]` only, so quadrature noise from `[t−, s−h]`
/// does not pollute the quotient. The order is fitted over `h, h/2, h/4`.
pub fn first_variation_check(
    band: &SymmetricBand,
    mu: &dyn Prescription,
    s: f64,
    h_fd: f64,
) -> Result<QuadraticFormReport> {
    stencil_inside(band, s, h_fd)?;
    let (rho, u) = band.jets(s)?;
    let (m, _) = mu.eval(s)?;
    let eta = slice_geometry(band, s, m)?.eta;
    let rhs = eta * weighted_area(band, rho, u);
    let omega = unit_sphere_volume(band.n() - 1);
    let mut levels = Vec::with_capacity(LEVELS);
    for k in 0..LEVELS {
        let h = h_fd / f64::from(1u32 << k);
        let bulk = simpson(s - h, s + h, 401, |t| bulk_integrand(band, mu, t))?;
        let diff = boundary_term(band, s + h)? - boundary_term(band, s - h)? - omega * bulk;
        levels.push((h, diff / (2.0 * h), rhs));
    }
    QuadraticFormReport::from_levels(&levels)
}

fn eta_at(band: &SymmetricBand, mu: &dyn Prescription, t: f64) -> Result<f64> {
    Ok(slice_geometry(band, t, mu.eval(t)?.0)?.eta)
}

/// Centred difference of `η` against the closed-form linearisation for the
/// constant test function:
/// `−Ric(ν,ν) − |A|² + γ(∇²u(ν,ν)/u − (u_ν/u)²) − μ_ν`.
pub fn linearized_eta_check(
    band: &SymmetricBand,
    mu: &dyn Prescription,
    s: f64,
    eps: f64,
) -> Result<QuadraticFormReport> {
    stencil_inside(band, s, eps)?;
    let (rho, u) = band.jets(s)?;
    let n1 = band.n() as f64 - 1.0;
    let gamma = band.gamma();
    let ric_nu = -n1 * rho.ratio_d2();
    let a_norm2 = n1 * rho.log_d1().powi(2);
    let (_, mu_nu) = mu.eval(s)?;
    let rhs = -ric_nu - a_norm2 + gamma * (u.ratio_d2() - u.log_d1().powi(2)) - mu_nu;
    let mut levels = Vec::with_capacity(LEVELS);
    for k in 0..LEVELS {
        let h = eps / f64::from(1u32 << k);
        let lhs = (eta_at(band, mu, s + h)? - eta_at(band, mu, s - h)?) / (2.0 * h);
        levels.push((h, lhs, rhs));
    }
    QuadraticFormReport::from_levels(&levels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteReport {
    pub form: QuadraticFormReport,
    /// `∫|∇ψ|² + γψ⟨∇w,∇ψ⟩ + (γ²/4 − γ)|∇w|²ψ²`
    pub intermediate: f64,
    /// `∫|∇ψ|²`
    pub dirichlet: f64,
}

struct RewriteSums {
    lhs: f64,
    rhs: f64,
    intermediate: f64,
    dirichlet: f64,
}

fn rewrite_sums(
    gamma: f64,
    u: &WarpingProfile,
    phi: &WarpingProfile,
    radius: f64,
    m: usize,
) -> Result<RewriteSums> {
    use std::f64::consts::PI;
    let (nodes, weights) = gauss_legendre(m, 0.0, PI);
    let r2 = radius * radius;
    let mut s = RewriteSums {
        lhs: 0.0,
        rhs: 0.0,
        intermediate: 0.0,
        dirichlet: 0.0,
    };
    let pre = 4.0 / (4.0 - gamma);
    for (&th, &wq) in nodes.iter().zip(&weights) {
        let da = 2.0 * PI * r2 * th.sin() * wq;
        let uj = u.eval(th)?;
        let pj = phi.eval(th)?;
        let w1 = uj.log_d1();
        let lap_phi = axisymmetric_laplacian(2, pj, th, radius);
        let lap_u = axisymmetric_laplacian(2, uj, th, radius);
        let l_phi = -lap_phi - gamma * pj.value * lap_u / uj.value - gamma * w1 * pj.d1 / r2;
        let ug = uj.value.powf(gamma);
        // ψ = u^{γ/2} φ
        let psi = uj.value.powf(0.5 * gamma) * pj.value;
        let dpsi = uj.value.powf(0.5 * gamma) * (0.5 * gamma * w1 * pj.value + pj.d1);
        let grad_psi2 = dpsi * dpsi / r2;
        let grad_w2 = w1 * w1 / r2;
        let cross = w1 * dpsi / r2;
        let defect = (psi * w1 - dpsi / (2.0 * (1.0 - 0.25 * gamma))).powi(2) / r2;
        s.lhs += da * ug * pj.value * l_phi;
        s.rhs += da * (pre * grad_psi2 - gamma * (1.0 - 0.25 * gamma) * defect);
        s.intermediate += da
            * (grad_psi2
                + gamma * psi * cross
                + (0.25 * gamma * gamma - gamma) * grad_w2 * psi * psi);
        s.dirichlet += da * grad_psi2;
    }
    Ok(s)
}

/// `∫ u^γ φ Lφ` against its rewrite in `ψ = u^{γ/2}φ` on the round `S²` of
/// the given radius, with `u`, `φ` functions of the polar angle on `[0, π]`.
pub fn rewrite_identity_check(
    gamma: f64,
    u: &WarpingProfile,
    phi: &WarpingProfile,
    radius: f64,
) -> Result<RewriteReport> {
    use std::f64::consts::PI;
    if !(gamma < 4.0) {
        return Err(Error::ParameterRange(format!(
            "gamma = {gamma}: the prefactor 4/(4 - gamma) needs gamma < 4"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::ParameterRange(format!("radius = {radius}")));
    }
    for p in [u, phi] {
        let (lo, hi) = p.domain();
        if lo > 1e-12 || hi < PI - 1e-12 {
            return Err(Error::InvalidProfile(
                "slice profiles must be defined on [0, pi]".into(),
            ));
        }
    }
    for i in 0..=512 {
        let th = PI * i as f64 / 512.0;
        if !(u.value(th)? > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "u is not positive at theta = {th}"
            )));
        }
    }
    let base = 32;
    let mut levels = Vec::with_capacity(LEVELS);
    let mut finest = None;
    for k in 0..LEVELS {
        let m = base << k;
        let s = rewrite_sums(gamma, u, phi, radius, m)?;
        levels.push((PI / m as f64, s.lhs, s.rhs));
        finest = Some(s);
    }
    let s = finest.expect("at least one level");
    let mut form = QuadraticFormReport::from_levels(&levels)?;
    // Report the most resolved sides.
    form.lhs = s.lhs;
    form.rhs = s.rhs;
    form.residual = s.lhs - s.rhs;
    Ok(RewriteReport {
        form,
        intermediate: s.intermediate,
        dirichlet: s.dirichlet,
    })
}

/// Unit-frame components of `𝓡` and the spherical component of `𝓐` for the
/// outward normal `+∂t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedTensors {
    pub r_rad: f64,
    pub r_sph: f64,
    pub a_sph: f64,
}

/// `𝓡 = Ric + (2γ−2) du⊗du/u² − 2∇²u/u + (2−γ)(|du|²/u² + Δu/u) g`,
/// `𝓐 = A − (2−γ) u⁻¹u_ν g`.
pub fn modified_tensors_from_jets(n: usize, gamma: f64, rho: Jet, u: Jet) -> ModifiedTensors {
    let n1 = n as f64 - 1.0;
    let n2 = n as f64 - 2.0;
    let q = rho.log_d1();
    let w1 = u.log_d1();
    let ric_rad = -n1 * rho.ratio_d2();
    let ric_sph = -rho.ratio_d2() + n2 * (1.0 - rho.d1 * rho.d1) / (rho.value * rho.value);
    let trace = (2.0 - gamma) * (w1 * w1 + radial_laplacian(n, rho, u) / u.value);
    ModifiedTensors {
        r_rad: ric_rad + (2.0 * gamma - 2.0) * w1 * w1 - 2.0 * u.ratio_d2() + trace,
        r_sph: ric_sph - 2.0 * q * w1 + trace,
        a_sph: q - (2.0 - gamma) * w1,
    }
}

pub fn modified_tensors(band: &SymmetricBand, t: f64) -> Result<ModifiedTensors> {
    let (rho, u) = band.jets(t)?;
    Ok(modified_tensors_from_jets(band.n(), band.gamma(), rho, u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationFamily {
    /// `u_ε = u + ε δu`
    VaryU,
    /// `ρ_ε = ρ + ε δρ`
    VaryG,
}

fn weighted_mean_curvature(n: usize, gamma: f64, rho: Jet, u: Jet) -> f64 {
    (n as f64 - 1.0) * rho.log_d1() + gamma * u.log_d1()
}

fn perturbed(
    band: &SymmetricBand,
    family: VariationFamily,
    delta: &WarpingProfile,
    t: f64,
    e: f64,
) -> Result<(Jet, Jet)> {
    let (mut rho, mut u) = (band.rho().eval(t)?, band.u().eval(t)?);
    let d = delta.eval(t)?;
    match family {
        VariationFamily::VaryU => u = u.axpy(e, d),
        VariationFamily::VaryG => rho = rho.axpy(e, d),
    }
    if !(rho.value > 0.0 && u.value > 0.0) {
        return Err(Error::Precondition(format!(
            "perturbation by {e} loses positivity at t = {t}"
        )));
    }
    Ok((rho, u))
}

/// Both sides of the identity for one `(ε, nodes)` level.
fn identity_sides(
    band: &SymmetricBand,
    family: VariationFamily,
    delta: &WarpingProfile,
    eps: f64,
    nodes: usize,
) -> Result<(f64, f64)> {
    let n = band.n();
    let gamma = band.gamma();
    let omega = unit_sphere_volume(n - 1);
    let n1 = n as i32 - 1;
    let variation = |t: f64, f: &dyn Fn(Jet, Jet) -> f64| -> Result<f64> {
        let (rp, up) = perturbed(band, family, delta, t, eps)?;
        let (rm, um) = perturbed(band, family, delta, t, -eps)?;
        Ok((f(rp, up) - f(rm, um)) / (2.0 * eps))
    };
    let lambda = |r: Jet, u: Jet| spectral_scalar_curvature_from_jets(n, gamma, r, u);
    let hw = |r: Jet, u: Jet| weighted_mean_curvature(n, gamma, r, u);
    let (lo, hi) = band.domain();
    let volume = |t: f64| -> Result<(Jet, Jet, f64)> {
        let (r, u) = band.jets(t)?;
        Ok((r, u, omega * r.value.powi(n1)))
    };
    let bulk = simpson(lo, hi, nodes, |t| {
        let (_, u, dv) = volume(t)?;
        Ok(u.value * u.value * variation(t, &lambda)? * dv)
    })?;
    let boundary = |t: f64| -> Result<f64> {
        let (_, u, da) = volume(t)?;
        Ok(u.value * u.value * variation(t, &hw)? * da)
    };
    let lhs = boundary(hi)? - boundary(lo)? + bulk;
    let rhs = match family {
        VariationFamily::VaryU => 0.0,
        VariationFamily::VaryG => {
            let nf = n as f64 - 1.0;
            // ⟨T, δg⟩ = 2(n−1) T_sph δρ/ρ for δg = 2ρδρ g_S.
            let pairing = |t: f64, pick: fn(ModifiedTensors) -> f64| -> Result<f64> {
                let (r, u, dv) = volume(t)?;
                let d = delta.eval(t)?.value;
                let tens = modified_tensors_from_jets(n, gamma, r, u);
                Ok(u.value * u.value * 2.0 * nf * pick(tens) * d / r.value * dv)
            };
            let bulk_r = simpson(lo, hi, nodes, |t| pairing(t, |m| m.r_sph))?;
            let bd_a = pairing(hi, |m| m.a_sph)? - pairing(lo, |m| m.a_sph)?;
            -0.5 * bulk_r - 0.5 * bd_a
        }
    };
    Ok((lhs, rhs))
}

/// Residual of the integral identity for symmetric variations of `u` or `ρ`,
/// refined jointly in `ε` and the Simpson spacing over three levels.
///
/// The inner boundary `t−` carries the normal `−∂t`.
pub fn integral_identity_check(
    band: &SymmetricBand,
    family: VariationFamily,
    delta: &WarpingProfile,
    eps: f64,
) -> Result<QuadraticFormReport> {
    integral_identity_check_with_nodes(band, family, delta, eps, DEFAULT_NODES)
}

pub fn integral_identity_check_with_nodes(
    band: &SymmetricBand,
    family: VariationFamily,
    delta: &WarpingProfile,
    eps: f64,
    nodes: usize,
) -> Result<QuadraticFormReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::ParameterRange(format!("eps = {eps}")));
    }
    if delta.domain() != band.domain() {
        let (lo, hi) = band.domain();
        let (a, b) = delta.domain();
        if (a - lo).abs() > 1e-12 || (b - hi).abs() > 1e-12 {
            return Err(Error::InvalidProfile(format!(
                "perturbation domain [{a}, {b}] differs from band domain [{lo}, {hi}]"
            )));
        }
    }
    let mut levels = Vec::with_capacity(LEVELS);
    for k in 0..LEVELS {
        let scale = 1usize << k;
        let e = eps / scale as f64;
        let m = (nodes - 1) * scale + 1;
        let (lhs, rhs) = identity_sides(band, family, delta, e, m)?;
        levels.push((e, lhs, rhs));
    }
    QuadraticFormReport::from_levels(&levels)
}
