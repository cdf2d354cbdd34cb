//! Tangent cones `ḡ = dt² + A²t² g_{S^{n−1}}`, `ū = t^α`.
//!
//! Besides closed-form quantities, this module solves for the constant-`η̂`
//! leaf near a perturbed cone tip by Newton iteration on zonal harmonics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{spectral_scalar_curvature, SymmetricBand};
use crate::harmonics::zonal_series;
use crate::profile::{Shape, WarpingProfile};
use crate::quadrature::gauss_legendre;
use crate::sphere::axisymmetric_laplacian;
use crate::variation::modified_tensors;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeModel {
    pub aperture: f64,
    pub n: usize,
    pub gamma: f64,
    pub alpha: f64,
}

/// `1/(2 − γ)`
pub fn critical_exponent(gamma: f64) -> f64 {
    1.0 / (2.0 - gamma)
}

fn check_cone_gamma(gamma: f64) -> Result<()> {
    if !(gamma < 2.0) || !gamma.is_finite() {
        return Err(Error::ParameterRange(format!(
            "cone computations need gamma < 2, got {gamma}"
        )));
    }
    Ok(())
}

impl ConeModel {
    /// Cone with the critical weight exponent `α = 1/(2−γ)`.
    pub fn conformant(n: usize, gamma: f64, aperture: f64) -> Result<Self> {
        Self::new(n, gamma, aperture, critical_exponent(gamma))
    }

    pub fn new(n: usize, gamma: f64, aperture: f64, alpha: f64) -> Result<Self> {
        if n != 3 && n != 4 {
            return Err(Error::Unsupported(format!("dimension n = {n}")));
        }
        check_cone_gamma(gamma)?;
        if !(aperture > 0.0) || !aperture.is_finite() {
            return Err(Error::ParameterRange(format!(
                "aperture {aperture} must be positive"
            )));
        }
        if !alpha.is_finite() {
            return Err(Error::ParameterRange(format!("alpha = {alpha}")));
        }
        Ok(Self {
            aperture,
            n,
            gamma,
            alpha,
        })
    }

    /// Whether `α` is the critical exponent.
    pub fn is_conformant(&self) -> bool {
        (self.alpha - critical_exponent(self.gamma)).abs() < 1e-12
    }

    /// The cone as a band on `[0, t_max]`.
    pub fn band(&self, t_max: f64) -> Result<SymmetricBand> {
        let rho = WarpingProfile::new(
            Shape::Linear {
                a: self.aperture,
                offset: 0.0,
            },
            0.0,
            t_max,
        )?;
        let u = WarpingProfile::new(Shape::identity().powf(self.alpha), 0.0, t_max)?;
        SymmetricBand::new(self.n, rho, u, self.gamma)
    }

    /// `Λ(ḡ, ū)` at `t`: `(−γα(α+n−2) + ½(n−1)(n−2)(A⁻²−1)) / t²`.
    pub fn spectral_scalar_curvature(&self, t: f64) -> f64 {
        let n = self.n as f64;
        let a = self.alpha;
        (-self.gamma * a * (a + n - 2.0)
            + 0.5 * (n - 1.0) * (n - 2.0) * (self.aperture.powi(-2) - 1.0))
            / (t * t)
    }
}

/// `(t²𝓡(∂t,∂t), t²𝓡(e,e))` in the closed form stated for critical cones:
/// `((2(n−1)−(n−2)γ)/(2−γ), (n−2)(A⁻²−1) + 2(n−1)/(2−γ))`.
///
/// The spherical entry does not agree with [`modified_tensors`] evaluated on
/// the same cone, which gives `(n−2)/A²`; see the crate README.
pub fn cone_tensor_components(cone: &ConeModel) -> Result<(f64, f64)> {
    check_cone_gamma(cone.gamma)?;
    let n = cone.n as f64;
    let g = cone.gamma;
    Ok((
        (2.0 * (n - 1.0) - (n - 2.0) * g) / (2.0 - g),
        (n - 2.0) * (cone.aperture.powi(-2) - 1.0) + 2.0 * (n - 1.0) / (2.0 - g),
    ))
}

/// `t²` times the unit-frame `𝓡` components obtained from the definition.
pub fn cone_tensor_components_numeric(cone: &ConeModel) -> Result<(f64, f64)> {
    let band = cone.band(2.0)?;
    let m = modified_tensors(&band, 1.0)?;
    Ok((m.r_rad, m.r_sph))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionCondition {
    pub holds: bool,
    pub margin: f64,
}

/// `(n−2)(A⁻²−1) + 2(n−1)/(2−γ) ≥ 0`.
pub fn cross_section_condition(
    n: usize,
    gamma: f64,
    aperture: f64,
) -> Result<CrossSectionCondition> {
    check_cone_gamma(gamma)?;
    if !(aperture > 0.0) {
        return Err(Error::ParameterRange(format!(
            "aperture {aperture} must be positive"
        )));
    }
    let nf = n as f64;
    let margin = (nf - 2.0) * (aperture.powi(-2) - 1.0) + 2.0 * (nf - 1.0) / (2.0 - gamma);
    Ok(CrossSectionCondition {
        holds: margin >= 0.0,
        margin,
    })
}

/// Largest `|λ(g_Σ, v) − Λ − αγ(α+n−2)t⁻² − ½(n−1)(n−2)t⁻²|` over the slice
/// `Σ_t` (the round sphere of radius `At`), with `ū = t^α v(θ)`.
pub fn spectral_descent_residual(cone: &ConeModel, v: &WarpingProfile, t: f64) -> Result<f64> {
    use std::f64::consts::PI;
    if !(t > 0.0) {
        return Err(Error::ParameterRange(format!("t = {t} must be positive")));
    }
    let band = cone.band(2.0 * t)?;
    let radial = spectral_scalar_curvature(&band, t)?;
    let d = cone.n - 1;
    let nf = cone.n as f64;
    let radius = cone.aperture * t;
    let r_slice = (nf - 1.0) * (nf - 2.0) / (radius * radius);
    let a = cone.alpha;
    let correction = (a * cone.gamma * (a + nf - 2.0) + 0.5 * (nf - 1.0) * (nf - 2.0)) / (t * t);
    let samples = 200;
    let mut worst: f64 = 0.0;
    for i in 0..=samples {
        let th = PI * i as f64 / samples as f64;
        let j = v.eval(th)?;
        if !(j.value > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "v is not positive at theta = {th}"
            )));
        }
        let angular = axisymmetric_laplacian(d, j, th, radius) / j.value;
        let lambda_slice = -cone.gamma * angular + 0.5 * r_slice;
        let lambda_cone = radial - cone.gamma * angular;
        let res = lambda_slice - lambda_cone - correction;
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

pub const DEFAULT_MODES: usize = 16;
pub const MAX_NEWTON_ITERATIONS: usize = 50;
/// Bound on `|ĝ − ḡ|/|ḡ|` on the sphere factor at the working scale.
pub const SMALLNESS_BOUND: f64 = 0.1;
const NEWTON_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafSolution {
    /// Coefficients of `v = Σ c_k Y_k`, `k = 1..=modes`.
    pub coefficients: Vec<f64>,
    /// The (constant) value of `η̂` on the leaf.
    pub eta_hat: f64,
    pub iterations: usize,
    /// Euclidean norm of the Galerkin projection of `F(t, v)`.
    pub residual: f64,
    /// Largest `|F(t, v)|` at the quadrature nodes.
    pub pointwise_residual: f64,
}

/// Geometry of the rescaled perturbed cone
/// `ĝ = dτ² + A²τ²(1 + tτ p(θ))² g_{S^{n−1}}`, `û = τ^α`, `ĥ = (n−1+γ/(2−γ))/τ`.
struct LeafProblem<'a> {
    cone: &'a ConeModel,
    p: &'a WarpingProfile,
    t: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    basis: Vec<Vec<crate::profile::Jet>>,
    norms: Vec<f64>,
}

impl<'a> LeafProblem<'a> {
    fn new(cone: &'a ConeModel, p: &'a WarpingProfile, t: f64, modes: usize) -> Result<Self> {
        use std::f64::consts::PI;
        let d = cone.n - 1;
        let m = (4 * modes).max(64);
        let (nodes, gl) = gauss_legendre(m, 0.0, PI);
        let weights: Vec<f64> = nodes
            .iter()
            .zip(&gl)
            .map(|(th, w)| w * th.sin().powi(d as i32 - 1))
            .collect();
        let basis: Vec<Vec<_>> = (1..=modes)
            .map(|k| {
                nodes
                    .iter()
                    .map(|&th| crate::harmonics::zonal(d, k, th))
                    .collect()
            })
            .collect();
        let norms = basis
            .iter()
            .map(|yk| {
                yk.iter()
                    .zip(&weights)
                    .map(|(y, w)| w * y.value * y.value)
                    .sum()
            })
            .collect();
        for &th in &nodes {
            p.eval(th)?;
        }
        Ok(Self {
            cone,
            p,
            t,
            nodes,
            weights,
            basis,
            norms,
        })
    }

    /// `η̂` on `{τ = 1 + w(θ)}` at node `i`, `w = t v`.
    fn eta_hat(&self, i: usize, w: crate::profile::Jet) -> Result<f64> {
        let th = self.nodes[i];
        let n1 = self.cone.n as f64 - 1.0;
        let n2 = n1 - 1.0;
        let a2 = self.cone.aperture * self.cone.aperture;
        let pj = self.p.eval(th)?;
        let t = self.t;
        let tau = 1.0 + w.value;
        if !(tau > 0.0) {
            return Err(Error::NonConvergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
        let phi = 1.0 + t * tau * pj.value;
        let phi_tau = t * pj.value;
        let phi_th = t * tau * pj.d1;
        let g = a2 * tau * tau * phi * phi;
        let g_tau = 2.0 * a2 * tau * phi * phi + 2.0 * a2 * tau * tau * phi * phi_tau;
        let g_th = 2.0 * a2 * tau * tau * phi * phi_th;
        let (w1, w2) = (w.d1, w.d2);
        let k = w1 * w1 / g;
        let k_tau = -w1 * w1 * g_tau / (g * g);
        let k_th = 2.0 * w1 * w2 / g - w1 * w1 * g_th / (g * g);
        let s = (1.0 + k).sqrt();
        let s3 = s * s * s;
        let n_tau = 1.0 / s;
        let n_th = -w1 / (g * s);
        let dn_tau = -0.5 * k_tau / s3;
        let dn_th = -w2 / (g * s) + w1 * g_th / (g * g * s) + 0.5 * w1 * k_th / (g * s3);
        let log_tau = n1 * (1.0 / tau + phi_tau / phi);
        let cot_term = if th.sin().abs() < 1e-12 {
            n2 * (-w2 / (g * s))
        } else {
            n2 * th.cos() / th.sin() * n_th
        };
        let h = dn_tau + dn_th + n_tau * log_tau + n_th * n1 * phi_th / phi + cot_term;
        let gamma = self.cone.gamma;
        let c = n1 + gamma * critical_exponent(gamma);
        Ok(h + gamma * self.cone.alpha / tau * n_tau - c / tau)
    }

    /// `η̂/t` at every node for `v = Σ c_k Y_k`.
    fn eta_over_t(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        (0..self.nodes.len())
            .map(|i| {
                let v = coeffs
                    .iter()
                    .zip(&self.basis)
                    .fold(crate::profile::Jet::constant(0.0), |acc, (c, yk)| {
                        acc.axpy(*c, yk[i])
                    });
                Ok(self.eta_hat(i, v.scale(self.t))? / self.t)
            })
            .collect()
    }

    fn average(&self, f: &[f64]) -> f64 {
        let total: f64 = self.weights.iter().sum();
        f.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>() / total
    }

    /// Galerkin coefficients of `F(t, v) = η̂/t − mean(η̂/t)`; also returns
    /// the mean and the pointwise sup of `F`.
    fn residual(&self, coeffs: &[f64]) -> Result<(DVector<f64>, f64, f64)> {
        let e = self.eta_over_t(coeffs)?;
        let mean = self.average(&e);
        let f: Vec<f64> = e.iter().map(|x| x - mean).collect();
        let proj = DVector::from_iterator(
            self.basis.len(),
            self.basis.iter().zip(&self.norms).map(|(yk, nk)| {
                yk.iter()
                    .zip(&self.weights)
                    .zip(&f)
                    .map(|((y, w), fi)| w * y.value * fi)
                    .sum::<f64>()
                    / nk
            }),
        );
        let sup = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        Ok((proj, mean, sup))
    }
}

/// Newton solve for the zero-mean `v` making `η̂` constant on the leaf
/// `{τ = 1 + t v(θ)}` of the rescaled perturbed cone whose sphere factor is
/// stretched by `(1 + tτ p(θ))²`.
pub fn cone_foliation_leaf(
    cone: &ConeModel,
    g1: &WarpingProfile,
    t: f64,
    modes: usize,
) -> Result<LeafSolution> {
    use std::f64::consts::PI;
    if modes < 2 {
        return Err(Error::Precondition(format!(
            "at least 2 modes required, got {modes}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::ParameterRange(format!(
            "scale t = {t} must be positive"
        )));
    }
    let (lo, hi) = g1.domain();
    if lo > 1e-12 || hi < PI - 1e-12 {
        return Err(Error::InvalidProfile(
            "perturbation profile must cover [0, pi]".into(),
        ));
    }
    let p_max = (0..=256)
        .map(|i| g1.value(PI * i as f64 / 256.0).map(f64::abs))
        .try_fold(0.0f64, |a, x| x.map(|x| a.max(x)))?;
    let stretch = 2.0 * t * p_max + (t * p_max).powi(2);
    if !(stretch < SMALLNESS_BOUND) {
        return Err(Error::Precondition(format!(
            "perturbation too large at this scale: relative size {stretch:.3} >= {SMALLNESS_BOUND}"
        )));
    }
    let problem = LeafProblem::new(cone, g1, t, modes)?;
    let mut c = vec![0.0; modes];
    let (mut r, mut mean, mut sup) = problem.residual(&c)?;
    let mut iterations = 0;
    while r.norm() > NEWTON_TOL {
        if iterations == MAX_NEWTON_ITERATIONS {
            return Err(Error::NonConvergence {
                iterations,
                residual: r.norm(),
            });
        }
        let mut jac = DMatrix::zeros(modes, modes);
        for j in 0..modes {
            let h = 1e-6 * (1.0 + c[j].abs());
            let mut cp = c.clone();
            let mut cm = c.clone();
            cp[j] += h;
            cm[j] -= h;
            let col = (problem.residual(&cp)?.0 - problem.residual(&cm)?.0) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let step = jac.lu().solve(&r).ok_or(Error::NonConvergence {
            iterations,
            residual: r.norm(),
        })?;
        for (ci, si) in c.iter_mut().zip(step.iter()) {
            *ci -= si;
        }
        iterations += 1;
        let next = problem.residual(&c)?;
        if !next.0.norm().is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                residual: f64::INFINITY,
            });
        }
        (r, mean, sup) = next;
        let size = c.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        if step.norm() < 1e-14 * size {
            // Stagnation at round-off level.
            break;
        }
    }
    Ok(LeafSolution {
        coefficients: c,
        eta_hat: mean * t,
        iterations,
        residual: r.norm(),
        pointwise_residual: sup,
    })
}

/// Fitted exponent `q` in `η̂ ~ t^q` from leaves at `t0, t0/2, t0/4`.
pub fn leaf_decay_order(
    cone: &ConeModel,
    g1: &WarpingProfile,
    t0: f64,
    modes: usize,
) -> Result<crate::convergence::ConvergenceRecord> {
    let scales = [t0, 0.5 * t0, 0.25 * t0];
    let etas = scales
        .iter()
        .map(|&t| cone_foliation_leaf(cone, g1, t, modes).map(|s| s.eta_hat))
        .collect::<Result<Vec<_>>>()?;
    crate::convergence::convergence_order(&scales, &etas)
}

/// `v(θ) = Σ c_k Y_k(θ)` of a leaf solution on `S^{n−1}`.
pub fn leaf_profile(cone: &ConeModel, coefficients: &[f64], theta: f64) -> f64 {
    zonal_series(cone.n - 1, coefficients, theta).value
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignEstimate {
    /// `ū²`-weighted mean of `η̂/t` over the unit cross-section.
    pub value: f64,
    /// `Λ(cone) − Λ(comparison)` at the working scale.
    pub lambda_margin: f64,
    /// Smallest unit-frame component of the comparison's `𝓡` and `𝓐`.
    pub comparison_tensor_min: f64,
    /// Whether `Λ`-comparison and `𝓡, 𝓐 ≥ 0` hold (`A ≥ A_cmp` is enforced).
    pub hypotheses_hold: bool,
}

/// `ū²`-weighted mean of `η̂/t` on the unit cross-section of `cone` rescaled at scale `t`,
/// with `ĥ` taken from `comparison`.
pub fn eta_hat_sign_estimate(
    cone: &ConeModel,
    comparison: &ConeModel,
    t: f64,
) -> Result<SignEstimate> {
    if cone.n != comparison.n || (cone.gamma - comparison.gamma).abs() > 1e-14 {
        return Err(Error::Precondition(
            "cone and comparison differ in n or gamma".into(),
        ));
    }
    if !(t > 0.0) {
        return Err(Error::ParameterRange(format!(
            "scale t = {t} must be positive"
        )));
    }
    if cone.aperture < comparison.aperture {
        return Err(Error::Precondition(format!(
            "metric comparison fails: aperture {} < comparison aperture {}",
            cone.aperture, comparison.aperture
        )));
    }
    let n1 = cone.n as f64 - 1.0;
    let h_cmp = n1 + cone.gamma * comparison.alpha;
    // ū and η̂ are both constant on the unit cross-section of a pure cone, so
    // the ū²-weighted mean is the slice value itself.
    let band = cone.band(2.0)?;
    let eta = crate::geometry::slice_geometry(&band, 1.0, h_cmp)?.eta;
    let lambda_margin = cone.spectral_scalar_curvature(t) - comparison.spectral_scalar_curvature(t);
    let m = modified_tensors(&comparison.band(2.0)?, 1.0)?;
    let comparison_tensor_min = m.r_rad.min(m.r_sph).min(m.a_sph);
    let tol = 1e-12;
    Ok(SignEstimate {
        value: eta / t,
        lambda_margin,
        comparison_tensor_min,
        hypotheses_hold: lambda_margin >= -tol * (1.0 + 1.0 / (t * t))
            && comparison_tensor_min >= -tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn lemma_closed_forms() {
        let c = ConeModel::conformant(4, 1.0, 1.0).unwrap();
        assert_eq!(cone_tensor_components(&c).unwrap(), (4.0, 6.0));
        let c = ConeModel::conformant(3, 0.0, 0.5).unwrap();
        assert_eq!(cone_tensor_components(&c).unwrap(), (2.0, 5.0));
        let c = ConeModel::conformant(3, 0.0, 1.0).unwrap();
        assert_eq!(cone_tensor_components(&c).unwrap(), (2.0, 2.0));
        assert!(ConeModel::conformant(3, 2.0, 1.0).is_err());
    }

    #[test]
    fn definition_on_cones() {
        for (n, g, a) in [(3, 0.0, 1.0), (4, 1.0, 1.0), (3, 0.0, 0.5), (4, 1.5, 1.7)] {
            let c = ConeModel::conformant(n, g, a).unwrap();
            let (r, s) = cone_tensor_components_numeric(&c).unwrap();
            let (rc, _) = cone_tensor_components(&c).unwrap();
            assert!((r - rc).abs() < 1e-10);
            assert!((s - (n as f64 - 2.0) / (a * a)).abs() < 1e-10);
        }
    }

    #[test]
    fn cross_section_examples() {
        let c = cross_section_condition(3, 0.0, 2.0).unwrap();
        assert!(c.holds);
        assert_relative_eq!(c.margin, 1.25, epsilon = 1e-15);
        let c = cross_section_condition(4, 1.0, 3.0).unwrap();
        assert_relative_eq!(c.margin, 6.0 - 16.0 / 9.0, epsilon = 1e-14);
        let c = cross_section_condition(3, -10.0, 1.5).unwrap();
        assert!(!c.holds);
        assert_relative_eq!(c.margin, 1.0 / 2.25 - 1.0 + 4.0 / 12.0, epsilon = 1e-14);
    }

    #[test]
    fn spectral_descent_examples() {
        let one = WarpingProfile::new(Shape::constant(1.0), 0.0, PI).unwrap();
        let flat = ConeModel::conformant(3, 0.0, 1.0).unwrap();
        assert!(spectral_descent_residual(&flat, &one, 1.0).unwrap() < 1e-14);
        let c = ConeModel::conformant(4, 1.0, 1.0).unwrap();
        assert!(spectral_descent_residual(&c, &one, 1.0).unwrap() < 1e-10);
        let c = ConeModel::conformant(3, 0.0, 0.5).unwrap();
        assert!(spectral_descent_residual(&c, &one, 2.0).unwrap() < 1e-10);
        let v = WarpingProfile::new(
            Shape::Cos {
                a: 0.2,
                b: 1.0,
                offset: 1.0,
            },
            0.0,
            PI,
        )
        .unwrap();
        let c = ConeModel::conformant(4, 1.3, 0.7).unwrap();
        assert!(spectral_descent_residual(&c, &v, 0.6).unwrap() < 1e-10);
    }

    #[test]
    fn unperturbed_leaf_is_trivial() {
        let c = ConeModel::conformant(3, 1.0, 0.8).unwrap();
        let zero = WarpingProfile::new(Shape::constant(0.0), 0.0, PI).unwrap();
        let s = cone_foliation_leaf(&c, &zero, 0.01, 8).unwrap();
        assert_eq!(s.iterations, 0);
        assert!(s.coefficients.iter().all(|c| *c == 0.0));
        assert!(s.eta_hat.abs() < 1e-13);
    }

    #[test]
    fn perturbed_leaf_converges() {
        for n in [3, 4] {
            let c = ConeModel::conformant(n, 0.7, 0.9).unwrap();
            let p = WarpingProfile::new(
                Shape::Cos {
                    a: 0.5,
                    b: 1.0,
                    offset: 0.0,
                },
                0.0,
                PI,
            )
            .unwrap();
            let s = cone_foliation_leaf(&c, &p, 0.02, DEFAULT_MODES).unwrap();
            assert!(s.residual < 1e-10, "{s:?}");
            assert!(s.iterations <= 20);
            assert!(s.coefficients[0].abs() > 1e-3);
            // η̂ shrinks with the scale.
            let s2 = cone_foliation_leaf(&c, &p, 0.01, DEFAULT_MODES).unwrap();
            assert!(s2.eta_hat.abs() < s.eta_hat.abs());
            let q = leaf_decay_order(&c, &p, 0.02, 8)
                .unwrap()
                .fitted_order
                .fitted()
                .unwrap();
            assert!((q - 2.0).abs() < 0.05, "decay order {q}");
        }
    }

    #[test]
    fn leaf_errors() {
        let c = ConeModel::conformant(3, 0.5, 1.0).unwrap();
        let p = WarpingProfile::new(
            Shape::Cos {
                a: 1.0,
                b: 1.0,
                offset: 0.0,
            },
            0.0,
            PI,
        )
        .unwrap();
        assert!(matches!(
            cone_foliation_leaf(&c, &p, 0.01, 1),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            cone_foliation_leaf(&c, &p, 0.5, 8),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sign_estimate_examples() {
        let m = ConeModel::conformant(3, 0.0, 0.8).unwrap();
        assert_eq!(eta_hat_sign_estimate(&m, &m, 0.1).unwrap().value, 0.0);
        let wide = ConeModel::conformant(3, 0.0, 0.84).unwrap();
        let e = eta_hat_sign_estimate(&wide, &m, 0.1).unwrap();
        assert!(e.value <= 1e-12);
        assert!(matches!(
            eta_hat_sign_estimate(&m, &wide, 0.1),
            Err(Error::Precondition(_))
        ));
    }

    proptest! {
        #[test]
        fn apertures_up_to_one_satisfy_the_condition(n in 3usize..=4, g in 0.0f64..1.999, a in 1e-3f64..=1.0) {
            prop_assert!(cross_section_condition(n, g, a).unwrap().holds);
        }

        #[test]
        fn radial_component_is_positive(n in 3usize..=4, g in -5.0f64..1.999, a in 0.1f64..3.0) {
            let c = ConeModel::conformant(n, g, a).unwrap();
            prop_assert!(cone_tensor_components(&c).unwrap().0 > 0.0);
        }

        #[test]
        fn constant_v_descent(n in 3usize..=4, g in 0.0f64..1.9, a in 0.2f64..2.0, t in 0.1f64..3.0) {
            let one = WarpingProfile::new(Shape::constant(1.0), 0.0, PI).unwrap();
            let c = ConeModel::conformant(n, g, a).unwrap();
            prop_assert!(spectral_descent_residual(&c, &one, t).unwrap() < 1e-10 * (1.0 + 1.0 / (t * t)));
        }

        #[test]
        fn sign_under_hypotheses(n in 3usize..=4, g in 0.0f64..1.9, a in 0.3f64..1.0, da in 0.0f64..0.3, dalpha in -0.3f64..0.3) {
            let cmp = ConeModel::conformant(n, g, a).unwrap();
            let cone = ConeModel::new(n, g, a + da, cmp.alpha + dalpha).unwrap();
            let e = eta_hat_sign_estimate(&cone, &cmp, 0.05).unwrap();
            if e.hypotheses_hold {
                prop_assert!(e.value <= 1e-10, "{:?}", e);
            }
        }
    }
}
