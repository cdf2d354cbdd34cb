//! Model warped products whose spectral scalar curvature is constant.
//!
//! For `γ > 0` the profile is `ξ = a sin(bt)` (or `sinh`, or linear) with
//! weight `u = ξ^{1/(2−γ)}`; for `γ = 0` the weight drops out and the models
//! are round spheres, hyperbolic space and flat space of the right curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dimension_and_gamma, SymmetricBand};
use crate::profile::{LogRatio, Prescription, Shape, WarpingProfile};
use crate::stability::gamma_coefficient;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelSign {
    #[default]
    Positive,
    Negative,
    Zero,
}

impl ModelSign {
    pub fn factor(self) -> f64 {
        match self {
            ModelSign::Positive => 1.0,
            ModelSign::Negative => -1.0,
            ModelSign::Zero => 0.0,
        }
    }
}

/// `lambda` is a magnitude; the signed target is `sign.factor() * lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub domain: [f64; 2],
    #[serde(default)]
    pub sign: ModelSign,
}

impl ModelSpec {
    pub fn new(n: usize, gamma: f64, lambda: f64, domain: [f64; 2], sign: ModelSign) -> Self {
        Self {
            n,
            gamma,
            lambda,
            domain,
            sign,
        }
    }

    pub fn target_lambda(&self) -> f64 {
        self.sign.factor() * self.lambda
    }

    /// `(2(n−1) + γ(2−n))/(2−γ)`, the coefficient of `ξ′/ξ` in `m`.
    pub fn m_coefficient(&self) -> f64 {
        m_coefficient(self.n, self.gamma)
    }
}

pub fn m_coefficient(n: usize, gamma: f64) -> f64 {
    let n = n as f64;
    (2.0 * (n - 1.0) + gamma * (2.0 - n)) / (2.0 - gamma)
}

/// Coefficients `(a, b)` of `ξ = a sin(bt)` with `Λ(g_ξ, u_ξ) ≡ Λ`:
///
/// `a² = (n−1)(n−2)(2n−(n−1)γ) / (2Λ(2(n−2)−(n−3)γ))`,
/// `b² = 2Λ(2−γ)² / ((2n−(n−1)γ)(2(n−1)−(n−2)γ))`.
///
/// Writing an extra factor `γ` into both numerator of `a²` and denominator of
/// `b²` yields the profile with constant `Λ/γ` instead. `b` carries the sign
/// of `2 − γ`; only `b²` enters the model.
pub fn model_coefficients(n: usize, gamma: f64, lambda: f64) -> Result<(f64, f64)> {
    check_dimension_and_gamma(n, gamma)?;
    if !(lambda > 0.0) {
        return Err(Error::ParameterRange(format!(
            "Lambda = {lambda} must be positive"
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::ParameterRange(format!(
            "gamma = {gamma} must be positive; gamma = 0 models are the round spaces"
        )));
    }
    let nf = n as f64;
    let d_a = 2.0 * (nf - 2.0) - (nf - 3.0) * gamma;
    let p = 2.0 * nf - (nf - 1.0) * gamma;
    let q = 2.0 * (nf - 1.0) - (nf - 2.0) * gamma;
    if !(d_a > 0.0) {
        return Err(Error::ParameterRange(format!(
            "2(n-2) - (n-3)gamma = {d_a} is not positive"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::ParameterRange(format!(
            "2n - (n-1)gamma = {p} is not positive"
        )));
    }
    if !(q > 0.0) {
        return Err(Error::ParameterRange(format!(
            "2(n-1) - (n-2)gamma = {q} is not positive"
        )));
    }
    let a = ((nf - 1.0) * (nf - 2.0) * p / (2.0 * lambda * d_a)).sqrt();
    let b = (2.0 - gamma) * (2.0 * lambda).sqrt() / (p * q).sqrt();
    Ok((a, b))
}

/// Model profile `ξ` without a domain.
pub fn model_shape(n: usize, gamma: f64, lambda: f64, sign: ModelSign) -> Result<Shape> {
    check_dimension_and_gamma(n, gamma)?;
    if sign != ModelSign::Zero && !(lambda > 0.0) {
        return Err(Error::ParameterRange(format!(
            "Lambda magnitude {lambda} must be positive"
        )));
    }
    if gamma == 0.0 {
        let nf = n as f64;
        let k = (2.0 * lambda / (nf * (nf - 1.0))).sqrt();
        return Ok(match sign {
            ModelSign::Positive => Shape::Sin {
                a: 1.0 / k,
                b: k,
                offset: 0.0,
            },
            ModelSign::Negative => Shape::Sinh {
                a: 1.0 / k,
                b: k,
                offset: 0.0,
            },
            ModelSign::Zero => Shape::identity(),
        });
    }
    Ok(match sign {
        ModelSign::Positive => {
            let (a, b) = model_coefficients(n, gamma, lambda)?;
            Shape::Sin {
                a,
                b: b.abs(),
                offset: 0.0,
            }
        }
        ModelSign::Negative => {
            let (a, b) = model_coefficients(n, gamma, lambda)?;
            Shape::Sinh {
                a,
                b: b.abs(),
                offset: 0.0,
            }
        }
        ModelSign::Zero => {
            let (a, b) = model_coefficients(n, gamma, 1.0)?;
            Shape::Linear {
                a: a * b.abs(),
                offset: 0.0,
            }
        }
    })
}

/// A model band together with its prescriptions `m = C ξ′/ξ` and `h = (n−1) ξ′/ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMetric {
    pub spec: ModelSpec,
    pub xi: WarpingProfile,
    pub u: WarpingProfile,
    pub m: LogRatio,
    pub h: LogRatio,
}

pub fn build_model_profile(spec: &ModelSpec) -> Result<ModelMetric> {
    let shape = model_shape(spec.n, spec.gamma, spec.lambda, spec.sign)?;
    let [lo, hi] = spec.domain;
    let xi = WarpingProfile::new(shape.clone(), lo, hi)?;
    let min = xi.interior_min(513)?;
    if !(min > 0.0) {
        return Err(Error::InvalidProfile(format!(
            "model profile changes sign on [{lo}, {hi}]"
        )));
    }
    if lo < 0.0 {
        return Err(Error::InvalidProfile(format!(
            "model domain must start at t >= 0, got {lo}"
        )));
    }
    let u = WarpingProfile::new(shape.powf(1.0 / (2.0 - spec.gamma)), lo, hi)?;
    Ok(ModelMetric {
        m: LogRatio::new(xi.clone(), spec.m_coefficient()),
        h: LogRatio::new(xi.clone(), spec.n as f64 - 1.0),
        xi,
        u,
        spec: spec.clone(),
    })
}

impl ModelMetric {
    pub fn band(&self) -> Result<SymmetricBand> {
        SymmetricBand::new(
            self.spec.n,
            self.xi.clone(),
            self.u.clone(),
            self.spec.gamma,
        )
    }

    pub fn domain(&self) -> (f64, f64) {
        self.xi.domain()
    }

    /// Whether `m′ < 0` at `samples` interior grid points.
    pub fn m_monotone(&self, samples: usize) -> Result<bool> {
        let (lo, hi) = self.domain();
        for i in 1..=samples {
            let t = lo + (hi - lo) * i as f64 / (samples + 1) as f64;
            if !(self.m.eval(t)?.1 < 0.0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `m′ + Γ m² + Λ − ½(n−1)(n−2)/ρ²` with `m = C ρ′/ρ`.
pub fn model_ode_residual(
    rho: &WarpingProfile,
    n: usize,
    gamma: f64,
    lambda: f64,
    t: f64,
) -> Result<f64> {
    let j = rho.eval(t)?;
    if !(j.value > 0.0) {
        return Err(Error::SingularSlice {
            t,
            what: "rho vanishes",
        });
    }
    let c = m_coefficient(n, gamma);
    let q = j.log_d1();
    let m = c * q;
    let dm = c * (j.ratio_d2() - q * q);
    let nf = n as f64;
    Ok(dm + gamma_coefficient(n, gamma)? * m * m + lambda
        - 0.5 * (nf - 1.0) * (nf - 2.0) / (j.value * j.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{slice_geometry, spectral_scalar_curvature};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn coefficients_match_hand_values() {
        let (a, b) = model_coefficients(3, 1.0, 2.0).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-15);
        assert_relative_eq!(b, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        let (a, b) = model_coefficients(4, 1.0, 5.0).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-15);
        assert_relative_eq!(b, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(
            model_coefficients(3, 0.0, 2.0),
            Err(Error::ParameterRange(_))
        ));
        assert!(model_coefficients(3, 1.0, -1.0).is_err());
    }

    #[test]
    fn n3_gamma1_model() {
        let b = 1.0 / 3f64.sqrt();
        let spec = ModelSpec::new(3, 1.0, 2.0, [0.0, PI / b], ModelSign::Positive);
        let model = build_model_profile(&spec).unwrap();
        assert_eq!(spec.m_coefficient(), 3.0);
        let t = 1.3;
        let (m, dm) = model.m.eval(t).unwrap();
        assert_relative_eq!(m, 3.0 * b / (b * t).tan(), epsilon = 1e-14);
        assert!(dm < 0.0);
        assert!(model.m_monotone(999).unwrap());
        let u = model.u.eval(t).unwrap();
        assert_relative_eq!(u.value, (b * t).sin(), epsilon = 1e-14);
        let band = model.band().unwrap();
        assert_relative_eq!(
            spectral_scalar_curvature(&band, t).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let s = slice_geometry(&band, t, m).unwrap();
        assert!(s.eta.abs() < 1e-13);
    }

    #[test]
    fn negative_family_uses_sinh() {
        let spec = ModelSpec::new(3, 1.0, 2.0, [0.0, 2.0], ModelSign::Negative);
        let model = build_model_profile(&spec).unwrap();
        let (a, b) = model_coefficients(3, 1.0, 2.0).unwrap();
        assert_eq!(model.xi.shape(), &Shape::Sinh { a, b, offset: 0.0 });
        let band = model.band().unwrap();
        assert_relative_eq!(
            spectral_scalar_curvature(&band, 0.8).unwrap(),
            -2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_family_has_negative_m_slope() {
        for gamma in [0.5, 1.0, 1.5] {
            let spec = ModelSpec::new(4, gamma, 0.0, [0.0, 3.0], ModelSign::Zero);
            let model = build_model_profile(&spec).unwrap();
            let (_, dm) = model.m.eval(1.5).unwrap();
            assert_relative_eq!(dm, -spec.m_coefficient() / 2.25, epsilon = 1e-14);
            let band = model.band().unwrap();
            assert!(spectral_scalar_curvature(&band, 1.5).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn round_sphere_residuals() {
        let sin = WarpingProfile::new(
            Shape::Sin {
                a: 1.0,
                b: 1.0,
                offset: 0.0,
            },
            0.0,
            PI,
        )
        .unwrap();
        assert!(
            model_ode_residual(&sin, 3, 0.0, 3.0, FRAC_PI_3)
                .unwrap()
                .abs()
                < 1e-14
        );
        let big = WarpingProfile::new(
            Shape::Sin {
                a: 1.1,
                b: 1.0,
                offset: 0.0,
            },
            0.0,
            PI,
        )
        .unwrap();
        let r = model_ode_residual(&big, 3, 0.0, 3.0, FRAC_PI_2).unwrap();
        assert_relative_eq!(r, 1.0 - 1.0 / 1.21, epsilon = 1e-14);
    }

    #[test]
    fn round_sphere_is_the_gamma_zero_model() {
        for n in [3usize, 4] {
            let lambda = (n * (n - 1)) as f64 / 2.0;
            let spec = ModelSpec::new(n, 0.0, lambda, [0.0, PI], ModelSign::Positive);
            let model = build_model_profile(&spec).unwrap();
            assert_relative_eq!(model.xi.value(1.0).unwrap(), 1f64.sin(), epsilon = 1e-15);
        }
    }

    #[test]
    fn sign_change_in_domain_is_rejected() {
        let spec = ModelSpec::new(3, 1.0, 2.0, [0.0, 6.0], ModelSign::Positive);
        assert!(build_model_profile(&spec).is_err());
    }

    proptest! {
        #[test]
        fn every_family_has_constant_lambda(
            n in 3usize..=4,
            gamma in 0.05f64..1.95,
            lambda in 0.2f64..6.0,
            frac in 0.05f64..0.95,
            sign_ix in 0usize..3,
        ) {
            let sign = [ModelSign::Positive, ModelSign::Negative, ModelSign::Zero][sign_ix];
            let shape = model_shape(n, gamma, lambda, sign).unwrap();
            let hi = match &shape { Shape::Sin { b, .. } => PI / b, _ => 3.0 };
            let spec = ModelSpec::new(n, gamma, lambda, [0.0, hi], sign);
            let model = build_model_profile(&spec).unwrap();
            let band = model.band().unwrap();
            let t = frac * hi;
            let target = spec.target_lambda();
            let scale = 1.0 + target.abs();
            let lam = spectral_scalar_curvature(&band, t).unwrap();
            prop_assert!((lam - target).abs() < 1e-10 * scale, "Lambda {lam} target {target}");
            prop_assert!(model_ode_residual(&model.xi, n, gamma, target, t).unwrap().abs() < 1e-10 * scale);
            let (m, _) = model.m.eval(t).unwrap();
            let s = slice_geometry(&band, t, m).unwrap();
            prop_assert!(s.eta.abs() < 1e-10 * (1.0 + m.abs()));
        }

        #[test]
        fn sin_models_have_decreasing_m(n in 3usize..=4, gamma in 0.05f64..1.95, lambda in 0.2f64..6.0) {
            let (_, b) = model_coefficients(n, gamma, lambda).unwrap();
            let spec = ModelSpec::new(n, gamma, lambda, [0.0, PI / b], ModelSign::Positive);
            prop_assert!(build_model_profile(&spec).unwrap().m_monotone(200).unwrap());
        }
    }
}
