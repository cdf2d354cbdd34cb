//! Stability potentials, the operator `L̃` on round slices, and the
//! two-dimensional and conformal curvature tests used at rigidity slices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    gamma_upper_bound, slice_geometry, spectral_scalar_curvature, SymmetricBand,
};
use crate::profile::WarpingProfile;
use crate::sphere::{axisymmetric_laplacian, harmonic_multiplicity};

/// `Γ = (2n − (n−1)γ) / (2(2(n−1) − (n−2)γ))`.
pub fn gamma_coefficient(n: usize, gamma: f64) -> Result<f64> {
    let nf = n as f64;
    let q = 2.0 * (nf - 1.0) - (nf - 2.0) * gamma;
    if q == 0.0 || !q.is_finite() {
        return Err(Error::ParameterRange(format!(
            "2(n-1) - (n-2)gamma vanishes for n = {n}, gamma = {gamma}"
        )));
    }
    Ok((2.0 * nf - (nf - 1.0) * gamma) / (2.0 * q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityPotentials {
    pub z: f64,
    pub w: f64,
    /// `−½(n−1)(n−2)/ρ(t)²`
    pub w_bound: f64,
    pub gamma_coef: f64,
    /// `(w_ν − μ/(2(n−1) − (n−2)γ))²`
    pub square_term: f64,
    pub eta: f64,
}

/// `Z_f` and `W` on the slice at `t` for the prescription value `mu` and
/// normal derivative `mu_nu`.
pub fn stability_potentials(
    band: &SymmetricBand,
    t: f64,
    mu: f64,
    mu_nu: f64,
    f: f64,
) -> Result<StabilityPotentials> {
    let n = band.n() as f64;
    let gamma = band.gamma();
    let s = slice_geometry(band, t, mu)?;
    let lambda = spectral_scalar_curvature(band, t)?;
    let rho = band.rho_jet(t)?.value;
    let w_nu = band.u_jet(t)?.log_d1();
    let q = 2.0 * (n - 1.0) - (n - 2.0) * gamma;
    let gamma_coef = gamma_coefficient(band.n(), gamma)?;
    let eta = s.eta;
    let z = -(eta * (n * f - gamma * w_nu)) / (n - 1.0) - n / (2.0 * (n - 1.0)) * eta * eta;
    let square_term = (w_nu - mu / q).powi(2);
    let w = -0.5 * s.a0_norm2
        - (gamma_coef * mu * mu + mu_nu + lambda)
        - q / (2.0 * (n - 1.0)) * gamma * square_term;
    Ok(StabilityPotentials {
        z,
        w,
        w_bound: -0.5 * (n - 1.0) * (n - 2.0) / (rho * rho),
        gamma_coef,
        square_term,
        eta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub k: usize,
    pub multiplicity: u64,
    pub eigenvalue: f64,
}

pub const DEFAULT_K_MAX: usize = 8;

/// Spectrum of `−(4/(4−γ))Δ + ½((n−1)(n−2)/r² − (n−1)(n−2)/ξ²)` on `S^{n−1}(r)`.
pub fn ltilde_spectrum(
    n: usize,
    gamma: f64,
    radius: f64,
    xi_val: f64,
    k_max: usize,
) -> Result<Vec<SpectrumEntry>> {
    if n != 3 && n != 4 {
        return Err(Error::Unsupported(format!("dimension n = {n}")));
    }
    if !(gamma < gamma_upper_bound(n)) {
        return Err(Error::ParameterRange(format!(
            "gamma = {gamma} too large for n = {n}"
        )));
    }
    if !(radius > 0.0) || !(xi_val > 0.0) {
        return Err(Error::ParameterRange(format!(
            "radius {radius} and xi {xi_val} must be positive"
        )));
    }
    let nf = n as f64;
    let c = (nf - 1.0) * (nf - 2.0);
    let shift = 0.5 * (c / (radius * radius) - c / (xi_val * xi_val));
    let pre = 4.0 / (4.0 - gamma);
    Ok((0..=k_max)
        .map(|k| {
            let kf = k as f64;
            SpectrumEntry {
                k,
                multiplicity: harmonic_multiplicity(n - 1, k),
                eigenvalue: pre * kf * (kf + nf - 2.0) / (radius * radius) + shift,
            }
        })
        .collect())
}

/// `2πχ − ∫_Σ ξ(τ)⁻² dA` on the round slice at `t` of a three-dimensional band.
pub fn gauss_bonnet_margin(
    euler_char: i32,
    band: &SymmetricBand,
    t: f64,
    xi_profile: &WarpingProfile,
    tau: f64,
) -> Result<f64> {
    use std::f64::consts::PI;
    if band.n() != 3 {
        return Err(Error::Unsupported(
            "the Gauss-Bonnet step needs two-dimensional slices (n = 3)".into(),
        ));
    }
    let rho = band.rho_jet(t)?.value;
    let xi = xi_profile.value(tau)?;
    if !(xi > 0.0) {
        return Err(Error::SingularSlice {
            t: tau,
            what: "xi vanishes",
        });
    }
    Ok(2.0 * PI * euler_char as f64 - 4.0 * PI * (rho / xi).powi(2))
}

/// Scalar curvature of `v^{4α} g` on the round `S^d` of radius `r` at polar
/// angle `θ`, with `v` axisymmetric.
pub fn listing_conformal_scalar(
    n_cross: usize,
    v: &WarpingProfile,
    alpha: f64,
    radius: f64,
    theta: f64,
) -> Result<f64> {
    if n_cross < 2 {
        return Err(Error::Unsupported(format!(
            "cross-section dimension {n_cross}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ParameterRange(format!(
            "alpha = {alpha} must lie in (0, 1)"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::ParameterRange(format!("radius = {radius}")));
    }
    let (lo, hi) = v.domain();
    let samples = 256;
    for i in 0..=samples {
        let th = lo + (hi - lo) * i as f64 / samples as f64;
        if !(v.value(th)? > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "conformal factor is not positive at theta = {th}"
            )));
        }
    }
    let d = n_cross as f64;
    let j = v.eval(theta)?;
    let lap_over_v = axisymmetric_laplacian(n_cross, j, theta, radius) / j.value;
    let grad_log2 = (j.log_d1() / radius).powi(2);
    let r = d * (d - 1.0) / (radius * radius);
    let inner = r
        - 4.0 * alpha * (d - 1.0) * (lap_over_v - grad_log2)
        - 4.0 * alpha * alpha * (d - 2.0) * (d - 1.0) * grad_log2;
    Ok(j.value.powf(-4.0 * alpha) * inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model_profile, ModelSign, ModelSpec};
    use crate::profile::{Prescription, Shape};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn gamma_coefficient_values() {
        assert_eq!(gamma_coefficient(3, 0.0).unwrap(), 0.75);
        assert_relative_eq!(gamma_coefficient(4, 0.0).unwrap(), 2.0 / 3.0);
        assert_eq!(gamma_coefficient(4, 1.0).unwrap(), 0.625);
        assert!(gamma_coefficient(4, 3.0).is_err());
    }

    fn round_sphere() -> SymmetricBand {
        let rho = WarpingProfile::new(
            Shape::Sin {
                a: 1.0,
                b: 1.0,
                offset: 0.0,
            },
            0.0,
            PI,
        )
        .unwrap();
        let u = WarpingProfile::new(Shape::constant(1.0), 0.0, PI).unwrap();
        SymmetricBand::new(3, rho, u, 0.0).unwrap()
    }

    #[test]
    fn round_sphere_equator() {
        let p = stability_potentials(&round_sphere(), FRAC_PI_2, 0.0, -2.0, 0.0).unwrap();
        assert_relative_eq!(p.w, -1.0, epsilon = 1e-14);
        assert_relative_eq!(p.w_bound, -1.0, epsilon = 1e-14);
        assert!(p.z.abs() < 1e-15);
    }

    #[test]
    fn model_slices_saturate_the_bound() {
        for (n, gamma, lambda) in [(3, 1.0, 2.0), (4, 1.5, 5.0), (3, 2.5, 0.5)] {
            let spec0 = ModelSpec::new(n, gamma, lambda, [0.0, 1.0], ModelSign::Positive);
            let b = match crate::model::model_shape(n, gamma, lambda, ModelSign::Positive).unwrap()
            {
                Shape::Sin { b, .. } => b,
                _ => unreachable!(),
            };
            let spec = ModelSpec {
                domain: [0.0, PI / b],
                ..spec0
            };
            let model = build_model_profile(&spec).unwrap();
            let band = model.band().unwrap();
            for frac in [0.2, 0.5, 0.8] {
                let t = frac * PI / b;
                let (m, dm) = model.m.eval(t).unwrap();
                let p = stability_potentials(&band, t, m, dm, 0.0).unwrap();
                assert!(p.eta.abs() < 1e-12);
                assert!(p.z.abs() < 1e-12);
                assert!(p.square_term < 1e-24);
                assert!((p.w - p.w_bound).abs() < 1e-10 * p.w_bound.abs().max(1.0));
            }
        }
    }

    #[test]
    fn spectrum_examples() {
        let s = ltilde_spectrum(3, 0.0, 1.0, 1.0, 2).unwrap();
        let ev: Vec<f64> = s.iter().map(|e| e.eigenvalue).collect();
        assert_eq!(ev, vec![0.0, 2.0, 6.0]);
        assert_eq!(s[2].multiplicity, 5);
        let l0 = ltilde_spectrum(3, 0.0, 1.0, 0.9, 0).unwrap()[0].eigenvalue;
        assert!((l0 - (1.0 - 1.0 / 0.81)).abs() < 1e-15);
        assert_eq!(
            ltilde_spectrum(3, 2.0, 1.0, 1.0, 1).unwrap()[1].eigenvalue,
            4.0
        );
        assert!(ltilde_spectrum(3, 4.0, 1.0, 1.0, 1).is_err());
        assert!(ltilde_spectrum(4, 3.0, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn gauss_bonnet_examples() {
        let band = round_sphere();
        let sin = band.rho().clone();
        assert_eq!(gauss_bonnet_margin(2, &band, 1.0, &sin, 1.0).unwrap(), 0.0);
        let xi = WarpingProfile::new(
            Shape::Sin {
                a: 0.9,
                b: 1.0,
                offset: 0.0,
            },
            0.0,
            PI,
        )
        .unwrap();
        let m = gauss_bonnet_margin(2, &band, FRAC_PI_2, &xi, FRAC_PI_2).unwrap();
        assert_relative_eq!(m, 4.0 * PI * (1.0 - 1.0 / 0.81), epsilon = 1e-13);
        assert!(gauss_bonnet_margin(0, &band, 0.4, &sin, 2.0).unwrap() < 0.0);
    }

    #[test]
    fn listing_examples() {
        let one = WarpingProfile::new(Shape::constant(1.0), 0.0, PI).unwrap();
        assert_eq!(
            listing_conformal_scalar(3, &one, 0.25, 1.0, 0.7).unwrap(),
            6.0
        );
        let c = WarpingProfile::new(Shape::constant(2.0), 0.0, PI).unwrap();
        let alpha = 1.0 / 3.0;
        assert_relative_eq!(
            listing_conformal_scalar(3, &c, alpha, 1.0, 0.3).unwrap(),
            6.0 * 2f64.powf(-4.0 * alpha),
            epsilon = 1e-14
        );
        let bad = WarpingProfile::new(
            Shape::Cos {
                a: 1.0,
                b: 1.0,
                offset: 0.0,
            },
            0.0,
            PI,
        )
        .unwrap();
        assert!(listing_conformal_scalar(3, &bad, 0.25, 1.0, 0.3).is_err());
    }

    #[test]
    fn listing_matches_finite_differences() {
        let v = WarpingProfile::new(
            Shape::Cos {
                a: 0.1,
                b: 1.0,
                offset: 1.0,
            },
            0.0,
            PI,
        )
        .unwrap();
        let alpha = 0.25;
        let h = 1e-4;
        let f = |x: f64| 1.0 + 0.1 * x.cos();
        for th in [0.4, 1.2, 2.5] {
            let d1 = (f(th + h) - f(th - h)) / (2.0 * h);
            let d2 = (f(th + h) - 2.0 * f(th) + f(th - h)) / (h * h);
            let lap = d2 + 2.0 * th.cos() / th.sin() * d1;
            let g = d1 / f(th);
            let fd = f(th).powf(-4.0 * alpha)
                * (6.0 - 8.0 * alpha * lap / f(th) - 8.0 * alpha * (alpha - 1.0) * g * g);
            let exact = listing_conformal_scalar(3, &v, alpha, 1.0, th).unwrap();
            assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
        }
    }

    #[test]
    fn gauss_bonnet_requires_n3() {
        let rho = WarpingProfile::new(Shape::constant(1.0), 0.0, 1.0).unwrap();
        let band = SymmetricBand::new(4, rho.clone(), rho.clone(), 0.0).unwrap();
        assert!(matches!(
            gauss_bonnet_margin(2, &band, 0.5, &rho, 0.5),
            Err(Error::Unsupported(_))
        ));
    }

    proptest! {
        #[test]
        fn first_eigenvalue_increases_with_xi(n in 3usize..=4, gamma in 0.0f64..2.9, r in 0.3f64..3.0, x in 0.1f64..3.0, dx in 1e-3f64..1.0) {
            let l = |xi: f64| ltilde_spectrum(n, gamma, r, xi, 0).unwrap()[0].eigenvalue;
            prop_assert!(l(x + dx) > l(x));
            prop_assert!(l(r).abs() < 1e-12 / (r * r));
            prop_assert!((l(x) < 0.0) == (x < r) || (x - r).abs() < 1e-12);
        }

        #[test]
        fn gauss_bonnet_nonpositive_when_rho_dominates(rho in 0.1f64..3.0, frac in 0.1f64..1.0) {
            let rho_p = WarpingProfile::new(Shape::constant(rho), 0.0, 1.0).unwrap();
            let band = SymmetricBand::new(3, rho_p, WarpingProfile::new(Shape::constant(1.0), 0.0, 1.0).unwrap(), 0.0).unwrap();
            let xi = WarpingProfile::new(Shape::constant(rho * frac), 0.0, 1.0).unwrap();
            let m = gauss_bonnet_margin(2, &band, 0.5, &xi, 0.5).unwrap();
            prop_assert!(m <= 0.0);
            prop_assert!((m == 0.0) == (frac == 1.0) || m.abs() < 1e-12);
        }

        #[test]
        fn unit_factor_reproduces_slice_curvature(d in 2usize..=3, r in 0.2f64..4.0, alpha in 0.01f64..0.99, th in 0.0f64..3.1) {
            let one = WarpingProfile::new(Shape::constant(1.0), 0.0, PI).unwrap();
            let s = listing_conformal_scalar(d, &one, alpha, r, th).unwrap();
            prop_assert_eq!(s, (d * (d - 1)) as f64 / (r * r));
        }
    }
}
