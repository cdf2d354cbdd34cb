//! Rotationally symmetric bands `g = dt² + ρ(t)² g_{S^{n−1}}` with weight `u(t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{Jet, Shape, WarpingProfile};

const INTERIOR_SAMPLES: usize = 257;

/// Largest admissible exponent (exclusive) in dimension `n`.
pub fn gamma_upper_bound(n: usize) -> f64 {
    if n == 3 {
        4.0
    } else {
        3.0
    }
}

pub(crate) fn check_dimension_and_gamma(n: usize, gamma: f64) -> Result<()> {
    if n != 3 && n != 4 {
        return Err(Error::Unsupported(format!(
            "dimension n = {n}; only 3 and 4"
        )));
    }
    if !gamma.is_finite() || gamma >= gamma_upper_bound(n) {
        return Err(Error::ParameterRange(format!(
            "gamma = {gamma} must be below {} for n = {n}",
            gamma_upper_bound(n)
        )));
    }
    if (gamma - 2.0).abs() < 1e-12 {
        return Err(Error::ParameterRange(
            "gamma = 2 makes the exponent 1/(2 - gamma) degenerate".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BandRepr", into = "BandRepr")]
pub struct SymmetricBand {
    n: usize,
    rho: WarpingProfile,
    u: WarpingProfile,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct BandRepr {
    n: usize,
    gamma: f64,
    rho: WarpingProfile,
    u: WarpingProfile,
}

impl TryFrom<BandRepr> for SymmetricBand {
    type Error = Error;
    fn try_from(r: BandRepr) -> Result<Self> {
        SymmetricBand::new(r.n, r.rho, r.u, r.gamma)
    }
}

impl From<SymmetricBand> for BandRepr {
    fn from(b: SymmetricBand) -> Self {
        BandRepr {
            n: b.n,
            gamma: b.gamma,
            rho: b.rho,
            u: b.u,
        }
    }
}

impl SymmetricBand {
    pub fn new(n: usize, rho: WarpingProfile, u: WarpingProfile, gamma: f64) -> Result<Self> {
        check_dimension_and_gamma(n, gamma)?;
        let (a, b) = rho.domain();
        let (c, d) = u.domain();
        let tol = 1e-12 * (b - a).abs().max(1.0);
        if (a - c).abs() > tol || (b - d).abs() > tol {
            return Err(Error::InvalidProfile(format!(
                "rho on [{a}, {b}] and u on [{c}, {d}] have different domains"
            )));
        }
        for (name, p) in [("rho", &rho), ("u", &u)] {
            let min = p.interior_min(INTERIOR_SAMPLES)?;
            if !(min > 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "{name} is not positive in the interior (min {min})"
                )));
            }
        }
        Ok(Self { n, rho, u, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho(&self) -> &WarpingProfile {
        &self.rho
    }

    pub fn u(&self) -> &WarpingProfile {
        &self.u
    }

    pub fn domain(&self) -> (f64, f64) {
        self.rho.domain()
    }

    /// Whether `ρ` vanishes at `t−` / `t+`.
    pub fn conical_ends(&self) -> (bool, bool) {
        self.rho.conical_ends()
    }

    pub fn with_u(&self, u: WarpingProfile) -> Result<Self> {
        Self::new(self.n, self.rho.clone(), u, self.gamma)
    }

    pub fn with_rho(&self, rho: WarpingProfile) -> Result<Self> {
        Self::new(self.n, rho, self.u.clone(), self.gamma)
    }

    /// `u ↦ c u`.
    pub fn scale_u(&self, c: f64) -> Result<Self> {
        self.with_u(self.u.map_shape(|s| Shape::constant(c).times(s))?)
    }

    pub fn rho_jet(&self, t: f64) -> Result<Jet> {
        let j = self.rho.eval(t)?;
        if !(j.value > 0.0) {
            return Err(Error::SingularSlice {
                t,
                what: "rho vanishes",
            });
        }
        Ok(j)
    }

    pub fn u_jet(&self, t: f64) -> Result<Jet> {
        let j = self.u.eval(t)?;
        if !(j.value > 0.0) {
            return Err(Error::SingularSlice {
                t,
                what: "u vanishes",
            });
        }
        Ok(j)
    }

    /// `(ρ, u)` jets with both positive.
    pub fn jets(&self, t: f64) -> Result<(Jet, Jet)> {
        Ok((self.rho_jet(t)?, self.u_jet(t)?))
    }
}

/// `f″ + (n−1)(ρ′/ρ) f′`.
pub fn radial_laplacian(n: usize, rho: Jet, f: Jet) -> f64 {
    f.d2 + (n as f64 - 1.0) * rho.log_d1() * f.d1
}

/// `−2(n−1)ρ″/ρ + (n−1)(n−2)(1 − ρ′²)/ρ²`.
pub fn scalar_curvature_from_jet(n: usize, rho: Jet) -> f64 {
    scalar_curvature_with(n, rho, 1.0 - rho.d1 * rho.d1)
}

fn scalar_curvature_with(n: usize, rho: Jet, one_minus_d1_sq: f64) -> f64 {
    let n1 = n as f64 - 1.0;
    let n2 = n as f64 - 2.0;
    -2.0 * n1 * rho.ratio_d2() + n1 * n2 * one_minus_d1_sq / (rho.value * rho.value)
}

pub fn scalar_curvature(band: &SymmetricBand, t: f64) -> Result<f64> {
    let rho = band.rho_jet(t)?;
    Ok(scalar_curvature_with(
        band.n,
        rho,
        band.rho.one_minus_d1_sq(t)?,
    ))
}

/// `−γ u⁻¹Δu + R/2` from jets.
pub fn spectral_scalar_curvature_from_jets(n: usize, gamma: f64, rho: Jet, u: Jet) -> f64 {
    -gamma * radial_laplacian(n, rho, u) / u.value + 0.5 * scalar_curvature_from_jet(n, rho)
}

pub fn spectral_scalar_curvature(band: &SymmetricBand, t: f64) -> Result<f64> {
    let (rho, u) = band.jets(t)?;
    Ok(-band.gamma * radial_laplacian(band.n, rho, u) / u.value + 0.5 * scalar_curvature(band, t)?)
}

/// Per-slice quantities of `{t} × S^{n−1}` with normal `∂t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceGeometry {
    pub t: f64,
    pub mean_curvature: f64,
    pub weighted_mean_curvature: f64,
    pub slice_scalar_curvature: f64,
    pub u_nu: f64,
    pub mu: f64,
    pub eta: f64,
    pub a0_norm2: f64,
}

pub fn slice_geometry(band: &SymmetricBand, t: f64, mu: f64) -> Result<SliceGeometry> {
    let (rho, u) = band.jets(t)?;
    let n1 = band.n as f64 - 1.0;
    let h = n1 * rho.log_d1();
    let hw = h + band.gamma * u.log_d1();
    Ok(SliceGeometry {
        t,
        mean_curvature: h,
        weighted_mean_curvature: hw,
        slice_scalar_curvature: n1 * (n1 - 1.0) / (rho.value * rho.value),
        u_nu: u.d1,
        mu,
        eta: hw - mu,
        a0_norm2: 0.0,
    })
}

/// Result of trading `−u⁻¹Δu + σ|∇u|²/u²` for a pure Laplacian term.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaReduction {
    pub original: WarpingProfile,
    /// `u^{1−σ}`
    pub profile: WarpingProfile,
    pub sigma: f64,
    /// `γ/(1−σ)`, the exponent multiplying `−v⁻¹Δv` after the substitution.
    pub effective_gamma: f64,
}

pub fn sigma_reduction(u: &WarpingProfile, sigma: f64, gamma: f64) -> Result<SigmaReduction> {
    if (sigma - 1.0).abs() < 1e-12 {
        return Err(Error::Unsupported(
            "sigma = 1 needs a logarithmic substitution".into(),
        ));
    }
    if !sigma.is_finite() {
        return Err(Error::ParameterRange(format!("sigma = {sigma}")));
    }
    let min = u.interior_min(INTERIOR_SAMPLES)?;
    if !(min > 0.0) {
        return Err(Error::InvalidProfile(format!(
            "u is not positive (min {min})"
        )));
    }
    let profile = if sigma == 0.0 {
        u.clone()
    } else {
        u.map_shape(|s| s.powf(1.0 - sigma))?
    };
    Ok(SigmaReduction {
        original: u.clone(),
        profile,
        sigma,
        effective_gamma: gamma / (1.0 - sigma),
    })
}

impl SigmaReduction {
    /// Both sides `(−u⁻¹Δu + σu⁻²|∇u|², −(1−σ)⁻¹ v⁻¹Δv)` on `dt² + ρ²g_{S^{n−1}}`.
    pub fn sides(&self, n: usize, rho: &WarpingProfile, t: f64) -> Result<(f64, f64)> {
        let r = rho.eval(t)?;
        if !(r.value > 0.0) {
            return Err(Error::SingularSlice {
                t,
                what: "rho vanishes",
            });
        }
        let u = self.original.eval(t)?;
        let v = self.profile.eval(t)?;
        if !(u.value > 0.0) {
            return Err(Error::SingularSlice {
                t,
                what: "u vanishes",
            });
        }
        let lhs = -radial_laplacian(n, r, u) / u.value + self.sigma * u.log_d1().powi(2);
        let rhs = -radial_laplacian(n, r, v) / v.value / (1.0 - self.sigma);
        Ok((lhs, rhs))
    }
}
