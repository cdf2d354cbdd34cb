//! One-dimensional profiles `t ↦ ξ(t)` with exact first and second derivatives.
//!
//! A [`WarpingProfile`] is a [`Shape`] restricted to a closed interval. Shapes
//! are closed-form families, compositions of them, or uniform tables whose
//! derivatives come from second-order stencils.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value, first and second derivative of a profile at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0)
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.value, c * self.d1, c * self.d2)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Self) -> Self {
        Self::new(
            self.value + other.value,
            self.d1 + other.d1,
            self.d2 + other.d2,
        )
    }

    /// `self + c * other`
    pub fn axpy(self, c: f64, other: Self) -> Self {
        self.add(other.scale(c))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Self) -> Self {
        Self::new(
            self.value * other.value,
            self.d1 * other.value + self.value * other.d1,
            self.d2 * other.value + 2.0 * self.d1 * other.d1 + self.value * other.d2,
        )
    }

    /// `self^p` for a positive base.
    pub fn powf(self, p: f64) -> Self {
        let f = self.value;
        let fp = f.powf(p);
        let q = self.d1 / f;
        Self::new(
            fp,
            p * fp * q,
            fp * (p * (p - 1.0) * q * q + p * self.d2 / f),
        )
    }

    /// Logarithmic derivative `f'/f`.
    pub fn log_d1(self) -> f64 {
        self.d1 / self.value
    }

    /// Second logarithmic ratio `f''/f`.
    pub fn ratio_d2(self) -> f64 {
        self.d2 / self.value
    }
}

/// Closed-form families, compositions and tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Shape {
    /// `a sin(b t) + offset`
    Sin {
        a: f64,
        b: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `a cos(b t) + offset`
    Cos {
        a: f64,
        b: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `a sinh(b t) + offset`
    Sinh {
        a: f64,
        b: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `a t + offset`
    Linear {
        a: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `a exp(b t) + offset`
    Exp {
        a: f64,
        b: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `Σ_k c_k cos(k t)`; axisymmetric functions on round spheres in the polar angle.
    CosSeries {
        coeffs: Vec<f64>,
    },
    /// `base^exponent`, defined where the base is positive.
    Power {
        base: Box<Shape>,
        exponent: f64,
    },
    Product {
        factors: Vec<Shape>,
    },
    Sum {
        terms: Vec<Shape>,
    },
    /// `exp(exponent(t))`
    ExpOf {
        exponent: Box<Shape>,
    },
    /// Uniform samples `values[i] = ξ(t0 + i h)`.
    Tabulated {
        h: f64,
        values: Vec<f64>,
        #[serde(default)]
        t0: f64,
    },
}

impl Shape {
    pub fn constant(c: f64) -> Self {
        Shape::Linear { a: 0.0, offset: c }
    }

    pub fn identity() -> Self {
        Shape::Linear {
            a: 1.0,
            offset: 0.0,
        }
    }

    pub fn powf(self, exponent: f64) -> Self {
        Shape::Power {
            base: Box::new(self),
            exponent,
        }
    }

    pub fn times(self, other: Shape) -> Self {
        Shape::Product {
            factors: vec![self, other],
        }
    }

    pub fn exp(self) -> Self {
        Shape::ExpOf {
            exponent: Box::new(self),
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Shape::constant(c).times(self)
    }

    pub fn plus(self, other: Shape) -> Self {
        Shape::Sum {
            terms: vec![self, other],
        }
    }

    /// Samples `f` on `nodes` uniform points starting at `t0`.
    pub fn tabulate(t0: f64, h: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Self {
        Shape::Tabulated {
            h,
            values: (0..nodes).map(|i| f(t0 + i as f64 * h)).collect(),
            t0,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Shape::Sin { a, b, offset }
            | Shape::Cos { a, b, offset }
            | Shape::Sinh { a, b, offset }
            | Shape::Exp { a, b, offset } => {
                if !finite(&[*a, *b, *offset]) {
                    return Err(Error::InvalidProfile("non-finite parameter".into()));
                }
            }
            Shape::Linear { a, offset } => {
                if !finite(&[*a, *offset]) {
                    return Err(Error::InvalidProfile("non-finite parameter".into()));
                }
            }
            Shape::CosSeries { coeffs } => {
                if coeffs.is_empty() || !finite(coeffs) {
                    return Err(Error::InvalidProfile(
                        "cosine series needs finite coefficients".into(),
                    ));
                }
            }
            Shape::Power { base, exponent } => {
                if !exponent.is_finite() {
                    return Err(Error::InvalidProfile("non-finite exponent".into()));
                }
                base.validate()?;
            }
            Shape::ExpOf { exponent } => exponent.validate()?,
            Shape::Product { factors: parts } | Shape::Sum { terms: parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidProfile("empty composition".into()));
                }
                parts.iter().try_for_each(Shape::validate)?;
            }
            Shape::Tabulated { h, values, t0 } => {
                if !(*h > 0.0) || !h.is_finite() || !t0.is_finite() {
                    return Err(Error::InvalidProfile(
                        "table spacing must be positive".into(),
                    ));
                }
                if values.len() < 5 {
                    return Err(Error::InvalidProfile(format!(
                        "table needs at least 5 nodes, got {}",
                        values.len()
                    )));
                }
                if !finite(values) {
                    return Err(Error::InvalidProfile("non-finite table value".into()));
                }
            }
        }
        Ok(())
    }

    /// Interval covered by a table, or the whole line for closed forms.
    fn natural_domain(&self) -> Option<[f64; 2]> {
        match self {
            Shape::Tabulated { h, values, t0 } => Some([*t0, t0 + (values.len() - 1) as f64 * h]),
            Shape::Power { base, .. } => base.natural_domain(),
            Shape::ExpOf { exponent } => exponent.natural_domain(),
            Shape::Product { factors: parts } | Shape::Sum { terms: parts } => parts
                .iter()
                .filter_map(Shape::natural_domain)
                .reduce(|a, b| [a[0].max(b[0]), a[1].min(b[1])]),
            _ => None,
        }
    }

    /// Evaluates the jet without any domain restriction beyond table bounds.
    /// `1 − f′(t)²`, in closed form where the family allows it so that
    /// unit-speed profiles keep full relative accuracy near their zeros.
    pub fn one_minus_d1_sq(&self, t: f64) -> Result<f64> {
        Ok(match self {
            Shape::Sin { a, b, .. } => {
                let (s, _) = (b * t).sin_cos();
                let k = a * b;
                (1.0 - k * k) + k * k * s * s
            }
            Shape::Cos { a, b, .. } => {
                let (_, c) = (b * t).sin_cos();
                let k = a * b;
                (1.0 - k * k) + k * k * c * c
            }
            Shape::Sinh { a, b, .. } => {
                let (k, s) = (a * b, (b * t).sinh());
                (1.0 - k * k) - k * k * s * s
            }
            Shape::Linear { a, .. } => 1.0 - a * a,
            _ => {
                let d1 = self.jet(t)?.d1;
                1.0 - d1 * d1
            }
        })
    }

    pub fn jet(&self, t: f64) -> Result<Jet> {
        Ok(match self {
            Shape::Sin { a, b, offset } => {
                let (s, c) = (b * t).sin_cos();
                Jet::new(a * s + offset, a * b * c, -a * b * b * s)
            }
            Shape::Cos { a, b, offset } => {
                let (s, c) = (b * t).sin_cos();
                Jet::new(a * c + offset, -a * b * s, -a * b * b * c)
            }
            Shape::Sinh { a, b, offset } => {
                let (s, c) = ((b * t).sinh(), (b * t).cosh());
                Jet::new(a * s + offset, a * b * c, a * b * b * s)
            }
            Shape::Linear { a, offset } => Jet::new(a * t + offset, *a, 0.0),
            Shape::Exp { a, b, offset } => {
                let e = (b * t).exp();
                Jet::new(a * e + offset, a * b * e, a * b * b * e)
            }
            Shape::CosSeries { coeffs } => {
                coeffs
                    .iter()
                    .enumerate()
                    .fold(Jet::constant(0.0), |acc, (k, c)| {
                        let k = k as f64;
                        let (s, co) = (k * t).sin_cos();
                        acc.add(Jet::new(c * co, -c * k * s, -c * k * k * co))
                    })
            }
            Shape::Power { base, exponent } => {
                let b = base.jet(t)?;
                if !(b.value > 0.0) {
                    return Err(Error::InvalidProfile(format!(
                        "power of non-positive base {} at t = {t}",
                        b.value
                    )));
                }
                b.powf(*exponent)
            }
            Shape::ExpOf { exponent } => {
                let f = exponent.jet(t)?;
                let e = f.value.exp();
                Jet::new(e, f.d1 * e, (f.d2 + f.d1 * f.d1) * e)
            }
            Shape::Product { factors } => factors
                .iter()
                .try_fold(Jet::constant(1.0), |acc, f| Ok(acc.mul(f.jet(t)?)))?,
            Shape::Sum { terms } => terms
                .iter()
                .try_fold(Jet::constant(0.0), |acc, f| Ok(acc.add(f.jet(t)?)))?,
            Shape::Tabulated { h, values, t0 } => tabulated_jet(*t0, *h, values, t)?,
        })
    }
}

fn node_jet(h: f64, f: &[f64], i: usize) -> Jet {
    let n = f.len();
    if i == 0 {
        Jet::new(
            f[0],
            (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h),
            (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h),
        )
    } else if i == n - 1 {
        Jet::new(
            f[i],
            (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h),
            (2.0 * f[i] - 5.0 * f[i - 1] + 4.0 * f[i - 2] - f[i - 3]) / (h * h),
        )
    } else {
        Jet::new(
            f[i],
            (f[i + 1] - f[i - 1]) / (2.0 * h),
            (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h),
        )
    }
}

fn tabulated_jet(t0: f64, h: f64, f: &[f64], t: f64) -> Result<Jet> {
    let n = f.len();
    let hi = t0 + (n - 1) as f64 * h;
    let slack = 1e-12 * h.max(1.0);
    if t < t0 - slack || t > hi + slack {
        return Err(Error::Domain { t, lo: t0, hi });
    }
    let x = ((t - t0) / h).clamp(0.0, (n - 1) as f64);
    let i = (x.floor() as usize).min(n - 2);
    let s = x - i as f64;
    let left = node_jet(h, f, i);
    let right = node_jet(h, f, i + 1);
    Ok(left.scale(1.0 - s).add(right.scale(s)))
}

/// A [`Shape`] restricted to `[t−, t+]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct WarpingProfile {
    shape: Shape,
    domain: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    #[serde(flatten)]
    shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<[f64; 2]>,
}

impl TryFrom<ProfileRepr> for WarpingProfile {
    type Error = Error;

    fn try_from(r: ProfileRepr) -> Result<Self> {
        match r.domain.or_else(|| r.shape.natural_domain()) {
            Some([lo, hi]) => WarpingProfile::new(r.shape, lo, hi),
            None => Err(Error::InvalidProfile(
                "closed-form profile needs a domain".into(),
            )),
        }
    }
}

impl From<WarpingProfile> for ProfileRepr {
    fn from(p: WarpingProfile) -> Self {
        ProfileRepr {
            shape: p.shape,
            domain: Some(p.domain),
        }
    }
}

impl WarpingProfile {
    pub fn new(shape: Shape, lo: f64, hi: f64) -> Result<Self> {
        shape.validate()?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidProfile(format!("bad domain [{lo}, {hi}]")));
        }
        if let Some([a, b]) = shape.natural_domain() {
            let slack = 1e-9 * (b - a).abs().max(1.0);
            if lo < a - slack || hi > b + slack {
                return Err(Error::InvalidProfile(format!(
                    "domain [{lo}, {hi}] exceeds tabulated range [{a}, {b}]"
                )));
            }
        }
        Ok(Self {
            shape,
            domain: [lo, hi],
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.domain[0], self.domain[1])
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (hi - lo).max(1.0);
        t >= lo - slack && t <= hi + slack
    }

    /// `(ξ, ξ′, ξ″)` at `t`.
    pub fn eval(&self, t: f64) -> Result<Jet> {
        if !self.contains(t) {
            let (lo, hi) = self.domain();
            return Err(Error::Domain { t, lo, hi });
        }
        self.shape.jet(t)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.eval(t).map(|j| j.value)
    }

    pub fn one_minus_d1_sq(&self, t: f64) -> Result<f64> {
        if !self.contains(t) {
            let (lo, hi) = self.domain();
            return Err(Error::Domain { t, lo, hi });
        }
        self.shape.one_minus_d1_sq(t)
    }

    /// Same shape on a sub-interval.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        if !self.contains(lo) || !self.contains(hi) {
            let (a, b) = self.domain();
            return Err(Error::Domain {
                t: if self.contains(lo) { hi } else { lo },
                lo: a,
                hi: b,
            });
        }
        Self::new(self.shape.clone(), lo, hi)
    }

    pub fn map_shape(&self, f: impl FnOnce(Shape) -> Shape) -> Result<Self> {
        let (lo, hi) = self.domain();
        Self::new(f(self.shape.clone()), lo, hi)
    }

    /// Smallest value over `samples` interior points (endpoints excluded so
    /// that conical profiles vanishing at an end are still admissible).
    pub fn interior_min(&self, samples: usize) -> Result<f64> {
        let (lo, hi) = self.domain();
        let mut min = f64::INFINITY;
        for i in 1..=samples {
            let t = lo + (hi - lo) * i as f64 / (samples + 1) as f64;
            min = min.min(self.shape.jet(t)?.value);
        }
        Ok(min)
    }

    /// True when the profile (numerically) vanishes at `t−` or `t+`.
    pub fn conical_ends(&self) -> (bool, bool) {
        let (lo, hi) = self.domain();
        let vanishes = |t: f64| {
            self.shape
                .jet(t)
                .map(|j| j.value.abs() < 1e-12)
                .unwrap_or(true)
        };
        (vanishes(lo), vanishes(hi))
    }
}

/// A prescribed function `μ(t)` together with its derivative.
pub trait Prescription {
    /// `(μ(t), μ′(t))`
    fn eval(&self, t: f64) -> Result<(f64, f64)>;
}

impl Prescription for WarpingProfile {
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let j = WarpingProfile::eval(self, t)?;
        Ok((j.value, j.d1))
    }
}

impl<F> Prescription for F
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        self(t)
    }
}

/// `c ξ′/ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRatio {
    pub xi: WarpingProfile,
    pub coefficient: f64,
}

impl LogRatio {
    pub fn new(xi: WarpingProfile, coefficient: f64) -> Self {
        Self { xi, coefficient }
    }
}

impl Prescription for LogRatio {
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let j = self.xi.eval(t)?;
        if j.value == 0.0 {
            return Err(Error::SingularSlice {
                t,
                what: "xi vanishes",
            });
        }
        let q = j.log_d1();
        Ok((
            self.coefficient * q,
            self.coefficient * (j.ratio_d2() - q * q),
        ))
    }
}

/// `μ ∘ τ`, with derivative `μ′(τ) τ′`.
#[derive(Debug, Clone, PartialEq)]
pub struct Composed<P> {
    pub outer: P,
    pub tau: WarpingProfile,
}

impl<P: Prescription> Prescription for Composed<P> {
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let tau = self.tau.eval(t)?;
        let (m, dm) = self.outer.eval(tau.value)?;
        Ok((m, dm * tau.d1))
    }
}
