//! Round spheres: volumes, Laplace spectra and axisymmetric Laplacians.

use crate::profile::Jet;

/// Volume of the unit sphere `S^d`.
pub fn unit_sphere_volume(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 1.0) * unit_sphere_volume(d - 2),
    }
}

/// `k(k + d − 1) / r²`, the degree-`k` Laplace eigenvalue on `S^d` of radius `r`.
pub fn laplace_eigenvalue(d: usize, k: usize, radius: f64) -> f64 {
    let k = k as f64;
    k * (k + d as f64 - 1.0) / (radius * radius)
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Dimension of the degree-`k` spherical harmonics on `S^d`.
pub fn harmonic_multiplicity(d: usize, k: usize) -> u64 {
    if k < 2 {
        return binomial(k + d, d);
    }
    binomial(k + d, d) - binomial(k + d - 2, d)
}

/// Laplacian of an axisymmetric function `v(θ)` on `S^d` of radius `r`.
///
/// At the poles the first-order term is replaced by its limit `(d−1) v″`.
pub fn axisymmetric_laplacian(d: usize, v: Jet, theta: f64, radius: f64) -> f64 {
    let s = theta.sin();
    let first = if s.abs() < 1e-12 {
        (d as f64 - 1.0) * v.d2
    } else {
        (d as f64 - 1.0) * theta.cos() / s * v.d1
    };
    (v.d2 + first) / (radius * radius)
}
