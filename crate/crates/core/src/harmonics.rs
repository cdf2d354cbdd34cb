//! Zonal spherical harmonics on `S^d` via Gegenbauer polynomials.

use crate::profile::Jet;

/// `C_k^λ(x)` by the three-term recurrence.
pub fn gegenbauer(k: usize, lambda: f64, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0 * lambda * x,
        _ => {
            let (mut prev, mut cur) = (1.0, 2.0 * lambda * x);
            for j in 2..=k {
                let jf = j as f64;
                let next =
                    (2.0 * x * (jf + lambda - 1.0) * cur - (jf + 2.0 * lambda - 2.0) * prev) / jf;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Degree-`k` zonal harmonic `Y_k(θ) = C_k^{(d−1)/2}(cos θ)` on `S^d` with
/// its first two θ-derivatives.
pub fn zonal(d: usize, k: usize, theta: f64) -> Jet {
    let lambda = 0.5 * (d as f64 - 1.0);
    let (s, c) = theta.sin_cos();
    let value = gegenbauer(k, lambda, c);
    let dc = if k >= 1 {
        2.0 * lambda * gegenbauer(k - 1, lambda + 1.0, c)
    } else {
        0.0
    };
    let ddc = if k >= 2 {
        4.0 * lambda * (lambda + 1.0) * gegenbauer(k - 2, lambda + 2.0, c)
    } else {
        0.0
    };
    Jet::new(value, -s * dc, s * s * ddc - c * dc)
}

/// `Σ_k coeffs[k−1] Y_k(θ)`, `k = 1..=coeffs.len()`; zero mean on `S^d`.
pub fn zonal_series(d: usize, coeffs: &[f64], theta: f64) -> Jet {
    coeffs
        .iter()
        .enumerate()
        .fold(Jet::constant(0.0), |acc, (i, c)| {
            acc.axpy(*c, zonal(d, i + 1, theta))
        })
}
