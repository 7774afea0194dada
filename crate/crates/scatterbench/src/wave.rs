//! Wave parameters and unit-sphere sampling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Incident-wave parameters: real wavenumber `k`, imaginary shift `eta`
/// (the solver works at complex wavenumber `k + i*eta`), and the incident
/// direction `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub k: f64,
    pub eta: f64,
    pub alpha: [f64; 3],
}

impl WaveParams {
    pub fn new(k: f64, eta: f64, alpha: [f64; 3]) -> Result<Self> {
        if !(k.is_finite() && eta.is_finite()) || k < 0.0 || eta < 0.0 {
            return Err(Error::InvalidWave(format!(
                "k and eta must be finite and nonnegative (k={k}, eta={eta})"
            )));
        }
        if k == 0.0 && eta == 0.0 {
            return Err(Error::InvalidWave("(k, eta) must not be (0, 0)".into()));
        }
        let norm = dot(alpha, alpha).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWave(format!(
                "alpha must be a unit vector, |alpha| = {norm:.15}"
            )));
        }
        Ok(Self { k, eta, alpha })
    }

    /// Complex wavenumber `k + i*eta`.
    pub fn ktilde(&self) -> Complex64 {
        Complex64::new(self.k, self.eta)
    }

    pub fn with_alpha(&self, alpha: [f64; 3]) -> Result<Self> {
        Self::new(self.k, self.eta, alpha)
    }
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn neg(a: [f64; 3]) -> [f64; 3] {
    [-a[0], -a[1], -a[2]]
}

pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: [f64; 3]) -> Result<[f64; 3]> {
    let n = norm(a);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::Domain("cannot normalize zero/non-finite vector".into()));
    }
    Ok([a[0] / n, a[1] / n, a[2] / n])
}

pub fn is_unit(a: [f64; 3], tol: f64) -> bool {
    (norm(a) - 1.0).abs() <= tol
}

/// Near-uniform Fibonacci point set on the unit sphere. No pole clustering,
/// deterministic, any count.
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    (0..count)
        .map(|i| {
            let fi = i as f64 + 0.5;
            let z = 1.0 - 2.0 * fi / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * std::f64::consts::PI * fi * golden;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Equal-weight quadrature over the unit sphere built on the Fibonacci set:
/// returns (points, weight) with weight = 4*pi/count.
pub fn sphere_quadrature(count: usize) -> (Vec<[f64; 3]>, f64) {
    let w = 4.0 * std::f64::consts::PI / count as f64;
    (fibonacci_sphere(count), w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_validation() {
        assert!(WaveParams::new(1.0, 0.0, [0.0, 0.0, 1.0]).is_ok());
        assert!(WaveParams::new(0.0, 0.0, [0.0, 0.0, 1.0]).is_err());
        assert!(WaveParams::new(1.0, 0.0, [0.0, 0.0, 1.1]).is_err());
        assert!(WaveParams::new(-1.0, 0.0, [0.0, 0.0, 1.0]).is_err());
        // eta-only is allowed (purely imaginary wavenumber)
        assert!(WaveParams::new(0.0, 2.0, [1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn fibonacci_points_are_unit() {
        for p in fibonacci_sphere(257) {
            assert!((norm(p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_quadrature_integrates_low_order_exactly() {
        // integral of z^2 over S^2 is 4*pi/3
        let (pts, w) = sphere_quadrature(2000);
        let s: f64 = pts.iter().map(|p| p[2] * p[2]).sum::<f64>() * w;
        assert!((s - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-3);
    }
}
