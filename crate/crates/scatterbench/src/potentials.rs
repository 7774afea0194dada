//! Synthetic potential factories.

use ndarray::Array3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid3, PotentialGrid};
use crate::spectral::grid_ift;
use crate::wave::dot;

/// Infinitely smooth compactly supported bump:
/// `q(x) = amplitude * exp(1 - 1/(1 - |x-center|^2/radius^2))` inside the
/// ball, zero outside. Value at the center is exactly `amplitude`.
pub fn make_bump_potential(
    grid: Grid3,
    center: [f64; 3],
    radius: f64,
    amplitude: f64,
    smoothness_l: u32,
) -> Result<PotentialGrid> {
    if !(radius > 0.0 && radius.is_finite() && amplitude.is_finite()) {
        return Err(Error::Domain(format!(
            "bump needs finite amplitude and positive radius (radius={radius})"
        )));
    }
    check_ball_inside(grid, center, radius)?;
    let axis = grid.axis();
    let n = grid.n();
    let mut values = Array3::zeros((n, n, n));
    for ((i, j, k), v) in values.indexed_iter_mut() {
        let d = [axis[i] - center[0], axis[j] - center[1], axis[k] - center[2]];
        let rho2 = dot(d, d) / (radius * radius);
        if rho2 < 1.0 {
            *v = amplitude * (1.0 - 1.0 / (1.0 - rho2)).exp();
        }
    }
    PotentialGrid::new(grid, values, smoothness_l)
}

/// Truncated Gaussian `amplitude * exp(-|x-center|^2/(2 sigma^2))`,
/// hard-zeroed outside the largest ball the padding rule allows. Choose
/// `sigma` small enough that the truncated tail is at roundoff if exact
/// smoothness matters.
pub fn make_gaussian_potential(
    grid: Grid3,
    center: [f64; 3],
    sigma: f64,
    amplitude: f64,
    smoothness_l: u32,
) -> Result<PotentialGrid> {
    if !(sigma > 0.0 && sigma.is_finite() && amplitude.is_finite()) {
        return Err(Error::Domain("gaussian needs positive sigma".into()));
    }
    let h = grid.spacing();
    let a = grid.half_width();
    let cut = center
        .iter()
        .map(|c| a - 2.0 * h - c.abs())
        .fold(f64::INFINITY, f64::min);
    if cut <= 3.0 * sigma {
        return Err(Error::SupportExceedsBox(format!(
            "gaussian with sigma {sigma} does not fit the padding rule (cut radius {cut:.3})"
        )));
    }
    let axis = grid.axis();
    let n = grid.n();
    let mut values = Array3::zeros((n, n, n));
    for ((i, j, k), v) in values.indexed_iter_mut() {
        let d = [axis[i] - center[0], axis[j] - center[1], axis[k] - center[2]];
        let r2 = dot(d, d);
        if r2 < cut * cut {
            *v = amplitude * (-r2 / (2.0 * sigma * sigma)).exp();
        }
    }
    PotentialGrid::new(grid, values, smoothness_l)
}

/// Radial piecewise-constant potential: value `values[s]` on the shell
/// `boundaries[s-1] <= r < boundaries[s]` (with `boundaries[-1] = 0`),
/// zero beyond the last boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialWell {
    pub boundaries: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialWell {
    /// Single well of given (signed) potential value and radius. A bound
    /// well ("depth" d) has `value = -d`.
    pub fn single(radius: f64, value: f64) -> Self {
        Self {
            boundaries: vec![radius],
            values: vec![value],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.boundaries.is_empty()
            || self.boundaries.len() != self.values.len()
            || self.boundaries.len() > 4
        {
            return Err(Error::Domain(
                "radial well needs 1..=4 shells with matching boundaries".into(),
            ));
        }
        let mut prev = 0.0;
        for &b in &self.boundaries {
            if !(b > prev && b.is_finite()) {
                return Err(Error::Domain("shell boundaries must increase".into()));
            }
            prev = b;
        }
        Ok(())
    }

    pub fn outer_radius(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    pub fn value_at(&self, r: f64) -> f64 {
        for (b, v) in self.boundaries.iter().zip(&self.values) {
            if r < *b {
                return *v;
            }
        }
        0.0
    }

    /// Closed-form radial Fourier transform
    /// `q_hat(s) = 4 pi sum_s q_s [F(s r_out) - F(s r_in)]/s^3`,
    /// `F(u) = sin u - u cos u`.
    pub fn fourier(&self, s: f64) -> f64 {
        if s.abs() < 1e-8 {
            // -> (4 pi /3) sum q_s (r_out^3 - r_in^3)
            let mut acc = 0.0;
            let mut prev: f64 = 0.0;
            for (b, v) in self.boundaries.iter().zip(&self.values) {
                acc += v * (b.powi(3) - prev.powi(3));
                prev = *b;
            }
            return 4.0 * std::f64::consts::PI / 3.0 * acc;
        }
        let f = |u: f64| u.sin() - u * u.cos();
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (b, v) in self.boundaries.iter().zip(&self.values) {
            acc += v * (f(s * b) - f(s * prev));
            prev = *b;
        }
        4.0 * std::f64::consts::PI * acc / s.powi(3)
    }
}

/// Band-limited grid representation of a radial piecewise-constant well:
/// exact Fourier samples of the sharp profile on the dual grid, inverted to
/// nodal values, with the outer two shells zeroed to restore exact compact
/// support. Far more accurate for scattering than nodal sampling of the
/// discontinuity.
pub fn make_radial_well_potential(
    grid: Grid3,
    well: &RadialWell,
    smoothness_l: u32,
) -> Result<PotentialGrid> {
    well.validate()?;
    check_ball_inside(grid, [0.0; 3], well.outer_radius())?;
    let n = grid.n();
    let mut hat = Array3::zeros((n, n, n));
    for ((i, j, k), v) in hat.indexed_iter_mut() {
        let xi = [grid.xi(i), grid.xi(j), grid.xi(k)];
        *v = Complex64::new(well.fourier(dot(xi, xi).sqrt()), 0.0);
    }
    let spatial = grid_ift(&hat, grid);
    let mut values = spatial.mapv(|z| z.re);
    // hard compact support: zero the outer two node shells
    for ((i, j, k), v) in values.indexed_iter_mut() {
        if [i, j, k].iter().any(|&c| c < 2 || c >= n - 2) {
            *v = 0.0;
        }
    }
    PotentialGrid::new(grid, values, smoothness_l)
}

/// Power-law profile `amplitude * (1 + |x|)^{-gamma}` truncated at
/// `truncation_radius` (used by the tail-calculus experiments).
pub fn make_truncated_power_law(
    grid: Grid3,
    gamma: f64,
    amplitude: f64,
    truncation_radius: f64,
    smoothness_l: u32,
) -> Result<PotentialGrid> {
    if gamma <= 3.0 {
        return Err(Error::Domain(format!("gamma must exceed 3, got {gamma}")));
    }
    check_ball_inside(grid, [0.0; 3], truncation_radius)?;
    let axis = grid.axis();
    let n = grid.n();
    let mut values = Array3::zeros((n, n, n));
    for ((i, j, k), v) in values.indexed_iter_mut() {
        let r = dot(
            [axis[i], axis[j], axis[k]],
            [axis[i], axis[j], axis[k]],
        )
        .sqrt();
        if r < truncation_radius {
            *v = amplitude * (1.0 + r).powf(-gamma);
        }
    }
    PotentialGrid::new(grid, values, smoothness_l)
}

fn check_ball_inside(grid: Grid3, center: [f64; 3], radius: f64) -> Result<()> {
    let h = grid.spacing();
    let a = grid.half_width();
    for c in center {
        if c.abs() + radius > a - 2.0 * h {
            return Err(Error::SupportExceedsBox(format!(
                "ball (|center| {:.3}, radius {radius:.3}) reaches within two cells of the box edge (a = {a}, h = {h:.3})",
                center.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_bump_is_zero() {
        let g = Grid3::new(3.0, 16).unwrap();
        let q = make_bump_potential(g, [0.0; 3], 1.0, 0.0, 3).unwrap();
        assert_eq!(q.linf_norm(), 0.0);
    }

    #[test]
    fn bump_center_value_is_amplitude() {
        let g = Grid3::new(3.0, 32).unwrap();
        let q = make_bump_potential(g, [0.0; 3], 1.0, 1.0, 3).unwrap();
        let n = g.n();
        // origin is the node n/2 on each axis
        assert_eq!(q.values()[[n / 2, n / 2, n / 2]], 1.0);
    }

    #[test]
    fn bump_support_check() {
        let g = Grid3::new(3.0, 16).unwrap();
        assert!(make_bump_potential(g, [0.0; 3], 2.9, 1.0, 3).is_err());
        assert!(make_bump_potential(g, [2.0, 0.0, 0.0], 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn centered_bump_is_even_on_grid() {
        let g = Grid3::new(3.0, 16).unwrap();
        let q = make_bump_potential(g, [0.0; 3], 1.2, 0.8, 3).unwrap();
        let n = g.n();
        for ((i, j, k), v) in q.values().indexed_iter() {
            if i == 0 || j == 0 || k == 0 {
                continue;
            }
            let m = q.values()[[n - i, n - j, n - k]];
            assert_eq!(*v, m, "evenness at ({i},{j},{k})");
        }
    }

    #[test]
    fn well_fourier_dc_matches_volume() {
        let w = RadialWell::single(1.0, -0.5);
        let expect = -0.5 * 4.0 * std::f64::consts::PI / 3.0;
        assert!((w.fourier(0.0) - expect).abs() < 1e-12);
        // spot value identity at |xi| R = pi: q_hat = 4 pi q0 (sin pi - pi cos pi)/ s^3
        let s = std::f64::consts::PI;
        let expect_pi = 4.0 * std::f64::consts::PI * (-0.5) * (0.0 + s) / s.powi(3);
        assert!((w.fourier(s) - expect_pi).abs() < 1e-10);
    }

    #[test]
    fn bandlimited_well_integral_close_to_exact() {
        let g = Grid3::new(3.0, 32).unwrap();
        let w = RadialWell::single(1.0, -0.5);
        let q = make_radial_well_potential(g, &w, 0).unwrap();
        let exact = -0.5 * 4.0 * std::f64::consts::PI / 3.0;
        assert!(
            (q.integral() - exact).abs() / exact.abs() < 2e-2,
            "integral {} vs {}",
            q.integral(),
            exact
        );
    }

    #[test]
    fn power_law_gamma_validation() {
        let g = Grid3::new(3.0, 16).unwrap();
        assert!(make_truncated_power_law(g, 2.5, 1.0, 1.0, 3).is_err());
        assert!(make_truncated_power_law(g, 4.0, 1e-3, 1.0, 3).is_ok());
    }
}
