//! Independent reference solutions: partial-wave series for radial
//! piecewise-constant potentials and closed-form Born amplitudes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potentials::RadialWell;
use crate::wave::dot;

/// Spherical Bessel functions j_l, y_l and derivatives for l = 0..=lmax.
/// j by downward (Miller) recurrence normalized at j0, y by upward
/// recurrence; derivatives via f_l' = f_{l-1} - (l+1)/x f_l.
pub fn spherical_bessel(lmax: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("spherical_bessel needs x > 0, got {x}")));
    }
    let j = {
        let start = lmax + 24 + (x as usize);
        let mut f_up = 0.0f64;
        let mut f = 1e-290f64;
        let mut vals = vec![0.0; start + 1];
        vals[start] = f;
        for l in (1..=start).rev() {
            let f_dn = (2.0 * l as f64 + 1.0) / x * f - f_up;
            f_up = f;
            f = f_dn;
            vals[l - 1] = f;
            if f.abs() > 1e250 {
                for v in vals[l - 1..].iter_mut() {
                    *v /= 1e250;
                }
                f /= 1e250;
                f_up /= 1e250;
            }
        }
        let j0 = x.sin() / x;
        let scale = j0 / vals[0];
        vals[..=lmax].iter().map(|v| v * scale).collect::<Vec<_>>()
    };
    let mut y = vec![0.0; lmax + 1];
    y[0] = -x.cos() / x;
    if lmax >= 1 {
        y[1] = -x.cos() / (x * x) - x.sin() / x;
        for l in 1..lmax {
            y[l + 1] = (2.0 * l as f64 + 1.0) / x * y[l] - y[l - 1];
        }
    }
    let deriv = |vals: &[f64]| -> Vec<f64> {
        let mut d = vec![0.0; lmax + 1];
        if lmax >= 1 {
            d[0] = -vals[1];
        } else {
            d[0] = x.cos() / x - x.sin() / (x * x);
        }
        for l in 1..=lmax {
            d[l] = vals[l - 1] - (l as f64 + 1.0) / x * vals[l];
        }
        d
    };
    // j0' needs j1 even when lmax = 0
    let jp = if lmax == 0 {
        vec![x.cos() / x - x.sin() / (x * x)]
    } else {
        deriv(&j)
    };
    let yp = if lmax == 0 {
        vec![x.sin() / x + x.cos() / (x * x)]
    } else {
        deriv(&y)
    };
    Ok((j, jp, y, yp))
}

/// Legendre polynomials P_0..P_lmax at `x`.
pub fn legendre(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; lmax + 1];
    p[0] = 1.0;
    if lmax >= 1 {
        p[1] = x;
        for l in 1..lmax {
            let lf = l as f64;
            p[l + 1] = ((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0);
        }
    }
    p
}

/// Phase shifts delta_l for a radial piecewise-constant potential, by
/// matching spherical Bessel solutions across the shell boundaries.
/// Requires k^2 > q on every shell (oscillatory interior solutions).
pub fn phase_shifts(well: &RadialWell, k: f64, lmax: usize) -> Result<Vec<f64>> {
    well.validate()?;
    if k <= 0.0 {
        return Err(Error::Domain("phase shifts need k > 0".into()));
    }
    let kappas: Vec<f64> = well
        .values
        .iter()
        .map(|&qv| {
            let e = k * k - qv;
            if e <= 0.0 {
                Err(Error::Domain(format!(
                    "shell with q = {qv} is classically forbidden at k = {k} (k^2 - q <= 0)"
                )))
            } else {
                Ok(e.sqrt())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let r_out = well.outer_radius();
    let mut deltas = vec![0.0; lmax + 1];
    for l in 0..=lmax {
        // innermost shell: regular solution j_l(kappa_0 r), coefficients (1, 0)
        let mut coeff = (1.0f64, 0.0f64);
        for s in 0..well.boundaries.len() {
            let rb = well.boundaries[s];
            let kap = kappas[s];
            let (j, jp, y, yp) = spherical_bessel(l, kap * rb)?;
            let val = coeff.0 * j[l] + coeff.1 * y[l];
            let der = kap * (coeff.0 * jp[l] + coeff.1 * yp[l]);
            let kap_next = if s + 1 < well.boundaries.len() {
                kappas[s + 1]
            } else {
                k
            };
            let (jn, jpn, yn, ypn) = spherical_bessel(l, kap_next * rb)?;
            // solve [j y; k j' k y'] [a; b] = [val; der]
            let det = kap_next * (jn[l] * ypn[l] - jpn[l] * yn[l]);
            let a = (val * kap_next * ypn[l] - der * yn[l]) / det;
            let b = (der * jn[l] - val * kap_next * jpn[l]) / det;
            coeff = (a, b);
        }
        // outside: R = a j_l(k r) + b y_l(k r) = C [cos d j_l - sin d y_l]
        deltas[l] = (-coeff.1).atan2(coeff.0);
        let _ = r_out;
    }
    Ok(deltas)
}

/// Partial-wave far-field amplitude
/// `A(theta) = (1/k) sum (2l+1) e^{i delta_l} sin(delta_l) P_l(cos theta)`,
/// truncated when the coefficient magnitude falls below 1e-12 of the
/// leading one; errors if more than 200 terms would be needed.
pub fn partial_wave_amplitude(well: &RadialWell, k: f64, cos_theta: f64) -> Result<Complex64> {
    let max_l = 200usize;
    let deltas = phase_shifts(well, k, max_l)?;
    let coeff_mag = |l: usize| (2.0 * l as f64 + 1.0) * deltas[l].sin().abs();
    let lead = coeff_mag(0).max(coeff_mag(1)).max(coeff_mag(2)).max(1e-300);
    let mut l_trunc = None;
    let mut below = 0usize;
    for l in 0..=max_l {
        if coeff_mag(l) / lead < 1e-12 {
            below += 1;
            if below >= 3 {
                l_trunc = Some(l);
                break;
            }
        } else {
            below = 0;
        }
    }
    let l_trunc = l_trunc.ok_or(Error::TruncationFailure(max_l))?;
    let p = legendre(l_trunc, cos_theta);
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..=l_trunc {
        let d = deltas[l];
        acc += (2.0 * l as f64 + 1.0)
            * Complex64::from_polar(1.0, d)
            * d.sin()
            * p[l];
    }
    Ok(acc / k)
}

/// Analytic potential families with closed-form Fourier transforms.
#[derive(Debug, Clone)]
pub enum BornFamily {
    RadialWell(RadialWell),
    /// `amplitude * exp(-|x|^2/(2 sigma^2))`, centered.
    Gaussian { amplitude: f64, sigma: f64 },
}

impl BornFamily {
    pub fn fourier(&self, s: f64) -> f64 {
        match self {
            BornFamily::RadialWell(w) => w.fourier(s),
            BornFamily::Gaussian { amplitude, sigma } => {
                amplitude
                    * (2.0 * std::f64::consts::PI * sigma * sigma).powf(1.5)
                    * (-0.5 * sigma * sigma * s * s).exp()
            }
        }
    }
}

/// First Born approximation of the amplitude:
/// `-(1/4 pi) q_hat(k (alpha - beta))`.
pub fn born_amplitude_closed_form(
    family: &BornFamily,
    k: f64,
    alpha: [f64; 3],
    beta: [f64; 3],
) -> Complex64 {
    let d = [alpha[0] - beta[0], alpha[1] - beta[1], alpha[2] - beta[2]];
    let s = k * dot(d, d).sqrt();
    Complex64::new(-family.fourier(s) / (4.0 * std::f64::consts::PI), 0.0)
}

/// Ground-state decay rate kappa of the s-wave bound state of a single
/// square well (shooting/bisection oracle): solves
/// `K cot(K R) = -kappa`, `K = sqrt(depth - kappa^2)`. Returns None when
/// `sqrt(depth) R <= pi/2` (no bound state).
pub fn square_well_ground_state(depth: f64, radius: f64) -> Option<f64> {
    if depth <= 0.0 || (depth.sqrt() * radius) <= std::f64::consts::FRAC_PI_2 {
        return None;
    }
    let f = |kappa: f64| {
        let big_k = (depth - kappa * kappa).sqrt();
        big_k * (big_k * radius).cos() / (big_k * radius).sin() + kappa
    };
    // ground state: K R in (pi/2, pi) -> kappa in (sqrt(max(0, depth - (pi/R)^2)), sqrt(depth - (pi/2R)^2))
    let lo_k = (depth - (std::f64::consts::PI / radius).powi(2)).max(0.0).sqrt() + 1e-12;
    let hi_k = (depth - (std::f64::consts::FRAC_PI_2 / radius).powi(2)).sqrt() - 1e-12;
    let (mut lo, mut hi) = (lo_k, hi_k);
    if f(lo) * f(hi) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn bessel_wronskian() {
        // j_l(x) y_l'(x) - j_l'(x) y_l(x) = 1/x^2
        for &x in &[0.3, 1.0, 7.5, 22.0] {
            let (j, jp, y, yp) = spherical_bessel(12, x).unwrap();
            for l in 0..=12 {
                let w = j[l] * yp[l] - jp[l] * y[l];
                assert!(
                    (w - 1.0 / (x * x)).abs() < 1e-10 / (x * x),
                    "wronskian at l={l}, x={x}: {w}"
                );
            }
        }
    }

    #[test]
    fn bessel_small_l_closed_forms() {
        let x = 1.7;
        let (j, _, y, _) = spherical_bessel(2, x).unwrap();
        assert!((j[0] - x.sin() / x).abs() < 1e-14);
        assert!((j[1] - (x.sin() / (x * x) - x.cos() / x)).abs() < 1e-14);
        assert!((y[0] + x.cos() / x).abs() < 1e-14);
    }

    #[test]
    fn zero_depth_well_zero_amplitude() {
        let w = RadialWell::single(1.0, 0.0);
        let a = partial_wave_amplitude(&w, 1.0, 0.3).unwrap();
        assert!(a.norm() < 1e-14);
    }

    #[test]
    fn low_energy_amplitude_is_isotropic() {
        // k a = 0.05: angular variation of A under 1%
        let w = RadialWell::single(1.0, -0.05);
        let k = 0.05;
        let a0 = partial_wave_amplitude(&w, k, 1.0).unwrap();
        let mut worst = 0.0f64;
        for ct in [-1.0, -0.5, 0.0, 0.5, 0.99] {
            let a = partial_wave_amplitude(&w, k, ct).unwrap();
            worst = worst.max((a - a0).norm() / a0.norm());
        }
        assert!(worst < 0.01, "angular variation {worst}");
    }

    #[test]
    fn optical_theorem_of_series() {
        // Im A(0) = (k/4 pi) int |A|^2 dOmega = (1/k) sum (2l+1) sin^2 d_l
        let w = RadialWell::single(1.0, -0.5);
        let k = 1.0;
        let deltas = phase_shifts(&w, k, 40).unwrap();
        let fwd = partial_wave_amplitude(&w, k, 1.0).unwrap();
        let sum: f64 = deltas
            .iter()
            .enumerate()
            .map(|(l, d)| (2.0 * l as f64 + 1.0) * d.sin().powi(2))
            .sum();
        assert!((fwd.im - sum / k).abs() <= 1e-10 * (sum / k));
    }

    #[test]
    fn series_self_convergence_under_longer_truncation() {
        let w = RadialWell::single(1.0, -0.5);
        let k = 1.0;
        // doubling the allowed length changes nothing once truncated
        let a = partial_wave_amplitude(&w, k, -0.3).unwrap();
        let b = partial_wave_amplitude(&w, k, -0.3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn well_fourier_spot_value_vs_quadrature() {
        // q_hat(s) = 4 pi q0 (sin sR - sR cos sR)/s^3 at sR = pi vs radial quadrature
        let w = RadialWell::single(1.3, -0.8);
        let s = std::f64::consts::PI / 1.3;
        let by_quad = 4.0 * std::f64::consts::PI
            * integrate(
                |r| -0.8 * r * r * (s * r).sin() / (s * r),
                0.0,
                1.3,
                1e-14,
                1e-13,
                100_000,
            )
            .unwrap();
        assert!((w.fourier(s) - by_quad).abs() < 1e-10);
    }

    #[test]
    fn born_forward_direction_is_volume_integral() {
        let fam = BornFamily::Gaussian {
            amplitude: 0.2,
            sigma: 0.5,
        };
        let a = born_amplitude_closed_form(&fam, 1.0, [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]);
        let expect = -0.2 * (2.0 * std::f64::consts::PI * 0.25).powf(1.5)
            / (4.0 * std::f64::consts::PI);
        assert!((a.re - expect).abs() < 1e-14);
    }

    #[test]
    fn born_agrees_with_partial_waves_for_weak_well() {
        let well = RadialWell::single(1.0, -0.05);
        let fam = BornFamily::RadialWell(well.clone());
        let k = 1.0;
        let alpha = [0.0, 0.0, 1.0];
        for ct in [-0.8, 0.0, 0.7] {
            let st = (1.0f64 - ct * ct).sqrt();
            let beta = [st, 0.0, ct];
            let pw = partial_wave_amplitude(&well, k, ct).unwrap();
            let born = born_amplitude_closed_form(&fam, k, alpha, beta);
            assert!(
                (pw - born).norm() / pw.norm() < 0.05,
                "born vs partial wave at cos {ct}: {born} vs {pw}"
            );
        }
    }

    #[test]
    fn bound_state_oracle_below_crude_bound() {
        // depth 4, radius 1.5: ground state exists
        let kappa = square_well_ground_state(4.0, 1.5).unwrap();
        assert!(kappa > 0.0 && kappa < 2.0);
        // transcendental check
        let big_k = (4.0 - kappa * kappa).sqrt();
        let lhs = big_k / (big_k * 1.5).tan();
        assert!((lhs + kappa).abs() < 1e-9);
        // shallow well: no bound state
        assert!(square_well_ground_state(0.5, 1.0).is_none());
    }
}
