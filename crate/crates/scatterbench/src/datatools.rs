//! Noise modeling and the tail/compactness calculus.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::dataset::FarFieldDataset;
use crate::error::{Error, Result};

/// Add a bounded complex perturbation to each record: modulus uniform in
/// `[0, delta]`, phase uniform in `[0, 2 pi)`. Deterministic under `seed`;
/// the sup-norm model matches data given as `sup |A_delta - A| < delta`.
pub fn add_noise(dataset: &FarFieldDataset, delta: f64, seed: u64) -> Result<FarFieldDataset> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("delta must be >= 0, got {delta}")));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = dataset.clone();
    if delta == 0.0 {
        return Ok(out);
    }
    for r in out.records.iter_mut() {
        let rho: f64 = rng.gen_range(0.0..=delta);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        r.amplitude_re += rho * phi.cos();
        r.amplitude_im += rho * phi.sin();
    }
    Ok(out)
}

/// Order-of-magnitude contribution of the potential tail beyond radius `R`
/// for a `(1+|x|)^{-gamma}` decay class: `R^{3-gamma}` (unit constant by
/// convention).
pub fn tail_contribution(gamma: f64, radius: f64) -> Result<f64> {
    if gamma <= 3.0 {
        return Err(Error::Domain(format!("gamma must exceed 3, got {gamma}")));
    }
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("R must be positive, got {radius}")));
    }
    Ok(radius.powf(3.0 - gamma))
}

/// Radius beyond which the tail contribution drops below the noise level:
/// `delta^{1/(3-gamma)}`. Exact algebraic inverse of [`tail_contribution`].
pub fn radius_of_compactness(delta: f64, gamma: f64) -> Result<f64> {
    if gamma <= 3.0 {
        return Err(Error::Domain(format!("gamma must exceed 3, got {gamma}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must be in (0, 1), got {delta}")));
    }
    Ok(delta.powf(1.0 / (3.0 - gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{DatasetKind, FarFieldRecord};
    use num_complex::Complex64;

    fn sample_dataset(n: usize) -> FarFieldDataset {
        let records = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                FarFieldRecord::new(
                    [0.0, 0.0, -1.0],
                    [0.0, 0.0, 1.0],
                    0.5 + t,
                    0.0,
                    Complex64::new(0.1 * t, -0.05),
                )
            })
            .collect();
        FarFieldDataset::new(DatasetKind::Backscatter, records).unwrap()
    }

    #[test]
    fn zero_delta_is_identity() {
        let ds = sample_dataset(20);
        let noisy = add_noise(&ds, 0.0, 7).unwrap();
        assert_eq!(ds, noisy);
    }

    #[test]
    fn same_seed_bit_identical() {
        let ds = sample_dataset(50);
        let a = add_noise(&ds, 1e-3, 123).unwrap();
        let b = add_noise(&ds, 1e-3, 123).unwrap();
        assert_eq!(a, b);
        let c = add_noise(&ds, 1e-3, 124).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sup_deviation_within_bounds() {
        let ds = sample_dataset(150);
        let noisy = add_noise(&ds, 1e-2, 99).unwrap();
        let sup = ds.max_amplitude_deviation(&noisy).unwrap();
        assert!(sup <= 1e-2 + 1e-15, "sup {sup}");
        assert!(sup >= 0.5e-2, "sup {sup} suspiciously small over 150 records");
        // kind and count preserved
        assert_eq!(noisy.kind, ds.kind);
        assert_eq!(noisy.len(), ds.len());
    }

    #[test]
    fn tail_calculus_values() {
        assert!((tail_contribution(4.0, 100.0).unwrap() - 1e-2).abs() < 1e-16);
        assert!((tail_contribution(5.0, 10.0).unwrap() - 1e-2).abs() < 1e-16);
        assert!((radius_of_compactness(1e-2, 4.0).unwrap() - 100.0).abs() < 1e-12);
        let r = radius_of_compactness(1e-3, 5.0).unwrap();
        assert!((r - 1000.0f64.sqrt()).abs() < 1e-10);
        assert!(tail_contribution(3.0, 1.0).is_err());
        assert!(radius_of_compactness(1.5, 4.0).is_err());
    }

    #[test]
    fn tail_of_radius_recovers_delta_exactly() {
        for &delta in &[1e-1, 1e-2, 1e-3, 1e-4] {
            for &gamma in &[4.0, 5.0] {
                let r = radius_of_compactness(delta, gamma).unwrap();
                let t = tail_contribution(gamma, r).unwrap();
                assert_eq!(t, delta, "delta={delta}, gamma={gamma}: got {t}");
            }
        }
    }

    #[test]
    fn radius_monotonicity_grid() {
        let deltas = [1e-1, 1e-2, 1e-3, 1e-4];
        let gammas = [3.5, 4.0, 4.5, 5.0, 6.0];
        for &g in &gammas {
            for w in deltas.windows(2) {
                let r0 = radius_of_compactness(w[0], g).unwrap();
                let r1 = radius_of_compactness(w[1], g).unwrap();
                assert!(r1 > r0, "R should grow as delta shrinks");
            }
        }
        for &d in &deltas {
            for w in gammas.windows(2) {
                let r0 = radius_of_compactness(d, w[0]).unwrap();
                let r1 = radius_of_compactness(d, w[1]).unwrap();
                assert!(r1 < r0, "R should shrink as gamma grows");
            }
        }
    }
}
