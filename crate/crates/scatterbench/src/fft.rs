//! 3D FFT helpers on `ndarray::Array3<Complex64>` with a process-wide plan
//! cache. Transforms are unnormalized, matching rustfft.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{Array3, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

fn plan(len: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (len, matches!(dir, FftDirection::Forward));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(len, dir))
        .clone()
}

/// In-place 3D FFT, applied axis by axis. `Forward` uses `e^{-2 pi i jm/n}`,
/// `Inverse` uses `e^{+2 pi i jm/n}`; neither is normalized.
pub fn fft3_inplace(data: &mut Array3<Complex64>, dir: FftDirection) {
    let dims = [data.dim().0, data.dim().1, data.dim().2];
    for (axis, &len) in dims.iter().enumerate() {
        let fft = plan(len, dir);
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        for mut lane in data.lanes_mut(Axis(axis)) {
            if let Some(slice) = lane.as_slice_mut() {
                fft.process_with_scratch(slice, &mut scratch);
            } else {
                for (dst, src) in line.iter_mut().zip(lane.iter()) {
                    *dst = *src;
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (dst, src) in lane.iter_mut().zip(line.iter()) {
                    *dst = *src;
                }
            }
        }
    }
}

/// Zero-pad `src` (n^3) into the corner of an m^3 array.
pub fn pad_corner(src: &Array3<Complex64>, m: usize) -> Array3<Complex64> {
    let n = src.dim().0;
    assert!(m >= n);
    let mut out = Array3::zeros((m, m, m));
    out.slice_mut(ndarray::s![..n, ..n, ..n]).assign(src);
    out
}

/// Extract the n^3 corner block of an m^3 array.
pub fn crop_corner(src: &Array3<Complex64>, n: usize) -> Array3<Complex64> {
    src.slice(ndarray::s![..n, ..n, ..n]).to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let n = 12;
        let mut a: Array3<Complex64> = Array3::from_shape_fn((n, n, n), |(i, j, k)| {
            Complex64::new((i * 7 + j * 3 + k) as f64, (i + j + k) as f64 * 0.1)
        });
        let orig = a.clone();
        fft3_inplace(&mut a, FftDirection::Forward);
        fft3_inplace(&mut a, FftDirection::Inverse);
        let scale = (n * n * n) as f64;
        for (x, y) in a.iter().zip(orig.iter()) {
            assert!((x / scale - y).norm() < 1e-12);
        }
    }

    #[test]
    fn forward_matches_dft_definition() {
        let n = 8;
        let mut a: Array3<Complex64> = Array3::zeros((n, n, n));
        a[[1, 0, 0]] = Complex64::new(1.0, 0.0);
        fft3_inplace(&mut a, FftDirection::Forward);
        // DFT of delta at j=(1,0,0): e^{-2 pi i m1/n}
        let m = 3;
        let expect = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * m as f64 / n as f64);
        assert!((a[[m, 0, 0]] - expect).norm() < 1e-12);
    }
}
