//! Restarted GMRES for complex non-Hermitian operators given as closures.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct GmresConfig {
    /// Relative-residual convergence target.
    pub tol: f64,
    /// Total matvec budget.
    pub max_iter: usize,
    /// Krylov subspace dimension before restart.
    pub restart: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 400,
            restart: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// Final true relative residual ||b - A x|| / ||b||.
    pub residual: f64,
    pub converged: bool,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Solve `A x = b` with restarted GMRES and modified Gram-Schmidt.
/// `x0` seeds the iteration (defaults to zero).
pub fn gmres<F>(apply: F, b: &[Complex64], x0: Option<&[Complex64]>, cfg: &GmresConfig) -> GmresOutcome
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); n]);
    if bnorm == 0.0 {
        return GmresOutcome {
            x: vec![Complex64::new(0.0, 0.0); n],
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let restart = cfg.restart.max(1);
    let mut total_iters = 0usize;

    loop {
        // residual of the current iterate
        let ax = apply(&x);
        let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let rnorm = norm(&r);
        if rnorm / bnorm <= cfg.tol || total_iters >= cfg.max_iter {
            return GmresOutcome {
                x,
                iterations: total_iters,
                residual: rnorm / bnorm,
                converged: rnorm / bnorm <= cfg.tol,
            };
        }

        // Arnoldi with Givens-rotated Hessenberg
        let m = restart;
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        for ri in r.iter_mut() {
            *ri /= Complex64::new(rnorm, 0.0);
        }
        basis.push(r);
        let mut h = vec![vec![Complex64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![Complex64::new(0.0, 0.0); m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(rnorm, 0.0);
        let mut cols = 0usize;

        for j in 0..m {
            if total_iters >= cfg.max_iter {
                break;
            }
            let mut w = apply(&basis[j]);
            total_iters += 1;
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot_conj(vi, &w);
                h[i][j] = hij;
                axpy(&mut w, -hij, vi);
            }
            let wnorm = norm(&w);
            h[j + 1][j] = Complex64::new(wnorm, 0.0);

            // apply accumulated rotations to the new column
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i].conj() * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            // new rotation zeroing h[j+1][j]
            let (c, s) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = c * h[j][j] + s * h[j + 1][j];
            h[j + 1][j] = Complex64::new(0.0, 0.0);
            g[j + 1] = -s.conj() * g[j];
            g[j] = c * g[j];
            cols = j + 1;

            let happy = wnorm < 1e-14 * bnorm;
            if !happy {
                for wi in w.iter_mut() {
                    *wi /= Complex64::new(wnorm, 0.0);
                }
                basis.push(w);
            }
            if g[j + 1].norm() / bnorm <= cfg.tol || happy {
                break;
            }
        }

        // back substitution on the cols x cols triangular system
        let mut y = vec![Complex64::new(0.0, 0.0); cols];
        for i in (0..cols).rev() {
            let mut s = g[i];
            for jj in (i + 1)..cols {
                s -= h[i][jj] * y[jj];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            axpy(&mut x, *yj, &basis[j]);
        }
    }
}

fn givens(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    if b.norm() == 0.0 {
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    }
    let t = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = Complex64::new(a.norm() / t, 0.0);
    let s = (a / a.norm()) * b.conj() / t;
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_dense_complex_system() {
        // fixed 4x4 diagonally dominant complex matrix
        let n = 4;
        let a: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Complex64::new(4.0 + i as f64, 1.0)
                        } else {
                            Complex64::new(0.3 * (i as f64 - j as f64), 0.2 * (i + j) as f64 * 0.1)
                        }
                    })
                    .collect()
            })
            .collect();
        let xtrue: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + i as f64, -0.5 * i as f64))
            .collect();
        let b: Vec<Complex64> = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * xtrue[j]).sum())
            .collect();
        let apply = |v: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|i| (0..n).map(|j| a[i][j] * v[j]).sum())
                .collect()
        };
        let out = gmres(apply, &b, None, &GmresConfig::default());
        assert!(out.converged);
        for (xi, ti) in out.x.iter().zip(&xtrue) {
            assert!((xi - ti).norm() < 1e-7);
        }
    }

    #[test]
    fn identity_converges_instantly_from_exact_guess() {
        let b = vec![Complex64::new(1.0, 0.0); 10];
        let out = gmres(|v| v.to_vec(), &b, Some(&b), &GmresConfig::default());
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn restart_path_still_converges() {
        // 40-dim shifted circulant-ish operator forcing several restarts
        let n = 40;
        let apply = |v: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|i| {
                    let prev = v[(i + n - 1) % n];
                    let next = v[(i + 1) % n];
                    Complex64::new(3.0, 0.5) * v[i] + 0.9 * prev - 0.4 * next
                })
                .collect()
        };
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new((i as f64).sin(), 0.2)).collect();
        let cfg = GmresConfig {
            tol: 1e-10,
            max_iter: 400,
            restart: 5,
        };
        let out = gmres(apply, &b, None, &cfg);
        assert!(out.converged, "residual {}", out.residual);
    }
}
