//! Born inversion from backscattering data and the contraction-structured
//! fixed-point refinement; uniqueness experiments at desk scale.

use ndarray::Array3;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dataset::{DatasetKind, FarFieldDataset};
use crate::error::{Error, Result};
use crate::farfield::backscattering_dataset;
use crate::forward::LsOperator;
use crate::grid::{Grid3, PotentialGrid};
use crate::spectral::grid_ift;
use crate::wave::{dot, WaveParams};

const I: Complex64 = Complex64::new(0.0, 1.0);
const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Reconstruction target: grid plus the declared support ball used by the
/// support projection.
#[derive(Debug, Clone, Copy)]
pub struct ReconSpec {
    pub grid: Grid3,
    pub support_radius: f64,
    pub smoothness_l: u32,
}

impl ReconSpec {
    pub fn new(grid: Grid3, support_radius: f64, smoothness_l: u32) -> Result<Self> {
        if support_radius > grid.half_width() - 2.0 * grid.spacing() {
            return Err(Error::SupportExceedsBox(format!(
                "declared support radius {support_radius} reaches the padding shell"
            )));
        }
        Ok(Self {
            grid,
            support_radius,
            smoothness_l,
        })
    }
}

// scatter one sample to its 8 surrounding dual-grid nodes with trilinear
// weights
fn deposit(
    vals: &mut Array3<Complex64>,
    wts: &mut Array3<f64>,
    grid: Grid3,
    xi: [f64; 3],
    value: Complex64,
) {
    let n = grid.n() as isize;
    let dxi = grid.dual_spacing();
    let f: Vec<f64> = xi.iter().map(|&c| c / dxi + n as f64 / 2.0).collect();
    let i0: Vec<isize> = f.iter().map(|&c| c.floor() as isize).collect();
    let fr: Vec<f64> = f.iter().zip(&i0).map(|(&c, &i)| c - i as f64).collect();
    for d1 in 0..2isize {
        for d2 in 0..2isize {
            for d3 in 0..2isize {
                let idx = [i0[0] + d1, i0[1] + d2, i0[2] + d3];
                if idx.iter().any(|&c| c < 0 || c >= n) {
                    continue;
                }
                let w = (if d1 == 1 { fr[0] } else { 1.0 - fr[0] })
                    * (if d2 == 1 { fr[1] } else { 1.0 - fr[1] })
                    * (if d3 == 1 { fr[2] } else { 1.0 - fr[2] });
                let u = [idx[0] as usize, idx[1] as usize, idx[2] as usize];
                vals[u] += w * value;
                wts[u] += w;
            }
        }
    }
}

/// Assemble a potential from per-sample values of `q_hat(2 k beta)`:
/// trilinear deposit with weighted averaging, inverse-distance fill of
/// uncovered nodes inside the data ball, inverse transform, real part,
/// support projection. Shared by the Born inversion and each refinement
/// pass.
fn assemble_from_samples(
    spec: &ReconSpec,
    samples: &[([f64; 3], Complex64)],
    k_max: f64,
) -> Result<PotentialGrid> {
    let grid = spec.grid;
    let n = grid.n();
    let dxi = grid.dual_spacing();
    let mut vals = Array3::zeros((n, n, n));
    let mut wts = Array3::zeros((n, n, n));
    for (xi, v) in samples {
        deposit(&mut vals, &mut wts, grid, *xi, *v);
    }
    // weighted average on covered nodes
    let mut qhat: Array3<Complex64> = Array3::zeros((n, n, n));
    for ((i, j, kk), w) in wts.indexed_iter() {
        if *w > 0.0 {
            qhat[[i, j, kk]] = vals[[i, j, kk]] / *w;
        }
    }
    // coverage check inside the data ball (clipped to the Nyquist ball):
    // a node counts as covered if a sample landed within one cell
    // circumradius; with trilinear deposit that is exactly "received any
    // deposit weight"
    let ball_r = (2.0 * k_max).min(grid.nyquist());
    let mut ball_nodes = 0usize;
    let mut uncovered = Vec::new();
    for ((i, j, kk), w) in wts.indexed_iter() {
        let xi = [grid.xi(i), grid.xi(j), grid.xi(kk)];
        if dot(xi, xi).sqrt() <= ball_r {
            ball_nodes += 1;
            if *w == 0.0 {
                uncovered.push((i, j, kk));
            }
        }
    }
    if ball_nodes > 0 {
        let frac = uncovered.len() as f64 / ball_nodes as f64;
        if frac > 0.20 {
            return Err(Error::Coverage {
                uncovered: 100.0 * frac,
            });
        }
    }
    // inverse-distance fill from covered neighbors within 2 cells
    let filled = wts.mapv(|w| w > 0.0);
    for &(i, j, kk) in &uncovered {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut ws = 0.0;
        for d1 in -2isize..=2 {
            for d2 in -2isize..=2 {
                for d3 in -2isize..=2 {
                    let u = [
                        i as isize + d1,
                        j as isize + d2,
                        kk as isize + d3,
                    ];
                    if u.iter().any(|&c| c < 0 || c >= n as isize) {
                        continue;
                    }
                    let u = [u[0] as usize, u[1] as usize, u[2] as usize];
                    if filled[u] {
                        let dd = ((d1 * d1 + d2 * d2 + d3 * d3) as f64).sqrt();
                        if dd > 0.0 {
                            acc += qhat[u] / dd;
                            ws += 1.0 / dd;
                        }
                    }
                }
            }
        }
        if ws > 0.0 {
            qhat[[i, j, kk]] = acc / ws;
        }
    }
    // band limit: zero outside the data ball
    for ((i, j, kk), v) in qhat.indexed_iter_mut() {
        let xi = [grid.xi(i), grid.xi(j), grid.xi(kk)];
        if dot(xi, xi).sqrt() > ball_r {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    let _ = dxi;
    let spatial = grid_ift(&qhat, grid);
    // real part + support projection
    let axis = grid.axis();
    let mut out = Array3::zeros((n, n, n));
    for ((i, j, kk), v) in out.indexed_iter_mut() {
        let x = [axis[i], axis[j], axis[kk]];
        if dot(x, x).sqrt() <= spec.support_radius {
            *v = spatial[[i, j, kk]].re;
        }
    }
    PotentialGrid::new(grid, out, spec.smoothness_l)
}

/// Imaginary-residue diagnostic: ratio of the L2 norms of the imaginary and
/// real parts of the unprojected inverse transform.
pub fn born_imaginary_fraction(
    dataset: &FarFieldDataset,
    spec: &ReconSpec,
) -> Result<f64> {
    let (samples, k_max) = born_samples(dataset)?;
    let grid = spec.grid;
    let n = grid.n();
    let mut vals = Array3::zeros((n, n, n));
    let mut wts = Array3::zeros((n, n, n));
    for (xi, v) in &samples {
        deposit(&mut vals, &mut wts, grid, *xi, *v);
    }
    let mut qhat: Array3<Complex64> = Array3::zeros((n, n, n));
    for ((i, j, kk), w) in wts.indexed_iter() {
        let xi = [grid.xi(i), grid.xi(j), grid.xi(kk)];
        if *w > 0.0 && dot(xi, xi).sqrt() <= (2.0 * k_max).min(grid.nyquist()) {
            qhat[[i, j, kk]] = vals[[i, j, kk]] / *w;
        }
    }
    let spatial = grid_ift(&qhat, grid);
    let re: f64 = spatial.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
    let im: f64 = spatial.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    Ok(im / re.max(1e-300))
}

fn born_samples(dataset: &FarFieldDataset) -> Result<(Vec<([f64; 3], Complex64)>, f64)> {
    if dataset.kind != DatasetKind::Backscatter {
        return Err(Error::Domain(
            "born_inversion needs a backscatter dataset".into(),
        ));
    }
    dataset.validate()?;
    let mut samples = Vec::with_capacity(dataset.len());
    let mut k_max = 0.0f64;
    for r in &dataset.records {
        if !r.is_valid() {
            continue;
        }
        k_max = k_max.max(r.k);
        let xi = [
            2.0 * r.k * r.alpha[0],
            2.0 * r.k * r.alpha[1],
            2.0 * r.k * r.alpha[2],
        ];
        samples.push((xi, -FOUR_PI * r.amplitude()));
    }
    if samples.is_empty() {
        return Err(Error::Domain("dataset has no valid records".into()));
    }
    Ok((samples, k_max))
}

/// Born inversion: `q_hat(2 k alpha) ~ -4 pi A(-alpha, alpha, k)` scattered
/// onto the dual grid, then inverted and projected.
pub fn born_inversion(dataset: &FarFieldDataset, spec: &ReconSpec) -> Result<PotentialGrid> {
    let (samples, k_max) = born_samples(dataset)?;
    assemble_from_samples(spec, &samples, k_max)
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    /// Iterates q^(1), ..., q^(n_iter) (the input q_init is iterate 0).
    pub iterates: Vec<PotentialGrid>,
    /// Data misfit of q_init followed by each iterate's misfit.
    pub misfits: Vec<f64>,
}

/// Contraction-structured refinement: each pass solves the forward problem
/// at the current iterate for every record, updates the spectral samples
/// `q_hat(2 k beta) <- (1 - omega) q_hat_n(2 k beta)
///                     + omega (-4 pi A_data - FT[q_n eps_n](2 k beta))`
/// and reassembles. Under-relaxation `omega = 0.5` keeps the approach to
/// the fixed point geometric instead of jumping straight to the
/// representation floor.
pub fn fixed_point_refine(
    dataset: &FarFieldDataset,
    q_init: &PotentialGrid,
    n_iter: usize,
    eta: f64,
    tol: f64,
) -> Result<RefineOutcome> {
    fixed_point_refine_damped(dataset, q_init, n_iter, eta, tol, 0.5)
}

pub fn fixed_point_refine_damped(
    dataset: &FarFieldDataset,
    q_init: &PotentialGrid,
    n_iter: usize,
    eta: f64,
    tol: f64,
    omega: f64,
) -> Result<RefineOutcome> {
    if dataset.kind != DatasetKind::Backscatter {
        return Err(Error::Domain("refinement needs backscatter data".into()));
    }
    if !(0.0 < omega && omega <= 1.0) {
        return Err(Error::Domain(format!("omega must be in (0, 1], got {omega}")));
    }
    let grid = q_init.grid();
    let spec = ReconSpec {
        grid,
        support_radius: support_radius_of(q_init),
        smoothness_l: q_init.smoothness_l(),
    };
    let records: Vec<_> = dataset.records.iter().filter(|r| r.is_valid()).collect();
    if records.is_empty() {
        return Err(Error::Domain("no valid records".into()));
    }
    let k_max = records.iter().map(|r| r.k).fold(0.0f64, f64::max);

    let mut iterates = Vec::with_capacity(n_iter);
    let mut misfits = Vec::with_capacity(n_iter + 1);
    let mut current = q_init.clone();
    let mut increases = 0usize;

    for it in 0..=n_iter {
        // one forward solve per record at the current iterate
        struct Row {
            xi: [f64; 3],
            data_rhs: Complex64,
            model_rhs: Complex64,
            amp_data: Complex64,
        }
        let rows: Vec<Row> = records
            .par_iter()
            .map(|r| -> Result<Row> {
                let beta = r.alpha;
                let wave = WaveParams::new(r.k, eta, beta)?;
                let sol = LsOperator::new(&current, &wave)?.solve(tol, 400)?;
                let kt = wave.ktilde();
                let axis = grid.axis();
                // q_hat_n(2 kt beta) and FT[q_n eps_n](2 kt beta) by direct
                // exponential sums (exact nonuniform evaluation)
                let mut qhat = Complex64::new(0.0, 0.0);
                let mut corr = Complex64::new(0.0, 0.0);
                let one = Complex64::new(1.0, 0.0);
                for ((i, j, kk), &qv) in current.values().indexed_iter() {
                    if qv == 0.0 {
                        continue;
                    }
                    let x = [axis[i], axis[j], axis[kk]];
                    let phase = (2.0 * I * kt * dot(beta, x)).exp();
                    qhat += qv * phase;
                    corr += qv * phase * (sol.v.values()[[i, j, kk]] - one);
                }
                qhat *= grid.cell_volume();
                corr *= grid.cell_volume();
                let xi = [
                    2.0 * r.k * beta[0],
                    2.0 * r.k * beta[1],
                    2.0 * r.k * beta[2],
                ];
                Ok(Row {
                    xi,
                    data_rhs: -FOUR_PI * r.amplitude() - corr,
                    model_rhs: qhat,
                    amp_data: r.amplitude(),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        // data misfit of the current iterate: model amplitude
        // -(q_hat + corr)/4pi vs data; data_rhs - model_rhs = -4 pi (A_data - A_model)
        let num: f64 = rows
            .iter()
            .map(|r| (r.data_rhs - r.model_rhs).norm_sqr())
            .sum();
        let den: f64 = rows
            .iter()
            .map(|r| (FOUR_PI * r.amp_data).norm_sqr())
            .sum();
        let misfit = (num / den).sqrt();
        if let Some(&prev) = misfits.last() {
            if misfit >= prev {
                increases += 1;
                if increases >= 2 {
                    return Err(Error::Divergence { at_iter: it });
                }
            } else {
                increases = 0;
            }
        }
        misfits.push(misfit);
        if it == n_iter {
            break;
        }

        // relaxed spectral update and reassembly
        let samples: Vec<([f64; 3], Complex64)> = rows
            .iter()
            .map(|r| {
                (
                    r.xi,
                    (1.0 - omega) * r.model_rhs + omega * r.data_rhs,
                )
            })
            .collect();
        current = assemble_from_samples(&spec, &samples, k_max)?;
        iterates.push(current.clone());
    }
    Ok(RefineOutcome { iterates, misfits })
}

fn support_radius_of(q: &PotentialGrid) -> f64 {
    let grid = q.grid();
    let axis = grid.axis();
    let mut r = 0.0f64;
    for ((i, j, kk), &v) in q.values().indexed_iter() {
        if v != 0.0 {
            let x = [axis[i], axis[j], axis[kk]];
            r = r.max(dot(x, x).sqrt());
        }
    }
    (r + grid.spacing()).min(grid.half_width() - 2.0 * grid.spacing())
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct UniquenessReport {
    /// Max modulus difference of the two backscattering datasets.
    pub delta_a_max: f64,
    /// L1 and L2 norms of p = q1 - q2.
    pub p_l1: f64,
    pub p_l2: f64,
    pub records: usize,
    /// Solver tolerance used for both sweeps.
    pub tol: f64,
}

/// Generate both backscattering datasets and report the data discrepancy
/// against the potential difference (the contrapositive witness of the
/// uniqueness statement).
pub fn uniqueness_experiment(
    q1: &PotentialGrid,
    q2: &PotentialGrid,
    betas: &[[f64; 3]],
    ks: &[f64],
    eta: f64,
    tol: f64,
) -> Result<UniquenessReport> {
    if q1.grid() != q2.grid() {
        return Err(Error::GridMismatch("uniqueness_experiment".into()));
    }
    let d1 = backscattering_dataset(q1, betas, ks, eta, tol)?;
    let d2 = backscattering_dataset(q2, betas, ks, eta, tol)?;
    let delta_a_max = d1.dataset.max_amplitude_deviation(&d2.dataset)?;
    let p = q1.values() - q2.values();
    let h3 = q1.grid().cell_volume();
    let p_l1 = h3 * p.iter().map(|v| v.abs()).sum::<f64>();
    let p_l2 = (h3 * p.iter().map(|v| v * v).sum::<f64>()).sqrt();
    Ok(UniquenessReport {
        delta_a_max,
        p_l1,
        p_l2,
        records: d1.dataset.len(),
        tol,
    })
}

/// Relative L2 distance between two potentials on the same grid.
pub fn relative_l2_error(q: &PotentialGrid, reference: &PotentialGrid) -> Result<f64> {
    if q.grid() != reference.grid() {
        return Err(Error::GridMismatch("relative_l2_error".into()));
    }
    let diff = q.values() - reference.values();
    let num: f64 = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
    let den: f64 = reference
        .values()
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    Ok(num / den.max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FarFieldRecord;
    use crate::wave::fibonacci_sphere;

    #[test]
    fn zero_data_reconstructs_zero() {
        let grid = Grid3::new(3.0, 16).unwrap();
        let spec = ReconSpec::new(grid, 1.5, 3).unwrap();
        let betas = fibonacci_sphere(64);
        let mut records = Vec::new();
        for ik in 1..=8 {
            let k = 0.5 * ik as f64;
            for b in &betas {
                records.push(FarFieldRecord::new(
                    crate::wave::neg(*b),
                    *b,
                    k,
                    0.0,
                    Complex64::new(0.0, 0.0),
                ));
            }
        }
        let ds = FarFieldDataset::new(DatasetKind::Backscatter, records).unwrap();
        let q = born_inversion(&ds, &spec).unwrap();
        assert_eq!(q.linf_norm(), 0.0);
    }

    #[test]
    fn coverage_error_on_sparse_data() {
        let grid = Grid3::new(3.0, 16).unwrap();
        let spec = ReconSpec::new(grid, 1.5, 3).unwrap();
        // only 3 directions, one k: nearly all nodes in the ball uncovered
        let betas = fibonacci_sphere(3);
        let records: Vec<_> = betas
            .iter()
            .map(|b| {
                FarFieldRecord::new(
                    crate::wave::neg(*b),
                    *b,
                    4.0,
                    0.0,
                    Complex64::new(0.01, 0.0),
                )
            })
            .collect();
        let ds = FarFieldDataset::new(DatasetKind::Backscatter, records).unwrap();
        match born_inversion(&ds, &spec) {
            Err(Error::Coverage { uncovered }) => assert!(uncovered > 20.0),
            other => panic!("expected coverage error, got {other:?}"),
        }
    }

    #[test]
    fn support_projection_is_idempotent() {
        let grid = Grid3::new(3.0, 16).unwrap();
        let spec = ReconSpec::new(grid, 1.2, 3).unwrap();
        // synthetic Born-consistent samples from a closed-form transform
        let fam = crate::oracle::BornFamily::Gaussian {
            amplitude: 0.1,
            sigma: 0.4,
        };
        let betas = fibonacci_sphere(200);
        let mut records = Vec::new();
        for ik in 1..=12 {
            let k = 4.0 * ik as f64 / 12.0;
            for b in &betas {
                let a = crate::oracle::born_amplitude_closed_form(&fam, k, *b, crate::wave::neg(*b));
                records.push(FarFieldRecord::new(crate::wave::neg(*b), *b, k, 0.0, a));
            }
        }
        let ds = FarFieldDataset::new(DatasetKind::Backscatter, records).unwrap();
        let q1 = born_inversion(&ds, &spec).unwrap();
        // projecting again changes nothing
        let axis = grid.axis();
        for ((i, j, kk), &v) in q1.values().indexed_iter() {
            let x = [axis[i], axis[j], axis[kk]];
            if dot(x, x).sqrt() > spec.support_radius {
                assert_eq!(v, 0.0);
            }
        }
    }
}
