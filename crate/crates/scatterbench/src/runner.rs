//! Pipeline orchestration: executes the pipelines declared in a run
//! config, writing artifacts and a manifest into the run directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::certificate::{contraction_certificate, Verdict};
use crate::config::RunConfig;
use crate::container;
use crate::datatools::{add_noise, radius_of_compactness, tail_contribution};
use crate::error::{Error, Result};
use crate::farfield::{backscattering_dataset, fixed_incident_dataset};
use crate::forward::LsOperator;
use crate::inversion::{born_inversion, fixed_point_refine, relative_l2_error, uniqueness_experiment, ReconSpec};
use crate::potentials::make_bump_potential;
use crate::wave::{fibonacci_sphere, WaveParams};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub pipelines: Vec<String>,
    pub timings_secs: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub certificate_verdict: Option<Verdict>,
    pub failures: Vec<String>,
}

/// Execute every pipeline named in the config. Independent pipelines keep
/// running after one fails; the summary lists failures and the process
/// exit status is decided by the caller.
pub fn run(config_path: &Path, out_override: Option<&Path>) -> Result<RunSummary> {
    let raw = fs::read(config_path)?;
    let cfg = RunConfig::from_path(config_path)?;
    let out_dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from(&cfg.run.out_dir));
    fs::create_dir_all(&out_dir)?;

    let mut timings = Vec::new();
    let mut failures = Vec::new();
    let mut verdict = None;

    for pipeline in &cfg.run.pipelines {
        let t0 = Instant::now();
        let result = match pipeline.as_str() {
            "forward" => pipeline_forward(&cfg, &out_dir),
            "dataset" => pipeline_dataset(&cfg, &out_dir),
            "certificate" => pipeline_certificate(&cfg, &out_dir).map(|v| {
                verdict = Some(v);
            }),
            "invert" => pipeline_invert(&cfg, &out_dir),
            "uniqueness" => pipeline_uniqueness(&cfg, &out_dir),
            "noise-study" => pipeline_noise_study(&cfg, &out_dir),
            other => Err(Error::ConfigValidation {
                field: "run.pipelines".into(),
                message: format!("unknown pipeline `{other}`"),
            }),
        };
        timings.push((pipeline.clone(), t0.elapsed().as_secs_f64()));
        if let Err(e) = result {
            log::error!(target: "scatterbench::runner", "pipeline {pipeline} failed: {e}");
            failures.push(format!("{pipeline}: {e}"));
        }
    }

    let manifest = RunManifest {
        tool: "scatterbench".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: hex(&Sha256::digest(&raw)),
        seed: cfg.run.seed,
        threads: cfg.run.threads,
        pipelines: cfg.run.pipelines.clone(),
        timings_secs: timings,
    };
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(RunSummary {
        out_dir,
        certificate_verdict: verdict,
        failures,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn pipeline_forward(cfg: &RunConfig, out: &Path) -> Result<()> {
    let q = cfg.build_potential()?;
    let wave = WaveParams::new(cfg.forward.k, cfg.forward.eta, cfg.forward.alpha)?;
    let op = LsOperator::new(&q, &wave)?;
    let sol = op.solve(cfg.forward.tol, cfg.forward.max_iter)?;
    container::save_potential(&out.join("potential"), &q)?;
    container::save_complex_field(&out.join("ripple_v"), &sol.v)?;
    let diag = serde_json::json!({
        "k": wave.k, "eta": wave.eta, "alpha": wave.alpha,
        "iterations": sol.iterations, "residual": sol.residual,
    });
    fs::write(out.join("forward_diagnostics.json"), diag.to_string())?;
    Ok(())
}

fn pipeline_dataset(cfg: &RunConfig, out: &Path) -> Result<()> {
    let q = cfg.build_potential()?;
    let betas = fibonacci_sphere(cfg.dataset.directions);
    let ks = cfg.ks();
    let build = match cfg.dataset.kind.as_str() {
        "backscatter" => backscattering_dataset(&q, &betas, &ks, cfg.dataset.eta, cfg.forward.tol)?,
        _ => fixed_incident_dataset(
            &q,
            cfg.dataset.alpha0,
            &betas,
            &ks,
            cfg.dataset.eta,
            cfg.forward.tol,
        )?,
    };
    container::save_dataset(&out.join("dataset"), &build.dataset)?;
    fs::write(out.join("dataset.csv"), build.dataset.to_csv())?;
    if !build.failed_records.is_empty() {
        return Err(Error::NonConvergence {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    Ok(())
}

fn pipeline_certificate(cfg: &RunConfig, out: &Path) -> Result<Verdict> {
    let q1 = cfg.build_potential()?;
    let q2 = cfg.build_potential2()?;
    let report = contraction_certificate(
        &q1,
        &q2,
        cfg.certificate.k,
        &cfg.certificate.etas,
        cfg.certificate.beta,
        cfg.forward.tol,
    )?;
    fs::write(
        out.join("certificate.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    fs::write(out.join("certificate.csv"), report.csv())?;
    Ok(report.verdict)
}

fn pipeline_invert(cfg: &RunConfig, out: &Path) -> Result<()> {
    let q_true = cfg.build_potential()?;
    let grid = q_true.grid();
    let betas = fibonacci_sphere(cfg.dataset.directions);
    let ks = cfg.ks();
    let data = backscattering_dataset(&q_true, &betas, &ks, 0.0, cfg.forward.tol)?.dataset;
    container::save_dataset(&out.join("dataset"), &data)?;
    let spec = ReconSpec::new(grid, cfg.invert.support_radius, q_true.smoothness_l())?;
    let born = born_inversion(&data, &spec)?;
    container::save_potential(&out.join("born_reconstruction"), &born)?;
    let refine = fixed_point_refine(&data, &born, cfg.invert.refine_iters, cfg.invert.eta, cfg.forward.tol)?;
    if let Some(last) = refine.iterates.last() {
        container::save_potential(&out.join("refined_reconstruction"), last)?;
    }
    let mut hist = String::from("iteration,misfit,rel_l2_error\n");
    hist.push_str(&format!(
        "0,{},{}\n",
        refine.misfits[0],
        relative_l2_error(&born, &q_true)?
    ));
    for (i, (it, mis)) in refine
        .iterates
        .iter()
        .zip(refine.misfits.iter().skip(1))
        .enumerate()
    {
        hist.push_str(&format!(
            "{},{},{}\n",
            i + 1,
            mis,
            relative_l2_error(it, &q_true)?
        ));
    }
    fs::write(out.join("refine_history.csv"), hist)?;
    Ok(())
}

fn pipeline_uniqueness(cfg: &RunConfig, out: &Path) -> Result<()> {
    let q1 = cfg.build_potential()?;
    let grid = q1.grid();
    let betas = fibonacci_sphere(cfg.uniqueness.directions);
    let mut rows = Vec::new();
    for &amp in &cfg.uniqueness.perturbation_amplitudes {
        // interior perturbation bump off-center
        let bump = make_bump_potential(grid, [0.4, 0.0, 0.2], 0.5, amp, 3)?;
        let q2 = crate::grid::PotentialGrid::new(
            grid,
            q1.values() + bump.values(),
            q1.smoothness_l(),
        )?;
        let rep = uniqueness_experiment(
            &q1,
            &q2,
            &betas,
            &cfg.uniqueness.ks,
            cfg.uniqueness.eta,
            cfg.forward.tol,
        )?;
        rows.push(serde_json::json!({
            "amplitude": amp,
            "p_l1": rep.p_l1,
            "delta_a_max": rep.delta_a_max,
        }));
    }
    fs::write(
        out.join("uniqueness.json"),
        serde_json::to_string_pretty(&rows)?,
    )?;
    Ok(())
}

fn pipeline_noise_study(cfg: &RunConfig, out: &Path) -> Result<()> {
    let q = cfg.build_potential()?;
    let betas = fibonacci_sphere(16);
    let ks = vec![1.0];
    let ds = backscattering_dataset(&q, &betas, &ks, 0.0, cfg.forward.tol)?.dataset;
    let noisy = add_noise(&ds, cfg.noise.delta, cfg.run.seed)?;
    let sup = ds.max_amplitude_deviation(&noisy)?;
    let radius = radius_of_compactness(cfg.noise.delta, cfg.noise.gamma)?;
    let tail = tail_contribution(cfg.noise.gamma, radius)?;
    let study = serde_json::json!({
        "delta": cfg.noise.delta,
        "gamma": cfg.noise.gamma,
        "sup_deviation": sup,
        "radius_of_compactness": radius,
        "tail_at_radius": tail,
    });
    fs::write(out.join("noise_study.json"), serde_json::to_string_pretty(&study)?)?;
    container::save_dataset(&out.join("noisy_dataset"), &noisy)?;
    Ok(())
}
