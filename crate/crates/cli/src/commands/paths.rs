use serde::Serialize;
use wickledger::euclidean::{
    euclidean_action, heat_kernel, information, sample_ensemble, sample_path, sample_path_stream, total_information,
    EuclideanParams, MonteCarloSummary,
};
use wickledger::qstate::BIT_FACTOR;

use super::to_value;
use crate::config::RunConfig;
use crate::svg::Plot;
use crate::{CliError, CommandOutput};

#[derive(Serialize)]
struct Params {
    mass: f64,
    hbar: f64,
    x_start: f64,
    n_paths: usize,
    n_steps: usize,
    tau_step: f64,
    /// Step count of each particle's path.
    particles: Vec<usize>,
    bins: usize,
    additivity_tol: f64,
}

#[derive(Serialize)]
struct Particle {
    index: usize,
    n_steps: usize,
    action: f64,
    bits: f64,
}

#[derive(Serialize)]
struct Results {
    summary: MonteCarloSummary,
    #[serde(rename = "expected_mean_SE")]
    expected_mean_se: f64,
    #[serde(rename = "expected_mean_I")]
    expected_mean_i: f64,
    endpoint_variance: f64,
    expected_endpoint_variance: f64,
    particles: Vec<Particle>,
    #[serde(rename = "I_tot")]
    i_tot: f64,
    /// `|I_tot - Σ S_E/(ħ ln 2)| / I_tot`
    additivity_error: f64,
}

pub fn run(cfg: &RunConfig, seed: u64) -> Result<CommandOutput, CliError> {
    let p = Params {
        mass: cfg.positive("mass", 1.0)?,
        hbar: cfg.positive("hbar", 1.0)?,
        x_start: cfg.get("x_start", 0.0)?,
        n_paths: cfg.get("n_paths", 100_000)?,
        n_steps: cfg.get("n_steps", 1000)?,
        tau_step: cfg.positive("tau_step", 0.001)?,
        particles: cfg.list("particles", &[1000, 1000, 1000])?,
        bins: cfg.get("bins", 50)?,
        additivity_tol: cfg.positive("additivity_tol", 1e-12)?,
    };
    if p.bins == 0 {
        return Err(CliError::Config("bins must be positive".into()));
    }
    let params = EuclideanParams { mass: p.mass, hbar: p.hbar, x_start: p.x_start };
    let samples = sample_ensemble(p.n_paths, p.n_steps, p.tau_step, &params, seed)?;
    let summary = samples.summary();
    let n = samples.endpoints.len() as f64;
    let endpoint_variance = samples.endpoints.iter().map(|x| (x - p.x_start).powi(2)).sum::<f64>() / n;
    let tau = p.n_steps as f64 * p.tau_step;

    // particle paths use their own seed so they do not repeat ensemble paths
    let particle_seed = seed.wrapping_add(1);
    let mut particles = Vec::new();
    let mut readouts = Vec::new();
    for (index, &steps) in p.particles.iter().enumerate() {
        let path = sample_path_stream(steps, p.tau_step, &params, particle_seed, index as u64)?;
        let r = information(euclidean_action(&path), p.hbar)?;
        particles.push(Particle { index, n_steps: steps, action: r.action, bits: r.bits });
        readouts.push(r);
    }
    let i_tot = total_information(&readouts)?;
    let pooled = readouts.iter().map(|r| r.action).sum::<f64>() / (p.hbar * BIT_FACTOR);
    let additivity_error = if i_tot > 0.0 { (i_tot - pooled).abs() / i_tot } else { (i_tot - pooled).abs() };

    let results = Results {
        expected_mean_se: p.n_steps as f64 * p.hbar / 2.0,
        expected_mean_i: p.n_steps as f64 / (2.0 * BIT_FACTOR),
        endpoint_variance,
        expected_endpoint_variance: p.hbar / p.mass * tau,
        summary,
        particles,
        i_tot,
        additivity_error,
    };
    let mut violations = Vec::new();
    if results.additivity_error > p.additivity_tol {
        violations.push(format!("I_tot additivity error {:e} > {:e}", results.additivity_error, p.additivity_tol));
    }

    let mut csv = Vec::new();
    sample_path(p.n_steps, p.tau_step, &params, seed)?.write_csv(&mut csv)?;

    let sd = (p.hbar / p.mass * tau).sqrt();
    let (lo, hi) = (p.x_start - 4.0 * sd, p.x_start + 4.0 * sd);
    let width = (hi - lo) / p.bins as f64;
    let mut counts = vec![0.0; p.bins];
    for &x in &samples.endpoints {
        if x >= lo && x < hi {
            counts[((x - lo) / width) as usize] += 1.0;
        }
    }
    let edges: Vec<f64> = (0..=p.bins).map(|b| lo + b as f64 * width).collect();
    let density: Vec<f64> = counts.iter().map(|c| c / (n * width)).collect();
    let curve = (0..=200)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / 200.0;
            Ok((x, heat_kernel(x, p.x_start, tau, p.mass, p.hbar)?))
        })
        .collect::<Result<Vec<_>, wickledger::Error>>()?;
    let plot = Plot::new("Path endpoints", "x(τ)", "density")
        .bars(edges, density, "sampled endpoints")
        .line(curve, "heat kernel");

    Ok(CommandOutput {
        params: to_value(&p)?,
        results: to_value(&results)?,
        files: vec![("sample_path.csv".into(), String::from_utf8(csv).map_err(|e| CliError::Other(e.into()))?)],
        svgs: vec![("endpoints.svg".into(), plot.render())],
        violations,
    })
}
