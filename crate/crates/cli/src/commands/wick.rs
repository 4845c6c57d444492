use std::fmt::Write;

use num_complex::Complex64;
use serde::Serialize;
use wickledger::euclidean::{heat_kernel, wick_check};
use wickledger::lorentzian::{kernel_at_complex_time, LorentzianParams};

use super::{linspace, to_value, trapezoid};
use crate::config::RunConfig;
use crate::svg::Plot;
use crate::{CliError, CommandOutput};

#[derive(Serialize)]
struct Params {
    mass: f64,
    hbar: f64,
    x0: f64,
    x_min: f64,
    x_max: f64,
    n_x: usize,
    taus: Vec<f64>,
    quad_intervals: usize,
    tol: f64,
    norm_tol: f64,
}

#[derive(Serialize)]
struct TauRow {
    tau: f64,
    max_discrepancy: f64,
    normalization: f64,
    heat_at_x0: f64,
    continued_at_x0: [f64; 2],
}

#[derive(Serialize)]
struct Results {
    max_discrepancy: f64,
    max_normalization_error: f64,
    per_tau: Vec<TauRow>,
}

pub fn run(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let p = Params {
        mass: cfg.positive("mass", 1.0)?,
        hbar: cfg.positive("hbar", 1.0)?,
        x0: cfg.get("x0", 0.0)?,
        x_min: cfg.get("x_min", -5.0)?,
        x_max: cfg.get("x_max", 5.0)?,
        n_x: cfg.get("n_x", 101)?,
        taus: cfg.list("taus", &[0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0])?,
        quad_intervals: cfg.get("quad_intervals", 24_000)?,
        tol: cfg.positive("tol", 1e-12)?,
        norm_tol: cfg.positive("norm_tol", 1e-9)?,
    };
    if p.taus.is_empty() {
        return Err(CliError::Config("taus must list at least one imaginary time".into()));
    }
    if p.n_x == 0 || !(p.x_max >= p.x_min) {
        return Err(CliError::Config(format!("bad x sweep [{}, {}] with {} points", p.x_min, p.x_max, p.n_x)));
    }
    if p.quad_intervals == 0 {
        return Err(CliError::Config("quad_intervals must be positive".into()));
    }
    let params = LorentzianParams::new(p.mass, p.hbar, 1.0)?;
    let xs = linspace(p.x_min, p.x_max, p.n_x);

    let mut csv = String::from("x,tau,continued_re,continued_im,heat,abs_diff\n");
    let mut rows = Vec::new();
    let mut plot = Plot::new("Continued kernel vs heat kernel", "x", "K");
    for &tau in &p.taus {
        let mut worst = 0.0f64;
        let mut heat_pts = Vec::new();
        let mut cont_pts = Vec::new();
        for &x in &xs {
            let diff = wick_check(x, p.x0, tau, &params)?;
            let heat = heat_kernel(x, p.x0, tau, p.mass, p.hbar)?;
            let cont = kernel_at_complex_time(x, p.x0, Complex64::new(0.0, -tau), p.mass, p.hbar);
            worst = worst.max(diff);
            heat_pts.push((x, heat));
            cont_pts.push((x, cont.re));
            let _ = writeln!(csv, "{x},{tau},{},{},{heat},{diff}", cont.re, cont.im);
        }
        let half = 12.0 * (p.hbar * tau / p.mass).sqrt();
        let total = trapezoid(
            |x| heat_kernel(x, p.x0, tau, p.mass, p.hbar).unwrap_or(f64::NAN),
            p.x0 - half,
            p.x0 + half,
            p.quad_intervals,
        );
        let cont0 = kernel_at_complex_time(p.x0, p.x0, Complex64::new(0.0, -tau), p.mass, p.hbar);
        rows.push(TauRow {
            tau,
            max_discrepancy: worst,
            normalization: total,
            heat_at_x0: heat_kernel(p.x0, p.x0, tau, p.mass, p.hbar)?,
            continued_at_x0: [cont0.re, cont0.im],
        });
        if rows.len() <= 3 {
            plot = plot.line(heat_pts, &format!("heat τ = {tau}")).points(cont_pts, &format!("continued τ = {tau}"));
        }
    }
    let results = Results {
        max_discrepancy: rows.iter().map(|r| r.max_discrepancy).fold(0.0, f64::max),
        max_normalization_error: rows.iter().map(|r| (r.normalization - 1.0).abs()).fold(0.0, f64::max),
        per_tau: rows,
    };
    let mut violations = Vec::new();
    if !(results.max_discrepancy <= p.tol) {
        violations.push(format!("max discrepancy {:e} > {:e}", results.max_discrepancy, p.tol));
    }
    if !(results.max_normalization_error <= p.norm_tol) {
        violations.push(format!("normalisation error {:e} > {:e}", results.max_normalization_error, p.norm_tol));
    }
    Ok(CommandOutput {
        params: to_value(&p)?,
        results: to_value(&results)?,
        files: vec![("wick_sweep.csv".into(), csv)],
        svgs: vec![("kernels.svg".into(), plot.render())],
        violations,
    })
}
