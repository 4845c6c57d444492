use std::fmt::Write;

use serde::Serialize;
use wickledger::lorentzian::{entropy_drift, FreeEvolver, GaussianPacketSpec, LorentzianParams};
use wickledger::qstate::Grid1D;

use super::to_value;
use crate::config::RunConfig;
use crate::svg::Plot;
use crate::{CliError, CommandOutput};

#[derive(Serialize)]
struct Params {
    mass: f64,
    hbar: f64,
    dt: f64,
    n_steps: usize,
    x_min: f64,
    x_max: f64,
    n_grid: usize,
    packet: GaussianPacketSpec,
    snapshots: usize,
    norm_tol: f64,
    entropy_tol: f64,
    width_tol: f64,
}

#[derive(Serialize)]
struct Results {
    norm_drift: f64,
    entropy_drift: f64,
    width_fit_error: f64,
    mean_fit_error: f64,
    final_time: f64,
    final_variance: f64,
    energy_drift: f64,
}

pub fn run(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let p = Params {
        mass: cfg.positive("mass", 1.0)?,
        hbar: cfg.positive("hbar", 1.0)?,
        dt: cfg.positive("dt", 0.005)?,
        n_steps: cfg.get("n_steps", 1000)?,
        x_min: cfg.get("x_min", -40.0)?,
        x_max: cfg.get("x_max", 40.0)?,
        n_grid: cfg.get("n_grid", 1024)?,
        packet: GaussianPacketSpec {
            x0: cfg.get("x0", -3.0)?,
            sigma0: cfg.positive("sigma0", 1.0)?,
            p0: cfg.get("p0", 1.0)?,
        },
        snapshots: cfg.get("snapshots", 5)?,
        norm_tol: cfg.positive("norm_tol", 1e-10)?,
        entropy_tol: cfg.positive("entropy_tol", 1e-9)?,
        width_tol: cfg.positive("width_tol", 1e-6)?,
    };
    let grid = Grid1D::new(p.x_min, p.x_max, p.n_grid)?;
    let params = LorentzianParams::new(p.mass, p.hbar, p.dt)?;
    let psi0 = p.packet.wavefunction(&grid, p.hbar)?;
    let evolver = FreeEvolver::new(grid, params)?;
    let traj = evolver.trajectory(&psi0, p.n_steps, 1)?;
    let e0 = evolver.kinetic_energy(&psi0)?;

    let mut csv = String::from("step,t,norm,mean_x,variance,variance_theory\n");
    let (mut norm_drift, mut width_err, mut mean_err, mut energy_drift) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (n, psi) in traj.iter().enumerate() {
        let t = n as f64 * p.dt;
        let var = psi.position_variance();
        let want_var = p.packet.width_sq_at(t, p.mass, p.hbar);
        let mean = psi.mean_position();
        norm_drift = norm_drift.max((psi.norm_sq() - 1.0).abs());
        width_err = width_err.max((var / want_var - 1.0).abs());
        mean_err = mean_err.max((mean - p.packet.mean_at(t, p.mass)).abs());
        energy_drift = energy_drift.max((evolver.kinetic_energy(psi)? - e0).abs());
        let _ = writeln!(csv, "{n},{t},{},{mean},{var},{want_var}", psi.norm_sq());
    }
    let results = Results {
        norm_drift,
        entropy_drift: entropy_drift(&traj)?,
        width_fit_error: width_err,
        mean_fit_error: mean_err,
        final_time: p.n_steps as f64 * p.dt,
        final_variance: traj.last().map_or(0.0, |psi| psi.position_variance()),
        energy_drift,
    };

    let mut violations = Vec::new();
    if results.norm_drift > p.norm_tol {
        violations.push(format!("norm drift {:e} > {:e}", results.norm_drift, p.norm_tol));
    }
    if results.entropy_drift > p.entropy_tol {
        violations.push(format!("entropy drift {:e} bits > {:e}", results.entropy_drift, p.entropy_tol));
    }
    if results.width_fit_error > p.width_tol {
        violations.push(format!("width fit error {:e} > {:e}", results.width_fit_error, p.width_tol));
    }

    let xs = grid.positions();
    let mut plot = Plot::new("|ψ(x, t)|²", "x", "density");
    let k = p.snapshots.max(1);
    for s in 0..k {
        let n = if k == 1 { 0 } else { s * p.n_steps / (k - 1) };
        let rho = traj[n].probability_density();
        let pts = xs.iter().zip(rho).map(|(&x, r)| (x, r)).collect();
        plot = plot.line(pts, &format!("t = {:.3}", n as f64 * p.dt));
    }

    Ok(CommandOutput {
        params: to_value(&p)?,
        results: to_value(&results)?,
        files: vec![("moments.csv".into(), csv)],
        svgs: vec![("density.svg".into(), plot.render())],
        violations,
    })
}
