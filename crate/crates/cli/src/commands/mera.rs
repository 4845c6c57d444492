use serde::Serialize;
use wickledger::holotn::{build_mera, classicalize, minimal_cut, readout_spin_events, write_events_csv, LeafInterval};
use wickledger::stats::{linear_fit, LinearFit};

use super::to_value;
use crate::config::RunConfig;
use crate::svg::Plot;
use crate::{CliError, CommandOutput};

#[derive(Serialize)]
struct Params {
    n_leaves: usize,
    start: usize,
    lengths: Vec<usize>,
    fit_min_len: usize,
    min_r_squared: f64,
    events: usize,
}

#[derive(Serialize)]
struct Cut {
    start: usize,
    len: usize,
    cut: usize,
}

#[derive(Serialize)]
struct Results {
    #[serde(rename = "A_TN")]
    a_tn: usize,
    entropy_bits: f64,
    n_bonds: usize,
    n_layers: usize,
    cut_by_interval: Vec<Cut>,
    /// Cut against log2 ℓ over lengths ≥ `fit_min_len`.
    fit: Option<LinearFit>,
}

pub fn run(cfg: &RunConfig, seed: u64) -> Result<CommandOutput, CliError> {
    let n_leaves = cfg.get("n_leaves", 64)?;
    let dyadic: Vec<usize> = (0..).map(|k| 1usize << k).take_while(|&l| l <= n_leaves / 2).collect();
    let p = Params {
        n_leaves,
        start: cfg.get("start", 0)?,
        lengths: cfg.list("lengths", &dyadic)?,
        fit_min_len: cfg.get("fit_min_len", 2)?,
        min_r_squared: cfg.get("min_r_squared", 0.99)?,
        events: cfg.get("events", 0)?,
    };
    let net = build_mera(p.n_leaves)?;
    let hologram = classicalize(&net);
    let mut cuts = Vec::new();
    for &len in &p.lengths {
        let cut = minimal_cut(&net, LeafInterval::new(p.start, len))?;
        cuts.push(Cut { start: p.start, len, cut });
    }
    let fitted: Vec<&Cut> = cuts.iter().filter(|c| c.len >= p.fit_min_len.max(1)).collect();
    let x: Vec<f64> = fitted.iter().map(|c| (c.len as f64).log2()).collect();
    let y: Vec<f64> = fitted.iter().map(|c| c.cut as f64).collect();
    let fit = if x.len() >= 2 { linear_fit(&x, &y).ok() } else { None };

    let results = Results {
        a_tn: hologram.area(),
        entropy_bits: hologram.entropy_bits(),
        n_bonds: net.bonds.len(),
        n_layers: net.n_layers(),
        cut_by_interval: cuts,
        fit,
    };
    let mut violations = Vec::new();
    if results.entropy_bits != results.a_tn as f64 {
        violations.push(format!("entropy {} bits differs from A_TN = {}", results.entropy_bits, results.a_tn));
    }
    if let Some(f) = fit {
        if f.r_squared < p.min_r_squared {
            violations.push(format!("cut vs log2 ℓ fit R² = {} < {}", f.r_squared, p.min_r_squared));
        }
    }

    let mut files = vec![("network.json".to_string(), net.to_json()? + "\n")];
    if p.events > 0 {
        let mut csv = Vec::new();
        write_events_csv(&readout_spin_events(&hologram, p.events, seed), &mut csv)?;
        files.push(("events.csv".into(), String::from_utf8(csv).map_err(|e| CliError::Other(e.into()))?));
    }

    let pts: Vec<(f64, f64)> =
        results.cut_by_interval.iter().map(|c| ((c.len as f64).log2(), c.cut as f64)).collect();
    let mut plot = Plot::new(&format!("Minimal cut, {} leaves", p.n_leaves), "log2 ℓ", "cut (bonds)").points(pts, "min-cut");
    if let (Some(f), Some(lo), Some(hi)) = (fit, x.first(), x.last()) {
        plot = plot.line(vec![(*lo, f.intercept + f.slope * lo), (*hi, f.intercept + f.slope * hi)], "fit");
    }

    Ok(CommandOutput {
        params: to_value(&p)?,
        results: to_value(&results)?,
        files,
        svgs: vec![("cuts.svg".into(), plot.render())],
        violations,
    })
}
