use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use wickledger::euclidean::EuclideanParams;
use wickledger::holotn::{build_mera, classicalize};
use wickledger::measurement::{
    attach_euclidean_duals, run_lorentzian_schedule, DualSampler, PhaseKind, ProjectiveFamily, Regime, RegimeLedger,
    Segment, SystemSpec,
};
use wickledger::qstate::DensityMatrix;

use super::to_value;
use crate::config::RunConfig;
use crate::svg::Canvas;
use crate::{CliError, CommandOutput};

#[derive(Serialize)]
struct Params {
    hbar: f64,
    mass: f64,
    initial: String,
    h_x: f64,
    basis: String,
    t_end: f64,
    windows: Vec<(f64, f64)>,
    n_leaves: usize,
    tau_step: f64,
}

#[derive(Serialize)]
struct Results {
    #[serde(rename = "A_TN")]
    a_tn: f64,
    n_lorentzian: usize,
    n_duals: usize,
    pattern: Vec<PhaseKind>,
    ledger: RegimeLedger,
}

fn qubit(name: &str) -> Result<DVector<Complex64>, CliError> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = match name {
        "zero" => (1.0, 0.0),
        "one" => (0.0, 1.0),
        "plus" => (s, s),
        "minus" => (s, -s),
        other => return Err(CliError::Config(format!("initial must be zero, one, plus or minus, got {other:?}"))),
    };
    Ok(DVector::from_vec(vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)]))
}

fn family(name: &str) -> Result<ProjectiveFamily, CliError> {
    match name {
        "z" => Ok(ProjectiveFamily::computational(2)?),
        "x" => Ok(ProjectiveFamily::qubit_x()?),
        other => Err(CliError::Config(format!("basis must be z or x, got {other:?}"))),
    }
}

fn parse_windows(raw: &[String]) -> Result<Vec<(f64, f64)>, CliError> {
    raw.iter()
        .map(|w| {
            let bad = || CliError::Config(format!("window {w:?} is not start:end"));
            let (a, b) = w.split_once(':').ok_or_else(bad)?;
            Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

/// Unitary segments fill the gaps between measurement windows up to `t_end`.
fn schedule(windows: &[(f64, f64)], t_end: f64, basis: &str) -> Result<Vec<Segment>, CliError> {
    let mut segments = Vec::new();
    let mut cursor = 0.0;
    for &(start, end) in windows {
        if start > cursor {
            segments.push(Segment::Unitary { start: cursor, end: start });
        }
        segments.push(Segment::Measurement { start, end, family: family(basis)? });
        cursor = end;
    }
    if t_end < cursor {
        return Err(CliError::Config(format!("t_end {t_end} precedes the last window end {cursor}")));
    }
    if t_end > cursor || segments.is_empty() {
        segments.push(Segment::Unitary { start: cursor, end: t_end });
    }
    Ok(segments)
}

fn timeline(ledger: &RegimeLedger, t_end: f64) -> String {
    let mut c = Canvas::new();
    let (left, right) = (90.0, c.width() - 30.0);
    let sx = |t: f64| left + t / t_end.max(1e-12) * (right - left);
    let (ly, ey, h) = (90.0, 250.0, 50.0);
    c.text(c.width() / 2.0, 28.0, 14.0, "middle", "Regime ledger");
    c.text(left - 8.0, ly + h / 2.0, 12.0, "end", "Lorentzian");
    c.text(left - 8.0, ey + h / 2.0, 12.0, "end", "Euclidean");
    for r in &ledger.records {
        let (a, b) = (sx(r.span.0), sx(r.span.1).max(sx(r.span.0) + 2.0));
        match r.regime {
            Regime::Lorentzian => {
                let (fill, opacity) = if r.in_measurement_window { ("#7f7f7f", 0.6) } else { ("#1f77b4", 0.3) };
                c.rect(a, ly, b - a, h, fill, opacity);
                c.text((a + b) / 2.0, ly - 6.0, 9.0, "middle", &format!("S={:.3} I={:.3}", r.s_vn_bits, r.i_bits));
            }
            Regime::Euclidean => {
                c.rect(a, ey, b - a, h, "#d62728", 0.3);
                c.text((a + b) / 2.0, ey + h + 14.0, 9.0, "middle", &format!("S={} I={:.1}", r.s_vn_bits, r.i_bits));
                if let Some(target) = r.dual_of.and_then(|i| ledger.records.get(i)) {
                    let mid = (sx(target.span.0) + sx(target.span.1)) / 2.0;
                    c.line(mid, ly + h, (a + b) / 2.0, ey, "black", true);
                }
            }
        }
    }
    for k in 0..=4 {
        let t = t_end * k as f64 / 4.0;
        c.text(sx(t), 370.0, 10.0, "middle", &format!("{t:.2}"));
    }
    c.text(c.width() / 2.0, 390.0, 12.0, "middle", "t (Lorentzian) / τ (Euclidean)");
    c.finish()
}

pub fn run(cfg: &RunConfig, seed: u64) -> Result<CommandOutput, CliError> {
    let p = Params {
        hbar: cfg.positive("hbar", 1.0)?,
        mass: cfg.positive("mass", 1.0)?,
        initial: cfg.get("initial", "plus".to_string())?,
        h_x: cfg.get("h_x", 1.0)?,
        basis: cfg.get("basis", "z".to_string())?,
        t_end: cfg.positive("t_end", 2.5)?,
        windows: parse_windows(&cfg.list("windows", &["1.0:1.5".to_string()])?)?,
        n_leaves: cfg.get("n_leaves", 64)?,
        tau_step: cfg.positive("tau_step", 0.01)?,
    };
    let segments = schedule(&p.windows, p.t_end, &p.basis)?;
    let sigma_x = DMatrix::from_row_slice(2, 2, &[0.0, p.h_x, p.h_x, 0.0].map(|v| Complex64::new(v, 0.0)));
    let system = SystemSpec {
        initial: DensityMatrix::from_pure(&qubit(&p.initial)?)?,
        hamiltonian: (p.h_x != 0.0).then_some(sigma_x),
        hbar: p.hbar,
        t0: 0.0,
        seed,
    };
    let lorentzian = run_lorentzian_schedule(&segments, &system)?;
    let a_tn = classicalize(&build_mera(p.n_leaves)?).area() as f64;
    let sampler = DualSampler {
        params: EuclideanParams { mass: p.mass, hbar: p.hbar, x_start: 0.0 },
        tau_step: p.tau_step,
        seed: seed.wrapping_add(1),
    };
    let ledger = attach_euclidean_duals(&lorentzian, a_tn, &sampler)?;

    let mut violations = Vec::new();
    if let Err(e) = ledger.validate() {
        violations.push(e.to_string());
    }
    for d in ledger.duals() {
        if d.s_vn_bits != a_tn {
            violations.push(format!("dual carries S_vN = {} instead of A_TN = {a_tn}", d.s_vn_bits));
        }
    }
    let svg = timeline(&ledger, p.t_end);
    let json = ledger.to_json()?;
    let results = Results {
        a_tn,
        n_lorentzian: ledger.lorentzian_records().count(),
        n_duals: ledger.duals().count(),
        pattern: ledger.lorentzian_pattern(),
        ledger,
    };
    Ok(CommandOutput {
        params: to_value(&p)?,
        results: to_value(&results)?,
        files: vec![("ledger.json".into(), json + "\n")],
        svgs: vec![("timeline.svg".into(), svg)],
        violations,
    })
}
