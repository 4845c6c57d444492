//! Imaginary-time side of the free particle.
//!
//! Under `t → -iτ` the free Schrödinger equation becomes a heat equation with
//! diffusion constant `D = ħ/2m`, so paths are Wiener processes whose
//! increments over `Δτ` have variance `(ħ/m)Δτ`. The off-shell Euclidean
//! action of a sampled path is read out as information `I = S_E / (ħ ln 2)`.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). Path `i` of an
//! ensemble seeded with `seed` uses stream `i` of the generator keyed by
//! `seed`, so results do not depend on thread scheduling.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorentzian::{kernel_at_complex_time, LorentzianParams};
use crate::qstate::BIT_FACTOR;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanParams {
    pub mass: f64,
    pub hbar: f64,
    pub x_start: f64,
}

impl Default for EuclideanParams {
    fn default() -> Self {
        Self { mass: 1.0, hbar: 1.0, x_start: 0.0 }
    }
}

impl EuclideanParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mass", self.mass), ("hbar", self.hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.x_start.is_finite() {
            return Err(Error::Domain("x_start must be finite".into()));
        }
        Ok(())
    }

    /// `D = ħ / 2m`
    pub fn diffusion_constant(&self) -> f64 {
        self.hbar / (2.0 * self.mass)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("imaginary time must be positive, got {tau}")));
    }
    Ok(())
}

/// `√(m/2πħτ) · exp(-m(x-x0)²/2ħτ)`
pub fn heat_kernel(x: f64, x0: f64, tau: f64, mass: f64, hbar: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok((mass / (2.0 * PI * hbar * tau)).sqrt() * (-mass * (x - x0).powi(2) / (2.0 * hbar * tau)).exp())
}

/// `|K_L(x, x0, t = -iτ) - K_E(x, x0, τ)|`: the Lorentzian closed form
/// continued to imaginary time against the heat kernel.
pub fn wick_check(x: f64, x0: f64, tau: f64, params: &LorentzianParams) -> Result<f64> {
    check_tau(tau)?;
    let continued = kernel_at_complex_time(x, x0, Complex64::new(0.0, -tau), params.mass, params.hbar);
    let euclid = heat_kernel(x, x0, tau, params.mass, params.hbar)?;
    Ok((continued - euclid).norm())
}

/// Imaginary-time discretised trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianPath {
    tau_step: f64,
    positions: Vec<f64>,
    mass: f64,
    hbar: f64,
}

impl BrownianPath {
    pub fn new(tau_step: f64, positions: Vec<f64>, mass: f64, hbar: f64) -> Result<Self> {
        check_tau(tau_step)?;
        if positions.len() < 2 {
            return Err(Error::Domain(format!("path needs at least 2 points, got {}", positions.len())));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("path contains non-finite positions".into()));
        }
        EuclideanParams { mass, hbar, x_start: positions[0] }.validate()?;
        Ok(Self { tau_step, positions, mass, hbar })
    }

    pub fn tau_step(&self) -> f64 {
        self.tau_step
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n_steps(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.n_steps() as f64 * self.tau_step
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,tau,x")?;
        for (k, x) in self.positions.iter().enumerate() {
            writeln!(w, "{k},{},{x}", k as f64 * self.tau_step)?;
        }
        Ok(())
    }
}

fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_sampling(n_steps: usize, tau_step: f64, params: &EuclideanParams) -> Result<()> {
    if n_steps == 0 {
        return Err(Error::Domain("n_steps must be at least 1".into()));
    }
    check_tau(tau_step)?;
    params.validate()
}

/// Path `stream` of the ensemble keyed by `seed`.
pub fn sample_path_stream(
    n_steps: usize,
    tau_step: f64,
    params: &EuclideanParams,
    seed: u64,
    stream: u64,
) -> Result<BrownianPath> {
    check_sampling(n_steps, tau_step, params)?;
    let mut rng = path_rng(seed, stream);
    let step_sd = (params.hbar / params.mass * tau_step).sqrt();
    let mut positions = Vec::with_capacity(n_steps + 1);
    let mut x = params.x_start;
    positions.push(x);
    for _ in 0..n_steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        x += step_sd * z;
        positions.push(x);
    }
    BrownianPath::new(tau_step, positions, params.mass, params.hbar)
}

/// Wiener path starting at `params.x_start`; bit-identical for a given seed.
pub fn sample_path(n_steps: usize, tau_step: f64, params: &EuclideanParams, seed: u64) -> Result<BrownianPath> {
    sample_path_stream(n_steps, tau_step, params, seed, 0)
}

/// Forward-difference kinetic action `Σ (m/2)(x_{k+1} - x_k)² / Δτ`.
pub fn euclidean_action(path: &BrownianPath) -> f64 {
    let c = 0.5 * path.mass / path.tau_step;
    path.positions.windows(2).map(|w| c * (w[1] - w[0]).powi(2)).sum()
}

/// Off-shell action converted to bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoReadout {
    pub action: f64,
    pub hbar: f64,
    pub bits: f64,
}

impl InfoReadout {
    pub const BIT_FACTOR: f64 = BIT_FACTOR;
}

/// `I = S_E / (ħ ln 2)`
pub fn information(action: f64, hbar: f64) -> Result<InfoReadout> {
    if !(action >= 0.0 && action.is_finite()) {
        return Err(Error::Domain(format!("Euclidean action must be non-negative, got {action}")));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
    }
    Ok(InfoReadout { action, hbar, bits: action / (hbar * BIT_FACTOR) })
}

/// `I_tot = Σ_n I_n` for non-interacting particles sharing one `ħ`.
pub fn total_information(readouts: &[InfoReadout]) -> Result<f64> {
    if let Some(first) = readouts.first() {
        if let Some(other) = readouts.iter().find(|r| r.hbar != first.hbar) {
            return Err(Error::Domain(format!(
                "readouts mix hbar values {} and {}",
                first.hbar, other.hbar
            )));
        }
    }
    Ok(readouts.iter().map(|r| r.bits).sum())
}

/// Per-path action and endpoint for a Monte-Carlo run.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSamples {
    pub n_steps: usize,
    pub tau_step: f64,
    pub params: EuclideanParams,
    pub actions: Vec<f64>,
    pub endpoints: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub n_paths: usize,
    pub n_steps: usize,
    #[serde(rename = "mean_SE")]
    pub mean_se: f64,
    #[serde(rename = "var_SE")]
    pub var_se: f64,
    #[serde(rename = "mean_I")]
    pub mean_i: f64,
}

/// Samples `n_paths` independent paths in parallel, keeping only the action
/// and the endpoint of each. Equivalent to calling [`sample_path_stream`]
/// with streams `0..n_paths`.
pub fn sample_ensemble(
    n_paths: usize,
    n_steps: usize,
    tau_step: f64,
    params: &EuclideanParams,
    seed: u64,
) -> Result<PathSamples> {
    check_sampling(n_steps, tau_step, params)?;
    if n_paths == 0 {
        return Err(Error::Domain("n_paths must be at least 1".into()));
    }
    let step_sd = (params.hbar / params.mass * tau_step).sqrt();
    let c = 0.5 * params.mass / tau_step;
    let (actions, endpoints): (Vec<f64>, Vec<f64>) = (0..n_paths as u64)
        .into_par_iter()
        .map(|stream| {
            let mut rng = path_rng(seed, stream);
            let mut x = params.x_start;
            let mut action = 0.0;
            for _ in 0..n_steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                let dx = step_sd * z;
                x += dx;
                action += c * dx * dx;
            }
            (action, x)
        })
        .unzip();
    Ok(PathSamples { n_steps, tau_step, params: *params, actions, endpoints })
}

impl PathSamples {
    pub fn summary(&self) -> MonteCarloSummary {
        let n = self.actions.len() as f64;
        let mean = self.actions.iter().sum::<f64>() / n;
        let var = if self.actions.len() > 1 {
            self.actions.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        MonteCarloSummary {
            n_paths: self.actions.len(),
            n_steps: self.n_steps,
            mean_se: mean,
            var_se: var,
            mean_i: mean / (self.params.hbar * BIT_FACTOR),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_kernel_peak_and_symmetry() {
        let k = heat_kernel(0.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((k - 0.398_942_3).abs() < 1e-7);
        assert_eq!(heat_kernel(1.5, -0.5, 0.7, 1.0, 1.0).unwrap(), heat_kernel(-0.5, 1.5, 0.7, 1.0, 1.0).unwrap());
        assert!(heat_kernel(0.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(wick_check(0.0, 0.0, -1.0, &LorentzianParams::default()).is_err());
    }

    #[test]
    fn action_examples() {
        let flat = BrownianPath::new(0.1, vec![2.0; 5], 1.0, 1.0).unwrap();
        assert_eq!(euclidean_action(&flat), 0.0);
        let step = BrownianPath::new(1.0, vec![0.0, 1.0], 1.0, 1.0).unwrap();
        assert_eq!(euclidean_action(&step), 0.5);
    }

    #[test]
    fn path_validation() {
        assert!(BrownianPath::new(1.0, vec![0.0], 1.0, 1.0).is_err());
        assert!(BrownianPath::new(0.0, vec![0.0, 1.0], 1.0, 1.0).is_err());
        assert!(BrownianPath::new(1.0, vec![0.0, f64::NAN], 1.0, 1.0).is_err());
        let p = EuclideanParams::default();
        assert!(sample_path(0, 0.1, &p, 1).is_err());
        assert!(sample_path(10, -0.1, &p, 1).is_err());
    }

    #[test]
    fn information_examples() {
        assert_eq!(information(0.0, 1.0).unwrap().bits, 0.0);
        assert!((information(BIT_FACTOR, 1.0).unwrap().bits - 1.0).abs() < 1e-15);
        assert!((information(500.0, 1.0).unwrap().bits - 721.347_5).abs() < 1e-4);
        assert!(information(-1.0, 1.0).is_err());
    }

    #[test]
    fn total_information_examples() {
        assert_eq!(total_information(&[]).unwrap(), 0.0);
        let one = information(BIT_FACTOR, 1.0).unwrap();
        assert!((total_information(&[one, one]).unwrap() - 2.0).abs() < 1e-15);
        let other = information(1.0, 2.0).unwrap();
        assert!(total_information(&[one, other]).is_err());
    }

    #[test]
    fn ensemble_matches_individual_streams() {
        let p = EuclideanParams { mass: 2.0, hbar: 0.5, x_start: 1.0 };
        let ens = sample_ensemble(5, 40, 0.05, &p, 11).unwrap();
        for i in 0..5 {
            let path = sample_path_stream(40, 0.05, &p, 11, i as u64).unwrap();
            assert!((euclidean_action(&path) - ens.actions[i]).abs() < 1e-12 * ens.actions[i].max(1.0));
            assert!((path.positions()[40] - ens.endpoints[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_export() {
        let path = BrownianPath::new(0.5, vec![0.0, 1.0, -1.0], 1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "step,tau,x\n0,0,0\n1,0.5,1\n2,1,-1\n");
    }
}
