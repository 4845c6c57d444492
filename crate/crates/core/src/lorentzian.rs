//! Unitary real-time evolution of a free non-relativistic particle.
//!
//! Free evolution is diagonal in momentum space, so each step is one FFT,
//! a phase multiplication `exp(-i ħ k² dt / 2m)` and an inverse FFT. Boundaries
//! are periodic; callers keep packets well away from them.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{spectral_entropy, EntropyUnit, Grid1D, Spectral, WaveFunction};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzianParams {
    pub mass: f64,
    pub hbar: f64,
    pub dt: f64,
}

impl Default for LorentzianParams {
    fn default() -> Self {
        Self { mass: 1.0, hbar: 1.0, dt: 0.005 }
    }
}

impl LorentzianParams {
    pub fn new(mass: f64, hbar: f64, dt: f64) -> Result<Self> {
        let p = Self { mass, hbar, dt };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mass", self.mass), ("hbar", self.hbar), ("dt", self.dt)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Minimum-uncertainty packet `∝ exp(-(x-x0)²/4σ0² + i p0 x/ħ)`, so that
/// `|ψ|²` has standard deviation `σ0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacketSpec {
    pub x0: f64,
    pub sigma0: f64,
    pub p0: f64,
}

impl GaussianPacketSpec {
    /// Half-width, in units of σ, that must fit inside the grid.
    pub const SUPPORT_SIGMAS: f64 = 6.0;

    pub fn wavefunction(&self, grid: &Grid1D, hbar: f64) -> Result<WaveFunction> {
        if !(self.sigma0 > 0.0) {
            return Err(Error::Domain(format!("sigma0 must be positive, got {}", self.sigma0)));
        }
        let half = Self::SUPPORT_SIGMAS * self.sigma0;
        if self.x0 - half < grid.x_min() || self.x0 + half > grid.x_max() {
            return Err(Error::Domain(format!(
                "packet x0 ± 6σ0 = [{}, {}] leaves grid [{}, {}]",
                self.x0 - half,
                self.x0 + half,
                grid.x_min(),
                grid.x_max()
            )));
        }
        let Self { x0, sigma0, p0 } = *self;
        WaveFunction::from_fn(*grid, |x| {
            Complex64::new(-(x - x0).powi(2) / (4.0 * sigma0 * sigma0), p0 * x / hbar).exp()
        })
    }

    /// `σ(t)² = σ0² + (ħt / 2mσ0)²`
    pub fn width_sq_at(&self, t: f64, mass: f64, hbar: f64) -> f64 {
        self.sigma0.powi(2) + (hbar * t / (2.0 * mass * self.sigma0)).powi(2)
    }

    pub fn mean_at(&self, t: f64, mass: f64) -> f64 {
        self.x0 + self.p0 / mass * t
    }
}

/// Closed-form free kernel `√(m / 2πiħt) · exp(i m (x-x0)² / 2ħt)` at a
/// complex time, principal square-root branch. Real `t > 0` gives the
/// Lorentzian propagator; `t = -iτ` lands on the real heat kernel.
pub fn kernel_at_complex_time(x: f64, x0: f64, t: Complex64, mass: f64, hbar: f64) -> Complex64 {
    let i = Complex64::i();
    let prefactor = (mass / (2.0 * PI * hbar * i * t)).sqrt();
    let phase = i * mass * (x - x0).powi(2) / (2.0 * hbar * t);
    prefactor * phase.exp()
}

/// Real-time free propagator `K(x, x0, t)`.
pub fn free_propagator(x: f64, x0: f64, t: f64, params: &LorentzianParams) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("propagator needs t > 0, got {t}")));
    }
    Ok(kernel_at_complex_time(x, x0, Complex64::new(t, 0.0), params.mass, params.hbar))
}

/// Spectral evolver with cached FFT plans for one grid.
pub struct FreeEvolver {
    grid: Grid1D,
    params: LorentzianParams,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FreeEvolver {
    pub fn new(grid: Grid1D, params: LorentzianParams) -> Result<Self> {
        params.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid,
            params,
            wavenumbers: grid.wavenumbers(),
            forward: planner.plan_fft_forward(grid.n_points()),
            inverse: planner.plan_fft_inverse(grid.n_points()),
        })
    }

    pub fn params(&self) -> &LorentzianParams {
        &self.params
    }

    fn check_grid(&self, psi: &WaveFunction) -> Result<()> {
        if *psi.grid() != self.grid {
            return Err(Error::InvalidState("wavefunction grid does not match evolver grid".into()));
        }
        Ok(())
    }

    /// Exact free evolution over real time `t` (may be negative).
    pub fn evolve_for(&self, psi: &WaveFunction, t: f64) -> Result<WaveFunction> {
        self.check_grid(psi)?;
        if t == 0.0 {
            return Ok(psi.clone());
        }
        let mut buf = psi.amplitudes().to_vec();
        self.forward.process(&mut buf);
        let LorentzianParams { mass, hbar, .. } = self.params;
        let n = buf.len() as f64;
        for (a, &k) in buf.iter_mut().zip(&self.wavenumbers) {
            *a *= Complex64::from_polar(1.0 / n, -hbar * k * k * t / (2.0 * mass));
        }
        self.inverse.process(&mut buf);
        Ok(WaveFunction::from_normalized(self.grid, buf))
    }

    pub fn evolve(&self, psi: &WaveFunction, n_steps: usize) -> Result<WaveFunction> {
        self.evolve_for(psi, n_steps as f64 * self.params.dt)
    }

    /// Steps one `dt` at a time and keeps every `stride`-th snapshot,
    /// including the initial and final states.
    pub fn trajectory(&self, psi: &WaveFunction, n_steps: usize, stride: usize) -> Result<Vec<WaveFunction>> {
        let stride = stride.max(1);
        let mut out = vec![psi.clone()];
        let mut cur = psi.clone();
        for step in 1..=n_steps {
            cur = self.evolve_for(&cur, self.params.dt)?;
            if step % stride == 0 || step == n_steps {
                out.push(cur.clone());
            }
        }
        Ok(out)
    }

    /// `⟨ħ²k²/2m⟩` evaluated in momentum space.
    pub fn kinetic_energy(&self, psi: &WaveFunction) -> Result<f64> {
        self.check_grid(psi)?;
        let mut buf = psi.amplitudes().to_vec();
        self.forward.process(&mut buf);
        let LorentzianParams { mass, hbar, .. } = self.params;
        let (num, den) = buf.iter().zip(&self.wavenumbers).fold((0.0, 0.0), |(num, den), (a, &k)| {
            let w = a.norm_sqr();
            (num + w * hbar * hbar * k * k / (2.0 * mass), den + w)
        });
        Ok(num / den)
    }
}

/// One-shot spectral evolution by `n_steps · dt`.
pub fn evolve(psi: &WaveFunction, n_steps: usize, params: &LorentzianParams) -> Result<WaveFunction> {
    FreeEvolver::new(*psi.grid(), *params)?.evolve(psi, n_steps)
}

/// Largest von Neumann entropy (bits) over a trajectory of snapshots.
/// Unitary evolution of a pure state keeps this at rounding level.
pub fn entropy_drift<S: Spectral>(trajectory: &[S]) -> Result<f64> {
    if trajectory.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    trajectory
        .iter()
        .map(|s| spectral_entropy(s, EntropyUnit::Bits))
        .try_fold(0.0, |acc, s| Ok(f64::max(acc, s?)))
}
