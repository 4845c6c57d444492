//! State representations and entropy functionals.
//!
//! Everything here is finite dimensional. A [`WaveFunction`] lives on a
//! uniform periodic [`Grid1D`]; mixed states are either explicit
//! [`DensityMatrix`] values or weighted [`Ensemble`]s of unit vectors.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bit factor `b = ln 2`: one bit is `ln 2` nats.
pub const BIT_FACTOR: f64 = LN_2;

/// Eigenvalues at or below this are dropped from `-Σ λ log λ`.
pub const EIGEN_CUTOFF: f64 = 1e-12;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-10;
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyUnit {
    #[default]
    Bits,
    Nats,
}

impl EntropyUnit {
    fn log(self, p: f64) -> f64 {
        match self {
            EntropyUnit::Bits => p.log2(),
            EntropyUnit::Nats => p.ln(),
        }
    }
}

/// Uniform periodic grid on `[x_min, x_max)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points must be a power of two >= 8, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in FFT order (`0, 1, …, n/2-1, -n/2, …, -1` times `2π/L`).
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points as i64;
        let dk = std::f64::consts::TAU / self.length();
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dk } else { (j - n) as f64 * dk })
            .collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x < self.x_max
    }
}

/// Complex amplitude sampled on a grid, normalised so that `Σ|ψ|² dx = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    /// Builds a wavefunction and rescales it to unit norm.
    pub fn new(grid: Grid1D, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_points(),
                found: amplitudes.len(),
            });
        }
        let mut psi = Self { grid, amplitudes };
        let norm = psi.norm_sq();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState(format!("cannot normalise amplitude with norm² {norm}")));
        }
        let scale = 1.0 / norm.sqrt();
        psi.amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(psi)
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amps = grid.positions().into_iter().map(f).collect();
        Self::new(grid, amps)
    }

    /// Wraps amplitudes that are already normalised. Used by unitary evolution,
    /// where renormalising would hide rounding drift.
    pub(crate) fn from_normalized(grid: Grid1D, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), grid.n_points());
        Self { grid, amplitudes }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::InvalidState("wavefunctions live on different grids".into()));
        }
        let s: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.dx())
    }

    pub fn probability_density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨x⟩`
    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| self.grid.x(i) * a.norm_sqr())
            .sum::<f64>()
            * dx
            / self.norm_sq()
    }

    /// `⟨(x - ⟨x⟩)²⟩`
    pub fn position_variance(&self) -> f64 {
        let mean = self.mean_position();
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| (self.grid.x(i) - mean).powi(2) * a.norm_sqr())
            .sum::<f64>()
            * dx
            / self.norm_sq()
    }

    /// Coordinates in the orthonormal grid basis (`ψ_i √dx`).
    pub fn to_unit_vector(&self) -> DVector<Complex64> {
        let s = self.grid.dx().sqrt();
        DVector::from_iterator(self.amplitudes.len(), self.amplitudes.iter().map(|a| a * s))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(&self.to_unit_vector())
    }

    pub fn conj(&self) -> WaveFunction {
        Self::from_normalized(self.grid, self.amplitudes.iter().map(|a| a.conj()).collect())
    }

    /// Largest `|ψ|` over the first and last `width` grid points, relative to the peak.
    pub fn edge_weight(&self, width: usize) -> f64 {
        let n = self.amplitudes.len();
        let width = width.min(n / 2);
        let peak = self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let edge = self.amplitudes[..width]
            .iter()
            .chain(&self.amplitudes[n - width..])
            .map(|a| a.norm())
            .fold(0.0, f64::max);
        if peak > 0.0 { edge / peak } else { 0.0 }
    }
}

/// Finite-dimensional mixed state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(entries)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Only checks that the matrix is square. [`vn_entropy`] and friends
    /// still validate before using it.
    pub fn from_matrix_unchecked(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    /// `|v⟩⟨v|` for a unit vector `v`.
    pub fn from_pure(v: &DVector<Complex64>) -> Result<Self> {
        check_unit(v)?;
        Self::new(v * v.adjoint())
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(p.len(), p.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::new(DMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.entries.adjoint();
        self.entries
            .iter()
            .zip(adj.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    fn validate_cheap(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (max |ρ-ρ†| = {herm:e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_cheap()?;
        if let Some(&lowest) = self.eigenvalues().first() {
            if lowest < -PSD_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {lowest:e}")));
            }
        }
        Ok(())
    }
}

fn check_unit(v: &DVector<Complex64>) -> Result<()> {
    let n = v.norm();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidState(format!("state vector has norm {n}, expected 1")));
    }
    Ok(())
}

/// Weighted collection of unit state vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, DVector<Complex64>)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, DVector<Complex64>)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::Empty("ensemble members"));
        };
        let dim = first.len();
        let mut total = 0.0;
        for (w, v) in &members {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            if !(0.0..=1.0).contains(w) {
                return Err(Error::InvalidDistribution(format!("weight {w} outside [0, 1]")));
            }
            check_unit(v)?;
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { members })
    }

    pub fn pure(v: DVector<Complex64>) -> Result<Self> {
        Self::new(vec![(1.0, v)])
    }

    pub fn members(&self) -> &[(f64, DVector<Complex64>)] {
        &self.members
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|(w, _)| *w).collect()
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.len()
    }

    /// Exactly one member of weight one.
    pub fn is_pure(&self) -> bool {
        self.members.len() == 1
    }

    /// Nonzero spectrum of `Σ w |v⟩⟨v|` via the weighted Gram matrix
    /// `G_ij = √(w_i w_j) ⟨v_i|v_j⟩`, which shares it. Cost scales with the
    /// member count, not the Hilbert-space dimension.
    pub fn spectrum(&self) -> Vec<f64> {
        let n = self.members.len();
        let gram = DMatrix::from_fn(n, n, |i, j| {
            let (wi, vi) = &self.members[i];
            let (wj, vj) = &self.members[j];
            vi.dotc(vj) * (wi * wj).sqrt()
        });
        let mut ev: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// `ρ = Σ w_i |v_i⟩⟨v_i|`.
pub fn ensemble_to_density(e: &Ensemble) -> Result<DensityMatrix> {
    let dim = e.dim();
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for (w, v) in e.members() {
        rho += v * v.adjoint() * Complex64::new(*w, 0.0);
    }
    DensityMatrix::new(rho)
}

/// Anything with a well-defined density-operator spectrum.
pub trait Spectral {
    fn spectrum(&self) -> Result<Vec<f64>>;
}

impl Spectral for DensityMatrix {
    fn spectrum(&self) -> Result<Vec<f64>> {
        self.validate_cheap()?;
        Ok(self.eigenvalues())
    }
}

impl Spectral for Ensemble {
    fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(Ensemble::spectrum(self))
    }
}

impl Spectral for WaveFunction {
    /// Rank one: the single nonzero eigenvalue of `|ψ⟩⟨ψ|` is `⟨ψ|ψ⟩`.
    fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(vec![self.norm_sq()])
    }
}

fn entropy_of_spectrum(eigenvalues: &[f64], unit: EntropyUnit) -> Result<f64> {
    if let Some(&bad) = eigenvalues.iter().find(|&&l| l < -PSD_TOL) {
        return Err(Error::InvalidState(format!("negative eigenvalue {bad:e}")));
    }
    // normalise by the retained trace so that rounding in the trace does not
    // leak into the entropy
    let kept: Vec<f64> = eigenvalues.iter().copied().filter(|&l| l > EIGEN_CUTOFF).collect();
    let total: f64 = kept.iter().sum();
    let s: f64 = kept.iter().map(|&l| l / total).map(|l| -l * unit.log(l)).sum();
    // -λ log λ with λ = 1 - ε gives ~ -0.0 or tiny negatives
    Ok(s.max(0.0))
}

/// Von Neumann entropy `-tr ρ log ρ`.
pub fn vn_entropy(rho: &DensityMatrix, unit: EntropyUnit) -> Result<f64> {
    entropy_of_spectrum(&rho.spectrum()?, unit)
}

/// Von Neumann entropy of any [`Spectral`] state.
pub fn spectral_entropy<S: Spectral + ?Sized>(state: &S, unit: EntropyUnit) -> Result<f64> {
    entropy_of_spectrum(&state.spectrum()?, unit)
}

/// `-Σ p log p`, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64], unit: EntropyUnit) -> Result<f64> {
    if let Some(&bad) = p.iter().find(|&&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidDistribution(format!("entry {bad} is not a probability")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {total}, expected 1")));
    }
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * unit.log(x)).sum();
    Ok(h.max(0.0))
}
