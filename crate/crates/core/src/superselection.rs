//! Orbital superselection on a Planck-cell lattice.
//!
//! The fine position and momentum operators obey `[Q, P] = iħ`. Coarse
//! versions are built on a lattice of phase-space cells of area
//! `ΔQ·ΔP = h`: a Gaussian coherent state is seeded at every cell centre,
//! the family is symmetrically (Löwdin) orthogonalised, and `Qc`, `Pc` are
//! defined as diagonal in that orthonormal family, so they commute.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, Ensemble, Grid1D, WaveFunction, EIGEN_CUTOFF};

/// Minimum grid points per position cell width.
pub const MIN_POINTS_PER_CELL: f64 = 8.0;
/// Gram eigenvalues below this make the seed family unusable.
pub const GRAM_SINGULAR_CUTOFF: f64 = 1e-10;
/// Population outside the cell family that triggers a warning.
pub const DISCARD_WARNING: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceLattice {
    dq: f64,
    dp: f64,
    hbar: f64,
    q_centers: Vec<f64>,
    p_centers: Vec<f64>,
}

impl PhaseSpaceLattice {
    /// `n_q × n_p` cells centred on the origin. `ΔP` is derived as `h / ΔQ`.
    pub fn new(dq: f64, hbar: f64, n_q: usize, n_p: usize) -> Result<Self> {
        if !(dq > 0.0 && dq.is_finite() && hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Domain(format!("need dq > 0 and hbar > 0, got dq={dq}, hbar={hbar}")));
        }
        if n_q == 0 || n_p == 0 {
            return Err(Error::Domain("lattice needs at least one cell per axis".into()));
        }
        let h = TAU * hbar;
        let dp = h / dq;
        let centers = |n: usize, w: f64| (0..n).map(|j| (j as f64 - (n as f64 - 1.0) / 2.0) * w).collect();
        Ok(Self { dq, dp, hbar, q_centers: centers(n_q, dq), p_centers: centers(n_p, dp) })
    }

    pub fn dq(&self) -> f64 {
        self.dq
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Planck's constant `h = 2πħ`.
    pub fn h(&self) -> f64 {
        TAU * self.hbar
    }

    pub fn q_centers(&self) -> &[f64] {
        &self.q_centers
    }

    pub fn p_centers(&self) -> &[f64] {
        &self.p_centers
    }

    pub fn n_cells(&self) -> usize {
        self.q_centers.len() * self.p_centers.len()
    }

    /// Seed width `σ = √(ħ/2 · ΔQ/ΔP)`; splits the cell evenly between
    /// position and momentum spread.
    pub fn seed_width(&self) -> f64 {
        (self.hbar / 2.0 * self.dq / self.dp).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellLabel {
    pub q_index: usize,
    pub p_index: usize,
    pub q: f64,
    pub p: f64,
    /// On the border of the finite cell window.
    pub edge: bool,
}

/// Orthonormal cell-localised family on a grid.
#[derive(Clone, Debug)]
pub struct CellBasis {
    lattice: PhaseSpaceLattice,
    grid: Grid1D,
    /// Columns are unit vectors in grid coordinates (`ψ_i √dx`).
    vectors: DMatrix<Complex64>,
    labels: Vec<CellLabel>,
    parent_overlaps: Vec<f64>,
}

fn coherent_seed(grid: &Grid1D, q: f64, p: f64, sigma: f64, hbar: f64) -> Result<DVector<Complex64>> {
    let psi = WaveFunction::from_fn(*grid, |x| {
        Complex64::new(-(x - q).powi(2) / (4.0 * sigma * sigma), p * x / hbar).exp()
    })?;
    Ok(psi.to_unit_vector())
}

/// `S^{-1/2}` for a Hermitian positive-definite Gram matrix.
fn inverse_sqrt(gram: DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = gram.nrows();
    let eig = SymmetricEigen::new(gram);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < GRAM_SINGULAR_CUTOFF {
        return Err(Error::SingularGram { n_cells: n, min_eigenvalue: min });
    }
    let d = DVector::from_iterator(n, eig.eigenvalues.iter().map(|&l| Complex64::new(l.powf(-0.5), 0.0)));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint())
}

pub fn build_cell_basis(lattice: &PhaseSpaceLattice, grid: &Grid1D) -> Result<CellBasis> {
    let n_cells = lattice.n_cells();
    if n_cells > grid.n_points() {
        // more seeds than grid dimensions: the Gram matrix has a null space
        return Err(Error::SingularGram { n_cells, min_eigenvalue: 0.0 });
    }
    let dx = grid.dx();
    if lattice.dq / dx < MIN_POINTS_PER_CELL {
        return Err(Error::InvalidGrid(format!(
            "grid spacing {dx} resolves ΔQ = {} with fewer than {MIN_POINTS_PER_CELL} points",
            lattice.dq
        )));
    }
    let sigma = lattice.seed_width();
    let q_lo = lattice.q_centers[0] - lattice.dq / 2.0 - 4.0 * sigma;
    let q_hi = lattice.q_centers[lattice.q_centers.len() - 1] + lattice.dq / 2.0 + 4.0 * sigma;
    if q_lo < grid.x_min() || q_hi > grid.x_max() {
        return Err(Error::InvalidGrid(format!(
            "cells need [{q_lo}, {q_hi}] but grid covers [{}, {}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let p_max = lattice.p_centers.iter().map(|p| p.abs()).fold(0.0, f64::max) + lattice.dp / 2.0;
    let p_nyquist = lattice.hbar * PI / dx;
    if p_max > p_nyquist {
        return Err(Error::InvalidGrid(format!(
            "momentum cells reach {p_max} beyond grid Nyquist momentum {p_nyquist}"
        )));
    }

    let (n_q, n_p) = (lattice.q_centers.len(), lattice.p_centers.len());
    let mut labels = Vec::with_capacity(n_q * n_p);
    let mut seeds = Vec::with_capacity(n_q * n_p);
    for (j, &q) in lattice.q_centers.iter().enumerate() {
        for (k, &p) in lattice.p_centers.iter().enumerate() {
            let edge = j == 0 || k == 0 || j + 1 == n_q || k + 1 == n_p;
            labels.push(CellLabel { q_index: j, p_index: k, q, p, edge });
            seeds.push(coherent_seed(grid, q, p, sigma, lattice.hbar)?);
        }
    }
    let seeds = DMatrix::from_columns(&seeds);

    let mut vectors = &seeds * inverse_sqrt(seeds.adjoint() * &seeds)?;
    // second pass removes the rounding left by the first
    vectors = &vectors * inverse_sqrt(vectors.adjoint() * &vectors)?;

    let parent_overlaps = (0..labels.len())
        .map(|a| seeds.column(a).dotc(&vectors.column(a)).norm())
        .collect();
    Ok(CellBasis { lattice: lattice.clone(), grid: *grid, vectors, labels, parent_overlaps })
}

impl CellBasis {
    pub fn lattice(&self) -> &PhaseSpaceLattice {
        &self.lattice
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[CellLabel] {
        &self.labels
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn vector(&self, a: usize) -> DVector<Complex64> {
        self.vectors.column(a).into_owned()
    }

    /// `|⟨seed_a | v_a⟩|` for each cell.
    pub fn parent_overlaps(&self) -> &[f64] {
        &self.parent_overlaps
    }

    pub fn index_of(&self, q_index: usize, p_index: usize) -> Option<usize> {
        self.labels.iter().position(|l| l.q_index == q_index && l.p_index == p_index)
    }

    /// `max |⟨v_i|v_j⟩ - δ_ij|`
    pub fn gram_deviation(&self) -> f64 {
        let gram = self.vectors.adjoint() * &self.vectors;
        gram.iter()
            .enumerate()
            .map(|(idx, g)| {
                let (i, j) = (idx % gram.nrows(), idx / gram.nrows());
                let target = if i == j { 1.0 } else { 0.0 };
                (g - Complex64::new(target, 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Long-format CSV: one row per (vector, grid point).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "vector,q_index,p_index,grid_index,x,re,im")?;
        for (a, label) in self.labels.iter().enumerate() {
            for i in 0..self.grid.n_points() {
                let z = self.vectors[(i, a)];
                writeln!(w, "{a},{},{},{i},{},{},{}", label.q_index, label.p_index, self.grid.x(i), z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Coarse position and momentum, both diagonal in a [`CellBasis`].
#[derive(Clone, Debug)]
pub struct CoarseObservables {
    pub q_matrix: DMatrix<Complex64>,
    pub p_matrix: DMatrix<Complex64>,
    /// Eigenvalue of `Qc` on each basis vector (cell-centre `q`).
    pub q_spectrum: Vec<f64>,
    pub p_spectrum: Vec<f64>,
}

pub fn build_coarse_observables(basis: &CellBasis) -> CoarseObservables {
    let q_spectrum: Vec<f64> = basis.labels.iter().map(|l| l.q).collect();
    let p_spectrum: Vec<f64> = basis.labels.iter().map(|l| l.p).collect();
    let project = |values: &[f64]| {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        &basis.vectors * DMatrix::from_diagonal(&d) * basis.vectors.adjoint()
    };
    CoarseObservables { q_matrix: project(&q_spectrum), p_matrix: project(&p_spectrum), q_spectrum, p_spectrum }
}

impl CoarseObservables {
    /// `‖QcPc - PcQc‖_F`
    pub fn commutator_norm(&self) -> f64 {
        (&self.q_matrix * &self.p_matrix - &self.p_matrix * &self.q_matrix).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorSample {
    pub expectation_re: f64,
    pub expectation_im: f64,
    pub deviation: f64,
    /// Support reaches the periodic boundary; excluded from the bound.
    pub boundary_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub samples: Vec<CommutatorSample>,
    /// Largest `|⟨[Q,P]⟩ - iħ|` over unflagged states.
    pub max_deviation: f64,
}

/// Relative edge amplitude above which a test state counts as touching the boundary.
pub const BOUNDARY_FLAG_LEVEL: f64 = 1e-8;

/// `⟨ψ|[Q,P]|ψ⟩` with `Q` the grid position and `P = -iħ∂x` applied spectrally.
pub fn fine_commutator_check(grid: &Grid1D, states: &[WaveFunction], hbar: f64) -> Result<CommutatorReport> {
    let n = grid.n_points();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let k = grid.wavenumbers();
    let x = grid.positions();
    let apply_p = |v: &[Complex64]| {
        let mut buf = v.to_vec();
        fwd.process(&mut buf);
        for (a, &kj) in buf.iter_mut().zip(&k) {
            *a *= hbar * kj / n as f64;
        }
        inv.process(&mut buf);
        buf
    };
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(u, v)| u.conj() * v).sum::<Complex64>() * grid.dx()
    };

    let mut samples = Vec::with_capacity(states.len());
    for psi in states {
        if psi.grid() != grid {
            return Err(Error::InvalidState("test state on a different grid".into()));
        }
        let amps = psi.amplitudes();
        let q_psi: Vec<Complex64> = amps.iter().zip(&x).map(|(a, &xi)| a * xi).collect();
        let qp = dot(&q_psi, &apply_p(amps));
        let pq = dot(amps, &apply_p(&q_psi));
        let comm = qp - pq;
        let deviation = (comm - Complex64::new(0.0, hbar)).norm();
        samples.push(CommutatorSample {
            expectation_re: comm.re,
            expectation_im: comm.im,
            deviation,
            boundary_flag: psi.edge_weight(4) > BOUNDARY_FLAG_LEVEL,
        });
    }
    let max_deviation = samples.iter().filter(|s| !s.boundary_flag).map(|s| s.deviation).fold(0.0, f64::max);
    Ok(CommutatorReport { samples, max_deviation })
}

/// Projection of a grid density matrix onto the cell family.
#[derive(Clone, Debug)]
pub struct CellMixture {
    /// `⟨v_a|ρ|v_a⟩` per cell, in basis order.
    pub populations: Vec<f64>,
    /// `1 - Σ populations`: weight outside the finite cell family.
    pub discarded_weight: f64,
    pub warning: bool,
    /// Classical ensemble over cells with population above the eigenvalue
    /// cutoff, renormalised
    /// to the captured weight.
    pub ensemble: Ensemble,
    /// Basis index of each ensemble member.
    pub member_cells: Vec<usize>,
}

pub fn planck_cell_mixture(rho: &DensityMatrix, basis: &CellBasis) -> Result<CellMixture> {
    if rho.dim() != basis.grid.n_points() {
        return Err(Error::DimensionMismatch { expected: basis.grid.n_points(), found: rho.dim() });
    }
    let populations: Vec<f64> = (0..basis.len())
        .map(|a| {
            let v = basis.vectors.column(a);
            v.dotc(&(rho.matrix() * v)).re.max(0.0)
        })
        .collect();
    let captured: f64 = populations.iter().sum();
    if !(captured > 0.0) {
        return Err(Error::InvalidState("state has no weight on the cell family".into()));
    }
    let discarded_weight = (1.0 - captured).max(0.0);
    let member_cells: Vec<usize> = (0..basis.len()).filter(|&a| populations[a] > EIGEN_CUTOFF).collect();
    let kept: f64 = member_cells.iter().map(|&a| populations[a]).sum();
    let members = member_cells.iter().map(|&a| (populations[a] / kept, basis.vector(a))).collect();
    Ok(CellMixture {
        discarded_weight,
        warning: discarded_weight > DISCARD_WARNING,
        ensemble: Ensemble::new(members)?,
        member_cells,
        populations,
    })
}
