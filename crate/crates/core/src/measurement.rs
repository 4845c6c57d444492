//! Two-step projective measurement and the regime ledger.
//!
//! A measurement is a non-selective step `ρ → Σ P ρ P` (a classical mixture
//! over outcomes, nothing selected yet) followed by event reading, which picks
//! one outcome with Born probability and collapses onto it. The
//! [`RegimeLedger`] records the resulting sequence of phases with their
//! `(S_vN, I)` values, and Euclidean duals are attached to the zero-entropy
//! Lorentzian phases that lie outside measurement windows.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclidean::{euclidean_action, information, sample_path_stream, EuclideanParams};
use crate::qstate::{shannon_entropy, vn_entropy, DensityMatrix, EntropyUnit};

pub const FAMILY_TOL: f64 = 1e-12;
pub const COMMUTE_TOL: f64 = 1e-10;
/// Entropies and informations below this are recorded as exactly zero.
pub const LEDGER_ZERO_TOL: f64 = 1e-9;
pub const LEDGER_SCHEMA_VERSION: u32 = 1;

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Complete set of orthogonal projectors with outcome labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveFamily {
    projectors: Vec<DMatrix<Complex64>>,
    labels: Vec<String>,
}

impl ProjectiveFamily {
    pub fn new(projectors: Vec<DMatrix<Complex64>>, labels: Vec<String>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidFamily("no projectors".into()));
        }
        if labels.len() != projectors.len() {
            return Err(Error::InvalidFamily(format!(
                "{} labels for {} projectors",
                labels.len(),
                projectors.len()
            )));
        }
        let dim = projectors[0].nrows();
        let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
        for (i, p) in projectors.iter().enumerate() {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.nrows() });
            }
            let herm = max_abs(&(p - p.adjoint()));
            let idem = max_abs(&(p * p - p));
            if herm > FAMILY_TOL || idem > FAMILY_TOL {
                return Err(Error::InvalidFamily(format!(
                    "projector {i} is not a Hermitian idempotent (|P-P†| = {herm:e}, |P²-P| = {idem:e})"
                )));
            }
            for (j, q) in projectors.iter().enumerate().skip(i + 1) {
                let overlap = max_abs(&(p * q));
                if overlap > FAMILY_TOL {
                    return Err(Error::InvalidFamily(format!("projectors {i} and {j} overlap ({overlap:e})")));
                }
            }
            sum += p;
        }
        let incompleteness = max_abs(&(sum - DMatrix::identity(dim, dim)));
        if incompleteness > FAMILY_TOL {
            return Err(Error::InvalidFamily(format!("projectors do not sum to identity ({incompleteness:e})")));
        }
        Ok(Self { projectors, labels })
    }

    /// Rank-one projectors onto an orthonormal basis.
    pub fn from_basis(vectors: &[DVector<Complex64>], labels: Vec<String>) -> Result<Self> {
        Self::new(vectors.iter().map(|v| v * v.adjoint()).collect(), labels)
    }

    /// `|i⟩⟨i|` for `i < dim`, labelled `"0"`, `"1"`, ….
    pub fn computational(dim: usize) -> Result<Self> {
        let vectors: Vec<_> = (0..dim)
            .map(|i| {
                let mut v = DVector::zeros(dim);
                v[i] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::from_basis(&vectors, (0..dim).map(|i| i.to_string()).collect())
    }

    /// Qubit `X` basis, outcomes `"+"` and `"-"`.
    pub fn qubit_x() -> Result<Self> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DVector::from_column_slice(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]);
        let minus = DVector::from_column_slice(&[Complex64::new(s, 0.0), Complex64::new(-s, 0.0)]);
        Self::from_basis(&[plus, minus], vec!["+".into(), "-".into()])
    }

    /// Projectors onto groups of computational basis states.
    pub fn from_blocks(dim: usize, blocks: &[Vec<usize>], labels: Vec<String>) -> Result<Self> {
        let mut projectors = Vec::with_capacity(blocks.len());
        for block in blocks {
            let mut p = DMatrix::zeros(dim, dim);
            for &i in block {
                if i >= dim {
                    return Err(Error::InvalidFamily(format!("basis index {i} out of range for dim {dim}")));
                }
                p[(i, i)] = Complex64::new(1.0, 0.0);
            }
            projectors.push(p);
        }
        Self::new(projectors, labels)
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[DMatrix<Complex64>] {
        &self.projectors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rank(&self, i: usize) -> usize {
        self.projectors[i].trace().re.round() as usize
    }

    fn check_dim(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        Ok(())
    }
}

/// `tr(P_k ρ)` for each outcome.
pub fn born_probabilities(rho: &DensityMatrix, family: &ProjectiveFamily) -> Result<Vec<f64>> {
    family.check_dim(rho)?;
    let raw: Vec<f64> = family.projectors.iter().map(|p| (p * rho.matrix()).trace().re.max(0.0)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|p| p / total).collect())
}

/// Non-selective measurement (decoherence): `ρ' = Σ P_k ρ P_k`.
pub fn nonselective(rho: &DensityMatrix, family: &ProjectiveFamily) -> Result<DensityMatrix> {
    family.check_dim(rho)?;
    let dim = rho.dim();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for p in &family.projectors {
        out += p * rho.matrix() * p;
    }
    // symmetrise away rounding so the result passes the Hermitian check
    let out = (&out + out.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(out)
}

#[derive(Clone, Debug)]
pub struct EventReading {
    pub outcome: usize,
    pub label: String,
    pub post_state: DensityMatrix,
    /// Shannon entropy (bits) of the Born distribution: the expected
    /// information acquired by the reading system.
    pub info_gain_bits: f64,
    pub probabilities: Vec<f64>,
    /// The collapsed state is still mixed (degenerate projector).
    pub partial: bool,
}

/// Event reading with an explicit seed.
pub fn read_event(rho_mixed: &DensityMatrix, family: &ProjectiveFamily, seed: u64) -> Result<EventReading> {
    read_event_with(rho_mixed, family, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Event reading from an already-decohered state. The state must commute
/// with every projector: the outcome is already fixed in the mixture and
/// reading only selects it.
pub fn read_event_with<R: Rng + ?Sized>(
    rho_mixed: &DensityMatrix,
    family: &ProjectiveFamily,
    rng: &mut R,
) -> Result<EventReading> {
    family.check_dim(rho_mixed)?;
    for (index, p) in family.projectors.iter().enumerate() {
        let deviation = max_abs(&(p * rho_mixed.matrix() - rho_mixed.matrix() * p));
        if deviation > COMMUTE_TOL {
            return Err(Error::NonCommuting { index, deviation });
        }
    }
    let probabilities = born_probabilities(rho_mixed, family)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut outcome = None;
    for (k, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        outcome = Some(k);
        if u < acc {
            break;
        }
    }
    let outcome = outcome.ok_or_else(|| Error::InvalidState("no outcome has positive probability".into()))?;
    let p = &family.projectors[outcome];
    let collapsed = p * rho_mixed.matrix() * p / Complex64::new(probabilities[outcome], 0.0);
    let collapsed = (&collapsed + collapsed.adjoint()) * Complex64::new(0.5, 0.0);
    let post_state = DensityMatrix::new(collapsed)?;
    let partial = vn_entropy(&post_state, EntropyUnit::Bits)? > LEDGER_ZERO_TOL;
    Ok(EventReading {
        outcome,
        label: family.labels[outcome].clone(),
        info_gain_bits: shannon_entropy(&probabilities, EntropyUnit::Bits)?,
        post_state,
        probabilities,
        partial,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Lorentzian,
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseKind {
    Unitary,
    PostNonselective,
    PostRead,
    EuclideanDual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub regime: Regime,
    pub kind: PhaseKind,
    #[serde(rename = "S_vN_bits")]
    pub s_vn_bits: f64,
    #[serde(rename = "I_bits")]
    pub i_bits: f64,
    /// Real time for Lorentzian records, imaginary time for duals.
    pub span: (f64, f64),
    /// Inside a measurement window `t_i ≤ t ≤ t_f`.
    #[serde(default)]
    pub in_measurement_window: bool,
    /// Index of the Lorentzian record this dual continues.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_of: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    /// Information archived by the reading system at a post-read record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acquired_bits: Option<f64>,
    /// Off-shell Euclidean action behind a dual's information.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<f64>,
    #[serde(default)]
    pub partial: bool,
}

impl PhaseRecord {
    fn lorentzian(kind: PhaseKind, start: f64) -> Self {
        Self {
            regime: Regime::Lorentzian,
            kind,
            s_vn_bits: 0.0,
            i_bits: 0.0,
            span: (start, start),
            in_measurement_window: false,
            dual_of: None,
            outcome: None,
            acquired_bits: None,
            action: None,
            partial: false,
        }
    }

    /// Zero-entropy Lorentzian phase outside any measurement window.
    pub fn admits_dual(&self) -> bool {
        self.regime == Regime::Lorentzian
            && matches!(self.kind, PhaseKind::Unitary | PhaseKind::PostRead)
            && !self.partial
            && !self.in_measurement_window
    }
}

fn snap(x: f64) -> f64 {
    if x.abs() < LEDGER_ZERO_TOL { 0.0 } else { x }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegimeLedger {
    pub schema_version: u32,
    pub records: Vec<PhaseRecord>,
}

impl RegimeLedger {
    pub fn lorentzian_records(&self) -> impl Iterator<Item = &PhaseRecord> {
        self.records.iter().filter(|r| r.regime == Regime::Lorentzian)
    }

    pub fn duals(&self) -> impl Iterator<Item = &PhaseRecord> {
        self.records.iter().filter(|r| r.kind == PhaseKind::EuclideanDual)
    }

    /// Kind sequence of the Lorentzian records.
    pub fn lorentzian_pattern(&self) -> Vec<PhaseKind> {
        self.lorentzian_records().map(|r| r.kind).collect()
    }

    /// Checks record invariants, the `unitary (post-nonselective post-read)*`
    /// grammar of the Lorentzian row, and dual attachment.
    pub fn validate(&self) -> Result<()> {
        let bad = |i: usize, msg: &str| Err(Error::Schedule(format!("record {i}: {msg}")));
        let mut expected = PhaseKind::Unitary;
        let mut dual_targets = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            match (r.regime, r.kind) {
                (Regime::Lorentzian, PhaseKind::EuclideanDual) | (Regime::Euclidean, PhaseKind::Unitary)
                | (Regime::Euclidean, PhaseKind::PostNonselective) | (Regime::Euclidean, PhaseKind::PostRead) => {
                    return bad(i, "kind does not belong to regime");
                }
                _ => {}
            }
            match r.kind {
                PhaseKind::Unitary => {
                    if r.s_vn_bits != 0.0 || r.i_bits != 0.0 {
                        return bad(i, "unitary phase must have S_vN = 0 and I = 0");
                    }
                }
                PhaseKind::PostNonselective => {
                    // a certain outcome (I = 0) leaves the state pure
                    if r.s_vn_bits < 0.0 || r.i_bits < 0.0 || (r.s_vn_bits == 0.0 && r.i_bits > 0.0) {
                        return bad(i, "post-nonselective phase needs S_vN > 0 and I >= 0");
                    }
                    if !r.in_measurement_window {
                        return bad(i, "post-nonselective phase must lie in a measurement window");
                    }
                }
                PhaseKind::PostRead => {
                    if r.i_bits != 0.0 || (!r.partial && r.s_vn_bits != 0.0) {
                        return bad(i, "post-read phase must reset to S_vN = 0 and I = 0");
                    }
                }
                PhaseKind::EuclideanDual => {
                    if !(r.s_vn_bits > 0.0 && r.i_bits > 0.0) {
                        return bad(i, "dual needs S_vN = A_TN > 0 and I > 0");
                    }
                    let Some(target) = r.dual_of else {
                        return bad(i, "dual without a Lorentzian target");
                    };
                    match self.records.get(target) {
                        Some(t) if t.admits_dual() => dual_targets.push(target),
                        _ => return bad(i, "dual attached to a record that admits none"),
                    }
                }
            }
            if r.regime == Regime::Lorentzian {
                let ok = match (expected, r.kind) {
                    (PhaseKind::Unitary, PhaseKind::Unitary) => {
                        expected = PhaseKind::PostNonselective;
                        true
                    }
                    (PhaseKind::PostNonselective, PhaseKind::PostNonselective) => {
                        expected = PhaseKind::PostRead;
                        true
                    }
                    (PhaseKind::PostRead, PhaseKind::PostRead) => {
                        expected = PhaseKind::PostNonselective;
                        true
                    }
                    _ => false,
                };
                if !ok {
                    return bad(i, "Lorentzian records break the unitary → post-nonselective → post-read alternation");
                }
            }
        }
        if expected == PhaseKind::Unitary && !self.records.is_empty() {
            return bad(0, "no leading unitary record");
        }
        if expected == PhaseKind::PostRead {
            return bad(self.records.len() - 1, "measurement without a read");
        }
        let n = dual_targets.len();
        dual_targets.sort_unstable();
        dual_targets.dedup();
        if dual_targets.len() != n {
            return Err(Error::Schedule("a record carries more than one dual".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Debug)]
pub enum Segment {
    Unitary { start: f64, end: f64 },
    /// Measurement window `[start, end]`: decoherence over the window, event
    /// read at `end`.
    Measurement { start: f64, end: f64, family: ProjectiveFamily },
}

impl Segment {
    pub fn span(&self) -> (f64, f64) {
        match *self {
            Segment::Unitary { start, end } | Segment::Measurement { start, end, .. } => (start, end),
        }
    }
}

/// Measured system and its free dynamics between measurements.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    /// Must be pure.
    pub initial: DensityMatrix,
    /// Generator of unitary evolution; `None` means the state is stationary.
    pub hamiltonian: Option<DMatrix<Complex64>>,
    pub hbar: f64,
    pub t0: f64,
    /// Seeds the event-reading generator.
    pub seed: u64,
}

fn unitary_step(h: &DMatrix<Complex64>, dt: f64, hbar: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let phases = DVector::from_iterator(n, eig.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * dt / hbar)));
    &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint()
}

/// Runs a time-ordered schedule and records the Lorentzian phases: each
/// measurement expands into a post-nonselective record over its window and a
/// post-read record that lasts until the next measurement.
pub fn run_lorentzian_schedule(segments: &[Segment], system: &SystemSpec) -> Result<RegimeLedger> {
    if !(system.hbar > 0.0) {
        return Err(Error::Domain(format!("hbar must be positive, got {}", system.hbar)));
    }
    if vn_entropy(&system.initial, EntropyUnit::Bits)? > LEDGER_ZERO_TOL {
        return Err(Error::InvalidState("initial state of a schedule must be pure".into()));
    }
    if let Some(h) = &system.hamiltonian {
        if h.nrows() != system.initial.dim() || h.ncols() != system.initial.dim() {
            return Err(Error::DimensionMismatch { expected: system.initial.dim(), found: h.nrows() });
        }
        if max_abs(&(h - h.adjoint())) > FAMILY_TOL {
            return Err(Error::Domain("Hamiltonian is not Hermitian".into()));
        }
    }
    let mut cursor = system.t0;
    for (i, seg) in segments.iter().enumerate() {
        let (start, end) = seg.span();
        if !(start.is_finite() && end.is_finite()) || end < start {
            return Err(Error::Schedule(format!("segment {i} has invalid span [{start}, {end}]")));
        }
        if start < cursor {
            return Err(Error::Schedule(format!("segment {i} starts at {start}, overlapping time {cursor}")));
        }
        cursor = end;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(system.seed);
    let mut rho = system.initial.clone();
    let mut now = system.t0;
    let evolve_to = |rho: &mut DensityMatrix, now: &mut f64, t: f64| -> Result<()> {
        if let Some(h) = &system.hamiltonian {
            if t > *now {
                let u = unitary_step(h, t - *now, system.hbar);
                let m = &u * rho.matrix() * u.adjoint();
                *rho = DensityMatrix::new((&m + m.adjoint()) * Complex64::new(0.5, 0.0))?;
            }
        }
        *now = t;
        Ok(())
    };

    let mut records = Vec::new();
    let mut open = PhaseRecord::lorentzian(PhaseKind::Unitary, system.t0);
    for seg in segments {
        match seg {
            Segment::Unitary { end, .. } => {
                evolve_to(&mut rho, &mut now, *end)?;
                open.span.1 = *end;
            }
            Segment::Measurement { start, end, family } => {
                evolve_to(&mut rho, &mut now, *start)?;
                open.span.1 = *start;
                records.push(std::mem::replace(&mut open, PhaseRecord::lorentzian(PhaseKind::PostRead, *end)));

                let decohered = nonselective(&rho, family)?;
                let reading = read_event_with(&decohered, family, &mut rng)?;
                let mut window = PhaseRecord::lorentzian(PhaseKind::PostNonselective, *start);
                window.span.1 = *end;
                window.in_measurement_window = true;
                window.s_vn_bits = snap(vn_entropy(&decohered, EntropyUnit::Bits)?);
                window.i_bits = snap(reading.info_gain_bits);
                records.push(window);

                open.s_vn_bits = snap(vn_entropy(&reading.post_state, EntropyUnit::Bits)?);
                open.partial = reading.partial;
                open.outcome = Some(reading.label);
                open.acquired_bits = Some(snap(reading.info_gain_bits));
                rho = reading.post_state;
                now = *end;
            }
        }
    }
    records.push(open);
    let ledger = RegimeLedger { schema_version: LEDGER_SCHEMA_VERSION, records };
    ledger.validate()?;
    Ok(ledger)
}

/// How dual imaginary-time paths are sampled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualSampler {
    pub params: EuclideanParams,
    /// Target Δτ; each dual uses the nearest step that tiles its span, and
    /// at least one step.
    pub tau_step: f64,
    pub seed: u64,
}

/// Adds one Euclidean dual after every zero-entropy Lorentzian record outside
/// a measurement window, carrying `S_vN = A_TN` and `I = S_E/(ħ ln 2)` from a
/// Brownian path over the same span in imaginary time. Dual for Lorentzian
/// record `r` samples stream `r` of the sampler seed.
pub fn attach_euclidean_duals(ledger: &RegimeLedger, a_tn: f64, sampler: &DualSampler) -> Result<RegimeLedger> {
    if !(a_tn > 0.0 && a_tn.is_finite()) {
        return Err(Error::Domain(format!("A_TN must be positive, got {a_tn}")));
    }
    if ledger.duals().next().is_some() {
        return Err(Error::Schedule("ledger already carries Euclidean duals".into()));
    }
    if !(sampler.tau_step > 0.0) {
        return Err(Error::Domain(format!("tau_step must be positive, got {}", sampler.tau_step)));
    }
    let mut records = Vec::with_capacity(2 * ledger.records.len());
    for (r, rec) in ledger.records.iter().enumerate() {
        let target = records.len();
        records.push(rec.clone());
        if !rec.admits_dual() {
            continue;
        }
        let duration = rec.span.1 - rec.span.0;
        let n_steps = ((duration / sampler.tau_step).round() as usize).max(1);
        let step = if duration > 0.0 { duration / n_steps as f64 } else { sampler.tau_step };
        let path = sample_path_stream(n_steps, step, &sampler.params, sampler.seed, r as u64)?;
        let action = euclidean_action(&path);
        let readout = information(action, sampler.params.hbar)?;
        records.push(PhaseRecord {
            regime: Regime::Euclidean,
            kind: PhaseKind::EuclideanDual,
            s_vn_bits: a_tn,
            i_bits: readout.bits,
            span: (rec.span.0, rec.span.0 + path.duration()),
            in_measurement_window: false,
            dual_of: Some(target),
            outcome: None,
            acquired_bits: None,
            action: Some(action),
            partial: false,
        });
    }
    let out = RegimeLedger { schema_version: ledger.schema_version, records };
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&DVector::from_column_slice(&[c(s), c(s)])).unwrap()
    }

    #[test]
    fn family_validation() {
        assert!(ProjectiveFamily::computational(3).is_ok());
        let p0 = DMatrix::from_diagonal(&DVector::from_column_slice(&[c(1.0), c(0.0)]));
        let incomplete = ProjectiveFamily::new(vec![p0.clone()], vec!["0".into()]);
        assert!(matches!(incomplete, Err(Error::InvalidFamily(_))));
        let not_idem = DMatrix::from_diagonal(&DVector::from_column_slice(&[c(0.5), c(0.5)]));
        assert!(ProjectiveFamily::new(vec![not_idem.clone(), not_idem], vec!["a".into(), "b".into()]).is_err());
        assert!(ProjectiveFamily::new(vec![p0.clone(), p0], vec!["a".into(), "b".into()]).is_err());
    }

    #[test]
    fn decoherence_of_plus() {
        let z = ProjectiveFamily::computational(2).unwrap();
        let out = nonselective(&plus(), &z).unwrap();
        assert!((out.matrix() - DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap().matrix()).norm() < 1e-15);
        assert!((vn_entropy(&out, EntropyUnit::Bits).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_state_is_fixed_point() {
        let z = ProjectiveFamily::computational(3).unwrap();
        let rho = DensityMatrix::from_diagonal(&[0.2, 0.5, 0.3]).unwrap();
        assert_eq!(nonselective(&rho, &z).unwrap(), rho);
    }

    #[test]
    fn read_event_rejects_coherent_input() {
        let z = ProjectiveFamily::computational(2).unwrap();
        assert!(matches!(read_event(&plus(), &z, 1), Err(Error::NonCommuting { .. })));
    }

    #[test]
    fn certain_outcome_reading() {
        let z = ProjectiveFamily::computational(2).unwrap();
        let rho = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        for seed in 0..20 {
            let r = read_event(&rho, &z, seed).unwrap();
            assert_eq!(r.outcome, 0);
            assert_eq!(r.info_gain_bits, 0.0);
        }
    }

    #[test]
    fn skewed_info_gain() {
        let z = ProjectiveFamily::computational(2).unwrap();
        let rho = DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap();
        let r = read_event(&rho, &z, 3).unwrap();
        assert!((r.info_gain_bits - 0.811_278_1).abs() < 1e-7);
        assert!(!r.partial);
    }

    #[test]
    fn degenerate_projector_gives_partial_read() {
        let fam = ProjectiveFamily::from_blocks(3, &[vec![0, 1], vec![2]], vec!["low".into(), "high".into()]).unwrap();
        let rho = DensityMatrix::from_diagonal(&[0.4, 0.4, 0.2]).unwrap();
        let mut saw_partial = false;
        for seed in 0..20 {
            let r = read_event(&rho, &fam, seed).unwrap();
            if r.outcome == 0 {
                assert!(r.partial);
                assert!((vn_entropy(&r.post_state, EntropyUnit::Bits).unwrap() - 1.0).abs() < 1e-12);
                saw_partial = true;
            }
        }
        assert!(saw_partial);
    }

    #[test]
    fn schedule_validation() {
        let sys = SystemSpec { initial: plus(), hamiltonian: None, hbar: 1.0, t0: 0.0, seed: 1 };
        let z = ProjectiveFamily::computational(2).unwrap();
        let overlapping = vec![
            Segment::Unitary { start: 0.0, end: 2.0 },
            Segment::Measurement { start: 1.0, end: 3.0, family: z.clone() },
        ];
        assert!(matches!(run_lorentzian_schedule(&overlapping, &sys), Err(Error::Schedule(_))));
        let reversed = vec![Segment::Unitary { start: 2.0, end: 1.0 }];
        assert!(run_lorentzian_schedule(&reversed, &sys).is_err());
        let mixed = SystemSpec { initial: DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap(), ..sys };
        assert!(run_lorentzian_schedule(&[], &mixed).is_err());
    }

    #[test]
    fn duals_need_positive_area() {
        let sys = SystemSpec { initial: plus(), hamiltonian: None, hbar: 1.0, t0: 0.0, seed: 1 };
        let ledger = run_lorentzian_schedule(&[], &sys).unwrap();
        let sampler = DualSampler { params: EuclideanParams::default(), tau_step: 0.1, seed: 2 };
        assert!(attach_euclidean_duals(&ledger, 0.0, &sampler).is_err());
        let with = attach_euclidean_duals(&ledger, 9.0, &sampler).unwrap();
        assert!(attach_euclidean_duals(&with, 9.0, &sampler).is_err());
    }

    #[test]
    fn ledger_json_roundtrip() {
        let sys = SystemSpec { initial: plus(), hamiltonian: None, hbar: 1.0, t0: 0.0, seed: 5 };
        let z = ProjectiveFamily::computational(2).unwrap();
        let ledger = run_lorentzian_schedule(
            &[Segment::Unitary { start: 0.0, end: 1.0 }, Segment::Measurement { start: 1.0, end: 1.5, family: z }],
            &sys,
        )
        .unwrap();
        let json = ledger.to_json().unwrap();
        assert!(json.contains("\"S_vN_bits\"") && json.contains("\"post-nonselective\""));
        assert_eq!(RegimeLedger::from_json(&json).unwrap(), ledger);
    }
}
