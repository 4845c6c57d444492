use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use wickledger::qstate::{
    ensemble_to_density, shannon_entropy, vn_entropy, DensityMatrix, Ensemble, EntropyUnit,
};

fn complex_matrix(dim: usize, entries: &[(f64, f64)]) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        let (re, im) = entries[i * dim + j];
        Complex64::new(re, im)
    })
}

/// Haar-ish unitary from the QR factor of a random complex matrix.
fn unitary(dim: usize, entries: &[(f64, f64)]) -> DMatrix<Complex64> {
    complex_matrix(dim, entries).qr().q()
}

/// Random density matrix `A A† / tr(A A†)`.
fn density(dim: usize, entries: &[(f64, f64)]) -> DensityMatrix {
    let a = complex_matrix(dim, entries);
    let m = &a * a.adjoint();
    let tr = m.trace();
    let m = m / tr;
    DensityMatrix::new((&m + m.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

fn entries(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_unitarily_invariant(dim in 2usize..6, seed in entries(5), useed in entries(5)) {
        let rho = density(dim, &seed);
        let u = unitary(dim, &useed);
        let rotated = &u * rho.matrix() * u.adjoint();
        let rotated = DensityMatrix::new((&rotated + rotated.adjoint()) * Complex64::new(0.5, 0.0)).unwrap();
        let s0 = vn_entropy(&rho, EntropyUnit::Bits).unwrap();
        let s1 = vn_entropy(&rotated, EntropyUnit::Bits).unwrap();
        prop_assert!((s0 - s1).abs() < 1e-9);
    }

    #[test]
    fn entropy_equals_shannon_of_spectrum(dim in 2usize..6, seed in entries(5)) {
        let rho = density(dim, &seed);
        let ev: Vec<f64> = rho.eigenvalues().into_iter().map(|l| l.max(0.0)).collect();
        let total: f64 = ev.iter().sum();
        let p: Vec<f64> = ev.iter().map(|l| l / total).collect();
        let s = vn_entropy(&rho, EntropyUnit::Bits).unwrap();
        prop_assert!((s - shannon_entropy(&p, EntropyUnit::Bits).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn classical_ensemble_entropy_is_shannon(raw in prop::collection::vec(0.01..1.0f64, 2..6), useed in entries(5)) {
        let dim = raw.len();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let u = unitary(dim, &useed);
        let members = w.iter().enumerate().map(|(i, &wi)| (wi, u.column(i).into_owned())).collect();
        let e = Ensemble::new(members).unwrap();
        let rho = ensemble_to_density(&e).unwrap();
        let s = vn_entropy(&rho, EntropyUnit::Bits).unwrap();
        prop_assert!((s - shannon_entropy(&w, EntropyUnit::Bits).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn zero_entropy_iff_pure(dim in 2usize..6, seed in entries(5), mix in 0.0..1.0f64) {
        let v: DVector<Complex64> = complex_matrix(5, &seed).column(0).rows(0, dim).into_owned();
        let v = &v / Complex64::new(v.norm(), 0.0);
        let pure = DensityMatrix::from_pure(&v).unwrap();
        prop_assert!(vn_entropy(&pure, EntropyUnit::Bits).unwrap() < 1e-10);
        prop_assert!((pure.eigenvalues().last().unwrap() - 1.0).abs() < 1e-10);

        // mixing with the maximally mixed state leaves no unit eigenvalue
        let mixed = pure.matrix() * Complex64::new(mix, 0.0)
            + DMatrix::identity(dim, dim) * Complex64::new((1.0 - mix) / dim as f64, 0.0);
        let mixed = DensityMatrix::new(mixed).unwrap();
        let s = vn_entropy(&mixed, EntropyUnit::Bits).unwrap();
        let top = *mixed.eigenvalues().last().unwrap();
        prop_assert_eq!(s < 1e-10, (top - 1.0).abs() < 1e-10);
    }
}

#[test]
fn entropy_units_differ_by_bit_factor() {
    let rho = DensityMatrix::from_diagonal(&[0.6, 0.3, 0.1]).unwrap();
    let bits = vn_entropy(&rho, EntropyUnit::Bits).unwrap();
    let nats = vn_entropy(&rho, EntropyUnit::Nats).unwrap();
    assert!((nats - bits * wickledger::qstate::BIT_FACTOR).abs() < 1e-14);
}
