use nalgebra::DMatrix;
use num_complex::Complex64;
use wickledger::lorentzian::GaussianPacketSpec;
use wickledger::qstate::{ensemble_to_density, vn_entropy, DensityMatrix, Ensemble, EntropyUnit, Grid1D, WaveFunction};
use wickledger::superselection::{
    build_cell_basis, build_coarse_observables, fine_commutator_check, planck_cell_mixture, CellBasis,
    PhaseSpaceLattice,
};
use wickledger::Error;

fn four_by_four() -> CellBasis {
    let lattice = PhaseSpaceLattice::new(1.0, 1.0, 4, 4).unwrap();
    let grid = Grid1D::new(-8.0, 8.0, 128).unwrap();
    build_cell_basis(&lattice, &grid).unwrap()
}

#[test]
fn fine_commutator_is_i_hbar() {
    for hbar in [1.0, 0.5] {
        let grid = Grid1D::new(-20.0, 20.0, 1024).unwrap();
        let states = vec![
            GaussianPacketSpec { x0: 0.0, sigma0: 1.0, p0: 0.0 }.wavefunction(&grid, hbar).unwrap(),
            GaussianPacketSpec { x0: 2.0, sigma0: 0.7, p0: 3.0 }.wavefunction(&grid, hbar).unwrap(),
        ];
        let report = fine_commutator_check(&grid, &states, hbar).unwrap();
        assert!(report.samples.iter().all(|s| !s.boundary_flag));
        assert!(report.max_deviation < 1e-8 * hbar, "{report:?}");
    }
}

#[test]
fn boundary_states_are_flagged_and_excluded() {
    let grid = Grid1D::new(-10.0, 10.0, 256).unwrap();
    let good = GaussianPacketSpec { x0: 0.0, sigma0: 1.0, p0: 0.0 }.wavefunction(&grid, 1.0).unwrap();
    let edge = WaveFunction::from_fn(grid, |x| Complex64::new((-(x - 9.5).powi(2)).exp(), 0.0)).unwrap();
    let report = fine_commutator_check(&grid, &[good, edge], 1.0).unwrap();
    assert!(!report.samples[0].boundary_flag);
    assert!(report.samples[1].boundary_flag);
    assert_eq!(report.max_deviation, report.samples[0].deviation);
}

#[test]
fn cell_basis_is_orthonormal_and_local() {
    let basis = four_by_four();
    assert_eq!(basis.len(), 16);
    assert!(basis.gram_deviation() < 1e-10);

    // independent Gram recomputation
    let v = basis.vectors();
    let mut worst: f64 = 0.0;
    for i in 0..16 {
        for j in 0..16 {
            let mut g = Complex64::new(0.0, 0.0);
            for r in 0..v.nrows() {
                g += v[(r, i)].conj() * v[(r, j)];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    assert!(worst < 1e-10);

    for (label, overlap) in basis.labels().iter().zip(basis.parent_overlaps()) {
        if !label.edge {
            assert!(*overlap > 0.9, "interior cell {label:?} overlap {overlap}");
        }
    }
    assert_eq!(basis.labels().iter().filter(|l| !l.edge).count(), 4);
}

#[test]
fn coarse_observables_commute() {
    let basis = four_by_four();
    let obs = build_coarse_observables(&basis);
    assert!(obs.commutator_norm() < 1e-12);

    let mut q_eigs: Vec<f64> = obs.q_spectrum.clone();
    q_eigs.sort_by(f64::total_cmp);
    q_eigs.dedup();
    assert_eq!(q_eigs, basis.lattice().q_centers().to_vec());

    for (a, label) in basis.labels().iter().enumerate() {
        let v = basis.vector(a);
        let q = v.dotc(&(&obs.q_matrix * &v));
        let p = v.dotc(&(&obs.p_matrix * &v));
        assert!((q.re - label.q).abs() < 1e-12 && q.im.abs() < 1e-12);
        assert!((p.re - label.p).abs() < 1e-12);
    }
}

#[test]
fn single_cell_and_overcomplete_requests() {
    let lattice = PhaseSpaceLattice::new(1.0, 1.0, 1, 1).unwrap();
    let grid = Grid1D::new(-8.0, 8.0, 128).unwrap();
    let single = build_cell_basis(&lattice, &grid).unwrap();
    // one cell: nothing to orthogonalise, the vector is the normalised seed
    assert!((single.parent_overlaps()[0] - 1.0).abs() < 1e-12);
    let seed = GaussianPacketSpec { x0: 0.0, sigma0: lattice.seed_width(), p0: 0.0 }.wavefunction(&grid, 1.0).unwrap();
    assert!((seed.to_unit_vector().dotc(&single.vector(0)).norm() - 1.0).abs() < 1e-12);

    // 80 cells on a 32-point grid

    let grid = Grid1D::new(-6.0, 6.0, 32).unwrap();
    let many = PhaseSpaceLattice::new(3.0, 1.0 / 12.0, 2, 40).unwrap();
    match build_cell_basis(&many, &grid) {
        Err(e @ Error::SingularGram { n_cells: 80, .. }) => assert!(e.to_string().contains("80")),
        other => panic!("expected singular Gram, got {:?}", other.map(|b| b.len())),
    }
}

#[test]
fn mixtures_over_cells() {
    let basis = four_by_four();
    let (a, b) = (basis.index_of(1, 2).unwrap(), basis.index_of(2, 1).unwrap());

    let pure = DensityMatrix::from_pure(&basis.vector(a)).unwrap();
    let m = planck_cell_mixture(&pure, &basis).unwrap();
    assert_eq!(m.member_cells, vec![a]);
    assert!((m.ensemble.weights()[0] - 1.0).abs() < 1e-12);
    assert!(m.discarded_weight < 1e-10);

    let half = ensemble_to_density(&Ensemble::new(vec![(0.5, basis.vector(a)), (0.5, basis.vector(b))]).unwrap()).unwrap();
    let m = planck_cell_mixture(&half, &basis).unwrap();
    let weights: Vec<f64> = m.populations.iter().copied().filter(|&w| w > 1e-10).collect();
    assert_eq!(weights.len(), 2);
    assert!(weights.iter().all(|w| (w - 0.5).abs() < 1e-10));
}

#[test]
fn broad_mixture_entropy_is_bounded() {
    let basis = four_by_four();
    let grid = *basis.grid();
    // thermal-like: equal mixture of displaced, boosted packets
    let mut members = Vec::new();
    let shifts = [(-1.0, -2.0), (-0.5, 1.0), (0.0, 0.0), (0.5, -1.0), (1.0, 2.5), (0.2, 4.0)];
    for (x0, p0) in shifts {
        let psi = GaussianPacketSpec { x0, sigma0: 0.6, p0 }.wavefunction(&grid, 1.0).unwrap();
        members.push((1.0 / shifts.len() as f64, psi.to_unit_vector()));
    }
    let rho = ensemble_to_density(&Ensemble::new(members).unwrap()).unwrap();
    let m = planck_cell_mixture(&rho, &basis).unwrap();
    let sum: f64 = m.populations.iter().sum();
    assert!((sum + m.discarded_weight - 1.0).abs() < 1e-10);
    assert!(m.populations.iter().all(|&w| (0.0..=1.0).contains(&w)));
    let s = vn_entropy(&ensemble_to_density(&m.ensemble).unwrap(), EntropyUnit::Bits).unwrap();
    assert!(s >= 0.0 && s <= (basis.len() as f64).log2() + 1e-12);

    // a state far from the window is mostly discarded
    let far = GaussianPacketSpec { x0: 2.8, sigma0: 0.5, p0: 0.0 }.wavefunction(&grid, 1.0).unwrap();
    let m = planck_cell_mixture(&far.to_density().unwrap(), &basis).unwrap();
    assert!(m.warning && m.discarded_weight > 0.05);

    let wrong = DensityMatrix::new(DMatrix::identity(4, 4) * Complex64::new(0.25, 0.0)).unwrap();
    assert!(planck_cell_mixture(&wrong, &basis).is_err());
}

#[test]
fn independent_axes_for_higher_dimensions() {
    // d = 2 as two independent 1D lattices with different cell shapes
    for dq in [1.0, 2.0] {
        let lattice = PhaseSpaceLattice::new(dq, 1.0, 2, 2).unwrap();
        assert!((lattice.dq() * lattice.dp() - lattice.h()).abs() <= f64::EPSILON * lattice.h());
        let grid = Grid1D::new(-16.0, 16.0, 512).unwrap();
        let basis = build_cell_basis(&lattice, &grid).unwrap();
        assert!(basis.gram_deviation() < 1e-10);
        assert!(build_coarse_observables(&basis).commutator_norm() < 1e-12);
    }
}
