use std::f64::consts::PI;

use proptest::prelude::*;
use tomokit::dynamics::{
    evolve_field, evolve_field_checkpoints, evolve_tomogram, evolve_tomogram_phase_space, free_tomogram_analytic,
    stability_bound, AffineFlow,
};
use tomokit::phasespace::{make_delta_approx, make_gaussian, make_vacuum};
use tomokit::tomography::{forward_tomogram, uniform_angles, InverseOptions, RampFilter};
use tomokit::{Error, EvolutionMode, EvolutionSpec, FieldKind, Frame, PhaseSpaceGrid, Potential, XGrid};

fn energy(field: &tomokit::PhaseSpaceField) -> f64 {
    field.expectation(|q, p| 0.5 * (q * q + p * p))
}

#[test]
fn oscillator_conserves_energy_and_returns_after_a_period() {
    let grid = PhaseSpaceGrid::square(7.0, 96).unwrap();
    let field = make_gaussian(grid, 1.2, -0.6, 0.7, 0.8, 0.2).unwrap();
    let pot = Potential::harmonic(1.0);
    let dt = stability_bound(&grid, &pot, EvolutionMode::Classical, 1.0);
    let spec = EvolutionSpec::new(2.0 * PI, EvolutionMode::Classical).with_dt(dt);
    let evo = evolve_field_checkpoints(&field, &pot, &spec, &[PI / 2.0, PI]).unwrap();
    assert_eq!(evo.snapshots.len(), 3);
    let e0 = energy(&field);
    for snap in &evo.snapshots {
        assert!((energy(&snap.field) - e0).abs() / e0 < 1e-6, "t = {}", snap.time);
    }
    // Half a period maps (q, p) to (-q, -p).
    let half = &evo.snapshots[1].field;
    assert!((half.expectation(|q, _| q) + 1.2).abs() < 1e-6);
    assert!(evo.snapshots[2].field.l1_distance(&field).unwrap() < 1e-3);
}

#[test]
fn harmonic_modes_coincide() {
    let grid = PhaseSpaceGrid::square(6.0, 64).unwrap();
    let field = make_vacuum(grid).unwrap();
    let pot = Potential::new(vec![0.3, -0.2, 0.8]).unwrap();
    let c = evolve_field(&field, &pot, &EvolutionSpec::new(0.5, EvolutionMode::Classical)).unwrap();
    let q = evolve_field(&field, &pot, &EvolutionSpec::new(0.5, EvolutionMode::Quantum)).unwrap();
    assert!(c.sup_distance(&q).unwrap() <= 1e-10);
}

#[test]
fn transport_and_phase_space_paths_agree() {
    let grid = PhaseSpaceGrid::square(8.0, 128).unwrap();
    let field = make_gaussian(grid, 1.0, 0.5, 0.8, 0.75, 0.1).unwrap();
    let xg = XGrid::symmetric(12.0, 256).unwrap();
    let frames: Vec<Frame> = uniform_angles(64).into_iter().map(Frame::from_angle).collect();
    let tomo = forward_tomogram(&field, &frames, &xg).unwrap();
    let pot = Potential::harmonic(1.0);
    let dt = stability_bound(&grid, &pot, EvolutionMode::Quantum, 1.0);
    let spec = EvolutionSpec::new(0.7, EvolutionMode::Quantum).with_dt(dt);
    let transported = evolve_tomogram(&tomo, &pot, &spec, &grid).unwrap();
    let opts = InverseOptions {
        filter: RampFilter::RamLak,
        kind: FieldKind::Wigner,
        upsample: 4,
    };
    let via_field = evolve_tomogram_phase_space(&tomo, &pot, &spec, &grid, &opts, transported.frames()).unwrap();
    let gap = transported.max_row_l1(&via_field).unwrap();
    assert!(gap <= 1e-2, "path gap {gap}");
}

#[test]
fn anharmonic_tomogram_goes_through_phase_space() {
    let grid = PhaseSpaceGrid::square(6.0, 64).unwrap();
    let field = make_vacuum(grid).unwrap();
    let xg = XGrid::symmetric(9.0, 128).unwrap();
    let frames: Vec<Frame> = uniform_angles(32).into_iter().map(Frame::from_angle).collect();
    let tomo = forward_tomogram(&field, &frames, &xg).unwrap();
    let pot = Potential::new(vec![0.0, 0.0, 0.5, 0.0, 0.05]).unwrap();
    let spec = EvolutionSpec::new(0.05, EvolutionMode::Classical);
    let evolved = evolve_tomogram(&tomo, &pot, &spec, &grid).unwrap();
    assert_eq!(evolved.frames(), tomo.frames());
    for k in 0..evolved.n_frames() {
        assert!((evolved.row_mass(k) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn unstable_steps_are_rejected() {
    let grid = PhaseSpaceGrid::square(5.0, 48).unwrap();
    let field = make_vacuum(grid).unwrap();
    let pot = Potential::new(vec![0.0, 0.0, 0.0, 0.0, 0.25]).unwrap();
    let bound = stability_bound(&grid, &pot, EvolutionMode::Quantum, 1.0);
    let spec = EvolutionSpec::new(0.1, EvolutionMode::Quantum).with_dt(2.0 * bound);
    assert!(matches!(evolve_field(&field, &pot, &spec), Err(Error::UnstableStep { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn affine_flow_is_symplectic(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -2.0..2.0f64, t in 0.0..3.0f64) {
        let flow = AffineFlow::new(&Potential::new(vec![a, b, c]).unwrap(), t).unwrap();
        let det = flow.phi[0][0] * flow.phi[1][1] - flow.phi[0][1] * flow.phi[1][0];
        prop_assert!((det - 1.0).abs() < 1e-9);
    }

    #[test]
    fn free_transport_matches_closed_form(
        q0 in -1.0..1.0f64,
        p0 in -1.0..1.0f64,
        t in 0.1..1.5f64,
        angles in prop::collection::vec(0.0..PI, 2..6),
    ) {
        let grid = PhaseSpaceGrid::square(6.0, 128).unwrap();
        let eps = 0.25;
        let field = make_delta_approx(grid, q0, p0, eps).unwrap();
        let xg = XGrid::new(-9.0, 9.0, 512).unwrap();
        let frames: Vec<Frame> = angles.iter().map(|&a| Frame::from_angle(a)).collect();
        let tomo = forward_tomogram(&field, &frames, &xg).unwrap();
        let spec = EvolutionSpec::new(t, EvolutionMode::Classical);
        let evolved = evolve_tomogram(&tomo, &Potential::free(), &spec, &grid).unwrap();
        for (k, &f) in evolved.frames().iter().enumerate() {
            let analytic = free_tomogram_analytic(&xg, f, q0, p0, eps, t).unwrap();
            let sup = evolved.row(k).iter().zip(&analytic).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(sup < 1e-6, "frame {k}: sup {sup}");
        }
    }
}
