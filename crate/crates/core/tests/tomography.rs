use std::f64::consts::PI;

use proptest::prelude::*;
use tomokit::phasespace::{make_cat_wigner, make_gaussian, make_vacuum};
use tomokit::tomography::{
    cat_tomogram_closed_form, forward_tomogram, homogeneity_rescale, inverse_tomogram, radon_tomogram,
    uniform_angles, InverseOptions, RampFilter, NEGATIVITY_TOLERANCE,
};
use tomokit::{FieldKind, Frame, PhaseSpaceGrid, XGrid};

fn grid() -> PhaseSpaceGrid {
    PhaseSpaceGrid::square(8.0, 96).unwrap()
}

prop_compose! {
    fn gaussian_params()(
        q0 in -1.5..1.5f64,
        p0 in -1.5..1.5f64,
        sq in 0.5..1.0f64,
        sp in 0.5..1.0f64,
        corr in -0.6..0.6f64,
    ) -> (f64, f64, f64, f64, f64) {
        (q0, p0, sq, sp, corr)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn forward_rows_are_probability_densities(
        (q0, p0, sq, sp, corr) in gaussian_params(),
        angles in prop::collection::vec(0.0..PI, 1..6),
        scale in 0.6..1.6f64,
    ) {
        let field = make_gaussian(grid(), q0, p0, sq, sp, corr).unwrap();
        let xg = XGrid::symmetric(14.0, 256).unwrap();
        let frames: Vec<Frame> = angles.iter().map(|&a| Frame::from_angle(a).scaled(scale)).collect();
        let tomo = forward_tomogram(&field, &frames, &xg).unwrap();
        for k in 0..tomo.n_frames() {
            prop_assert!(tomo.row(k).iter().all(|&v| v >= -NEGATIVITY_TOLERANCE));
            prop_assert!((tomo.row_mass(k) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rescaled_rows_match_direct_projection(
        (q0, p0, sq, sp, corr) in gaussian_params(),
        theta in 0.0..PI,
        s in prop_oneof![0.7..1.4f64, -1.4..-0.7f64],
    ) {
        let field = make_gaussian(grid(), q0, p0, sq, sp, corr).unwrap();
        let xg = XGrid::symmetric(14.0, 512).unwrap();
        let base = Frame::from_angle(theta);
        let tomo = forward_tomogram(&field, &[base, base.scaled(s)], &xg).unwrap();
        let rescaled = homogeneity_rescale(tomo.row(0), &xg, s).unwrap();
        let sup = rescaled.iter().zip(tomo.row(1)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(sup < 1e-6, "sup {sup}");

        let canonical = tomo.canonicalize().unwrap();
        let (c, _) = base.scaled(s).canonical();
        prop_assert!((canonical.frames()[1].mu - c.mu).abs() < 1e-15);
        let back = canonical.row_at(base.scaled(s)).unwrap();
        let sup = back.iter().zip(tomo.row(1)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(sup < 1e-6, "canonical round trip sup {sup}");
    }

    #[test]
    fn radon_equals_forward_on_unit_frames(
        (q0, p0, sq, sp, corr) in gaussian_params(),
        angles in prop::collection::vec(0.0..PI, 1..5),
    ) {
        let field = make_gaussian(grid(), q0, p0, sq, sp, corr).unwrap();
        let xg = XGrid::symmetric(12.0, 128).unwrap();
        let frames: Vec<Frame> = angles.iter().map(|&a| Frame::from_angle(a)).collect();
        let a = forward_tomogram(&field, &frames, &xg).unwrap();
        let b = radon_tomogram(&field, &angles, &xg).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn cat_closed_form_matches_projection(q0 in 1.5..3.0f64, p0 in -1.0..1.0f64, theta in 0.0..PI) {
        let grid = PhaseSpaceGrid::square(10.0, 256).unwrap();
        let field = make_cat_wigner(grid, q0, p0).unwrap();
        let xg = XGrid::symmetric(14.0, 512).unwrap();
        let h = xg.spacing();
        let tomo = radon_tomogram(&field, &[theta], &xg).unwrap();
        let mass = tomo.row(0).iter().sum::<f64>() * h;
        let closed = cat_tomogram_closed_form(&xg, theta, q0, p0).unwrap();
        let sup = tomo.row(0).iter().zip(&closed.values).map(|(a, b)| (a / mass - b).abs()).fold(0.0, f64::max);
        prop_assert!(sup <= 5e-3, "sup {sup}");
    }
}

#[test]
fn round_trip_error_decreases_with_angles() {
    let grid = PhaseSpaceGrid::square(8.0, 128).unwrap();
    let field = make_gaussian(grid, 1.0, -0.5, 0.8, 0.7, 0.2).unwrap();
    let xg = XGrid::symmetric(12.0, 256).unwrap();
    let opts = InverseOptions {
        filter: RampFilter::RamLak,
        kind: FieldKind::Wigner,
        upsample: 4,
    };
    let errors: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let frames: Vec<Frame> = uniform_angles(n).into_iter().map(Frame::from_angle).collect();
            let tomo = forward_tomogram(&field, &frames, &xg).unwrap();
            let rec = inverse_tomogram(&tomo, &grid, &opts).unwrap();
            rec.field.l1_distance(&field).unwrap()
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    assert!(errors[2] < 1e-2, "{errors:?}");
}

#[test]
fn hann_filter_reconstructs_vacuum() {
    let grid = PhaseSpaceGrid::square(8.0, 128).unwrap();
    let field = make_vacuum(grid).unwrap();
    let xg = XGrid::symmetric(12.0, 256).unwrap();
    let frames: Vec<Frame> = uniform_angles(64).into_iter().map(Frame::from_angle).collect();
    let tomo = forward_tomogram(&field, &frames, &xg).unwrap();
    let rec = inverse_tomogram(&tomo, &grid, &InverseOptions::default()).unwrap();
    assert_eq!(rec.field.kind(), FieldKind::Wigner);
    assert!(rec.field.l1_distance(&field).unwrap() < 1e-2);
    assert!((rec.field.integrate() - 1.0).abs() < 1e-9);
}

#[test]
fn classical_reconstruction_is_nonnegative() {
    let grid = PhaseSpaceGrid::square(8.0, 96).unwrap();
    let field = make_gaussian(grid, 0.5, 0.5, 0.4, 0.4, 0.0).unwrap();
    assert_eq!(field.kind(), FieldKind::Classical);
    let xg = XGrid::symmetric(12.0, 256).unwrap();
    let frames: Vec<Frame> = uniform_angles(32).into_iter().map(Frame::from_angle).collect();
    let tomo = forward_tomogram(&field, &frames, &xg).unwrap();
    let opts = InverseOptions {
        kind: FieldKind::Classical,
        ..InverseOptions::default()
    };
    let rec = inverse_tomogram(&tomo, &grid, &opts).unwrap();
    assert!(rec.field.min() >= 0.0);
    assert!((rec.field.integrate() - 1.0).abs() < 1e-9);
}
