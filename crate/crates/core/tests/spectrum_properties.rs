use proptest::prelude::*;

use nspec_core::dressed::{build_hamiltonian, eigen_oracle, DriveConfig};
use nspec_core::spectrum::{
    find_peaks, lorentzian, trajectory_vs_delta2, uniform_grid, LineshapeConfig, SpectrumModel,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn spectrum_nonnegative_and_vanishing(
        o1 in 0.0..100.0f64, o2 in 0.0..100.0f64, d1 in -50.0..50.0f64, d2 in -50.0..50.0f64,
        fwhm in 1.0..20.0f64, huc in 0.0..3.0f64,
    ) {
        let mut model = SpectrumModel::new(DriveConfig::new(o1, o2, d1, d2).unwrap());
        model.lineshape = LineshapeConfig { fwhm, broadening_factor: 1.0 };
        model.uncoupled_height = huc;
        let grid = uniform_grid(-200.0, 200.0, 0.5).unwrap();
        let v = model.synthesize(&grid).unwrap();
        prop_assert!(v.iter().all(|&x| x >= 0.0));
        let far = model.synthesize(&[-1e7, 1e7]).unwrap();
        prop_assert!(far.iter().all(|&x| x < 1e-8));
    }

    #[test]
    fn component_area_proportional_to_weight(o1 in 1.0..100.0f64, o2 in 1.0..100.0f64, fwhm in 2.0..10.0f64) {
        let mut model = SpectrumModel::new(DriveConfig::resonant(o1, o2).unwrap());
        model.lineshape.fwhm = fwhm;
        let lines = model.lines().unwrap();
        let weights = nspec_core::dressed::absorption_weights(&model.drive).unwrap();
        let reference = std::f64::consts::PI * fwhm / 2.0;
        for (line, w) in lines.iter().zip(weights) {
            // Trapezoid rule over ±50·fwhm around the line.
            let n = 20_000;
            let h = 100.0 * fwhm / n as f64;
            let area: f64 = (0..=n)
                .map(|i| {
                    let x = -50.0 * fwhm + i as f64 * h;
                    let f = line.height * lorentzian(x, fwhm);
                    if i == 0 || i == n { 0.5 * f * h } else { f * h }
                })
                .sum();
            prop_assert!((area - w * reference).abs() <= 0.01 * w * reference + 1e-12, "{area} vs {}", w * reference);
        }
    }

    #[test]
    fn isolated_peak_center_recovered(center in -20.0..20.0f64, fwhm in 2.0..12.0f64, frac in 0.02..0.25f64, h in 0.1..5.0f64) {
        let step = frac * fwhm;
        let grid = uniform_grid(-60.0, 60.0, step).unwrap();
        let v: Vec<f64> = grid.iter().map(|&x| h * lorentzian(x - center, fwhm)).collect();
        let peaks = find_peaks(&grid, &v);
        prop_assert_eq!(peaks.len(), 1);
        prop_assert!((peaks[0].center - center).abs() <= step * step / fwhm, "{} vs {center}", peaks[0].center);
    }

    #[test]
    fn trajectory_branches_ordered_and_exact(o1 in 1.0..100.0f64, o2 in 0.0..100.0f64, d1 in -50.0..50.0f64) {
        let grid = uniform_grid(-80.0, 80.0, 4.0).unwrap();
        let traj = trajectory_vs_delta2(o1, o2, d1, &grid).unwrap();
        prop_assert_eq!(traj.len(), grid.len());
        for pt in &traj {
            let e = pt.energies;
            prop_assert!(e[0] >= e[1] && e[1] >= e[2]);
            let cfg = DriveConfig::new(o1, o2, d1, pt.delta2).unwrap();
            let h = build_hamiltonian(&cfg);
            let s = nspec_core::dressed::frobenius_norm(&h);
            let oracle = eigen_oracle(&h).unwrap().values;
            for k in 0..3 {
                prop_assert!((e[k] - oracle[k]).abs() <= 1e-9 * s);
            }
        }
    }

    #[test]
    fn central_height_grows_with_second_field(o1 in 1.0..100.0f64, a in 0.0..100.0f64, b in 0.0..100.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let central = |o2: f64| SpectrumModel::new(DriveConfig::resonant(o1, o2).unwrap()).lines().unwrap()[1].height;
        prop_assert!(central(lo) <= central(hi) + 1e-15);
    }
}

#[test]
fn well_separated_doublet_centers() {
    let fwhm = 6.0;
    let step = 0.1;
    let grid = uniform_grid(-100.0, 100.0, step).unwrap();
    let v: Vec<f64> = grid
        .iter()
        .map(|&x| lorentzian(x - 60.0, fwhm) + 0.7 * lorentzian(x + 60.0, fwhm))
        .collect();
    let peaks = find_peaks(&grid, &v);
    assert_eq!(peaks.len(), 2);
    assert!((peaks[0].center - 60.0).abs() <= step * step / fwhm);
    assert!((peaks[1].center + 60.0).abs() <= step * step / fwhm);
}

#[test]
fn all_couplings_off_single_uncoupled_peak() {
    let mut model = SpectrumModel::new(DriveConfig::resonant(0.0, 0.0).unwrap());
    model.uncoupled_height = 1.0;
    let grid = uniform_grid(-40.0, 40.0, 0.5).unwrap();
    let peaks = find_peaks(&grid, &model.synthesize(&grid).unwrap());
    assert_eq!(peaks.len(), 1);
    assert!(peaks[0].center.abs() < 1e-9);
    assert!((peaks[0].height - 2.0).abs() < 1e-9);
}
