use nalgebra::Matrix3;
use proptest::prelude::*;

use nspec_core::dressed::{
    absorption_weights, build_hamiltonian, dressed_energies, eigen_oracle, frobenius_norm,
    DressedSolution, DriveConfig,
};

fn drive() -> impl Strategy<Value = DriveConfig> {
    (
        0.0..100.0f64,
        0.0..100.0f64,
        -100.0..100.0f64,
        -100.0..100.0f64,
    )
        .prop_map(|(o1, o2, d1, d2)| DriveConfig::new(o1, o2, d1, d2).unwrap())
}

fn scale(cfg: &DriveConfig) -> f64 {
    frobenius_norm(&build_hamiltonian(cfg)).max(1.0)
}

fn matrix(cfg: &DriveConfig) -> Matrix3<f64> {
    let h = build_hamiltonian(cfg);
    Matrix3::from_fn(|i, j| h[i][j])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn energies_are_eigenvalues(cfg in drive()) {
        let e = dressed_energies(&cfg).unwrap();
        let jac = eigen_oracle(&build_hamiltonian(&cfg)).unwrap().values;
        let s = scale(&cfg);
        for k in 0..3 {
            prop_assert!((e[k] - jac[k]).abs() <= 1e-9 * s, "{e:?} vs {jac:?}");
        }
    }

    #[test]
    fn vieta_identities(cfg in drive()) {
        let [e1, e2, e3] = dressed_energies(&cfg).unwrap();
        let (o1, o2, d1, d2) = (cfg.omega1, cfg.omega2, cfg.delta1, cfg.delta2);
        let beta = d1 * (d1 - d2) - (o1 * o1 + o2 * o2) / 4.0;
        let gamma = o1 * o1 / 4.0 * (d1 - d2);
        let s = scale(&cfg);
        prop_assert!((e1 + e2 + e3 - (2.0 * d1 - d2)).abs() <= 1e-9 * s);
        prop_assert!((e1 * e2 + e1 * e3 + e2 * e3 - beta).abs() <= 1e-9 * s * s);
        prop_assert!((e1 * e2 * e3 + gamma).abs() <= 1e-9 * s * s * s);
    }

    #[test]
    fn energies_descending(cfg in drive()) {
        let e = dressed_energies(&cfg).unwrap();
        prop_assert!(e[0] >= e[1] && e[1] >= e[2]);
    }

    #[test]
    fn vectors_are_orthonormal_eigenvectors(cfg in drive()) {
        let sol = DressedSolution::solve(&cfg).unwrap();
        let h = matrix(&cfg);
        let s = scale(&cfg);
        for basis in 0..3 {
            let total: f64 = sol.vectors.iter().map(|v| v[basis] * v[basis]).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12, "component {basis}: {total}");
        }
        for (nu, v) in sol.vectors.iter().enumerate() {
            let v = nalgebra::Vector3::from(*v);
            let r = h * v - sol.energies[nu] * v;
            prop_assert!(r.norm() <= 1e-8 * s, "residual {}", r.norm());
        }
    }

    #[test]
    fn scaling_covariance(cfg in drive(), s in 0.01..100.0f64) {
        let base = DressedSolution::solve(&cfg).unwrap();
        let scaled = DressedSolution::solve(&cfg.scaled(s)).unwrap();
        let tol = 1e-9 * scale(&cfg) * s;
        for nu in 0..3 {
            prop_assert!((scaled.energies[nu] - s * base.energies[nu]).abs() <= tol);
        }
        // Weights are compared where the levels are well separated.
        let gap = (base.energies[0] - base.energies[1]).min(base.energies[1] - base.energies[2]);
        if gap > 1e-3 * scale(&cfg) {
            for nu in 0..3 {
                prop_assert!((scaled.weights[nu] - base.weights[nu]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn equal_detunings(o1 in 0.1..100.0f64, o2 in 0.1..100.0f64, d in -100.0..100.0f64) {
        let sol = DressedSolution::solve(&DriveConfig::new(o1, o2, d, d).unwrap()).unwrap();
        let s = scale(&DriveConfig::new(o1, o2, d, d).unwrap());
        prop_assert!(sol.energies[1].abs() <= 1e-12 * s, "{}", sol.energies[1]);
        let expected = (d * d + o1 * o1 + o2 * o2).sqrt();
        prop_assert!((sol.splitting() - expected).abs() <= 1e-9 * s);
    }

    #[test]
    fn weights_sum_to_one(cfg in drive()) {
        let w = absorption_weights(&cfg).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
    }
}

#[test]
fn second_field_off_uses_fallback_vectors() {
    let sol = DressedSolution::solve(&DriveConfig::new(10.0, 0.0, 3.0, -2.0).unwrap()).unwrap();
    for v in &sol.vectors {
        let n: f64 = v.iter().map(|x| x * x).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }
    assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}
