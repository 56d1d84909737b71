//! Doubly dressed states of the three-level V system.
//!
//! The V system is formed by the lower state |a⟩ and the two upper states
//! |c⟩ and |d⟩, driven by C₂ (a↔c) and C₁ (a↔d). All quantities are in MHz
//! with ħ = 1. Vectors are written in the ordered basis (a, c, d).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

mod jacobi;

pub use jacobi::{eigen_oracle, SymEigen};

/// Dense real 3×3 matrix, row-major.
pub type Matrix3 = [[f64; 3]; 3];

/// Component order of every dressed vector.
pub const BASIS_LABELS: [&str; 3] = ["a", "c", "d"];

const ANGLE_EXCURSION_TOL: f64 = 1e-9;
const DEGENERATE_REL_TOL: f64 = 1e-9;
const FALLBACK_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DressedError {
    #[error("invalid drive parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("degenerate spectrum: p = {p:e} is below the threshold {threshold:e}")]
    DegenerateSpectrum { p: f64, threshold: f64 },
    #[error("cos(theta) = {0} lies outside [-1, 1] by more than rounding allows")]
    InconsistentAngle(f64),
    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
}

/// Rabi frequencies and detunings of the two coupling fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Rabi frequency of C₁ on a↔d.
    pub omega1: f64,
    /// Rabi frequency of C₂ on a↔c.
    pub omega2: f64,
    /// Detuning of C₁.
    pub delta1: f64,
    /// Detuning of C₂.
    pub delta2: f64,
}

impl DriveConfig {
    pub fn new(omega1: f64, omega2: f64, delta1: f64, delta2: f64) -> Result<Self, DressedError> {
        let cfg = Self {
            omega1,
            omega2,
            delta1,
            delta2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Both coupling fields on resonance.
    pub fn resonant(omega1: f64, omega2: f64) -> Result<Self, DressedError> {
        Self::new(omega1, omega2, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<(), DressedError> {
        for (name, value) in [("omega1", self.omega1), ("omega2", self.omega2)] {
            if !value.is_finite() || value < 0.0 {
                return Err(DressedError::InvalidParameter { name, value });
            }
        }
        for (name, value) in [("delta1", self.delta1), ("delta2", self.delta2)] {
            if !value.is_finite() {
                return Err(DressedError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Ω_eff = √(Ω₁² + Ω₂²).
    pub fn effective_rabi(&self) -> f64 {
        self.omega1.hypot(self.omega2)
    }

    /// Multiplies every frequency by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            omega1: self.omega1 * s,
            omega2: self.omega2 * s,
            delta1: self.delta1 * s,
            delta2: self.delta2 * s,
        }
    }
}

pub fn frobenius_norm(m: &Matrix3) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rotating-frame Hamiltonian of the V system, rows and columns ordered (a, c, d).
pub fn build_hamiltonian(cfg: &DriveConfig) -> Matrix3 {
    let h12 = cfg.omega2 / 2.0;
    let h13 = cfg.omega1 / 2.0;
    [
        [cfg.delta1, h12, h13],
        [h12, cfg.delta1 - cfg.delta2, 0.0],
        [h13, 0.0, 0.0],
    ]
}

/// Coefficients of det(ℰ − H) = ℰ³ + αℰ² + βℰ + γ and the derived
/// trigonometric-form quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p: f64,
    pub theta: f64,
}

fn raw_coefficients(cfg: &DriveConfig) -> (f64, f64, f64) {
    let om_sq = cfg.omega1 * cfg.omega1 + cfg.omega2 * cfg.omega2;
    let alpha = -2.0 * cfg.delta1 + cfg.delta2;
    let beta = cfg.delta1 * (cfg.delta1 - cfg.delta2) - om_sq / 4.0;
    let gamma = cfg.omega1 * cfg.omega1 / 4.0 * (cfg.delta1 - cfg.delta2);
    (alpha, beta, gamma)
}

fn degenerate_threshold(cfg: &DriveConfig) -> f64 {
    DEGENERATE_REL_TOL * frobenius_norm(&build_hamiltonian(cfg)).max(1.0)
}

pub fn characteristic_coeffs(cfg: &DriveConfig) -> Result<CubicCoefficients, DressedError> {
    let (alpha, beta, gamma) = raw_coefficients(cfg);
    let p = (alpha * alpha - 3.0 * beta).max(0.0).sqrt();
    let threshold = degenerate_threshold(cfg);
    if p < threshold {
        return Err(DressedError::DegenerateSpectrum { p, threshold });
    }
    let cos_theta = -(27.0 * gamma + 2.0 * alpha.powi(3) - 9.0 * alpha * beta) / (2.0 * p.powi(3));
    if cos_theta.abs() > 1.0 + ANGLE_EXCURSION_TOL {
        return Err(DressedError::InconsistentAngle(cos_theta));
    }
    Ok(CubicCoefficients {
        alpha,
        beta,
        gamma,
        p,
        theta: cos_theta.clamp(-1.0, 1.0).acos(),
    })
}

/// Dressed energies ℰ₁ ≥ ℰ₂ ≥ ℰ₃ from the trigonometric cubic roots.
///
/// In the degenerate case (p ≈ 0) the triple root −α/3 is returned.
pub fn dressed_energies(cfg: &DriveConfig) -> Result<[f64; 3], DressedError> {
    let c = match characteristic_coeffs(cfg) {
        Ok(c) => c,
        Err(DressedError::DegenerateSpectrum { .. }) => {
            let (alpha, _, _) = raw_coefficients(cfg);
            return Ok([-alpha / 3.0; 3]);
        }
        Err(e) => return Err(e),
    };
    let shift = -c.alpha / 3.0;
    let r = 2.0 * c.p / 3.0;
    let third = c.theta / 3.0;
    let mut e = [
        shift + r * third.cos(),
        shift - r * (third + PI / 3.0).cos(),
        shift - r * (third - PI / 3.0).cos(),
    ];
    e.sort_by(|x, y| y.total_cmp(x));
    Ok(e)
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Sign convention for eigenvectors that do not come from the closed form:
/// the d component is made positive, or failing that the largest component.
fn fix_oracle_sign(v: [f64; 3]) -> [f64; 3] {
    const ZERO: f64 = 1e-12;
    let pivot = if v[2].abs() > ZERO {
        v[2]
    } else {
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        *v.iter().find(|x| x.abs() >= max - ZERO).unwrap_or(&1.0)
    };
    if pivot < 0.0 {
        [-v[0], -v[1], -v[2]]
    } else {
        v
    }
}

/// Unnormalized closed-form dressed vector for energy `e`.
fn closed_form_components(cfg: &DriveConfig, e: f64) -> [f64; 3] {
    [
        e * cfg.omega2 / 2.0,
        e * (e - cfg.delta1) - cfg.omega1 * cfg.omega1 / 4.0,
        cfg.omega1 * cfg.omega2 / 4.0,
    ]
}

fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn dot(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(v: &[f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

/// Dressed vectors for the given energies (normally from [`dressed_energies`]).
///
/// Each vector is the largest of the three pairwise cross products of the
/// rows of H − ℰ (the closed-form triple above is one of them), which keeps
/// full accuracy when one Rabi frequency is much smaller than the other. The
/// sign follows the closed-form triple. Where every cross product collapses,
/// i.e. at a degenerate energy, the Jacobi eigenvector of the same energy
/// index is used instead.
pub fn dressed_vectors(
    cfg: &DriveConfig,
    energies: &[f64; 3],
) -> Result<[[f64; 3]; 3], DressedError> {
    let h = build_hamiltonian(cfg);
    let scale = frobenius_norm(&h).max(1.0);
    let cutoff = FALLBACK_REL_TOL * scale * scale;

    let mut oracle: Option<SymEigen> = None;
    let mut out = [[0.0; 3]; 3];
    for (nu, &e) in energies.iter().enumerate() {
        let rows = [
            [h[0][0] - e, h[0][1], h[0][2]],
            [h[1][0], h[1][1] - e, h[1][2]],
            [h[2][0], h[2][1], h[2][2] - e],
        ];
        let reference = closed_form_components(cfg, e);
        let best = [reference, cross(rows[0], rows[1]), cross(rows[1], rows[2])]
            .into_iter()
            .max_by(|u, v| norm(u).total_cmp(&norm(v)))
            .unwrap_or(reference);
        out[nu] = if norm(&best) >= cutoff {
            let v = normalize(best);
            if norm(&reference) >= cutoff {
                if dot(&v, &reference) < 0.0 {
                    [-v[0], -v[1], -v[2]]
                } else {
                    v
                }
            } else {
                fix_oracle_sign(v)
            }
        } else {
            if oracle.is_none() {
                oracle = Some(eigen_oracle(&h)?);
            }
            let eig = oracle.as_ref().unwrap();
            fix_oracle_sign(eig.vectors[nu])
        };
    }
    Ok(out)
}

/// A_ν = |⟨d|𝒟_ν⟩|².
pub fn absorption_weights(cfg: &DriveConfig) -> Result<[f64; 3], DressedError> {
    Ok(DressedSolution::solve(cfg)?.weights)
}

/// Energies, vectors and probe weights of the three dressed states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressedSolution {
    pub energies: [f64; 3],
    /// `vectors[ν]` in the (a, c, d) basis.
    pub vectors: [[f64; 3]; 3],
    pub weights: [f64; 3],
}

impl DressedSolution {
    pub fn solve(cfg: &DriveConfig) -> Result<Self, DressedError> {
        cfg.validate()?;
        let energies = dressed_energies(cfg)?;
        let vectors = dressed_vectors(cfg, &energies)?;
        Ok(Self::from_parts(energies, vectors))
    }

    fn from_parts(energies: [f64; 3], vectors: [[f64; 3]; 3]) -> Self {
        let weights = [
            vectors[0][2].powi(2),
            vectors[1][2].powi(2),
            vectors[2][2].powi(2),
        ];
        Self {
            energies,
            vectors,
            weights,
        }
    }

    /// Autler–Townes separation δ₁₃ = ℰ₁ − ℰ₃.
    pub fn splitting(&self) -> f64 {
        self.energies[0] - self.energies[2]
    }
}

/// Closed forms for Δ₁ = Δ₂ = 0.
pub fn resonance_solution(omega1: f64, omega2: f64) -> Result<DressedSolution, DressedError> {
    let cfg = DriveConfig::resonant(omega1, omega2)?;
    let om = cfg.effective_rabi();
    if om == 0.0 {
        return Err(DressedError::DegenerateSpectrum {
            p: 0.0,
            threshold: degenerate_threshold(&cfg),
        });
    }
    let (s, c) = (omega1 / om, omega2 / om);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let energies = [om / 2.0, 0.0, -om / 2.0];
    let vectors = [[r, r * c, r * s], [0.0, -s, c], [-r, r * c, r * s]];
    Ok(DressedSolution::from_parts(energies, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hamiltonian_entries() {
        assert_eq!(
            build_hamiltonian(&DriveConfig::new(0.0, 0.0, 0.0, 0.0).unwrap()),
            [[0.0; 3]; 3]
        );
        let h = build_hamiltonian(&DriveConfig::new(2.0, 4.0, 1.0, 3.0).unwrap());
        assert_eq!(h, [[1.0, 2.0, 1.0], [2.0, -2.0, 0.0], [1.0, 0.0, 0.0]]);
    }

    #[test]
    fn rejects_negative_rabi_and_nan() {
        assert!(DriveConfig::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(DriveConfig::new(1.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(DriveConfig::new(1.0, 1.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn coefficients_for_equal_resonant_rabi() {
        let c = characteristic_coeffs(&DriveConfig::resonant(2.0, 2.0).unwrap()).unwrap();
        assert_eq!(c.alpha, 0.0);
        assert_eq!(c.beta, -2.0);
        assert_eq!(c.gamma, 0.0);
        assert!(close(c.p, 6f64.sqrt(), 1e-15));
        assert!(close(c.theta, PI / 2.0, 1e-15));
    }

    #[test]
    fn null_hamiltonian_is_degenerate() {
        let cfg = DriveConfig::new(0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            characteristic_coeffs(&cfg),
            Err(DressedError::DegenerateSpectrum { .. })
        ));
        assert_eq!(dressed_energies(&cfg).unwrap(), [0.0; 3]);
        let sol = DressedSolution::solve(&cfg).unwrap();
        assert!(close(sol.weights.iter().sum::<f64>(), 1.0, 1e-15));
    }

    #[test]
    fn two_level_autler_townes_limit() {
        let e = dressed_energies(&DriveConfig::new(2.0, 0.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(close(e[0], 1.0, 1e-14) && close(e[1], 0.0, 1e-14) && close(e[2], -1.0, 1e-14));
    }

    #[test]
    fn fitted_rabi_values() {
        let e = dressed_energies(&DriveConfig::resonant(62.0, 44.0).unwrap()).unwrap();
        let half = (62f64 * 62.0 + 44.0 * 44.0).sqrt() / 2.0;
        assert!(close(e[0], half, 1e-12) && close(e[1], 0.0, 1e-12) && close(e[2], -half, 1e-12));
        assert!(close(e[0], 38.01, 0.005));

        let e = dressed_energies(&DriveConfig::new(62.0, 44.0, 7.0, 7.0).unwrap()).unwrap();
        assert!(close(e[0], 41.674, 0.001), "{e:?}");
        assert!(close(e[1], 0.0, 1e-12));
        assert!(close(e[2], -34.674, 0.001));
    }

    #[test]
    fn resonance_vectors_equal_rabi() {
        let cfg = DriveConfig::resonant(3.0, 3.0).unwrap();
        let sol = DressedSolution::solve(&cfg).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect2 = [0.0, -r, r];
        let expect1 = [r, 0.5, 0.5];
        for k in 0..3 {
            assert!(
                close(sol.vectors[1][k], expect2[k], 1e-14),
                "{:?}",
                sol.vectors[1]
            );
            assert!(
                close(sol.vectors[0][k], expect1[k], 1e-14),
                "{:?}",
                sol.vectors[0]
            );
        }
        for (w, x) in sol.weights.iter().zip([0.25, 0.5, 0.25]) {
            assert!(close(*w, x, 1e-14));
        }
    }

    #[test]
    fn weights_without_second_field() {
        let w = absorption_weights(&DriveConfig::new(5.0, 0.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(close(w[0], 0.5, 1e-14) && close(w[1], 0.0, 1e-14) && close(w[2], 0.5, 1e-14));
    }

    #[test]
    fn weights_fitted_rabi_values() {
        let w = absorption_weights(&DriveConfig::resonant(62.0, 44.0).unwrap()).unwrap();
        let tot = 62.0f64.powi(2) + 44.0f64.powi(2);
        let outer = 62.0f64.powi(2) / (2.0 * tot);
        let mid = 44.0f64.powi(2) / tot;
        assert!(close(w[0], outer, 1e-12) && close(w[1], mid, 1e-12) && close(w[2], outer, 1e-12));
        assert!(close(w[0], 0.33253, 1e-5) && close(w[1], 0.33495, 1e-5));
    }

    #[test]
    fn resonance_special_cases() {
        let sol = resonance_solution(3.0, 4.0).unwrap();
        assert_eq!(sol.energies, [2.5, 0.0, -2.5]);
        let sol = resonance_solution(0.0, 5.0).unwrap();
        assert_eq!(sol.weights, [0.0, 1.0, 0.0]);
        assert!(matches!(
            resonance_solution(0.0, 0.0),
            Err(DressedError::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn resonance_matches_general_path() {
        for (o1, o2) in [(62.0, 44.0), (0.0, 5.0), (5.0, 0.0), (1e-3, 80.0)] {
            let special = resonance_solution(o1, o2).unwrap();
            let general = DressedSolution::solve(&DriveConfig::resonant(o1, o2).unwrap()).unwrap();
            let scale = o1.hypot(o2).max(1.0);
            for nu in 0..3 {
                assert!(close(
                    special.energies[nu],
                    general.energies[nu],
                    1e-12 * scale
                ));
                for k in 0..3 {
                    assert!(
                        close(special.vectors[nu][k], general.vectors[nu][k], 1e-12),
                        "({o1},{o2}) nu={nu}: {:?} vs {:?}",
                        special.vectors[nu],
                        general.vectors[nu]
                    );
                }
            }
        }
    }

    #[test]
    fn fully_decoupled_diagonal_hamiltonian() {
        let cfg = DriveConfig::new(0.0, 0.0, 3.0, 1.0).unwrap();
        let sol = DressedSolution::solve(&cfg).unwrap();
        assert!(close(sol.energies[0], 3.0, 1e-12));
        assert!(close(sol.energies[1], 2.0, 1e-12));
        assert!(close(sol.energies[2], 0.0, 1e-12));
        assert_eq!(
            sol.weights.map(|w| (w * 1e12).round() / 1e12),
            [0.0, 0.0, 1.0]
        );
    }
}
