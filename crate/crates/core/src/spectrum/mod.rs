//! Weak-probe absorption spectra built from dressed states, and the
//! peak-position curves derived from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dressed::{
    dressed_energies, resonance_solution, DressedError, DressedSolution, DriveConfig,
};

mod peaks;

pub use peaks::{find_peaks, Peak, PeakFinder, PeakList};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("probe-detuning grid is empty")]
    EmptyGrid,
    #[error("grid is not strictly increasing at index {0}")]
    UnorderedGrid(usize),
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("no anticrossing found in the scan window")]
    NoAnticrossing,
    #[error(transparent)]
    Dressed(#[from] DressedError),
}

/// Lorentzian line shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineshapeConfig {
    /// Full width at half maximum before broadening.
    pub fwhm: f64,
    /// Multiplies `fwhm`; at least 1.
    pub broadening_factor: f64,
}

impl Default for LineshapeConfig {
    fn default() -> Self {
        Self {
            fwhm: 6.0,
            broadening_factor: 1.0,
        }
    }
}

impl LineshapeConfig {
    pub fn validate(&self) -> Result<(), SpectrumError> {
        if !(self.fwhm.is_finite() && self.fwhm > 0.0) {
            return Err(SpectrumError::InvalidParameter {
                name: "fwhm",
                value: self.fwhm,
            });
        }
        if !(self.broadening_factor.is_finite() && self.broadening_factor >= 1.0) {
            return Err(SpectrumError::InvalidParameter {
                name: "broadening_factor",
                value: self.broadening_factor,
            });
        }
        Ok(())
    }

    pub fn effective_fwhm(&self) -> f64 {
        self.fwhm * self.broadening_factor
    }
}

/// Unit-peak Lorentzian of full width `fwhm`.
pub fn lorentzian(x: f64, fwhm: f64) -> f64 {
    let u = 2.0 * x / fwhm;
    1.0 / (1.0 + u * u)
}

/// One spectral component: center and peak height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Line {
    pub center: f64,
    pub height: f64,
}

/// Dressed-state spectrum plus the phenomenological additions: a fixed
/// uncoupled-absorption line and a global frequency shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumModel {
    pub drive: DriveConfig,
    pub lineshape: LineshapeConfig,
    /// Height of the uncoupled absorption line.
    pub uncoupled_height: f64,
    /// Position of the uncoupled line, independent of the drive.
    pub uncoupled_center: f64,
    /// Shift applied to every line (trap-induced displacement).
    pub global_shift: f64,
    /// Overall scale of the three dressed lines.
    pub coupled_scale: f64,
}

impl SpectrumModel {
    pub fn new(drive: DriveConfig) -> Self {
        Self {
            drive,
            lineshape: LineshapeConfig::default(),
            uncoupled_height: 0.0,
            uncoupled_center: 0.0,
            global_shift: 0.0,
            coupled_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        self.drive.validate()?;
        self.lineshape.validate()?;
        if !(self.uncoupled_height.is_finite() && self.uncoupled_height >= 0.0) {
            return Err(SpectrumError::InvalidParameter {
                name: "uncoupled_height",
                value: self.uncoupled_height,
            });
        }
        if !(self.coupled_scale.is_finite() && self.coupled_scale > 0.0) {
            return Err(SpectrumError::InvalidParameter {
                name: "coupled_scale",
                value: self.coupled_scale,
            });
        }
        for (name, value) in [
            ("uncoupled_center", self.uncoupled_center),
            ("global_shift", self.global_shift),
        ] {
            if !value.is_finite() {
                return Err(SpectrumError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// The three dressed lines followed by the uncoupled line (if any).
    pub fn lines(&self) -> Result<Vec<Line>, SpectrumError> {
        self.validate()?;
        let sol = DressedSolution::solve(&self.drive)?;
        let mut lines: Vec<Line> = sol
            .energies
            .iter()
            .zip(sol.weights)
            .map(|(&e, a)| Line {
                center: e + self.global_shift,
                height: self.coupled_scale * a,
            })
            .collect();
        if self.uncoupled_height > 0.0 {
            lines.push(Line {
                center: self.uncoupled_center + self.global_shift,
                height: self.uncoupled_height,
            });
        }
        Ok(lines)
    }

    pub fn synthesize(&self, grid: &[f64]) -> Result<Vec<f64>, SpectrumError> {
        synthesize(self, grid)
    }
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub(crate) fn check_grid(grid: &[f64]) -> Result<(), SpectrumError> {
    if grid.is_empty() {
        return Err(SpectrumError::EmptyGrid);
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(SpectrumError::UnorderedGrid(i + 1));
        }
    }
    Ok(())
}

/// Evaluates the model absorption at each probe detuning in `grid`.
pub fn synthesize(model: &SpectrumModel, grid: &[f64]) -> Result<Vec<f64>, SpectrumError> {
    check_grid(grid)?;
    let lines = model.lines()?;
    let w = model.lineshape.effective_fwhm();
    Ok(grid
        .iter()
        .map(|&x| {
            lines
                .iter()
                .map(|l| l.height * lorentzian(x - l.center, w))
                .sum()
        })
        .collect())
}

/// `n` points `start + i·step`, covering `[start, stop]`.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, SpectrumError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(SpectrumError::InvalidParameter {
            name: "step",
            value: step,
        });
    }
    if !(start.is_finite() && stop.is_finite()) || stop < start {
        return Err(SpectrumError::EmptyGrid);
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub delta2: f64,
    /// ℰ₁ ≥ ℰ₂ ≥ ℰ₃.
    pub energies: [f64; 3],
}

/// Dressed energies as the C₂ detuning is swept.
pub fn trajectory_vs_delta2(
    omega1: f64,
    omega2: f64,
    delta1: f64,
    delta2_grid: &[f64],
) -> Result<Vec<TrajectoryPoint>, SpectrumError> {
    delta2_grid
        .par_iter()
        .map(|&delta2| {
            let cfg = DriveConfig::new(omega1, omega2, delta1, delta2)?;
            Ok(TrajectoryPoint {
                delta2,
                energies: dressed_energies(&cfg)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPoint {
    /// Ω₂/Ω₁.
    pub ratio: f64,
    /// ℰ_ν/Ω₁.
    pub energies: [f64; 3],
    pub weights: [f64; 3],
}

/// Normalized resonant energies and weights against Ω₂/Ω₁.
pub fn weights_vs_ratio(ratio_grid: &[f64]) -> Result<Vec<RatioPoint>, SpectrumError> {
    ratio_grid
        .iter()
        .map(|&ratio| {
            if !(ratio.is_finite() && ratio >= 0.0) {
                return Err(SpectrumError::InvalidParameter {
                    name: "ratio",
                    value: ratio,
                });
            }
            let sol = resonance_solution(1.0, ratio)?;
            Ok(RatioPoint {
                ratio,
                energies: sol.energies,
                weights: sol.weights,
            })
        })
        .collect()
}

/// Minimum separation between two adjacent dressed branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anticrossing {
    /// Upper branch index (0 for ℰ₁); the lower branch is `upper + 1`.
    pub upper: usize,
    /// Δ₂ at the minimum gap.
    pub location: f64,
    pub gap: f64,
}

const SCAN_POINTS: usize = 4001;
const GOLDEN_ITERATIONS: usize = 200;

fn branch_gap(
    omega1: f64,
    omega2: f64,
    delta1: f64,
    delta2: f64,
    upper: usize,
) -> Result<f64, SpectrumError> {
    let e = dressed_energies(&DriveConfig::new(omega1, omega2, delta1, delta2)?)?;
    Ok(e[upper] - e[upper + 1])
}

fn golden_minimize<F>(mut lo: f64, mut hi: f64, f: F) -> Result<f64, SpectrumError>
where
    F: Fn(f64) -> Result<f64, SpectrumError>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let tol = 1e-12 * (lo.abs() + hi.abs()).max(1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_ITERATIONS {
        if hi - lo < tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Locates the avoided crossings of adjacent branches as Δ₂ is swept.
///
/// A coarse scan over a window centred on Δ₂ = Δ₁ finds the deepest interior
/// minimum of each gap, which is then refined by golden-section search.
pub fn anticrossing_gap(
    omega1: f64,
    omega2: f64,
    delta1: f64,
) -> Result<Vec<Anticrossing>, SpectrumError> {
    DriveConfig::new(omega1, omega2, delta1, 0.0)?;
    let half_width = 2.0 * (omega1 + omega2 + delta1.abs()) + 1.0;
    let step = 2.0 * half_width / (SCAN_POINTS - 1) as f64;
    let xs: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| delta1 - half_width + i as f64 * step)
        .collect();

    let mut out = Vec::new();
    for upper in 0..2 {
        let gaps = xs
            .par_iter()
            .map(|&x| branch_gap(omega1, omega2, delta1, x, upper))
            .collect::<Result<Vec<f64>, _>>()?;
        let best = (1..SCAN_POINTS - 1)
            .filter(|&i| {
                gaps[i] <= gaps[i - 1]
                    && gaps[i] <= gaps[i + 1]
                    && gaps[i] < gaps[i - 1].max(gaps[i + 1])
            })
            .min_by(|&i, &j| gaps[i].total_cmp(&gaps[j]));
        if let Some(i) = best {
            let location = golden_minimize(xs[i - 1], xs[i + 1], |x| {
                branch_gap(omega1, omega2, delta1, x, upper)
            })?;
            out.push(Anticrossing {
                upper,
                location,
                gap: branch_gap(omega1, omega2, delta1, location, upper)?,
            });
        }
    }
    if out.is_empty() {
        return Err(SpectrumError::NoAnticrossing);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line_peak_equals_weight() {
        // Ω₁ = Ω₂ = 0 leaves |d⟩ bare at zero with unit weight.
        let mut model = SpectrumModel::new(DriveConfig::new(0.0, 0.0, 0.0, 0.0).unwrap());
        model.coupled_scale = 2.5;
        let v = model.synthesize(&[0.0]).unwrap();
        assert_eq!(v, vec![2.5]);
    }

    #[test]
    fn rejects_empty_and_unordered_grids() {
        let model = SpectrumModel::new(DriveConfig::resonant(10.0, 5.0).unwrap());
        assert_eq!(model.synthesize(&[]), Err(SpectrumError::EmptyGrid));
        assert_eq!(
            model.synthesize(&[0.0, 1.0, 1.0]),
            Err(SpectrumError::UnorderedGrid(2))
        );
    }

    #[test]
    fn rejects_bad_lineshape() {
        let mut model = SpectrumModel::new(DriveConfig::resonant(10.0, 5.0).unwrap());
        model.lineshape.fwhm = 0.0;
        assert!(model.synthesize(&[0.0]).is_err());
        model.lineshape.fwhm = 6.0;
        model.lineshape.broadening_factor = 0.5;
        assert!(model.synthesize(&[0.0]).is_err());
    }

    #[test]
    fn grid_arithmetic() {
        assert_eq!(uniform_grid(-80.0, 80.0, 0.5).unwrap().len(), 321);
        assert_eq!(uniform_grid(0.0, 0.0, 1.0).unwrap(), vec![0.0]);
        assert!(uniform_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn three_peaks_at_dressed_energies() {
        let model = SpectrumModel::new(DriveConfig::resonant(62.0, 44.0).unwrap());
        let grid = uniform_grid(-80.0, 80.0, 0.2).unwrap();
        let v = model.synthesize(&grid).unwrap();
        let peaks = find_peaks(&grid, &v);
        assert_eq!(peaks.len(), 3);
        for (p, e) in peaks.iter().zip([38.013, 0.0, -38.013]) {
            assert!((p.center - e).abs() < 0.05, "{p:?}");
        }
    }

    #[test]
    fn uncoupled_line_between_asymmetric_autler_townes_peaks() {
        let mut model = SpectrumModel::new(DriveConfig::new(40.0, 0.0, 7.0, 0.0).unwrap());
        model.uncoupled_height = 0.3;
        model.uncoupled_center = 0.0;
        let grid = uniform_grid(-60.0, 60.0, 0.1).unwrap();
        let v = model.synthesize(&grid).unwrap();
        let peaks = find_peaks(&grid, &v);
        assert_eq!(peaks.len(), 3, "{peaks:?}");
        assert!(peaks[0].center > 0.0 && peaks[2].center < 0.0);
        assert!(peaks[1].center.abs() < 0.5);
        assert!((peaks[0].height - peaks[2].height).abs() > 0.05);
    }

    #[test]
    fn ratio_curves() {
        let pts = weights_vs_ratio(&[0.0, 1.0, 1e4]).unwrap();
        assert_eq!(pts[0].energies, [0.5, 0.0, -0.5]);
        for (w, x) in pts[0].weights.iter().zip([0.5, 0.0, 0.5]) {
            assert!((w - x).abs() < 1e-15);
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((pts[1].energies[0] - r).abs() < 1e-15);
        assert!((pts[1].weights[1] - 0.5).abs() < 1e-15);
        assert!(pts[2].weights[1] > 1.0 - 1e-7);
        assert!(weights_vs_ratio(&[-1.0]).is_err());
    }

    #[test]
    fn anticrossings_near_half_rabi() {
        let ac = anticrossing_gap(62.0, 6.2, 0.0).unwrap();
        assert_eq!(ac.len(), 2);
        assert!((ac[0].location + 31.0).abs() < 0.02 * 31.0, "{ac:?}");
        assert!((ac[1].location - 31.0).abs() < 0.02 * 31.0, "{ac:?}");
        assert!((ac[0].location + ac[1].location).abs() < 1e-6);
        assert!((ac[0].gap - ac[1].gap).abs() < 1e-9);
    }

    #[test]
    fn decoupled_anticrossing_closes() {
        let ac = anticrossing_gap(62.0, 0.0, 0.0).unwrap();
        for a in ac {
            assert!(a.gap < 1e-6, "{a:?}");
            assert!((a.location.abs() - 31.0).abs() < 1e-4);
        }
    }
}
