//! Least-squares fits of the Autler–Townes splitting and the central-peak
//! height against coupling power P₂, with Ω₂ = k·√P₂.
//!
//! * splitting: δ₁₃(P₂) = √(Ω₁² + k²P₂), fitted by Levenberg–Marquardt;
//! * height: h_c(P₂) = h_uc + B·Ω₂²/(Ω₁² + Ω₂²), linear in (h_uc, B) once
//!   Ω₁ and k are fixed.
//!
//! Both models are leading order in the common detuning Δ; see
//! [`detuning_bias_bound`].

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;
use thiserror::Error;

mod lm;
mod series;

pub use lm::LmSettings;
pub use series::{load_series, parse_series, PowerPoint, PowerSeries};

/// Two-sided 95 % normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Default common detuning Δ (MHz) used for the reported bias bound.
pub const DEFAULT_DETUNING: f64 = 7.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("power series is empty")]
    EmptySeries,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("point {index}: {reason}")]
    InvalidPoint { index: usize, reason: String },
    #[error("line {line}: {message}")]
    ParseError { line: u64, message: String },
    #[error("{0}")]
    Io(String),
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("Jacobian is singular; the data do not constrain both parameters")]
    SingularJacobian,
    #[error("design matrix is rank deficient (all regressors equal)")]
    RankDeficient,
    #[error("no convergence after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        best: Box<FitResult>,
    },
}

/// δ₁₃(P₂) = √(Ω₁² + k²P₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingModel {
    pub omega1: f64,
    pub k: f64,
}

impl SplittingModel {
    pub fn new(omega1: f64, k: f64) -> Result<Self, FitError> {
        if !(omega1.is_finite() && omega1 > 0.0) {
            return Err(FitError::InvalidParameter {
                name: "omega1",
                value: omega1,
            });
        }
        if !(k.is_finite() && k >= 0.0) {
            return Err(FitError::InvalidParameter {
                name: "k",
                value: k,
            });
        }
        Ok(Self { omega1, k })
    }

    pub fn omega2(&self, p2: f64) -> f64 {
        self.k * p2.sqrt()
    }

    pub fn eval(&self, p2: f64) -> f64 {
        (self.omega1 * self.omega1 + self.k * self.k * p2).sqrt()
    }

    /// ∂/∂(Ω₁, k).
    pub fn gradient(&self, p2: f64) -> [f64; 2] {
        let f = self.eval(p2);
        if f == 0.0 {
            return [0.0, 0.0];
        }
        [self.omega1 / f, self.k * p2 / f]
    }

    /// Ω₂²/(Ω₁² + Ω₂²).
    pub fn coupled_fraction(&self, p2: f64) -> f64 {
        let o2 = self.k * self.k * p2;
        let denom = self.omega1 * self.omega1 + o2;
        if denom == 0.0 {
            0.0
        } else {
            o2 / denom
        }
    }
}

/// h_c(P₂) = h_uc + B·Ω₂²/(Ω₁² + Ω₂²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeightModel {
    pub h_uc: f64,
    pub b: f64,
    pub omega1: f64,
    pub k: f64,
}

impl HeightModel {
    fn splitting(&self) -> SplittingModel {
        SplittingModel {
            omega1: self.omega1,
            k: self.k,
        }
    }

    pub fn eval(&self, p2: f64) -> f64 {
        self.h_uc + self.b * self.splitting().coupled_fraction(p2)
    }

    /// ∂/∂(h_uc, B).
    pub fn gradient(&self, p2: f64) -> [f64; 2] {
        [1.0, self.splitting().coupled_fraction(p2)]
    }

    /// Share of the central peak due to three-photon absorption, (h_c − h_uc)/h_c.
    pub fn three_photon_fraction(&self, p2: f64) -> f64 {
        let h = self.eval(p2);
        if h == 0.0 {
            0.0
        } else {
            (h - self.h_uc) / h
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FittedModel {
    Splitting(SplittingModel),
    Height(HeightModel),
}

impl FittedModel {
    pub fn eval(&self, p2: f64) -> f64 {
        match self {
            FittedModel::Splitting(m) => m.eval(p2),
            FittedModel::Height(m) => m.eval(p2),
        }
    }

    pub fn gradient(&self, p2: f64) -> [f64; 2] {
        match self {
            FittedModel::Splitting(m) => m.gradient(p2),
            FittedModel::Height(m) => m.gradient(p2),
        }
    }

    pub fn parameter_names(&self) -> [&'static str; 2] {
        match self {
            FittedModel::Splitting(_) => ["omega1", "k"],
            FittedModel::Height(_) => ["h_uc", "b"],
        }
    }

    pub fn parameters(&self) -> [f64; 2] {
        match self {
            FittedModel::Splitting(m) => [m.omega1, m.k],
            FittedModel::Height(m) => [m.h_uc, m.b],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: FittedModel,
    /// Covariance of the free parameters, in [`FittedModel::parameter_names`] order.
    pub covariance: [[f64; 2]; 2],
    /// √χ² of the weighted residuals.
    pub residual_norm: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting from the initial guess.
    pub objective_trace: Vec<f64>,
}

impl FitResult {
    pub fn parameters(&self) -> [f64; 2] {
        self.model.parameters()
    }

    pub fn std_errors(&self) -> [f64; 2] {
        [
            self.covariance[0][0].max(0.0).sqrt(),
            self.covariance[1][1].max(0.0).sqrt(),
        ]
    }

    /// Half width of the 95 % band at `p2`: 1.96·√(gᵀCg).
    pub fn band_half_width(&self, p2: f64) -> f64 {
        let g = self.model.gradient(p2);
        let c = &self.covariance;
        let var =
            g[0] * (c[0][0] * g[0] + c[0][1] * g[1]) + g[1] * (c[1][0] * g[0] + c[1][1] * g[1]);
        Z95 * var.max(0.0).sqrt()
    }

    pub fn confidence_band(&self, grid: &[f64]) -> ConfidenceBand {
        confidence_band(self, grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceBand {
    pub p2: Vec<f64>,
    pub value: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Delta-method 95 % band of the fitted curve over `grid`.
pub fn confidence_band(fit: &FitResult, grid: &[f64]) -> ConfidenceBand {
    let mut band = ConfidenceBand {
        p2: grid.to_vec(),
        value: Vec::with_capacity(grid.len()),
        lower: Vec::with_capacity(grid.len()),
        upper: Vec::with_capacity(grid.len()),
    };
    for &p in grid {
        let v = fit.model.eval(p);
        let h = fit.band_half_width(p);
        band.value.push(v);
        band.lower.push(v - h);
        band.upper.push(v + h);
    }
    band
}

/// Size of the neglected O(Δ²) term in the splitting, Δ²/(2Ω_eff).
pub fn detuning_bias_bound(delta: f64, omega_eff: f64) -> f64 {
    delta * delta / (2.0 * omega_eff)
}

fn to_array(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Residual-variance scale for the covariance: χ²/(n − p) without σ, else 1.
fn covariance_scale(series: &PowerSeries, chi_square: f64, dof: usize) -> f64 {
    if series.has_sigma() || dof == 0 {
        1.0
    } else {
        chi_square / dof as f64
    }
}

/// Fits δ₁₃ = √(Ω₁² + k²P₂) by Levenberg–Marquardt with default settings.
pub fn fit_splitting(series: &PowerSeries) -> Result<FitResult, FitError> {
    fit_splitting_with(series, &LmSettings::default())
}

pub fn fit_splitting_with(
    series: &PowerSeries,
    settings: &LmSettings,
) -> Result<FitResult, FitError> {
    if series.len() < 3 {
        return Err(FitError::TooFewPoints {
            needed: 3,
            got: series.len(),
        });
    }
    if series.distinct_powers() < 2 {
        return Err(FitError::SingularJacobian);
    }
    let outcome = lm::minimize(series, settings)?;
    let model = SplittingModel {
        omega1: outcome.omega1,
        k: outcome.k,
    };

    let w = series.weights();
    let mut jtj = Matrix2::zeros();
    let mut chi_square = 0.0;
    for (pt, &wi) in series.points().iter().zip(&w) {
        let g = Vector2::from(model.gradient(pt.p2));
        jtj += wi * g * g.transpose();
        let r = pt.y - model.eval(pt.p2);
        chi_square += wi * r * r;
    }
    let dof = series.len() - 2;
    let pinv = jtj
        .pseudo_inverse(1e-14 * jtj.norm())
        .map_err(|_| FitError::SingularJacobian)?;
    let covariance = pinv * covariance_scale(series, chi_square, dof);
    let cov = to_array(&(0.5 * (covariance + covariance.transpose())));

    let result = FitResult {
        model: FittedModel::Splitting(model),
        covariance: cov,
        residual_norm: chi_square.sqrt(),
        chi_square,
        dof,
        iterations: outcome.iterations,
        converged: outcome.converged,
        objective_trace: outcome.trace,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(FitError::NoConvergence {
            iterations: result.iterations,
            best: Box::new(result),
        })
    }
}

/// Fits h_c = h_uc + B·x, x = k²P₂/(Ω₁² + k²P₂), by weighted linear least
/// squares with Ω₁ and k held fixed.
pub fn fit_height(series: &PowerSeries, omega1: f64, k: f64) -> Result<FitResult, FitError> {
    let shape = SplittingModel::new(omega1, k)?;
    if series.len() < 2 {
        return Err(FitError::TooFewPoints {
            needed: 2,
            got: series.len(),
        });
    }
    let w = series.weights();
    let xs: Vec<f64> = series
        .points()
        .iter()
        .map(|p| shape.coupled_fraction(p.p2))
        .collect();
    let (xmin, xmax) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if xmax - xmin <= 1e-12 * xmax.abs().max(1.0) {
        return Err(FitError::RankDeficient);
    }

    let mut xtwx = Matrix2::zeros();
    let mut xtwy = Vector2::zeros();
    for ((pt, &x), &wi) in series.points().iter().zip(&xs).zip(&w) {
        let row = Vector2::new(1.0, x);
        xtwx += wi * row * row.transpose();
        xtwy += wi * pt.y * row;
    }
    let lu = xtwx.full_piv_lu();
    let beta = lu.solve(&xtwy).ok_or(FitError::RankDeficient)?;
    let inv = lu.try_inverse().ok_or(FitError::RankDeficient)?;

    let model = HeightModel {
        h_uc: beta[0],
        b: beta[1],
        omega1,
        k,
    };
    let chi_square: f64 = series
        .points()
        .iter()
        .zip(&w)
        .map(|(pt, &wi)| wi * (pt.y - model.eval(pt.p2)).powi(2))
        .sum();
    let dof = series.len() - 2;
    let covariance = inv * covariance_scale(series, chi_square, dof);
    Ok(FitResult {
        model: FittedModel::Height(model),
        covariance: to_array(&(0.5 * (covariance + covariance.transpose()))),
        residual_norm: chi_square.sqrt(),
        chi_square,
        dof,
        iterations: 1,
        converged: true,
        objective_trace: vec![chi_square],
    })
}
