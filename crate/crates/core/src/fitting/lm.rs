//! Levenberg–Marquardt for the two-parameter splitting model.
//!
//! Positivity is enforced by fitting θ with Ω₁ = θ₁², k = θ₂².

use nalgebra::{Matrix2, Vector2};

use super::{FitError, PowerSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub initial_lambda: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub gradient_tolerance: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            initial_lambda: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            max_iterations: 200,
            step_tolerance: 1e-10,
            gradient_tolerance: 1e-10,
        }
    }
}

pub(super) struct Outcome {
    pub omega1: f64,
    pub k: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

const THETA_FLOOR: f64 = 1e-3;

fn model(theta: &Vector2<f64>, p2: f64) -> f64 {
    (theta[0].powi(4) + theta[1].powi(4) * p2).sqrt()
}

/// Weighted sum of squared residuals.
fn objective(series: &PowerSeries, w: &[f64], theta: &Vector2<f64>) -> f64 {
    series
        .points()
        .iter()
        .zip(w)
        .map(|(pt, &wi)| wi * (pt.y - model(theta, pt.p2)).powi(2))
        .sum()
}

/// JᵀWJ and JᵀWr in θ coordinates.
fn normal_equations(
    series: &PowerSeries,
    w: &[f64],
    theta: &Vector2<f64>,
) -> (Matrix2<f64>, Vector2<f64>) {
    let mut a = Matrix2::zeros();
    let mut g = Vector2::zeros();
    for (pt, &wi) in series.points().iter().zip(w) {
        let f = model(theta, pt.p2);
        if f == 0.0 {
            continue;
        }
        let j = Vector2::new(
            2.0 * theta[0].powi(3) / f,
            2.0 * theta[1].powi(3) * pt.p2 / f,
        );
        a += wi * j * j.transpose();
        g += wi * (pt.y - f) * j;
    }
    (a, g)
}

/// Start from the weighted regression y² = Ω₁² + k²·P₂.
fn initial_guess(series: &PowerSeries, w: &[f64]) -> Vector2<f64> {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (pt, &wi) in series.points().iter().zip(w) {
        let y2 = pt.y * pt.y;
        sw += wi;
        sx += wi * pt.p2;
        sy += wi * y2;
        sxx += wi * pt.p2 * pt.p2;
        sxy += wi * pt.p2 * y2;
    }
    let det = sw * sxx - sx * sx;
    let (intercept, slope) = if det.abs() > 0.0 {
        ((sxx * sy - sx * sxy) / det, (sw * sxy - sx * sy) / det)
    } else {
        (sy / sw, 0.0)
    };
    let omega1 = if intercept > 0.0 {
        intercept.sqrt()
    } else {
        series
            .points()
            .iter()
            .map(|p| p.y.abs())
            .fold(f64::INFINITY, f64::min)
    };
    let k = slope.max(0.0).sqrt();
    Vector2::new(omega1.sqrt().max(THETA_FLOOR), k.sqrt().max(THETA_FLOOR))
}

pub(super) fn minimize(series: &PowerSeries, settings: &LmSettings) -> Result<Outcome, FitError> {
    let w = series.weights();
    let mut theta = initial_guess(series, &w);
    let mut s = objective(series, &w, &theta);
    let mut lambda = settings.initial_lambda;
    let mut trace = vec![s];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        iterations += 1;
        let (a, g) = normal_equations(series, &w, &theta);
        if g.norm() < settings.gradient_tolerance {
            converged = true;
            break;
        }
        let dmax = a[(0, 0)].max(a[(1, 1)]);
        if !(dmax.is_finite() && dmax > 0.0) {
            return Err(FitError::SingularJacobian);
        }
        let floor = 1e-12 * dmax;
        let damping =
            Matrix2::from_diagonal(&Vector2::new(a[(0, 0)].max(floor), a[(1, 1)].max(floor)));
        let step = (a + lambda * damping)
            .lu()
            .solve(&g)
            .filter(|d| d.iter().all(|x| x.is_finite()))
            .ok_or(FitError::SingularJacobian)?;
        let small_step =
            step.norm() <= settings.step_tolerance * (theta.norm() + settings.step_tolerance);

        let trial = theta + step;
        let s_trial = objective(series, &w, &trial);
        if s_trial <= s {
            theta = trial;
            s = s_trial;
            trace.push(s);
            lambda /= settings.lambda_down;
        } else {
            lambda *= settings.lambda_up;
        }
        if small_step {
            converged = true;
            break;
        }
    }

    Ok(Outcome {
        omega1: theta[0] * theta[0],
        k: theta[1] * theta[1],
        iterations,
        converged,
        trace,
    })
}
