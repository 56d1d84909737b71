//! Steady-state optical Bloch equations for the four-level N system, used as
//! an independent check on the dressed-state picture.
//!
//! Basis order (a, b, c, d). C₁ couples a–d, C₂ couples a–c and the probe
//! couples b–d. In the rotating frame the diagonal energies are
//!
//! | state | energy  |
//! |-------|---------|
//! | a     | Δ₁      |
//! | b     | Δ_p     |
//! | c     | Δ₁ − Δ₂ |
//! | d     | 0       |
//!
//! so the (a, c, d) block is the V-system Hamiltonian of
//! [`crate::dressed::build_hamiltonian`] and probe absorption peaks at
//! Δ_p = ℰ_ν. The density matrix is vectorized row-major, `vec(ρ)[4i + j] = ρ_ij`.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dressed::{DressedError, DriveConfig};

pub const A: usize = 0;
pub const B: usize = 1;
pub const C: usize = 2;
pub const D: usize = 3;

pub type Liouvillian = SMatrix<Complex64, 16, 16>;
pub type DensityMatrix = SMatrix<Complex64, 4, 4>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObeError {
    #[error("branching ratios of |{state}⟩ sum to {sum}, expected 1")]
    InvalidBranching { state: char, sum: f64 },
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("Liouvillian kernel has dimension {0}; the steady state is not unique")]
    DegenerateKernel(usize),
    #[error("steady-state linear system is singular")]
    SingularSystem,
    #[error("probe-detuning grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Dressed(#[from] DressedError),
}

fn check_rate(name: &'static str, value: f64) -> Result<(), ObeError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ObeError::InvalidParameter { name, value })
    }
}

/// Spontaneous decay and ground-state dephasing, all in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecayConfig {
    /// Total decay rate of |d⟩.
    pub gamma_d: f64,
    /// Total decay rate of |c⟩.
    pub gamma_c: f64,
    /// Fractions of |d⟩ decay into (|a⟩, |b⟩).
    pub branching_d: [f64; 2],
    /// Fractions of |c⟩ decay into (|a⟩, |b⟩).
    pub branching_c: [f64; 2],
    /// Decay rate of the a–b coherence.
    pub ground_dephasing: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            gamma_d: 6.0,
            gamma_c: 5.7,
            branching_d: [0.5, 0.5],
            branching_c: [1.0, 0.0],
            ground_dephasing: 0.0,
        }
    }
}

impl DecayConfig {
    pub fn validate(&self) -> Result<(), ObeError> {
        check_rate("gamma_d", self.gamma_d)?;
        check_rate("gamma_c", self.gamma_c)?;
        check_rate("ground_dephasing", self.ground_dephasing)?;
        for (state, row) in [('d', self.branching_d), ('c', self.branching_c)] {
            for &f in &row {
                check_rate("branching", f)?;
            }
            let sum = row[0] + row[1];
            if (sum - 1.0).abs() > 1e-12 {
                return Err(ObeError::InvalidBranching { state, sum });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Probe Rabi frequency.
    pub omega_p: f64,
    /// Probe detuning Δ_p.
    pub delta_p: f64,
}

impl ProbeConfig {
    pub fn new(omega_p: f64, delta_p: f64) -> Result<Self, ObeError> {
        let p = Self { omega_p, delta_p };
        p.validate()?;
        Ok(p)
    }

    /// Γ_d/20.
    pub fn default_omega_p(decay: &DecayConfig) -> f64 {
        decay.gamma_d / 20.0
    }

    pub fn validate(&self) -> Result<(), ObeError> {
        if !(self.omega_p.is_finite() && self.omega_p > 0.0) {
            return Err(ObeError::InvalidParameter {
                name: "omega_p",
                value: self.omega_p,
            });
        }
        if !self.delta_p.is_finite() {
            return Err(ObeError::InvalidParameter {
                name: "delta_p",
                value: self.delta_p,
            });
        }
        Ok(())
    }

    /// A message when the probe is not small next to the coupling fields or
    /// the |d⟩ linewidth.
    pub fn weak_probe_warning(&self, drive: &DriveConfig, decay: &DecayConfig) -> Option<String> {
        let scale = drive
            .omega1
            .abs()
            .max(drive.omega2.abs())
            .max(decay.gamma_d);
        (self.omega_p > 0.1 * scale).then(|| {
            format!(
                "probe Rabi frequency {} is not small against max(Ω₁, Ω₂, Γ_d) = {scale}; \
                 absorption may be saturated",
                self.omega_p
            )
        })
    }
}

/// Rotating-frame Hamiltonian in (a, b, c, d) order.
pub fn hamiltonian(drive: &DriveConfig, probe: &ProbeConfig) -> DensityMatrix {
    let mut h = DensityMatrix::zeros();
    let c = |x: f64| Complex64::new(x, 0.0);
    h[(A, A)] = c(drive.delta1);
    h[(B, B)] = c(probe.delta_p);
    h[(C, C)] = c(drive.delta1 - drive.delta2);
    for (i, j, omega) in [
        (A, D, drive.omega1),
        (A, C, drive.omega2),
        (B, D, probe.omega_p),
    ] {
        h[(i, j)] = c(omega / 2.0);
        h[(j, i)] = c(omega / 2.0);
    }
    h
}

/// Lindblad operators with their rates folded in.
pub fn collapse_operators(decay: &DecayConfig) -> Vec<DensityMatrix> {
    let mut ops = Vec::new();
    let jump = |to: usize, from: usize, rate: f64| {
        let mut m = DensityMatrix::zeros();
        m[(to, from)] = Complex64::new(rate.sqrt(), 0.0);
        m
    };
    for (from, gamma, branching) in [
        (D, decay.gamma_d, decay.branching_d),
        (C, decay.gamma_c, decay.branching_c),
    ] {
        for (to, frac) in [(A, branching[0]), (B, branching[1])] {
            let rate = gamma * frac;
            if rate > 0.0 {
                ops.push(jump(to, from, rate));
            }
        }
    }
    if decay.ground_dephasing > 0.0 {
        let s = (decay.ground_dephasing / 2.0).sqrt();
        let mut m = DensityMatrix::zeros();
        m[(A, A)] = Complex64::new(s, 0.0);
        m[(B, B)] = Complex64::new(-s, 0.0);
        ops.push(m);
    }
    ops
}

/// Generator of dρ/dt = Lρ for the row-major vectorized density matrix:
/// L = −i(H⊗I − I⊗Hᵀ) + Σ_k [C_k⊗C̄_k − ½(C_k†C_k⊗I) − ½(I⊗(C_k†C_k)ᵀ)].
pub fn build_liouvillian(
    drive: &DriveConfig,
    probe: &ProbeConfig,
    decay: &DecayConfig,
) -> Result<Liouvillian, ObeError> {
    drive.validate()?;
    probe.validate()?;
    decay.validate()?;
    let h = hamiltonian(drive, probe);
    let id = DensityMatrix::identity();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut l: Liouvillian = (h.kronecker(&id) - id.kronecker(&h.transpose())) * minus_i;
    for c in collapse_operators(decay) {
        let cdc = c.adjoint() * c;
        l += c.kronecker(&c.conjugate());
        l -= cdc.kronecker(&id) * Complex64::new(0.5, 0.0);
        l -= id.kronecker(&cdc.transpose()) * Complex64::new(0.5, 0.0);
    }
    Ok(l)
}

pub fn vectorize(rho: &DensityMatrix) -> SVector<Complex64, 16> {
    SVector::from_fn(|k, _| rho[(k / 4, k % 4)])
}

pub fn unvectorize(v: &SVector<Complex64, 16>) -> DensityMatrix {
    DensityMatrix::from_fn(|i, j| v[4 * i + j])
}

/// Frobenius norm of L.
pub fn liouvillian_norm(l: &Liouvillian) -> f64 {
    l.norm()
}

/// Relative singular-value threshold below which a direction counts as
/// part of the kernel.
pub const KERNEL_TOLERANCE: f64 = 1e-9;

/// Number of singular values of L below `KERNEL_TOLERANCE`·σ_max.
pub fn kernel_dimension(l: &Liouvillian) -> usize {
    let sv = l.singular_values();
    let smax = sv.max();
    sv.iter().filter(|&&s| s <= KERNEL_TOLERANCE * smax).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// ‖Lρ‖ of the returned solution.
    pub residual: f64,
    /// Frobenius norm of L.
    pub liouvillian_norm: f64,
}

impl SteadyState {
    pub fn population(&self, i: usize) -> f64 {
        self.rho[(i, i)].re
    }

    pub fn coherence(&self, i: usize, j: usize) -> Complex64 {
        self.rho[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.rho - self.rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Unique unit-trace null vector of L: the first row is replaced by the trace
/// functional and the system solved by LU with partial pivoting.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState, ObeError> {
    let dim = kernel_dimension(l);
    if dim != 1 {
        return Err(ObeError::DegenerateKernel(dim));
    }
    let mut m = *l;
    for k in 0..16 {
        m[(0, k)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..4 {
        m[(0, 5 * i)] = Complex64::new(1.0, 0.0);
    }
    let mut rhs = SVector::<Complex64, 16>::zeros();
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = m.lu().solve(&rhs).ok_or(ObeError::SingularSystem)?;
    if x.iter().any(|z| !z.is_finite()) {
        return Err(ObeError::SingularSystem);
    }
    Ok(SteadyState {
        rho: unvectorize(&x),
        residual: (l * x).norm(),
        liouvillian_norm: liouvillian_norm(l),
    })
}

pub fn solve_steady_state(
    drive: &DriveConfig,
    probe: &ProbeConfig,
    decay: &DecayConfig,
) -> Result<SteadyState, ObeError> {
    steady_state(&build_liouvillian(drive, probe, decay)?)
}

/// −Γ_d·Im(ρ_db)/Ω_p: equals 1 at the center of a bare, closed two-level line.
pub fn absorption(state: &SteadyState, probe: &ProbeConfig, decay: &DecayConfig) -> f64 {
    -decay.gamma_d * state.coherence(D, B).im / probe.omega_p
}

/// Normalized probe absorption over a grid of probe detunings.
pub fn probe_absorption_spectrum(
    drive: &DriveConfig,
    decay: &DecayConfig,
    omega_p: f64,
    grid: &[f64],
) -> Result<Vec<f64>, ObeError> {
    if grid.is_empty() {
        return Err(ObeError::EmptyGrid);
    }
    drive.validate()?;
    decay.validate()?;
    ProbeConfig::new(omega_p, 0.0)?;
    grid.par_iter()
        .map(|&delta_p| {
            let probe = ProbeConfig::new(omega_p, delta_p)?;
            let ss = solve_steady_state(drive, &probe, decay)?;
            Ok(absorption(&ss, &probe, decay))
        })
        .collect()
}
