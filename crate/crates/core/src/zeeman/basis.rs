//! Orthogonal changes of basis within each hyperfine manifold.

use std::collections::BTreeSet;

use super::{
    rational_approx, CouplingGraph, Edge, Field, Manifold, State, Sublevel, ZeemanError,
    AMPLITUDE_CUTOFF,
};

/// Rows of the orthogonal matrix U for one manifold: `new[i] = Σ_j matrix[i][j]·old[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisRows {
    pub manifold: Manifold,
    pub old: Vec<State>,
    pub new: Vec<State>,
    pub matrix: Vec<Vec<f64>>,
}

impl BasisRows {
    fn identity(manifold: Manifold) -> Self {
        let old = manifold.states();
        let n = old.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
            .collect();
        Self {
            manifold,
            new: old.clone(),
            old,
            matrix,
        }
    }

    /// |0⟩ and |m,±⟩ = (|m⟩ ± |−m⟩)/√2.
    fn parity(manifold: Manifold) -> Self {
        let f = manifold.f();
        let old = manifold.states();
        let idx = |m: i32| (m + f) as usize;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut new = vec![State::new(manifold, Sublevel::M(0))];
        let mut row0 = vec![0.0; old.len()];
        row0[idx(0)] = 1.0;
        let mut matrix = vec![row0];
        for m in 1..=f {
            for (label, sign) in [(Sublevel::Plus(m), 1.0), (Sublevel::Minus(m), -1.0)] {
                let mut row = vec![0.0; old.len()];
                row[idx(m)] = r;
                row[idx(-m)] = sign * r;
                new.push(State::new(manifold, label));
                matrix.push(row);
            }
        }
        Self {
            manifold,
            old,
            new,
            matrix,
        }
    }

    /// Parity basis with |0⟩ and |2,+⟩ rotated into |α⟩, |β⟩.
    fn parity_with_alpha_beta(manifold: Manifold) -> Self {
        let mut rows = Self::parity(manifold);
        let zero = rows
            .new
            .iter()
            .position(|s| s.sublevel == Sublevel::M(0))
            .unwrap();
        let plus2 = rows
            .new
            .iter()
            .position(|s| s.sublevel == Sublevel::Plus(2))
            .unwrap();
        let (u0, u2) = (rows.matrix[zero].clone(), rows.matrix[plus2].clone());
        let s3 = 3f64.sqrt() / 2.0;
        let combine = |a: f64, b: f64| -> Vec<f64> {
            u0.iter().zip(&u2).map(|(x, y)| a * x + b * y).collect()
        };
        rows.matrix[zero] = combine(0.5, s3);
        rows.new[zero] = State::new(manifold, Sublevel::Alpha);
        rows.matrix[plus2] = combine(s3, -0.5);
        rows.new[plus2] = State::new(manifold, Sublevel::Beta);
        rows
    }

    /// max |UUᵀ − I|.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.matrix.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = self.matrix[i]
                    .iter()
                    .zip(&self.matrix[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// A per-manifold orthogonal basis change.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange {
    rows: Vec<BasisRows>,
}

impl BasisChange {
    pub fn identity() -> Self {
        Self {
            rows: Manifold::ALL
                .iter()
                .map(|&m| BasisRows::identity(m))
                .collect(),
        }
    }

    /// Symmetric and antisymmetric ±m combinations in every manifold.
    pub fn parity() -> Self {
        Self {
            rows: Manifold::ALL
                .iter()
                .map(|&m| BasisRows::parity(m))
                .collect(),
        }
    }

    /// Parity combinations everywhere, with |0⟩_d and |2,+⟩_d mixed into
    /// |α⟩_d = ½|0⟩_d + (√3/2)|2,+⟩_d and |β⟩_d = (√3/2)|0⟩_d − ½|2,+⟩_d.
    ///
    /// For the orthogonal polarization scheme this splits the coupled states
    /// into three N configurations.
    pub fn n_reduction() -> Self {
        let rows = Manifold::ALL
            .iter()
            .map(|&m| match m {
                Manifold::D => BasisRows::parity_with_alpha_beta(m),
                _ => BasisRows::parity(m),
            })
            .collect();
        Self { rows }
    }

    /// Custom change of basis; needs one orthogonal block per manifold whose
    /// `old` states are that manifold's angular-momentum states.
    pub fn from_rows(rows: Vec<BasisRows>) -> Result<Self, ZeemanError> {
        for m in Manifold::ALL {
            let mut found = rows.iter().filter(|r| r.manifold == m);
            let (Some(r), None) = (found.next(), found.next()) else {
                return Err(ZeemanError::BasisMismatch(m));
            };
            let n = r.old.len();
            let square = r.new.len() == n
                && r.matrix.len() == n
                && r.matrix.iter().all(|row| row.len() == n);
            let same_states: BTreeSet<State> = r.old.iter().copied().collect();
            let expected: BTreeSet<State> = m.states().into_iter().collect();
            let labels_ok = r.new.iter().all(|s| s.manifold == m)
                && r.new.iter().collect::<BTreeSet<_>>().len() == n;
            if !square || same_states != expected || !labels_ok || r.orthogonality_defect() > 1e-12
            {
                return Err(ZeemanError::BasisMismatch(m));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self, manifold: Manifold) -> &BasisRows {
        self.rows
            .iter()
            .find(|r| r.manifold == manifold)
            .expect("every manifold has rows")
    }
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| a.iter().map(|row| row[j]).collect())
        .collect()
}

/// Re-expresses every edge amplitude in the new basis: M' = U_upper · M · U_lowerᵀ.
///
/// The input graph must contain exactly the `old` states of each manifold.
pub fn transform_basis(
    graph: &CouplingGraph,
    change: &BasisChange,
) -> Result<CouplingGraph, ZeemanError> {
    for m in Manifold::ALL {
        let have: BTreeSet<State> = graph.states_of(m).into_iter().collect();
        let want: BTreeSet<State> = change.rows(m).old.iter().copied().collect();
        if have != want {
            return Err(ZeemanError::BasisMismatch(m));
        }
    }

    let states: Vec<State> = Manifold::ALL
        .iter()
        .flat_map(|&m| change.rows(m).new.clone())
        .collect();
    let mut edges = Vec::new();
    for field in Field::ALL {
        let up = change.rows(field.upper());
        let lo = change.rows(field.lower());
        let m = graph.coupling_matrix(field, &up.old, &lo.old);
        let transformed = matmul(&matmul(&up.matrix, &m), &transpose(&lo.matrix));
        for (i, row) in transformed.iter().enumerate() {
            for (j, &amp) in row.iter().enumerate() {
                if amp.abs() > AMPLITUDE_CUTOFF {
                    edges.push(Edge {
                        field,
                        lower: lo.new[j],
                        upper: up.new[i],
                        amplitude: amp,
                        exact_sq: rational_approx(amp * amp, 1000, 1e-12),
                    });
                }
            }
        }
    }
    Ok(CouplingGraph { states, edges })
}
