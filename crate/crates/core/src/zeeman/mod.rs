//! Zeeman-resolved coupling structure of the four hyperfine manifolds and its
//! reduction to independent N configurations.
//!
//! Manifolds: a (F=1) and b (F=2) are the ground levels, c (F'=2) is the
//! upper level driven by C₂ from a, d (F'=2) is the upper level driven by C₁
//! from a and probed by P from b. The quantization axis is taken along the
//! common polarization of C₂ and P.

use serde::{Serialize, Serializer};
use std::fmt;
use thiserror::Error;

mod basis;
mod cg;
mod decompose;

pub use basis::{transform_basis, BasisChange, BasisRows};
pub use cg::{cg_exact, clebsch_gordan, clebsch_gordan_squared, Rational, SignedSqrt, MAX_J};
pub use decompose::{
    decompose, effective_n_parameters, Component, ComponentClass, Decomposition, NSubsystem,
    NSubsystems,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeemanError {
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),
    #[error("polarization of {field} is not unit-normalized (norm² = {norm_sq})")]
    InvalidPolarization { field: Field, norm_sq: f64 },
    #[error("basis change does not match the states of manifold {0}")]
    BasisMismatch(Manifold),
    #[error("no N configuration found in the decomposition")]
    NotAnNConfiguration,
    #[error(transparent)]
    Dressed(#[from] crate::dressed::DressedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Manifold {
    A,
    B,
    C,
    D,
}

impl Manifold {
    pub const ALL: [Manifold; 4] = [Manifold::A, Manifold::B, Manifold::C, Manifold::D];

    /// Total angular momentum F.
    pub fn f(self) -> i32 {
        match self {
            Manifold::A => 1,
            _ => 2,
        }
    }

    pub fn is_ground(self) -> bool {
        matches!(self, Manifold::A | Manifold::B)
    }

    /// Angular-momentum basis |m⟩, m = −F..F.
    pub fn states(self) -> Vec<State> {
        (-self.f()..=self.f())
            .map(|m| State::new(self, Sublevel::M(m)))
            .collect()
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Manifold::A => 'a',
            Manifold::B => 'b',
            Manifold::C => 'c',
            Manifold::D => 'd',
        };
        write!(f, "{c}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Field {
    C1,
    C2,
    P,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::C1, Field::C2, Field::P];

    pub fn lower(self) -> Manifold {
        match self {
            Field::C1 | Field::C2 => Manifold::A,
            Field::P => Manifold::B,
        }
    }

    pub fn upper(self) -> Manifold {
        match self {
            Field::C1 | Field::P => Manifold::D,
            Field::C2 => Manifold::C,
        }
    }

    pub fn is_coupling(self) -> bool {
        !matches!(self, Field::P)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::C1 => "C1",
            Field::C2 => "C2",
            Field::P => "P",
        })
    }
}

/// Label of a state within its manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sublevel {
    /// Angular-momentum eigenstate |m⟩.
    M(i32),
    /// |m,+⟩ = (|m⟩ + |−m⟩)/√2, m > 0.
    Plus(i32),
    /// |m,−⟩ = (|m⟩ − |−m⟩)/√2, m > 0.
    Minus(i32),
    /// |α⟩ = ½|0⟩ + (√3/2)|2,+⟩.
    Alpha,
    /// |β⟩ = (√3/2)|0⟩ − ½|2,+⟩.
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    pub manifold: Manifold,
    pub sublevel: Sublevel,
}

impl State {
    pub fn new(manifold: Manifold, sublevel: Sublevel) -> Self {
        Self { manifold, sublevel }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sublevel {
            Sublevel::M(m) => write!(f, "|{m}⟩_{}", self.manifold),
            Sublevel::Plus(m) => write!(f, "|{m},+⟩_{}", self.manifold),
            Sublevel::Minus(m) => write!(f, "|{m},-⟩_{}", self.manifold),
            Sublevel::Alpha => write!(f, "|α⟩_{}", self.manifold),
            Sublevel::Beta => write!(f, "|β⟩_{}", self.manifold),
        }
    }
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn serialize_rational<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.collect_str(&format_args!("{}/{}", r.numer(), r.denom())),
        None => s.serialize_none(),
    }
}

/// Best rational approximation with denominator at most `max_den`, accepted
/// only if it reproduces `x` to `tol`.
pub fn rational_approx(x: f64, max_den: i128, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol {
            return Some(Rational::new(h1, k1));
        }
        let frac = y - a;
        if frac.abs() < 1e-300 {
            break;
        }
        y = 1.0 / frac;
    }
    None
}

/// Spherical components (q = −1, 0, +1) of each field's polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationScheme {
    pub c1: [f64; 3],
    pub c2: [f64; 3],
    pub probe: [f64; 3],
}

impl PolarizationScheme {
    pub fn new(c1: [f64; 3], c2: [f64; 3], probe: [f64; 3]) -> Result<Self, ZeemanError> {
        let scheme = Self { c1, c2, probe };
        for field in Field::ALL {
            let norm_sq: f64 = scheme.components(field).iter().map(|a| a * a).sum();
            if (norm_sq - 1.0).abs() > 1e-12 {
                return Err(ZeemanError::InvalidPolarization { field, norm_sq });
            }
        }
        Ok(scheme)
    }

    /// C₁ linearly polarized perpendicular to the axis, C₂ and P along it.
    pub fn orthogonal() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            c1: [r, 0.0, r],
            c2: [0.0, 1.0, 0.0],
            probe: [0.0, 1.0, 0.0],
        }
    }

    /// All three fields polarized along the axis.
    pub fn parallel() -> Self {
        Self {
            c1: [0.0, 1.0, 0.0],
            c2: [0.0, 1.0, 0.0],
            probe: [0.0, 1.0, 0.0],
        }
    }

    pub fn components(&self, field: Field) -> [f64; 3] {
        match field {
            Field::C1 => self.c1,
            Field::C2 => self.c2,
            Field::P => self.probe,
        }
    }
}

/// One nonzero field-driven transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub field: Field,
    pub lower: State,
    pub upper: State,
    pub amplitude: f64,
    #[serde(rename = "amplitude_sq_exact", serialize_with = "serialize_rational")]
    pub exact_sq: Option<Rational>,
}

impl Edge {
    pub fn amplitude_sq(&self) -> f64 {
        self.amplitude * self.amplitude
    }
}

/// States of all four manifolds plus the transitions among them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingGraph {
    pub states: Vec<State>,
    pub edges: Vec<Edge>,
}

pub(crate) const AMPLITUDE_CUTOFF: f64 = 1e-12;

impl CouplingGraph {
    pub fn degree(&self, state: &State) -> usize {
        self.edges
            .iter()
            .filter(|e| &e.lower == state || &e.upper == state)
            .count()
    }

    pub fn edges_of(&self, field: Field) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.field == field)
    }

    pub fn states_of(&self, manifold: Manifold) -> Vec<State> {
        self.states
            .iter()
            .filter(|s| s.manifold == manifold)
            .copied()
            .collect()
    }

    /// Σ amplitude² over the edges of one field.
    pub fn total_strength(&self, field: Field) -> f64 {
        self.edges_of(field).map(Edge::amplitude_sq).sum()
    }

    /// Σ amplitude² over the edges of one field, exactly, when every edge has
    /// an exact square.
    pub fn total_strength_exact(&self, field: Field) -> Option<Rational> {
        self.edges_of(field)
            .map(|e| e.exact_sq)
            .try_fold(Rational::from_integer(0), |acc, x| x.map(|x| acc + x))
    }

    /// Coupling matrix of `field`, rows indexed by `uppers`, columns by `lowers`.
    pub fn coupling_matrix(
        &self,
        field: Field,
        uppers: &[State],
        lowers: &[State],
    ) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; lowers.len()]; uppers.len()];
        for e in self.edges_of(field) {
            let i = uppers.iter().position(|s| *s == e.upper);
            let j = lowers.iter().position(|s| *s == e.lower);
            if let (Some(i), Some(j)) = (i, j) {
                m[i][j] += e.amplitude;
            }
        }
        m
    }
}

/// Builds the angular-momentum-basis coupling graph for a polarization scheme.
///
/// Each edge amplitude is the polarization component times
/// ⟨F m; 1 q | F' m+q⟩; the reduced dipole of each line is left to the
/// per-field Rabi frequency.
pub fn build_coupling_graph(scheme: &PolarizationScheme) -> Result<CouplingGraph, ZeemanError> {
    let scheme = PolarizationScheme::new(scheme.c1, scheme.c2, scheme.probe)?;
    let states: Vec<State> = Manifold::ALL.iter().flat_map(|m| m.states()).collect();
    let mut edges = Vec::new();
    for field in Field::ALL {
        let (lo, up) = (field.lower(), field.upper());
        let pol = scheme.components(field);
        for m in -lo.f()..=lo.f() {
            for (idx, &amp_q) in pol.iter().enumerate() {
                let q = idx as i32 - 1;
                let m_up = m + q;
                if amp_q.abs() < AMPLITUDE_CUTOFF || m_up.abs() > up.f() {
                    continue;
                }
                let cg = cg_exact(lo.f(), m, 1, q, up.f(), m_up)?;
                if cg.sign == 0 {
                    continue;
                }
                let exact_sq = rational_approx(amp_q * amp_q, 1000, 1e-14).map(|p| p * cg.square);
                edges.push(Edge {
                    field,
                    lower: State::new(lo, Sublevel::M(m)),
                    upper: State::new(up, Sublevel::M(m_up)),
                    amplitude: amp_q * cg.value(),
                    exact_sq,
                });
            }
        }
    }
    Ok(CouplingGraph { states, edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(manifold: Manifold, m: i32) -> State {
        State::new(manifold, Sublevel::M(m))
    }

    #[test]
    fn manifold_sizes() {
        for m in Manifold::ALL {
            assert_eq!(m.states().len() as i32, 2 * m.f() + 1);
        }
    }

    #[test]
    fn polarization_must_be_normalized() {
        assert!(
            PolarizationScheme::new([1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0]).is_err()
        );
        assert!(PolarizationScheme::new([0.6, 0.0, 0.8], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn orthogonal_scheme_idle_states() {
        let g = build_coupling_graph(&PolarizationScheme::orthogonal()).unwrap();
        for s in [st(Manifold::B, 0), st(Manifold::C, -2), st(Manifold::C, 2)] {
            assert_eq!(g.degree(&s), 0, "{s}");
        }
    }

    #[test]
    fn orthogonal_scheme_c1_forms_v_and_w() {
        let g = build_coupling_graph(&PolarizationScheme::orthogonal()).unwrap();
        let from = |m: i32| {
            g.edges_of(Field::C1)
                .filter(|e| e.lower == st(Manifold::A, m))
                .count()
        };
        assert_eq!(from(0), 2);
        assert_eq!(from(1) + from(-1), 4);
        // The W shares |0⟩_d between the two arms.
        let shared = g
            .edges_of(Field::C1)
            .filter(|e| e.upper == st(Manifold::D, 0))
            .count();
        assert_eq!(shared, 2);
    }

    #[test]
    fn parallel_scheme_stretched_probe_lines() {
        let g = build_coupling_graph(&PolarizationScheme::parallel()).unwrap();
        for m in [-2, 2] {
            let e = g
                .edges_of(Field::P)
                .find(|e| e.lower == st(Manifold::B, m))
                .unwrap();
            assert_eq!(e.upper, st(Manifold::D, m));
            assert_eq!(e.exact_sq, Some(Rational::new(2, 3)));
        }
    }

    #[test]
    fn rational_reconstruction() {
        assert_eq!(
            rational_approx(1.0 / 6.0, 1000, 1e-14),
            Some(Rational::new(1, 6))
        );
        assert_eq!(
            rational_approx(2.0 / 3.0, 1000, 1e-14),
            Some(Rational::new(2, 3))
        );
        assert_eq!(rational_approx(0.0, 1000, 1e-14), Some(Rational::new(0, 1)));
        assert_eq!(rational_approx(std::f64::consts::PI, 1000, 1e-12), None);
    }
}
