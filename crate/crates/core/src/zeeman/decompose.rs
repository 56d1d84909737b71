//! Connected-component analysis of a coupling graph.

use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

use super::{CouplingGraph, Edge, Field, State, ZeemanError};
use crate::dressed::DriveConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComponentClass {
    /// One C₁ and one C₂ edge sharing a lower state, probed on the C₁ upper state.
    NConfiguration,
    /// An N configuration whose probe lower state also drives uncoupled lines.
    NWithExtraEdge,
    /// No coupling-field edge at all (bare states or probe-only transitions).
    Isolated,
    /// Coupling-field edges that do not form a single N.
    Other,
}

impl ComponentClass {
    pub fn is_n(self) -> bool {
        matches!(
            self,
            ComponentClass::NConfiguration | ComponentClass::NWithExtraEdge
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub states: Vec<State>,
    /// Indices into the graph's edge list.
    pub edges: Vec<usize>,
    pub class: ComponentClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub graph: CouplingGraph,
    pub components: Vec<Component>,
    /// Probe edges whose upper state is reached by no coupling field.
    pub uncoupled: Vec<usize>,
    /// Ground states touched by no field.
    pub dark_states: Vec<State>,
}

impl Decomposition {
    pub fn n_components(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.class.is_n())
    }

    pub fn uncoupled_edges(&self) -> impl Iterator<Item = &Edge> {
        self.uncoupled.iter().map(|&i| &self.graph.edges[i])
    }

    /// Components carrying at least one edge.
    pub fn coupled_components(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| {
            c.edges
                .iter()
                .any(|&e| self.graph.edges[e].field.is_coupling())
        })
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn classify(
    graph: &CouplingGraph,
    edges: &[usize],
    driven_uppers: &BTreeSet<State>,
) -> ComponentClass {
    let of = |field: Field| -> Vec<&Edge> {
        edges
            .iter()
            .map(|&i| &graph.edges[i])
            .filter(|e| e.field == field)
            .collect()
    };
    let (c1, c2, p) = (of(Field::C1), of(Field::C2), of(Field::P));
    if c1.is_empty() && c2.is_empty() {
        return ComponentClass::Isolated;
    }
    let (core_p, extra_p): (Vec<&Edge>, Vec<&Edge>) = p
        .into_iter()
        .partition(|e| driven_uppers.contains(&e.upper));
    let is_n = c1.len() == 1
        && c2.len() == 1
        && c1[0].lower == c2[0].lower
        && core_p.len() == 1
        && core_p[0].upper == c1[0].upper;
    match (is_n, extra_p.is_empty()) {
        (true, true) => ComponentClass::NConfiguration,
        (true, false) => ComponentClass::NWithExtraEdge,
        (false, _) => ComponentClass::Other,
    }
}

/// Splits a graph into connected components and classifies each one.
pub fn decompose(graph: &CouplingGraph) -> Decomposition {
    let index: BTreeMap<State, usize> = graph
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, i))
        .collect();
    let mut parent: Vec<usize> = (0..graph.states.len()).collect();
    for e in &graph.edges {
        let (a, b) = (
            find(&mut parent, index[&e.lower]),
            find(&mut parent, index[&e.upper]),
        );
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }

    let mut groups: BTreeMap<usize, (Vec<State>, Vec<usize>)> = BTreeMap::new();
    for (i, s) in graph.states.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().0.push(*s);
    }
    for (k, e) in graph.edges.iter().enumerate() {
        let root = find(&mut parent, index[&e.lower]);
        groups.entry(root).or_default().1.push(k);
    }

    let driven_uppers: BTreeSet<State> = graph
        .edges
        .iter()
        .filter(|e| e.field.is_coupling())
        .map(|e| e.upper)
        .collect();

    let components = groups
        .into_values()
        .map(|(states, edges)| Component {
            class: classify(graph, &edges, &driven_uppers),
            states,
            edges,
        })
        .collect();

    let uncoupled = graph
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.field == Field::P && !driven_uppers.contains(&e.upper))
        .map(|(i, _)| i)
        .collect();

    let dark_states = graph
        .states
        .iter()
        .filter(|s| s.manifold.is_ground() && graph.degree(s) == 0)
        .copied()
        .collect();

    Decomposition {
        graph: graph.clone(),
        components,
        uncoupled,
        dark_states,
    }
}

/// Effective drive of one N subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NSubsystem {
    /// Index into [`Decomposition::components`].
    pub component: usize,
    pub drive: DriveConfig,
    pub c1_amplitude: f64,
    pub c2_amplitude: f64,
    pub probe_amplitude: f64,
    /// √(Ω₁² + Ω₂²) of the subsystem.
    pub splitting: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NSubsystems {
    pub subsystems: Vec<NSubsystem>,
    pub mean_splitting: f64,
    /// (max − min)/mean of the resonant splittings.
    pub relative_spread: f64,
}

/// Scales the base Rabi frequencies by each N subsystem's effective C₁ and C₂
/// amplitudes. Detunings are copied from `base`.
pub fn effective_n_parameters(
    decomp: &Decomposition,
    base: &DriveConfig,
) -> Result<NSubsystems, ZeemanError> {
    base.validate()?;
    let mut subsystems = Vec::new();
    for (ci, comp) in decomp.components.iter().enumerate() {
        if !comp.class.is_n() {
            continue;
        }
        let edges: Vec<&Edge> = comp.edges.iter().map(|&i| &decomp.graph.edges[i]).collect();
        let pick = |field: Field| {
            edges
                .iter()
                .find(|e| e.field == field)
                .map(|e| e.amplitude.abs())
        };
        let (Some(a1), Some(a2)) = (pick(Field::C1), pick(Field::C2)) else {
            return Err(ZeemanError::NotAnNConfiguration);
        };
        let c1_upper = edges.iter().find(|e| e.field == Field::C1).map(|e| e.upper);
        let probe = edges
            .iter()
            .find(|e| e.field == Field::P && Some(e.upper) == c1_upper)
            .map(|e| e.amplitude.abs())
            .ok_or(ZeemanError::NotAnNConfiguration)?;
        let drive = DriveConfig::new(base.omega1 * a1, base.omega2 * a2, base.delta1, base.delta2)?;
        subsystems.push(NSubsystem {
            component: ci,
            drive,
            c1_amplitude: a1,
            c2_amplitude: a2,
            probe_amplitude: probe,
            splitting: drive.effective_rabi(),
        });
    }
    if subsystems.is_empty() {
        return Err(ZeemanError::NotAnNConfiguration);
    }
    let n = subsystems.len() as f64;
    let mean = subsystems.iter().map(|s| s.splitting).sum::<f64>() / n;
    let (lo, hi) = subsystems
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.splitting), hi.max(s.splitting))
        });
    let relative_spread = if mean > 0.0 { (hi - lo) / mean } else { 0.0 };
    Ok(NSubsystems {
        subsystems,
        mean_splitting: mean,
        relative_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeeman::{
        build_coupling_graph, transform_basis, BasisChange, Manifold, PolarizationScheme, Sublevel,
    };

    fn reduced_orthogonal() -> Decomposition {
        let g = build_coupling_graph(&PolarizationScheme::orthogonal()).unwrap();
        decompose(&transform_basis(&g, &BasisChange::n_reduction()).unwrap())
    }

    #[test]
    fn components_partition_states() {
        let d = reduced_orthogonal();
        let total: usize = d.components.iter().map(|c| c.states.len()).sum();
        assert_eq!(total, d.graph.states.len());
        let unique: BTreeSet<State> = d.components.iter().flat_map(|c| c.states.clone()).collect();
        assert_eq!(unique.len(), total);
        let edges: usize = d.components.iter().map(|c| c.edges.len()).sum();
        assert_eq!(edges, d.graph.edges.len());
    }

    #[test]
    fn angular_basis_has_six_and_nine_state_systems() {
        let g = build_coupling_graph(&PolarizationScheme::orthogonal()).unwrap();
        let d = decompose(&g);
        let mut sizes: Vec<usize> = d.coupled_components().map(|c| c.states.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![6, 9]);
        assert_eq!(d.n_components().count(), 0);
    }

    #[test]
    fn extra_edge_reaches_beta() {
        let d = reduced_orthogonal();
        let comp = d
            .components
            .iter()
            .find(|c| c.class == ComponentClass::NWithExtraEdge)
            .unwrap();
        let beta = State::new(Manifold::D, Sublevel::Beta);
        let b2m = State::new(Manifold::B, Sublevel::Minus(2));
        assert!(comp.states.contains(&beta) && comp.states.contains(&b2m));
        assert_eq!(comp.states.len(), 5);
    }

    #[test]
    fn uniform_amplitudes_have_no_spread() {
        let mut d = reduced_orthogonal();
        for e in d.graph.edges.iter_mut() {
            e.amplitude = 0.5;
        }
        let base = DriveConfig::resonant(62.0, 44.0).unwrap();
        let n = effective_n_parameters(&d, &base).unwrap();
        assert_eq!(n.relative_spread, 0.0);
    }

    #[test]
    fn effective_parameters_are_linear_in_base() {
        let d = reduced_orthogonal();
        let one = effective_n_parameters(&d, &DriveConfig::resonant(62.0, 44.0).unwrap()).unwrap();
        let two = effective_n_parameters(&d, &DriveConfig::resonant(124.0, 88.0).unwrap()).unwrap();
        for (a, b) in one.subsystems.iter().zip(&two.subsystems) {
            assert!((2.0 * a.drive.omega1 - b.drive.omega1).abs() < 1e-12);
            assert!((2.0 * a.drive.omega2 - b.drive.omega2).abs() < 1e-12);
            assert!((2.0 * a.splitting - b.splitting).abs() < 1e-12);
        }
        assert!((one.relative_spread - two.relative_spread).abs() < 1e-14);
    }

    #[test]
    fn no_n_configuration_is_an_error() {
        let g = build_coupling_graph(&PolarizationScheme::orthogonal()).unwrap();
        let d = decompose(&g);
        assert_eq!(
            effective_n_parameters(&d, &DriveConfig::resonant(1.0, 1.0).unwrap()),
            Err(ZeemanError::NotAnNConfiguration)
        );
    }
}
