//! Embedded example inputs, addressable by name from the command line.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::parable::ParableWorld;
use crate::transition::TransitionGraph;

pub const STATE_TABLES: &[&str] = &["octant"];
pub const GRAPHS: &[&str] = &["one-route", "two-route", "destructive"];
pub const WORLDS: &[&str] = &["paper", "two-road", "one-road"];

fn state(components: &[(f64, f64)]) -> StateVector {
    StateVector::new(components.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
        .expect("builtin states are normalized")
}

/// The six axis states of the qubit Bloch sphere: `z`, `minusz`, `x`,
/// `minusx`, `y`, `minusy` (|0⟩, |1⟩, |±⟩, |±i⟩).
pub fn octant_states() -> Vec<StateVector> {
    let h = FRAC_1_SQRT_2;
    vec![
        state(&[(1.0, 0.0), (0.0, 0.0)]).with_label("z"),
        state(&[(0.0, 0.0), (1.0, 0.0)]).with_label("minusz"),
        state(&[(h, 0.0), (h, 0.0)]).with_label("x"),
        state(&[(h, 0.0), (-h, 0.0)]).with_label("minusx"),
        state(&[(h, 0.0), (0.0, h)]).with_label("y"),
        state(&[(h, 0.0), (0.0, -h)]).with_label("minusy"),
    ]
}

fn graph(states: Vec<(&str, StateVector)>, layers: &[&[&str]]) -> TransitionGraph {
    TransitionGraph::new(
        states.into_iter().map(|(l, s)| (l.to_string(), s)),
        layers.iter().map(|l| l.iter().map(|s| s.to_string()).collect()).collect(),
    )
    .expect("builtin graphs are valid")
}

/// `|0⟩ → |+⟩ → |1⟩`, amplitude 1/2.
pub fn one_route_graph() -> TransitionGraph {
    let h = FRAC_1_SQRT_2;
    graph(
        vec![
            ("i", state(&[(1.0, 0.0), (0.0, 0.0)])),
            ("m", state(&[(h, 0.0), (h, 0.0)])),
            ("f", state(&[(0.0, 0.0), (1.0, 0.0)])),
        ],
        &[&["i"], &["m"], &["f"]],
    )
}

/// `|0⟩ → {|+⟩, (|0⟩ + e^{iπ/4}|1⟩)/√2} → |1⟩`, amplitudes 1/2 and e^{iπ/4}/2.
pub fn two_route_graph() -> TransitionGraph {
    let h = FRAC_1_SQRT_2;
    let tilt = Complex64::from_polar(h, FRAC_PI_4);
    graph(
        vec![
            ("i", state(&[(1.0, 0.0), (0.0, 0.0)])),
            ("m1", state(&[(h, 0.0), (h, 0.0)])),
            ("m2", state(&[(h, 0.0), (tilt.re, tilt.im)])),
            ("f", state(&[(0.0, 0.0), (1.0, 0.0)])),
        ],
        &[&["i"], &["m1", "m2"], &["f"]],
    )
}

/// Two routes in dimension 4 with amplitudes +1/2 and −1/2.
pub fn destructive_graph() -> TransitionGraph {
    let h = FRAC_1_SQRT_2;
    let z = (0.0, 0.0);
    graph(
        vec![
            ("i", state(&[(1.0, 0.0), z, z, z])),
            ("m1", state(&[(h, 0.0), (h, 0.0), z, z])),
            ("m2", state(&[(h, 0.0), (-h, 0.0), z, z])),
            ("f", state(&[z, (1.0, 0.0), z, z])),
        ],
        &[&["i"], &["m1", "m2"], &["f"]],
    )
}

fn world(roads: &[&str], gates: &[&str], access: &[(&str, &[&str])]) -> ParableWorld {
    let access: BTreeMap<String, Vec<String>> =
        access.iter().map(|(r, gs)| (r.to_string(), gs.iter().map(|g| g.to_string()).collect())).collect();
    ParableWorld::new(
        roads.iter().map(|s| s.to_string()).collect(),
        gates.iter().map(|s| s.to_string()).collect(),
        access,
    )
    .expect("builtin worlds are valid")
}

/// Road A reaches gates 1 and 2, road B reaches gates 2 and 3.
pub fn paper_world() -> ParableWorld {
    world(&["A", "B"], &["1", "2", "3"], &[("A", &["1", "2"]), ("B", &["2", "3"])])
}

/// Roads A and B into a single gate.
pub fn two_road_world() -> ParableWorld {
    world(&["A", "B"], &["town"], &[("A", &["town"]), ("B", &["town"])])
}

pub fn one_road_world() -> ParableWorld {
    world(&["A"], &["town"], &[("A", &["town"])])
}

pub fn state_table(name: &str) -> Option<Vec<StateVector>> {
    match name {
        "octant" => Some(octant_states()),
        _ => None,
    }
}

pub fn graph_named(name: &str) -> Option<TransitionGraph> {
    match name {
        "one-route" => Some(one_route_graph()),
        "two-route" => Some(two_route_graph()),
        "destructive" => Some(destructive_graph()),
        _ => None,
    }
}

pub fn world_named(name: &str) -> Option<ParableWorld> {
    match name {
        "paper" => Some(paper_world()),
        "two-road" => Some(two_road_world()),
        "one-road" => Some(one_road_world()),
        _ => None,
    }
}

pub(crate) fn unknown(kind: &str, name: &str, known: &[&str]) -> Error {
    Error::Parse(format!("`{name}` is neither a readable {kind} file nor a builtin ({})", known.join(", ")))
}

/// Convenience for callers that already validated the name.
pub fn require_graph(name: &str) -> Result<TransitionGraph> {
    graph_named(name).ok_or_else(|| unknown("graph", name, GRAPHS))
}
