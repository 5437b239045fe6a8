//! Layered transition graphs and the loop-sum rule for `P(i → f)`.
//!
//! A graph has layers `[i], L_1, …, L_k, [f]`. A forward path picks one state
//! per layer. A closed loop pairs an outbound path with an inbound one and
//! visits `i → out → f → reversed(in) → i`. Summing Γ over all ordered pairs
//! gives the transition probability; the born-rule route `|Σ_p φ_p|²` is
//! computed independently and used as the oracle.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::check::{CheckRecord, CheckReport};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::hilbert::{dot, inner_product, random_orthonormal_set, Amplitude, StateVector};
use crate::loops::{gamma_product, CyclicPath, GammaValue};
use crate::rng;

/// Tolerance on the imaginary part of a loop sum and on negative probabilities.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TransitionGraph {
    labels: Vec<String>,
    states: Vec<StateVector>,
    index: HashMap<String, usize>,
    layers: Vec<Vec<usize>>,
}

impl TransitionGraph {
    /// Validates the layer structure: first and last layers hold exactly one
    /// state, interior layers are nonempty, labels resolve and are unique
    /// within a layer, and all states share one dimension.
    pub fn new(
        states: impl IntoIterator<Item = (String, StateVector)>,
        layers: Vec<Vec<String>>,
    ) -> Result<Self> {
        let mut labels = Vec::new();
        let mut table = Vec::new();
        let mut index = HashMap::new();
        for (label, state) in states {
            if index.insert(label.clone(), table.len()).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate state label `{label}`")));
            }
            labels.push(label.clone());
            table.push(state.with_label(label));
        }
        if let Some(first) = table.first() {
            let dim = first.dim();
            if let Some((label, bad)) = labels.iter().zip(&table).find(|(_, s)| s.dim() != dim) {
                return Err(Error::InvalidGraph(format!(
                    "all states must share one dimension: `{label}` has {} but expected {dim}",
                    bad.dim()
                )));
            }
        }
        if layers.len() < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 layers, got {}", layers.len())));
        }
        if layers[0].len() != 1 {
            return Err(Error::InvalidGraph("first layer must hold exactly one state".into()));
        }
        if layers[layers.len() - 1].len() != 1 {
            return Err(Error::InvalidGraph("last layer must hold exactly one state".into()));
        }
        let mut resolved = Vec::with_capacity(layers.len());
        for (k, layer) in layers.iter().enumerate() {
            if layer.is_empty() {
                return Err(Error::InvalidGraph(format!("interior layer {k} is empty")));
            }
            let mut ids = Vec::with_capacity(layer.len());
            for label in layer {
                let id = *index.get(label).ok_or_else(|| Error::UnknownLabel(label.clone()))?;
                if ids.contains(&id) {
                    return Err(Error::InvalidGraph(format!("label `{label}` repeated in layer {k}")));
                }
                ids.push(id);
            }
            resolved.push(ids);
        }
        Ok(TransitionGraph { labels, states: table, index, layers: resolved })
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn interior_layer_count(&self) -> usize {
        self.layers.len() - 2
    }

    pub fn layer_labels(&self, k: usize) -> Vec<&str> {
        self.layers[k].iter().map(|&id| self.labels[id].as_str()).collect()
    }

    pub fn state(&self, label: &str) -> Option<&StateVector> {
        self.index.get(label).map(|&id| &self.states[id])
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    pub fn initial(&self) -> &StateVector {
        &self.states[self.layers[0][0]]
    }

    pub fn final_state(&self) -> &StateVector {
        &self.states[self.layers[self.layers.len() - 1][0]]
    }

    /// Number of forward paths, the product of interior layer sizes.
    pub fn path_count(&self) -> usize {
        self.layers.iter().map(Vec::len).product()
    }

    /// The same graph with every state replaced by `f(label, state)`.
    pub fn map_states(&self, mut f: impl FnMut(&str, &StateVector) -> Result<StateVector>) -> Result<Self> {
        let states = self
            .labels
            .iter()
            .zip(&self.states)
            .map(|(l, s)| Ok((l.clone(), f(l, s)?)))
            .collect::<Result<Vec<_>>>()?;
        let layers = (0..self.layers.len())
            .map(|k| self.layer_labels(k).into_iter().map(String::from).collect())
            .collect();
        TransitionGraph::new(states, layers)
    }

    /// Resolves a forward path from one label per layer.
    pub fn forward_path(&self, labels: &[&str]) -> Result<ForwardPath> {
        if labels.len() != self.layers.len() {
            return Err(Error::LengthMismatch { expected: self.layers.len(), found: labels.len() });
        }
        let nodes = labels
            .iter()
            .zip(&self.layers)
            .enumerate()
            .map(|(k, (label, layer))| {
                let id = *self.index.get(*label).ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
                if !layer.contains(&id) {
                    return Err(Error::InvalidPath(format!("`{label}` is not in layer {k}")));
                }
                Ok(id)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ForwardPath { nodes })
    }

    /// All forward paths in lexicographic order of layer position.
    pub fn forward_paths(&self) -> Vec<ForwardPath> {
        let mut out = vec![ForwardPath { nodes: Vec::with_capacity(self.layers.len()) }];
        for layer in &self.layers {
            out = out
                .into_iter()
                .flat_map(|p| {
                    layer.iter().map(move |&id| {
                        let mut nodes = p.nodes.clone();
                        nodes.push(id);
                        ForwardPath { nodes }
                    })
                })
                .collect();
        }
        out
    }

    fn check_path(&self, path: &ForwardPath) -> Result<()> {
        if path.nodes.len() != self.layers.len() {
            return Err(Error::LengthMismatch { expected: self.layers.len(), found: path.nodes.len() });
        }
        for (k, (id, layer)) in path.nodes.iter().zip(&self.layers).enumerate() {
            if !layer.contains(id) {
                return Err(Error::InvalidPath(format!("node {id} is not in layer {k}")));
            }
        }
        Ok(())
    }
}

/// One state per layer, from `i` to `f`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ForwardPath {
    nodes: Vec<usize>,
}

impl ForwardPath {
    pub fn labels<'g>(&self, graph: &'g TransitionGraph) -> Vec<&'g str> {
        self.nodes.iter().map(|&id| graph.labels[id].as_str()).collect()
    }

    /// Labels of the interior states only (the route).
    pub fn route<'g>(&self, graph: &'g TransitionGraph) -> Vec<&'g str> {
        let labels = self.labels(graph);
        labels[1..labels.len() - 1].to_vec()
    }
}

/// Outbound path to `f`, then the inbound path traversed back to `i`.
#[derive(Debug, Clone, Copy)]
pub struct ClosedLoop<'e> {
    pub outbound: &'e ForwardPath,
    pub inbound: &'e ForwardPath,
}

impl ClosedLoop<'_> {
    pub fn is_mixed(&self) -> bool {
        self.outbound != self.inbound
    }

    /// `i → out_1 … out_k → f → in_k … in_1`, closing back on `i`.
    pub fn cyclic_path<'g>(&self, graph: &'g TransitionGraph) -> Result<CyclicPath<'g>> {
        let out = &self.outbound.nodes;
        let back = &self.inbound.nodes;
        let ids = out.iter().chain(back[1..back.len() - 1].iter().rev());
        CyclicPath::new(ids.map(|&id| &graph.states[id]))
    }
}

/// Γ of one ordered (outbound, inbound) pair; indices point into
/// [`LoopEnsemble::paths`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluatedLoop {
    pub outbound: usize,
    pub inbound: usize,
    pub gamma: GammaValue,
}

#[derive(Debug, Clone)]
pub struct LoopEnsemble {
    paths: Vec<ForwardPath>,
    loops: Vec<EvaluatedLoop>,
    total: Amplitude,
}

impl LoopEnsemble {
    fn from_loops(paths: Vec<ForwardPath>, loops: Vec<EvaluatedLoop>) -> Self {
        // Fixed-order sum so the total does not depend on worker count.
        let total = loops.iter().fold(Complex64::new(0.0, 0.0), |acc, l| acc + l.gamma.0);
        LoopEnsemble { paths, loops, total }
    }

    pub fn paths(&self) -> &[ForwardPath] {
        &self.paths
    }

    pub fn loops(&self) -> &[EvaluatedLoop] {
        &self.loops
    }

    pub fn len(&self) -> usize {
        self.loops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn total(&self) -> Amplitude {
        self.total
    }

    pub fn closed_loop(&self, k: usize) -> ClosedLoop<'_> {
        let l = &self.loops[k];
        ClosedLoop { outbound: &self.paths[l.outbound], inbound: &self.paths[l.inbound] }
    }

    /// `Re Σ Γ`, after checking the imaginary part vanishes and clamping
    /// float noise below zero.
    pub fn probability(&self) -> Result<f64> {
        real_probability(self.total)
    }

    /// Σ Γ over loops whose outbound and inbound routes coincide.
    pub fn diagonal_sum(&self) -> f64 {
        self.loops
            .iter()
            .filter(|l| l.outbound == l.inbound)
            .fold(0.0, |acc, l| acc + l.gamma.0.re)
    }

    /// Σ Γ over mixed loops: the deviation from the classical addition law.
    pub fn interference(&self) -> Result<f64> {
        Ok(self.probability()? - self.diagonal_sum())
    }
}

fn real_probability(total: Amplitude) -> Result<f64> {
    if total.im.abs() >= SUM_TOLERANCE {
        return Err(Error::ImaginaryResidue(total.im));
    }
    match total.re {
        p if p >= 0.0 => Ok(p),
        p if p >= -SUM_TOLERANCE => Ok(0.0),
        p => Err(Error::NegativeProbability(p)),
    }
}

/// φ along a forward path: the product of successive inner products.
pub fn forward_amplitude(graph: &TransitionGraph, path: &ForwardPath) -> Result<Amplitude> {
    graph.check_path(path)?;
    Ok(path_amplitude(graph, &path.nodes))
}

fn path_amplitude(graph: &TransitionGraph, nodes: &[usize]) -> Amplitude {
    nodes.windows(2).fold(Complex64::new(1.0, 0.0), |acc, w| {
        acc * dot(graph.states[w[1]].components(), graph.states[w[0]].components())
    })
}

pub fn enumerate_closed_loops(graph: &TransitionGraph) -> LoopEnsemble {
    enumerate_closed_loops_with(graph, Execution::default())
}

/// Every ordered (outbound, inbound) pair in lexicographic order, with Γ
/// evaluated on the induced cyclic path.
pub fn enumerate_closed_loops_with(graph: &TransitionGraph, exec: Execution) -> LoopEnsemble {
    let paths = graph.forward_paths();
    let n = paths.len();
    let loops = exec::map_indexed(n * n, exec, |k| {
        let (outbound, inbound) = (k / n, k % n);
        let closed = ClosedLoop { outbound: &paths[outbound], inbound: &paths[inbound] };
        // Paths come from a validated graph, so the cyclic path is valid.
        let cycle = closed.cyclic_path(graph).expect("graph states share one dimension");
        EvaluatedLoop { outbound, inbound, gamma: gamma_product(&cycle) }
    });
    LoopEnsemble::from_loops(paths, loops)
}

/// `P(i → f) = Re Σ_loops Γ`.
pub fn gamma_rule_probability(graph: &TransitionGraph) -> Result<f64> {
    enumerate_closed_loops(graph).probability()
}

/// `|Σ_p φ_p|²` over forward paths.
pub fn born_probability(graph: &TransitionGraph) -> f64 {
    graph
        .forward_paths()
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, p| acc + path_amplitude(graph, &p.nodes))
        .norm_sqr()
}

/// Σ Γ over mixed loops, `P_Γ − Σ_p |φ_p|²`.
pub fn interference_terms(graph: &TransitionGraph) -> Result<f64> {
    let classical: f64 = graph.forward_paths().iter().map(|p| path_amplitude(graph, &p.nodes).norm_sqr()).sum();
    Ok(gamma_rule_probability(graph)? - classical)
}

/// Whether the final state records which route was taken.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WhichPathTag {
    #[default]
    Untagged,
    Tagged,
}

/// Tagged mode keeps only loops whose inbound route equals the outbound route.
/// Only graphs with at most one interior layer are supported in tagged mode.
pub fn decohere(graph: &TransitionGraph, tag: WhichPathTag) -> Result<LoopEnsemble> {
    let full = enumerate_closed_loops(graph);
    match tag {
        WhichPathTag::Untagged => Ok(full),
        WhichPathTag::Tagged => {
            if graph.interior_layer_count() > 1 {
                return Err(Error::Unsupported(format!(
                    "which-path tagging needs a single interior layer, graph has {}",
                    graph.interior_layer_count()
                )));
            }
            let LoopEnsemble { paths, loops, .. } = full;
            let kept = loops.into_iter().filter(|l| l.outbound == l.inbound).collect();
            Ok(LoopEnsemble::from_loops(paths, kept))
        }
    }
}

/// Born probability of reaching `f` in the composite system where route `k`
/// leaves an orthonormal environment tag `|e_k⟩`, summed over the outcomes of
/// a measurement of the environment in a second orthonormal basis. Both bases
/// are drawn from `seed`.
pub fn tagged_composite_probability(graph: &TransitionGraph, seed: u64) -> Result<f64> {
    if graph.interior_layer_count() > 1 {
        return Err(Error::Unsupported("composite tagging needs a single interior layer".into()));
    }
    let routes: Vec<&StateVector> = if graph.interior_layer_count() == 0 {
        Vec::new()
    } else {
        graph.layers[1].iter().map(|&id| &graph.states[id]).collect()
    };
    let (i, f) = (graph.initial(), graph.final_state());
    if routes.is_empty() {
        return Ok(inner_product(f, i)?.norm_sqr());
    }
    let k = routes.len();
    let d = graph.dim();
    let mut rng = rng::seeded(seed);
    let tags = random_orthonormal_set(&mut rng, k, k)?;
    let outcomes = random_orthonormal_set(&mut rng, k, k)?;

    // |Φ⟩ = Σ_k |m_k⟩⟨m_k|i⟩ ⊗ |e_k⟩ in the d·k-dimensional composite space.
    let mut phi = vec![Complex64::new(0.0, 0.0); d * k];
    for (m, tag) in routes.iter().zip(&tags) {
        let weight = inner_product(m, i)?;
        for (a, ma) in m.components().iter().enumerate() {
            for (b, tb) in tag.components().iter().enumerate() {
                phi[a * k + b] += weight * ma * tb;
            }
        }
    }
    Ok(outcomes
        .iter()
        .map(|outcome| dot(f.tensor(outcome).components(), &phi).norm_sqr())
        .sum())
}

/// Compares the pruned loop sum against `Σ_k |φ_k|²` and against the
/// composite-system Born computation.
pub fn verify_tagged_equivalence(graph: &TransitionGraph, seed: u64) -> Result<CheckReport> {
    let pruned = decohere(graph, WhichPathTag::Tagged)?;
    let pruned_p = pruned.probability()?;
    let classical: f64 = pruned.paths().iter().map(|p| path_amplitude(graph, &p.nodes).norm_sqr()).sum();
    let composite = tagged_composite_probability(graph, seed)?;
    let interference = pruned.interference()?;
    Ok(CheckReport::from_records(vec![
        CheckRecord::single("pruning-identity", (pruned_p - classical).abs(), SUM_TOLERANCE, seed),
        CheckRecord::single("tagged-composite-equivalence", (pruned_p - composite).abs(), SUM_TOLERANCE, seed),
        CheckRecord::single("classical-law-after-pruning", interference.abs(), SUM_TOLERANCE, seed),
    ]))
}
