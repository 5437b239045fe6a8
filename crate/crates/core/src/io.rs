//! JSON file formats and report encodings.
//!
//! A complex number is `[re, im]`. A state is
//! `{"label": "x", "components": [[re, im], ...]}`. Graph files map labels to
//! component lists directly:
//!
//! ```json
//! {"states": {"i": [[1,0],[0,0]], ...}, "layers": [["i"], ["m1","m2"], ["f"]], "tagged": false}
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::builtin;
use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::loops::{berry_phase, gamma_product, CyclicPath};
use crate::parable::ParableWorld;
use crate::transition::{
    born_probability, decohere, enumerate_closed_loops, forward_amplitude, tagged_composite_probability,
    LoopEnsemble, TransitionGraph, WhichPathTag,
};

pub type ComplexPair = [f64; 2];

fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

fn components(raw: &[ComplexPair]) -> Vec<Complex64> {
    raw.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub states: BTreeMap<String, Vec<ComplexPair>>,
    pub layers: Vec<Vec<String>>,
    #[serde(default)]
    pub tagged: bool,
}

impl GraphFile {
    pub fn from_graph(graph: &TransitionGraph, tag: WhichPathTag) -> Self {
        let states = graph
            .labels()
            .map(|l| (l.to_string(), graph.state(l).expect("label from graph").components().iter().copied().map(pair).collect()))
            .collect();
        let layers = (0..graph.layer_count())
            .map(|k| graph.layer_labels(k).into_iter().map(String::from).collect())
            .collect();
        GraphFile { states, layers, tagged: tag == WhichPathTag::Tagged }
    }

    pub fn into_graph(self) -> Result<(TransitionGraph, WhichPathTag)> {
        let states = self
            .states
            .into_iter()
            .map(|(label, raw)| {
                StateVector::new(components(&raw))
                    .map(|s| (label.clone(), s))
                    .map_err(|e| Error::InvalidGraph(format!("state `{label}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let tag = if self.tagged { WhichPathTag::Tagged } else { WhichPathTag::Untagged };
        Ok((TransitionGraph::new(states, self.layers)?, tag))
    }
}

/// States files are either a list of labeled states or a label → components map.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StatesFile {
    List(Vec<StateVector>),
    Map(BTreeMap<String, Vec<ComplexPair>>),
}

impl StatesFile {
    pub fn into_states(self) -> Result<Vec<StateVector>> {
        match self {
            StatesFile::List(states) => {
                if let Some(k) = states.iter().position(|s| s.label().is_none()) {
                    return Err(Error::Parse(format!("state {k} has no label")));
                }
                Ok(states)
            }
            StatesFile::Map(map) => map
                .into_iter()
                .map(|(label, raw)| {
                    StateVector::new(components(&raw))
                        .map(|s| s.with_label(label.clone()))
                        .map_err(|e| Error::Parse(format!("state `{label}`: {e}")))
                })
                .collect(),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Loads a states file, or a builtin table when `source` names one and no
/// such file exists.
pub fn load_states(source: &str) -> Result<Vec<StateVector>> {
    let path = Path::new(source);
    if !path.exists() {
        if let Some(states) = builtin::state_table(source) {
            return Ok(states);
        }
        return Err(builtin::unknown("states", source, builtin::STATE_TABLES));
    }
    read_json::<StatesFile>(path)?.into_states()
}

pub fn load_graph(source: &str) -> Result<(TransitionGraph, WhichPathTag)> {
    let path = Path::new(source);
    if !path.exists() {
        if let Some(g) = builtin::graph_named(source) {
            return Ok((g, WhichPathTag::Untagged));
        }
        return Err(builtin::unknown("graph", source, builtin::GRAPHS));
    }
    read_json::<GraphFile>(path)?.into_graph()
}

pub fn load_world(source: &str) -> Result<ParableWorld> {
    let path = Path::new(source);
    if !path.exists() {
        if let Some(w) = builtin::world_named(source) {
            return Ok(w);
        }
        return Err(builtin::unknown("world", source, builtin::WORLDS));
    }
    read_json(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerryReport {
    pub path: Vec<String>,
    pub gamma_product: ComplexPair,
    pub berry_phase: f64,
}

/// Evaluates Γ and γ for the loop through `labels` in `states`.
pub fn berry_report(states: &[StateVector], labels: &[&str]) -> Result<BerryReport> {
    let members = labels
        .iter()
        .map(|l| states.iter().find(|s| s.label() == Some(*l)).ok_or_else(|| Error::UnknownLabel(l.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let path = CyclicPath::new(members)?;
    let gamma = gamma_product(&path).value();
    let phase = berry_phase(&path)?.radians();
    Ok(BerryReport {
        path: labels.iter().map(|s| s.to_string()).collect(),
        gamma_product: pair(gamma),
        berry_phase: phase,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopRecord {
    pub out: Vec<String>,
    #[serde(rename = "in")]
    pub inbound: Vec<String>,
    pub gamma: ComplexPair,
}

/// Output of a probability run. `loops`, `gamma_rule_p` and `interference`
/// describe the reported ensemble (pruned when `decohered`); `born_p` is the
/// coherent Born probability of the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbReport {
    pub loops: Vec<LoopRecord>,
    pub gamma_rule_p: f64,
    pub born_p: f64,
    pub interference: f64,
    #[serde(default)]
    pub decohered: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tagged_born_p: Option<f64>,
}

fn loop_records(graph: &TransitionGraph, ensemble: &LoopEnsemble) -> Vec<LoopRecord> {
    (0..ensemble.len())
        .map(|k| {
            let l = ensemble.closed_loop(k);
            LoopRecord {
                out: l.outbound.labels(graph).into_iter().map(String::from).collect(),
                inbound: l.inbound.labels(graph).into_iter().map(String::from).collect(),
                gamma: pair(ensemble.loops()[k].gamma.value()),
            }
        })
        .collect()
}

pub fn prob_report(graph: &TransitionGraph, tag: WhichPathTag, seed: u64) -> Result<ProbReport> {
    let born_p = born_probability(graph);
    match tag {
        WhichPathTag::Untagged => {
            let ensemble = enumerate_closed_loops(graph);
            Ok(ProbReport {
                loops: loop_records(graph, &ensemble),
                gamma_rule_p: ensemble.probability()?,
                born_p,
                interference: ensemble.interference()?,
                decohered: false,
                classical_p: None,
                tagged_born_p: None,
            })
        }
        WhichPathTag::Tagged => {
            let pruned = decohere(graph, tag)?;
            let classical = pruned
                .paths()
                .iter()
                .map(|p| forward_amplitude(graph, p).map(|a| a.norm_sqr()))
                .sum::<Result<f64>>()?;
            Ok(ProbReport {
                loops: loop_records(graph, &pruned),
                gamma_rule_p: pruned.probability()?,
                born_p,
                interference: pruned.interference()?,
                decohered: true,
                classical_p: Some(classical),
                tagged_born_p: Some(tagged_composite_probability(graph, seed)?),
            })
        }
    }
}

/// Formats `x` with 12 significant digits, trimming trailing zeros.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if !(-5..DIGITS).contains(&exponent) {
        let s = format!("{:.*e}", (DIGITS - 1) as usize, x);
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let decimals = (DIGITS - 1 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}
