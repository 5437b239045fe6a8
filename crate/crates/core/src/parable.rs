//! The town-visit parable: roads lead from home to town gates, a round trip
//! goes out on one road and back on another through the same gate, and each
//! visit the traveler pays into (or takes from) the gate's coin box.
//!
//! Round trips are chosen uniformly. A ledger reports, per gate, the mean coin
//! delta per visit and that mean as a share of the net coins paid per visit.
//! With road A reaching gates {1, 2} and road B reaching {2, 3} there are six
//! round trips; the shares are 1/6, 2/3, 1/6 for a traveler who always pays
//! and 1/2, 0, 1/2 for one who pays only when returning the way they came.
//! When the net flow is zero the shares are undefined and the ledger falls
//! back to the per-visit means.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::rng::{self, derive_seed};

pub type Rational = Ratio<i64>;

/// Number of independently seeded shards a Monte Carlo run is split into.
pub const MC_SHARDS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawWorld", into = "RawWorld")]
pub struct ParableWorld {
    roads: Vec<String>,
    gates: Vec<String>,
    access: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Serialize, Deserialize)]
struct RawWorld {
    roads: Vec<String>,
    gates: Vec<String>,
    access: BTreeMap<String, Vec<String>>,
}

impl TryFrom<RawWorld> for ParableWorld {
    type Error = Error;

    fn try_from(raw: RawWorld) -> Result<Self> {
        ParableWorld::new(raw.roads, raw.gates, raw.access)
    }
}

impl From<ParableWorld> for RawWorld {
    fn from(w: ParableWorld) -> Self {
        let access = w.roads.iter().map(|r| (r.clone(), w.gates_of(r).map(String::from).collect())).collect();
        RawWorld { roads: w.roads, gates: w.gates, access }
    }
}

fn unique(items: &[String], what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for item in items {
        if !seen.insert(item) {
            return Err(Error::InvalidWorld(format!("duplicate {what} `{item}`")));
        }
    }
    Ok(())
}

impl ParableWorld {
    /// Every road must reach at least one gate and every gate must be
    /// reachable from some road.
    pub fn new(roads: Vec<String>, gates: Vec<String>, access: BTreeMap<String, Vec<String>>) -> Result<Self> {
        if roads.is_empty() {
            return Err(Error::InvalidWorld("no roads".into()));
        }
        if gates.is_empty() {
            return Err(Error::InvalidWorld("no gates".into()));
        }
        unique(&roads, "road")?;
        unique(&gates, "gate")?;
        if let Some(stray) = access.keys().find(|r| !roads.contains(r)) {
            return Err(Error::InvalidWorld(format!("access lists unknown road `{stray}`")));
        }
        let mut resolved = BTreeMap::new();
        for road in &roads {
            let reach: BTreeSet<String> = access.get(road).into_iter().flatten().cloned().collect();
            if reach.is_empty() {
                return Err(Error::InvalidWorld(format!("road `{road}` reaches no gate")));
            }
            if let Some(g) = reach.iter().find(|g| !gates.contains(g)) {
                return Err(Error::InvalidWorld(format!("road `{road}` reaches unknown gate `{g}`")));
            }
            resolved.insert(road.clone(), reach);
        }
        if let Some(g) = gates.iter().find(|g| !resolved.values().any(|reach| reach.contains(*g))) {
            return Err(Error::InvalidWorld(format!("gate `{g}` is unreachable")));
        }
        Ok(ParableWorld { roads, gates, access: resolved })
    }

    pub fn roads(&self) -> &[String] {
        &self.roads
    }

    pub fn gates(&self) -> &[String] {
        &self.gates
    }

    /// Gates reached by `road`, in the world's gate order.
    pub fn gates_of<'a>(&'a self, road: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        let reach = self.access.get(road);
        self.gates.iter().filter(move |g| reach.is_some_and(|r| r.contains(*g))).map(String::as_str)
    }

    fn reaches(&self, road: &str, gate: &str) -> bool {
        self.access.get(road).is_some_and(|r| r.contains(gate))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoundTrip {
    pub road_out: String,
    pub gate: String,
    pub road_back: String,
}

impl RoundTrip {
    pub fn is_boring(&self) -> bool {
        self.road_out == self.road_back
    }
}

impl fmt::Display for RoundTrip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}*", self.road_out, self.gate, self.road_back)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoinPolicy {
    /// Always pays one coin on entry.
    Diligent,
    /// Pays when returning by the road taken in, takes a coin otherwise.
    Fickle,
}

impl CoinPolicy {
    pub fn coin_delta(self, trip: &RoundTrip) -> i64 {
        match self {
            CoinPolicy::Diligent => 1,
            CoinPolicy::Fickle if trip.is_boring() => 1,
            CoinPolicy::Fickle => -1,
        }
    }
}

impl fmt::Display for CoinPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoinPolicy::Diligent => "diligent",
            CoinPolicy::Fickle => "fickle",
        })
    }
}

impl std::str::FromStr for CoinPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diligent" => Ok(CoinPolicy::Diligent),
            "fickle" => Ok(CoinPolicy::Fickle),
            other => Err(Error::InvalidArgument(format!("unknown policy `{other}`"))),
        }
    }
}

/// All (road out, gate, road back) triples through a common gate, ordered by
/// road out, then gate, then road back.
pub fn enumerate_round_trips(world: &ParableWorld) -> Vec<RoundTrip> {
    let mut trips = Vec::new();
    for out in &world.roads {
        for gate in world.gates_of(out) {
            for back in world.roads.iter().filter(|b| world.reaches(b, gate)) {
                trips.push(RoundTrip { road_out: out.clone(), gate: gate.to_string(), road_back: back.clone() });
            }
        }
    }
    trips
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateEntry {
    pub gate: String,
    /// Share of the net coin flow, or `per_visit` when the net flow is zero.
    pub expected: Rational,
    /// Mean coin delta at this gate per visit to town.
    pub per_visit: Rational,
    /// Monte Carlo mean coin delta per visit and its standard error.
    pub empirical: Option<f64>,
    pub stderr: Option<f64>,
}

impl GateEntry {
    fn share_scale(net_per_visit: Rational) -> f64 {
        if net_per_visit == Rational::from_integer(0) {
            1.0
        } else {
            to_f64(net_per_visit)
        }
    }
}

/// Per-gate expected coin delta per visit, optionally with Monte Carlo means.
#[derive(Debug, Clone, PartialEq)]
pub struct GateLedger {
    pub policy: CoinPolicy,
    pub trips: usize,
    pub days: u64,
    /// Net coins paid per visit, summed over gates.
    pub net_per_visit: Rational,
    pub entries: Vec<GateEntry>,
}

impl GateLedger {
    pub fn entry(&self, gate: &str) -> Option<&GateEntry> {
        self.entries.iter().find(|e| e.gate == gate)
    }

    pub fn expected(&self, gate: &str) -> Option<Rational> {
        self.entry(gate).map(|e| e.expected)
    }

    /// Monte Carlo estimate on the same scale as `expected`, with its
    /// standard error.
    pub fn empirical_share(&self, gate: &str) -> Option<(f64, f64)> {
        let e = self.entry(gate)?;
        let scale = GateEntry::share_scale(self.net_per_visit);
        Some((e.empirical? / scale, e.stderr? / scale.abs()))
    }

    /// `{gate: {"expected": "p/q", "per_visit": "p/q", "empirical": x, "stderr": y, ...}}`.
    /// `empirical` and `stderr` share the scale of `expected`; the raw
    /// per-visit estimates sit alongside. Empirical fields appear only for
    /// Monte Carlo ledgers.
    pub fn to_json(&self) -> serde_json::Value {
        let map = self
            .entries
            .iter()
            .map(|e| {
                let mut obj = serde_json::Map::new();
                obj.insert("expected".into(), e.expected.to_string().into());
                obj.insert("per_visit".into(), e.per_visit.to_string().into());
                if let (Some(m), Some(s)) = (e.empirical, e.stderr) {
                    let scale = GateEntry::share_scale(self.net_per_visit);
                    obj.insert("empirical".into(), (m / scale).into());
                    obj.insert("stderr".into(), (s / scale.abs()).into());
                    obj.insert("empirical_per_visit".into(), m.into());
                    obj.insert("stderr_per_visit".into(), s.into());
                }
                (e.gate.clone(), serde_json::Value::Object(obj))
            })
            .collect();
        serde_json::Value::Object(map)
    }

    /// Aligned text table, one row per gate.
    pub fn to_table(&self) -> String {
        let mut head = vec!["Gate".to_string(), "Coins".to_string()];
        let empirical = self.entries.iter().all(|e| e.empirical.is_some());
        if empirical {
            head.push("Empirical".into());
            head.push("Stderr".into());
        }
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| {
                let mut row = vec![e.gate.clone(), e.expected.to_string()];
                if let Some((mean, stderr)) = self.empirical_share(&e.gate) {
                    row.push(crate::io::format_sig(mean));
                    row.push(crate::io::format_sig(stderr));
                }
                row
            })
            .collect();
        let widths: Vec<usize> = (0..head.len())
            .map(|c| rows.iter().map(|r| r[c].len()).chain([head[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            let cells: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            cells.join("  ").trim_end().to_string()
        };
        let mut out = format!("{}:\n", capitalize(&self.policy.to_string()));
        out.push_str(&line(&head));
        out.push('\n');
        for row in &rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    chars.next().map(|c| c.to_uppercase().collect::<String>() + chars.as_str()).unwrap_or_default()
}

fn exact_entries(world: &ParableWorld, trips: &[RoundTrip], policy: CoinPolicy) -> (Rational, Vec<GateEntry>) {
    let n = trips.len() as i64;
    let per_visit: Vec<Rational> = world
        .gates
        .iter()
        .map(|gate| {
            let total: i64 = trips.iter().filter(|t| &t.gate == gate).map(|t| policy.coin_delta(t)).sum();
            Rational::new(total, n)
        })
        .collect();
    let net: Rational = per_visit.iter().sum();
    let scale = if net == Rational::from_integer(0) { Rational::from_integer(1) } else { net };
    let entries = world
        .gates
        .iter()
        .zip(per_visit)
        .map(|(gate, pv)| GateEntry {
            gate: gate.clone(),
            expected: pv / scale,
            per_visit: pv,
            empirical: None,
            stderr: None,
        })
        .collect();
    (net, entries)
}

/// Exact per-gate expectations with round trips chosen uniformly.
pub fn expected_coins(world: &ParableWorld, policy: CoinPolicy) -> Result<GateLedger> {
    let trips = enumerate_round_trips(world);
    if trips.is_empty() {
        return Err(Error::NoRoundTrips);
    }
    let (net_per_visit, entries) = exact_entries(world, &trips, policy);
    Ok(GateLedger { policy, trips: trips.len(), days: 0, net_per_visit, entries })
}

/// Fraction of round trips that leave on `road`.
pub fn marginal_route_probability(world: &ParableWorld, road: &str) -> Result<Rational> {
    if !world.roads.iter().any(|r| r == road) {
        return Err(Error::UnknownRoad(road.to_string()));
    }
    let trips = enumerate_round_trips(world);
    let hits = trips.iter().filter(|t| t.road_out == road).count();
    Ok(Rational::new(hits as i64, trips.len() as i64))
}

/// Probability of one specific round trip (zero if it is not a valid trip).
pub fn round_trip_probability(world: &ParableWorld, trip: &RoundTrip) -> Rational {
    let trips = enumerate_round_trips(world);
    let hits = trips.iter().filter(|t| *t == trip).count();
    Rational::new(hits as i64, trips.len().max(1) as i64)
}

pub fn monte_carlo(world: &ParableWorld, policy: CoinPolicy, days: u64, seed: u64) -> Result<GateLedger> {
    monte_carlo_with(world, policy, days, seed, Execution::default())
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Simulates `days` uniform round-trip choices in [`MC_SHARDS`] shards, each
/// seeded from `(seed, shard)`. Shards only tally how often each trip was
/// taken, so merging is exact and independent of execution mode.
pub fn monte_carlo_with(
    world: &ParableWorld,
    policy: CoinPolicy,
    days: u64,
    seed: u64,
    exec: Execution,
) -> Result<GateLedger> {
    if days == 0 {
        return Err(Error::InvalidArgument("days must be at least 1".into()));
    }
    let trips = enumerate_round_trips(world);
    if trips.is_empty() {
        return Err(Error::NoRoundTrips);
    }
    let n_trips = trips.len();
    let tallies = exec::map_indexed(MC_SHARDS as usize, exec, |shard| {
        let shard = shard as u64;
        let share = days / MC_SHARDS + u64::from(shard < days % MC_SHARDS);
        let mut rng = rng::seeded(derive_seed(seed, shard));
        let mut counts = vec![0u64; n_trips];
        for _ in 0..share {
            counts[rng.random_range(0..n_trips)] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; n_trips];
    for shard in tallies {
        for (c, s) in counts.iter_mut().zip(shard) {
            *c += s;
        }
    }

    let (net_per_visit, mut entries) = exact_entries(world, &trips, policy);
    let n = days as f64;
    for entry in &mut entries {
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for (trip, &count) in trips.iter().zip(&counts) {
            if trip.gate == entry.gate {
                let delta = policy.coin_delta(trip) as f64;
                sum += delta * count as f64;
                sum_sq += delta * delta * count as f64;
            }
        }
        let mean = sum / n;
        let var = if days > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        entry.empirical = Some(mean);
        entry.stderr = Some((var / n).sqrt());
    }
    Ok(GateLedger { policy, trips: n_trips, days, net_per_visit, entries })
}
