//! Cross-checks against independently coded oracles.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::Rng;

use loopprob::check::random_graph;
use loopprob::{
    builtin, enumerate_closed_loops, expected_coins, forward_amplitude, gamma_product, CoinPolicy, CyclicPath,
    ParableWorld, TransitionGraph,
};

fn braket(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(b, k)| b.conj() * k).sum()
}

/// Born probability by propagating |i⟩ through each layer's projector sum
/// `Σ_m |m⟩⟨m|` and projecting onto ⟨f|. No paths are enumerated.
fn propagated_born(graph: &TransitionGraph) -> f64 {
    let mut v: Vec<Complex64> = graph.initial().components().to_vec();
    for k in 1..graph.layer_count() - 1 {
        let mut next = vec![Complex64::new(0.0, 0.0); v.len()];
        for label in graph.layer_labels(k) {
            let m = graph.state(label).unwrap().components();
            let c = braket(m, &v);
            for (n, mi) in next.iter_mut().zip(m) {
                *n += mi * c;
            }
        }
        v = next;
    }
    braket(graph.final_state().components(), &v).norm_sqr()
}

#[test]
fn gamma_rule_matches_projector_propagation() {
    for t in 0..200u64 {
        let mut rng = loopprob::rng::seeded(1000 + t);
        let dim = rng.random_range(2..=8);
        let graph = random_graph(&mut rng, dim, 3, 5).unwrap();
        let p = enumerate_closed_loops(&graph).probability().unwrap();
        let oracle = propagated_born(&graph);
        assert!((p - oracle).abs() < 1e-12, "trial {t}: {p} vs {oracle}");
    }
}

#[test]
fn loop_gamma_factorizes_into_forward_amplitudes() {
    let mut rng = loopprob::rng::seeded(5);
    let graph = random_graph(&mut rng, 5, 2, 3).unwrap();
    let ensemble = enumerate_closed_loops(&graph);
    for (k, evaluated) in ensemble.loops().iter().enumerate() {
        let l = ensemble.closed_loop(k);
        let expected = forward_amplitude(&graph, l.outbound).unwrap() * forward_amplitude(&graph, l.inbound).unwrap().conj();
        assert!((evaluated.gamma.value() - expected).norm() < 1e-12);
    }
}

#[test]
fn gamma_product_matches_hand_rolled_product() {
    let mut rng = loopprob::rng::seeded(8);
    let states: Vec<_> = (0..6).map(|_| loopprob::hilbert::random_state_with(&mut rng, 4).unwrap()).collect();
    let path = CyclicPath::new(&states).unwrap();
    let mut hand = Complex64::new(1.0, 0.0);
    for n in 0..states.len() {
        hand *= braket(states[(n + 1) % states.len()].components(), states[n].components());
    }
    assert!((gamma_product(&path).value() - hand).norm() < 1e-15);
}

/// Brute-force ledger: walk every (road, gate, road) triple and keep the
/// ones where both roads touch the gate.
fn brute_force(world: &ParableWorld, fickle: bool) -> BTreeMap<String, Ratio<i64>> {
    let mut totals: BTreeMap<String, i64> = world.gates().iter().map(|g| (g.clone(), 0)).collect();
    let mut trips = 0;
    for out in world.roads() {
        for gate in world.gates() {
            for back in world.roads() {
                let touches = |r: &str| world.gates_of(r).any(|g| g == gate);
                if !(touches(out) && touches(back)) {
                    continue;
                }
                trips += 1;
                *totals.get_mut(gate).unwrap() += if !fickle || out == back { 1 } else { -1 };
            }
        }
    }
    let net: i64 = totals.values().sum();
    let scale = if net == 0 { Ratio::from_integer(1) } else { Ratio::new(net, trips) };
    totals.into_iter().map(|(g, c)| (g, Ratio::new(c, trips) / scale)).collect()
}

#[test]
fn parable_ledgers_match_brute_force() {
    for world in [builtin::paper_world(), builtin::two_road_world(), builtin::one_road_world()] {
        for (policy, fickle) in [(CoinPolicy::Diligent, false), (CoinPolicy::Fickle, true)] {
            let ledger = expected_coins(&world, policy).unwrap();
            for (gate, want) in brute_force(&world, fickle) {
                assert_eq!(ledger.expected(&gate), Some(want), "{policy} gate {gate}");
            }
        }
    }
}
