//! Acceptance gate. Runs every criterion at its pinned tolerance and prints
//! one PASS/FAIL line each; exits nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_rational::Ratio;
use rand::Rng;

use loopprob::check::{graph_with_layers, random_graph};
use loopprob::hilbert::{phase_distance, random_state_with};
use loopprob::parable::to_f64;
use loopprob::transition::tagged_composite_probability;
use loopprob::{
    apply_gauge_to_path, berry_phase, born_probability, builtin, decohere, enumerate_closed_loops,
    enumerate_round_trips, expected_coins, forward_amplitude, gamma_product, gauge_transform, monte_carlo, rng,
    CoinPolicy, CyclicPath, StateVector, WhichPathTag,
};

type Outcome = Result<String, String>;

struct Gate {
    failures: usize,
    started: Instant,
}

impl Gate {
    fn run(&mut self, id: u32, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let t0 = Instant::now();
        let mut outcome = f();
        let elapsed = t0.elapsed();
        if let (Ok(detail), Some(limit)) = (&outcome, budget) {
            if elapsed >= limit {
                outcome = Err(format!("{detail}; runtime {elapsed:?} exceeds {limit:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS [{id}] {title}: {detail} ({elapsed:.2?})"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL [{id}] {title}: {detail} ({elapsed:.2?})");
            }
        }
    }
}

fn r(n: i64, d: i64) -> Ratio<i64> {
    Ratio::new(n, d)
}

fn table(policy: CoinPolicy, want: [Ratio<i64>; 3]) -> Outcome {
    let ledger = expected_coins(&builtin::paper_world(), policy).map_err(|e| e.to_string())?;
    let got: Vec<Ratio<i64>> = ["1", "2", "3"].iter().map(|g| ledger.expected(g).unwrap_or(r(-99, 1))).collect();
    if got == want {
        Ok(format!("gates 1,2,3 = {}, {}, {}", got[0], got[1], got[2]))
    } else {
        Err(format!("got {got:?}, want {want:?}"))
    }
}

fn check_max(name: &str, max: f64, tol: f64, n: usize) -> Outcome {
    if max < tol {
        Ok(format!("{name} max {max:.3e} < {tol:e} over {n} instances"))
    } else {
        Err(format!("{name} max {max:.3e} >= {tol:e}"))
    }
}

fn main() {
    let mut gate = Gate { failures: 0, started: Instant::now() };

    gate.run(1, "parable diligent table", Some(Duration::from_secs(1)), || {
        table(CoinPolicy::Diligent, [r(1, 6), r(2, 3), r(1, 6)])
    });

    gate.run(2, "parable fickle table", Some(Duration::from_secs(1)), || {
        table(CoinPolicy::Fickle, [r(1, 2), r(0, 1), r(1, 2)])
    });

    gate.run(3, "round-trip counts", Some(Duration::from_secs(1)), || {
        let counts = [builtin::one_road_world(), builtin::two_road_world(), builtin::paper_world()]
            .map(|w| enumerate_round_trips(&w).len());
        if counts == [1, 4, 6] {
            Ok("1, 4, 6".into())
        } else {
            Err(format!("got {counts:?}"))
        }
    });

    gate.run(4, "gamma rule equals Born rule", Some(Duration::from_secs(30)), || {
        let mut max: f64 = 0.0;
        let trials = 500;
        for t in 0..trials {
            let mut g = rng::seeded(rng::derive_seed(4, t));
            let dim = g.random_range(2..=8);
            let graph = random_graph(&mut g, dim, 3, 6).map_err(|e| e.to_string())?;
            let p = enumerate_closed_loops(&graph).probability().map_err(|e| e.to_string())?;
            max = max.max((p - born_probability(&graph)).abs());
        }
        check_max("|P_gamma - P_born|", max, 1e-12, trials as usize)
    });

    gate.run(5, "gauge invariance", Some(Duration::from_secs(30)), || {
        let (mut d_gamma, mut d_phase, mut d_prob): (f64, f64, f64) = (0.0, 0.0, 0.0);
        let trials = 500;
        for t in 0..trials {
            let mut g = rng::seeded(rng::derive_seed(5, t));
            let dim = g.random_range(2..=8);
            let len = g.random_range(2..=8);
            let states: Vec<StateVector> = (0..len).map(|_| random_state_with(&mut g, dim).unwrap()).collect();
            let path = CyclicPath::new(&states).map_err(|e| e.to_string())?;
            let phases: Vec<f64> = (0..len).map(|_| g.random_range(-PI..PI)).collect();
            let gauged = apply_gauge_to_path(&path, &phases).map_err(|e| e.to_string())?;
            d_gamma = d_gamma.max((gamma_product(&gauged).value() - gamma_product(&path).value()).norm());
            let (a, b) = (berry_phase(&path).map_err(|e| e.to_string())?, berry_phase(&gauged).map_err(|e| e.to_string())?);
            d_phase = d_phase.max(phase_distance(a.radians(), b.radians()));

            let dim = g.random_range(2..=8);
            let graph = random_graph(&mut g, dim, 3, 6).map_err(|e| e.to_string())?;
            let p0 = enumerate_closed_loops(&graph).probability().map_err(|e| e.to_string())?;
            let regauged = graph
                .map_states(|_, s| gauge_transform(s, g.random_range(-PI..PI)))
                .map_err(|e| e.to_string())?;
            let p1 = enumerate_closed_loops(&regauged).probability().map_err(|e| e.to_string())?;
            d_prob = d_prob.max((p1 - p0).abs());
        }
        let worst = d_gamma.max(d_phase).max(d_prob);
        if worst < 1e-12 {
            Ok(format!("max dGamma {d_gamma:.2e}, dgamma {d_phase:.2e} (mod 2pi), dP {d_prob:.2e} over {trials} loops and graphs"))
        } else {
            Err(format!("dGamma {d_gamma:.2e}, dgamma {d_phase:.2e}, dP {d_prob:.2e} (tolerance 1e-12)"))
        }
    });

    gate.run(6, "loop-count law", None, || {
        let one = enumerate_closed_loops(&builtin::one_route_graph()).len();
        let two = enumerate_closed_loops(&builtin::two_route_graph()).len();
        if (one, two) != (1, 4) {
            return Err(format!("one route {one}, two routes {two}"));
        }
        let mut g = rng::seeded(6);
        for k in 1..=6usize {
            let graph = graph_with_layers(&mut g, 3, &[k]).map_err(|e| e.to_string())?;
            let n = enumerate_closed_loops(&graph).len();
            if n != k * k {
                return Err(format!("{k} routes gave {n} loops"));
            }
        }
        Ok("1, 4, and k^2 for k = 1..6".into())
    });

    gate.run(7, "decoherence pruning", Some(Duration::from_secs(10)), || {
        let (mut d_classical, mut d_composite, mut d_interf): (f64, f64, f64) = (0.0, 0.0, 0.0);
        let trials = 100;
        for t in 0..trials {
            let seed = rng::derive_seed(7, t);
            let mut g = rng::seeded(seed);
            let dim = g.random_range(2..=8);
            let routes = g.random_range(1..=6);
            let graph = graph_with_layers(&mut g, dim, &[routes]).map_err(|e| e.to_string())?;
            let pruned = decohere(&graph, WhichPathTag::Tagged).map_err(|e| e.to_string())?;
            let p = pruned.probability().map_err(|e| e.to_string())?;
            let classical: f64 = graph
                .forward_paths()
                .iter()
                .map(|path| forward_amplitude(&graph, path).unwrap().norm_sqr())
                .sum();
            let composite = tagged_composite_probability(&graph, seed).map_err(|e| e.to_string())?;
            d_classical = d_classical.max((p - classical).abs());
            d_composite = d_composite.max((p - composite).abs());
            d_interf = d_interf.max(pruned.interference().map_err(|e| e.to_string())?.abs());
        }
        let worst = d_classical.max(d_composite).max(d_interf);
        if worst < 1e-12 {
            Ok(format!(
                "max |P - sum|phi|^2| {d_classical:.2e}, |P - composite| {d_composite:.2e}, |interference| {d_interf:.2e} over {trials} graphs"
            ))
        } else {
            Err(format!("{d_classical:.2e} / {d_composite:.2e} / {d_interf:.2e} (tolerance 1e-12)"))
        }
    });

    gate.run(8, "octant Berry phase", None, || {
        // Hand product: <0|+i><+i|+><+|0> = (1/sqrt2)((1 - i)/2)(1/sqrt2) = (1 - i)/4.
        let hand = Complex64::new(0.25, -0.25);
        let oracle = -hand.im.atan2(hand.re);
        if (oracle - FRAC_PI_4).abs() >= 1e-12 {
            return Err(format!("principal-log oracle gave {oracle}"));
        }
        let states = builtin::octant_states();
        let pick = |l: &str| states.iter().find(|s| s.label() == Some(l)).unwrap();
        let path = CyclicPath::new([pick("z"), pick("x"), pick("y")]).map_err(|e| e.to_string())?;
        let gamma = berry_phase(&path).map_err(|e| e.to_string())?.radians();
        if (gamma - FRAC_PI_4).abs() < 1e-12 {
            Ok(format!("gamma = {gamma:.15} (pi/4 = {FRAC_PI_4:.15})"))
        } else {
            Err(format!("gamma = {gamma}"))
        }
    });

    gate.run(9, "Monte Carlo consistency", Some(Duration::from_secs(5)), || {
        let world = builtin::paper_world();
        let mut lines = Vec::new();
        for policy in [CoinPolicy::Diligent, CoinPolicy::Fickle] {
            let exact = expected_coins(&world, policy).map_err(|e| e.to_string())?;
            let mc = monte_carlo(&world, policy, 600_000, 42).map_err(|e| e.to_string())?;
            for gate in world.gates() {
                let want = to_f64(exact.expected(gate).unwrap());
                let (mean, stderr) = mc.empirical_share(gate).unwrap();
                let z = (mean - want).abs() / stderr;
                if z.is_nan() || z > 4.0 {
                    return Err(format!("{policy} gate {gate}: {mean} vs {want}, {z:.2} stderr"));
                }
                lines.push(format!("{policy}/{gate} {z:.2}se"));
            }
        }
        Ok(lines.join(", "))
    });

    let total = gate.started.elapsed();
    let whole = if gate.failures == 0 && total < Duration::from_secs(60) {
        Ok(format!("criteria 1-9 pass, total runtime {total:.2?} < 60s"))
    } else {
        Err(format!("{} failing criteria, total runtime {total:.2?}", gate.failures))
    };
    gate.run(10, "desk-scale acceptance", None, || whole);

    if gate.failures > 0 {
        std::process::exit(1);
    }
}
