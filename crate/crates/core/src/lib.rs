//! Transition probabilities as sums over closed loops of amplitude products.
//!
//! A closed loop `i -> ... -> f -> ... -> i` carries the product of the
//! amplitudes along it, `Γ = Π ⟨ψ_{n+1}|ψ_n⟩`. That product does not depend on
//! the phase chosen for any individual ket, and summing it over every loop
//! through `i` and `f` reproduces `|⟨f|i⟩|²` as given by the Born rule. The
//! mixed loops (outbound route different from the inbound route) are exactly
//! the interference cross-terms; dropping them is what which-path tagging does.
//!
//! Modules:
//!
//! - [`hilbert`]: state vectors, inner products, polar form, gauge phases.
//! - [`loops`]: cyclic paths, the product Γ and the discrete Berry phase.
//! - [`transition`]: layered transition graphs, loop enumeration, Γ-rule and
//!   Born probabilities, interference terms, decoherence pruning.
//! - [`parable`]: the road/gate round-trip world with exact and Monte Carlo
//!   coin ledgers.
//! - [`check`]: randomized invariant suite producing a [`check::CheckReport`].
//! - [`io`] and [`builtin`]: JSON file formats and embedded example inputs.
//!
//! Data-parallel evaluation goes through rayon when the `parallel` feature is
//! enabled (the default). Results are bit-identical either way: per-item work
//! is collected in order and reduced sequentially.

pub mod builtin;
pub mod check;
mod error;
pub mod exec;
pub mod hilbert;
pub mod io;
pub mod loops;
pub mod parable;
pub mod rng;
pub mod transition;

pub use error::{Error, Result};
pub use exec::Execution;
pub use hilbert::{gauge_transform, inner_product, polar, random_state, Amplitude, PolarForm, StateVector};
pub use loops::{apply_gauge_to_path, berry_phase, gamma_product, BerryPhase, CyclicPath, GammaValue};
pub use parable::{
    enumerate_round_trips, expected_coins, marginal_route_probability, monte_carlo, CoinPolicy, GateLedger,
    ParableWorld, RoundTrip,
};
pub use transition::{
    born_probability, decohere, enumerate_closed_loops, forward_amplitude, gamma_rule_probability,
    interference_terms, verify_tagged_equivalence, ClosedLoop, ForwardPath, LoopEnsemble, TransitionGraph,
    WhichPathTag,
};
