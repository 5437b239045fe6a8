//! Closed cyclic paths of states, the amplitude product Γ around them, and the
//! discrete Berry phase `γ = −Im ln Γ`.

use std::borrow::Cow;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{dot, gauge_transform, neg_im_ln, Amplitude, StateVector};

/// States visited in order `1 → 2 → … → N → 1`.
///
/// States are borrowed from a caller-owned table where possible; gauge
/// transforms produce an owned path.
#[derive(Debug, Clone)]
pub struct CyclicPath<'a> {
    states: Vec<Cow<'a, StateVector>>,
}

impl<'a> CyclicPath<'a> {
    pub fn new(states: impl IntoIterator<Item = &'a StateVector>) -> Result<Self> {
        Self::from_cows(states.into_iter().map(Cow::Borrowed).collect())
    }

    pub fn from_owned(states: Vec<StateVector>) -> Result<CyclicPath<'static>> {
        CyclicPath::from_cows(states.into_iter().map(Cow::Owned).collect())
    }

    fn from_cows(states: Vec<Cow<'a, StateVector>>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::PathTooShort(states.len()));
        }
        let dim = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: bad.dim() });
        }
        Ok(CyclicPath { states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> impl Iterator<Item = &StateVector> {
        self.states.iter().map(|s| s.as_ref())
    }

    /// The same loop traversed backwards, `N → … → 1 → N`.
    pub fn reversed(&self) -> CyclicPath<'a> {
        CyclicPath { states: self.states.iter().rev().cloned().collect() }
    }

    /// The same loop started from state `k` (mod N).
    pub fn rotated(&self, k: usize) -> CyclicPath<'a> {
        let mut states = self.states.clone();
        states.rotate_left(k % self.states.len());
        CyclicPath { states }
    }
}

/// Γ = Π ⟨ψ_{n+1}|ψ_n⟩ around a loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaValue(pub Amplitude);

impl GammaValue {
    pub fn value(self) -> Amplitude {
        self.0
    }
}

/// Discrete Berry phase in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerryPhase(pub f64);

impl BerryPhase {
    pub fn radians(self) -> f64 {
        self.0
    }
}

pub fn gamma_product(path: &CyclicPath<'_>) -> GammaValue {
    let n = path.states.len();
    let product = (0..n).fold(Complex64::new(1.0, 0.0), |acc, k| {
        let ket = path.states[k].components();
        let bra = path.states[(k + 1) % n].components();
        acc * dot(bra, ket)
    });
    GammaValue(product)
}

pub fn berry_phase(path: &CyclicPath<'_>) -> Result<BerryPhase> {
    let gamma = gamma_product(path).value();
    neg_im_ln(gamma).map(BerryPhase).map_err(|_| Error::UndefinedBerryPhase)
}

/// Multiplies state `n` of the loop by `e^{i·phases[n]}`.
pub fn apply_gauge_to_path(path: &CyclicPath<'_>, phases: &[f64]) -> Result<CyclicPath<'static>> {
    if phases.len() != path.len() {
        return Err(Error::LengthMismatch { expected: path.len(), found: phases.len() });
    }
    let states = path
        .states()
        .zip(phases)
        .map(|(s, &theta)| gauge_transform(s, theta))
        .collect::<Result<Vec<_>>>()?;
    CyclicPath::from_owned(states)
}
