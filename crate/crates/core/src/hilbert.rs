//! Finite-dimensional state vectors and probability amplitudes.
//!
//! Amplitudes use the polar convention `φ = r·e^{−iθ}`, so the stored phase
//! is `θ = −Im ln φ`. The Berry phase in [`crate::loops`] uses the same sign.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};

pub type Amplitude = Complex64;

/// Largest accepted deviation of a state's norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// A normalized vector of complex amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct StateVector {
    label: Option<String>,
    components: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    components: Vec<[f64; 2]>,
}

impl TryFrom<RawState> for StateVector {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        let state = StateVector::new(raw.components.iter().map(|&[re, im]| Complex64::new(re, im)).collect())?;
        Ok(match raw.label {
            Some(label) => state.with_label(label),
            None => state,
        })
    }
}

impl From<StateVector> for RawState {
    fn from(state: StateVector) -> Self {
        RawState {
            label: state.label,
            components: state.components.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

fn check_components(components: &[Complex64]) -> Result<()> {
    if components.is_empty() {
        return Err(Error::ZeroDimension);
    }
    if components.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("state component"));
    }
    Ok(())
}

fn euclidean_norm(components: &[Complex64]) -> f64 {
    components.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

impl StateVector {
    /// Builds a state from components that are already normalized.
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        check_components(&components)?;
        let norm = euclidean_norm(&components);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector { label: None, components })
    }

    /// Builds a state by rescaling arbitrary nonzero components to unit norm.
    pub fn normalize(components: Vec<Complex64>) -> Result<Self> {
        check_components(&components)?;
        let norm = euclidean_norm(&components);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        let components = components.into_iter().map(|c| c / norm).collect();
        Ok(StateVector { label: None, components })
    }

    /// Standard basis vector `|k⟩` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if k >= dim {
            return Err(Error::DimensionMismatch { left: k + 1, right: dim });
        }
        let mut components = vec![Complex64::new(0.0, 0.0); dim];
        components[k] = Complex64::new(1.0, 0.0);
        Ok(StateVector { label: None, components })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        euclidean_norm(&self.components)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let components = self
            .components
            .iter()
            .flat_map(|a| other.components.iter().map(move |b| a * b))
            .collect();
        StateVector { label: None, components }
    }
}

/// `Σ_k conj(bra_k)·ket_k` over raw slices of equal length.
pub(crate) fn dot(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(b, k)| b.conj() * k).sum()
}

/// `⟨bra|ket⟩`.
pub fn inner_product(bra: &StateVector, ket: &StateVector) -> Result<Amplitude> {
    if bra.dim() != ket.dim() {
        return Err(Error::DimensionMismatch { left: bra.dim(), right: ket.dim() });
    }
    Ok(dot(&bra.components, &ket.components))
}

/// Maps an angle onto the principal range (−π, π].
pub fn principal_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// `−Im ln z` on the principal branch, in (−π, π]. Undefined at zero.
pub fn neg_im_ln(z: Complex64) -> Result<f64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::ZeroAmplitude);
    }
    // Adding zero folds -0 into +0.
    Ok(principal_angle(-z.arg()) + 0.0)
}

/// Distance between two phases on the circle, `min(|Δ|, 2π − |Δ|)`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Modulus and phase of an amplitude, `φ = modulus · e^{−i·phase}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarForm {
    pub modulus: f64,
    pub phase: f64,
}

impl PolarForm {
    pub fn to_amplitude(self) -> Amplitude {
        Complex64::from_polar(self.modulus, -self.phase)
    }
}

pub fn polar(amplitude: Amplitude) -> Result<PolarForm> {
    if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
        return Err(Error::NonFinite("amplitude"));
    }
    let phase = neg_im_ln(amplitude)?;
    Ok(PolarForm { modulus: amplitude.norm(), phase })
}

/// Multiplies every component by `e^{iθ}`; the physical state is unchanged.
pub fn gauge_transform(state: &StateVector, theta: f64) -> Result<StateVector> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("gauge phase"));
    }
    let factor = Complex64::from_polar(1.0, theta);
    Ok(StateVector {
        label: state.label.clone(),
        components: state.components.iter().map(|c| c * factor).collect(),
    })
}

/// Haar-random state: independent standard complex Gaussians, normalized.
pub fn random_state(dim: usize, seed: u64) -> Result<StateVector> {
    random_state_with(&mut rng::seeded(seed), dim)
}

pub fn random_state_with(rng: &mut Rng, dim: usize) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    loop {
        let raw: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        // A zero draw has probability zero; redraw rather than divide by it.
        if euclidean_norm(&raw) > 0.0 {
            return StateVector::normalize(raw);
        }
    }
}

/// `count` random orthonormal vectors in dimension `dim` (Gram–Schmidt on
/// complex Gaussian draws). Requires `count <= dim`.
pub fn random_orthonormal_set(rng: &mut Rng, dim: usize, count: usize) -> Result<Vec<StateVector>> {
    if count > dim {
        return Err(Error::DimensionMismatch { left: count, right: dim });
    }
    let mut basis: Vec<StateVector> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v = random_state_with(rng, dim)?.components;
        // Two passes of modified Gram–Schmidt keep orthogonality at machine precision.
        for _ in 0..2 {
            for b in &basis {
                let overlap = dot(&b.components, &v);
                for (vk, bk) in v.iter_mut().zip(&b.components) {
                    *vk -= overlap * bk;
                }
            }
        }
        if euclidean_norm(&v) > 1e-8 {
            basis.push(StateVector::normalize(v)?);
        }
    }
    Ok(basis)
}
