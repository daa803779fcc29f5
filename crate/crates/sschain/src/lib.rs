//! Self-similar chain dynamics.
//!
//! Tools for a one-dimensional lattice whose couplings repeat across scales
//! with ratio `N` and weight `N^{-δ}`: certified evaluation of the resulting
//! lacunary dispersion relation, generic self-similar operators built from an
//! arbitrary field, a long-wavelength continuum approximation through
//! fractional integrals, box-counting dimension estimation for sampled
//! curves, and an exact spectral propagator for chain waves.
//!
//! Everything numeric is generic over the scalar type through the [`Real`]
//! trait (implemented for `f32` and `f64`); the `*64` aliases at the crate
//! root pin the common double-precision choices.
//!
//! Quantities that involve an infinite series or integral are returned as
//! [`Certified`] values: a number together with a rigorous bound on how far
//! it can sit from the exact quantity, so downstream comparisons can use the
//! bound instead of a guessed tolerance.

pub mod continuum;
pub mod dispersion;
pub mod error;
pub mod fractal;
pub mod params;
pub(crate) mod quad;
pub mod selfsim;
pub mod spectral;
mod scalar;

pub use continuum::{
    constant_c, continuum_laplacian, gamma_fn, kernel_g, longwave_omega_sq, oscillator_density,
    rl_fractional_integral, ContinuumConstants, ContinuumParams, LongwaveResult,
};
pub use dispersion::{
    choose_window, omega_sq, omega_sq_certified, sample_curve, scaling_residual, DispersionCurve,
    DispersionSample, Spacing, TruncationWindow,
};
pub use error::{Error, Result, ValidationReport, Violation};
pub use fractal::{box_count_dimension, FractalEstimate};
pub use params::{validate_physical, AdmissibilityWindow, ChainParams, ParamMode, ToleranceBudget};
pub use scalar::Real;
pub use selfsim::{
    affine_apply, laplacian_scaling_check, second_difference, selfsim_laplacian,
    selfsim_transform, transform_partial_sum, EvaluableField,
};
pub use spectral::{
    energy, evolve, init_state, mode_frequencies, verlet_reference, EnergyReport, SpectralState,
    VerletSnapshot,
};

/// A computed value together with a rigorous error bound.
///
/// The exact quantity is guaranteed to lie in `[value - err_bound,
/// value + err_bound]` barring misuse (the bound accounts for truncation and
/// for floating-point accumulation in the summation itself).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certified<T> {
    pub value: T,
    pub err_bound: T,
}

impl<T: Real> Certified<T> {
    /// Whether `other` is consistent with this value given both bounds.
    pub fn overlaps(&self, other: &Certified<T>) -> bool {
        (self.value - other.value).abs() <= self.err_bound + other.err_bound
    }
}

/// Outcome of a self-similarity scaling check.
///
/// `residual` is the defect actually measured; `allowance` is how large the
/// defect could legitimately be given the error bounds of the two certified
/// evaluations entering the check. The identity is confirmed (to the working
/// tolerance) when `residual <= allowance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingCheck<T> {
    pub residual: T,
    pub allowance: T,
}

impl<T: Real> ScalingCheck<T> {
    pub fn holds(&self) -> bool {
        self.residual <= self.allowance
    }
}

/// Double-precision aliases for the common case.
pub type ChainParams64 = ChainParams<f64>;
pub type AdmissibilityWindow64 = AdmissibilityWindow<f64>;
pub type ToleranceBudget64 = ToleranceBudget<f64>;
pub type Certified64 = Certified<f64>;
pub type ScalingCheck64 = ScalingCheck<f64>;
pub type DispersionCurve64 = DispersionCurve<f64>;
pub type EvaluableField64 = EvaluableField<f64>;
pub type ContinuumParams64 = ContinuumParams<f64>;
pub type FractalEstimate64 = FractalEstimate<f64>;
pub type SpectralState64 = SpectralState<f64>;
