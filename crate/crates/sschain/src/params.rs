//! Chain parameters, admissibility windows, and shared numeric policy.
//!
//! A chain is described by the scaling ratio `N > 1`, the scaling exponent
//! `δ` (with `Λ = N^δ` and `ξ = N^{-δ}`), and the base length scale `h > 0`.
//! `ξ` and `Λ` are always recomputed from `(N, δ)` rather than stored, so the
//! defining relation `ξ·Λ = 1` holds to rounding by construction.

use crate::error::{Error, Result, ValidationReport, Violation};
use crate::scalar::{as_f64, cst, Real};

/// Whether a parameter set was constructed under the physical constraint
/// `0 < δ < 2` or in unrestricted mathematical mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamMode {
    Physical,
    Mathematical,
}

/// Scaling ratio, exponent, and base length scale of a self-similar chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams<T> {
    n: T,
    delta: T,
    h: T,
    mode: ParamMode,
}

impl<T: Real> ChainParams<T> {
    /// Physical mode: additionally requires `δ` strictly inside (0, 2).
    pub fn physical(n: T, delta: T, h: T) -> Result<Self> {
        let report = validate_physical(n, delta, h);
        if !report.is_admissible() {
            return Err(Error::Validation(report));
        }
        Ok(Self { n, delta, h, mode: ParamMode::Physical })
    }

    /// Mathematical mode: any real `δ`, but `N > 1` and `h > 0` are still
    /// structural invariants of the type.
    pub fn mathematical(n: T, delta: T, h: T) -> Result<Self> {
        let mut report = ValidationReport::default();
        if !(n > T::one()) {
            report.violations.push(Violation::ScalingRatio { n: as_f64(n) });
        }
        if !(h > T::zero()) {
            report.violations.push(Violation::LengthScale { h: as_f64(h) });
        }
        if !delta.is_finite() {
            report
                .violations
                .push(Violation::DeltaOutsidePhysical { delta: as_f64(delta) });
        }
        if !report.is_admissible() {
            return Err(Error::Validation(report));
        }
        Ok(Self { n, delta, h, mode: ParamMode::Mathematical })
    }

    pub fn n(&self) -> T {
        self.n
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn mode(&self) -> ParamMode {
        self.mode
    }

    /// Contraction factor `ξ = N^{-δ}`, recomputed on demand.
    pub fn xi(&self) -> T {
        self.n.powf(-self.delta)
    }

    /// Eigenvalue `Λ = N^{δ}`, recomputed on demand.
    pub fn lambda(&self) -> T {
        self.n.powf(self.delta)
    }

    /// Same chain with the base length scale replaced (used by scaling checks).
    pub fn with_h(&self, h: T) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(Error::Validation(ValidationReport {
                violations: vec![Violation::LengthScale { h: as_f64(h) }],
            }));
        }
        Ok(Self { h, ..*self })
    }

    /// Re-check the physical constraints on this parameter set.
    pub fn validate_physical(&self) -> ValidationReport {
        validate_physical(self.n, self.delta, self.h)
    }
}

/// Check raw components against the physical constraints `N > 1`, `h > 0`,
/// `0 < δ < 2`, reporting every violation.
pub fn validate_physical<T: Real>(n: T, delta: T, h: T) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !(n > T::one()) {
        report.violations.push(Violation::ScalingRatio { n: as_f64(n) });
    }
    if !(h > T::zero()) {
        report.violations.push(Violation::LengthScale { h: as_f64(h) });
    }
    if !(delta > T::zero() && delta < cst(2.0)) {
        report
            .violations
            .push(Violation::DeltaOutsidePhysical { delta: as_f64(delta) });
    }
    report
}

/// Open interval `(beta, alpha)` of exponents for which a self-similar series
/// converges: the integrand must vanish fast enough at the origin (`alpha`,
/// small-argument exponent) and at infinity (`beta`, decay exponent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityWindow<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> AdmissibilityWindow<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        let w = Self { alpha, beta };
        w.check()?;
        Ok(w)
    }

    fn check(&self) -> Result<()> {
        if !(self.beta < self.alpha) {
            return Err(Error::InvalidWindow {
                alpha: as_f64(self.alpha),
                beta: as_f64(self.beta),
            });
        }
        Ok(())
    }

    /// Strict interior membership `beta < delta < alpha`.
    ///
    /// Boundary values are excluded: at `δ = alpha` or `δ = beta` the series
    /// degenerates to a divergent geometric sum.
    pub fn contains(&self, delta: T) -> Result<bool> {
        self.check()?;
        Ok(self.beta < delta && delta < self.alpha)
    }
}

/// Accuracy targets and work caps shared by every certified evaluation.
///
/// Series summation stops once the certified tail bounds drop below
/// `max(abs_tol, rel_tol · |partial sum|)`; `max_terms` caps the number of
/// series terms and `max_quad_evals` caps integrand evaluations in
/// quadrature-backed operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceBudget<T> {
    rel_tol: T,
    abs_tol: T,
    max_terms: usize,
    max_quad_evals: usize,
}

impl<T: Real> ToleranceBudget<T> {
    pub fn new(rel_tol: T, abs_tol: T, max_terms: usize, max_quad_evals: usize) -> Result<Self> {
        if !(rel_tol > T::zero()) {
            return Err(Error::OutOfDomain { what: "rel_tol (must be > 0)", value: as_f64(rel_tol) });
        }
        if !(abs_tol > T::zero()) {
            return Err(Error::OutOfDomain { what: "abs_tol (must be > 0)", value: as_f64(abs_tol) });
        }
        if max_terms < 3 {
            return Err(Error::OutOfDomain { what: "max_terms (must be ≥ 3)", value: max_terms as f64 });
        }
        if max_quad_evals == 0 {
            return Err(Error::OutOfDomain { what: "max_quad_evals (must be > 0)", value: 0.0 });
        }
        Ok(Self { rel_tol, abs_tol, max_terms, max_quad_evals })
    }

    pub fn rel_tol(&self) -> T {
        self.rel_tol
    }

    pub fn abs_tol(&self) -> T {
        self.abs_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn max_quad_evals(&self) -> usize {
        self.max_quad_evals
    }

    pub fn with_rel_tol(mut self, rel_tol: T) -> Result<Self> {
        if !(rel_tol > T::zero()) {
            return Err(Error::OutOfDomain { what: "rel_tol (must be > 0)", value: as_f64(rel_tol) });
        }
        self.rel_tol = rel_tol;
        Ok(self)
    }

    pub fn with_abs_tol(mut self, abs_tol: T) -> Result<Self> {
        if !(abs_tol > T::zero()) {
            return Err(Error::OutOfDomain { what: "abs_tol (must be > 0)", value: as_f64(abs_tol) });
        }
        self.abs_tol = abs_tol;
        Ok(self)
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Result<Self> {
        if max_terms < 3 {
            return Err(Error::OutOfDomain { what: "max_terms (must be ≥ 3)", value: max_terms as f64 });
        }
        self.max_terms = max_terms;
        Ok(self)
    }

    pub fn with_max_quad_evals(mut self, max_quad_evals: usize) -> Result<Self> {
        if max_quad_evals == 0 {
            return Err(Error::OutOfDomain { what: "max_quad_evals (must be > 0)", value: 0.0 });
        }
        self.max_quad_evals = max_quad_evals;
        Ok(self)
    }
}

impl<T: Real> Default for ToleranceBudget<T> {
    fn default() -> Self {
        Self {
            rel_tol: cst(1e-10),
            abs_tol: cst(1e-12),
            max_terms: 2_000_000,
            max_quad_evals: 5_000_000,
        }
    }
}
