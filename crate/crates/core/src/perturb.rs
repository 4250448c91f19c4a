//! Derivatives of `f̃(t) = f(P + tQ)` at `t = 0` for spectral functions `f = g ∘ λ`.
//!
//! In the eigenbasis of `P` (with `Q̃ = VᵀQV`) the eigenvalues move with velocity
//! `λ̇ᵢ = Q̃ᵢᵢ` and acceleration `λ̈ᵢ = 2 Σ_{j≠i} Q̃ᵢⱼ² / (λᵢ − λⱼ)`. The chain rule gives
//!
//! ```text
//! f̃′(0)  = ∇g · λ̇
//! f̃″(0)  = λ̇ᵀ H(g) λ̇  +  ∇g · λ̈
//!        = λ̇ᵀ H(g) λ̇  +  2 Σ_{i<j} Q̃ᵢⱼ² (∂ⱼg − ∂ᵢg) / (λⱼ − λᵢ)
//! ```
//!
//! The second line is the divided-difference form; for symmetric `g` it stays finite as
//! eigenvalues coalesce, where the quotient tends to `Hᵢᵢ − Hᵢⱼ`. [`second_derivative`]
//! uses that form, so it also works when `P` has repeated eigenvalues.
//!
//! The factor 2 in `λ̈` is the exact second derivative: for `P = diag(0, 1)` and
//! `Q = [[0, 1], [1, 0]]` the eigenvalues of `P + tQ` are `(1 ± √(1 + 4t²))/2`, whose
//! second derivatives at 0 are `±2`.

use alloc::vec::Vec;

use crate::specfun::{evaluate_spectral, Jet, SymmetricScalarField};
use crate::symmat::{self, Spectrum, SymmetricMatrix};
use crate::{Error, Result};

/// Relative spectral-gap tolerance for [`eigen_velocity`] and [`eigen_acceleration`].
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Relative tolerance below which a divided difference switches to its coalescence limit.
pub const DEFAULT_COALESCE_TOL: f64 = 1e-7;

/// Default central-difference step for first derivatives.
pub const DEFAULT_STEP_D1: f64 = 1e-5;

/// Default central-difference step for second derivatives.
pub const DEFAULT_STEP_D2: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineTolerances {
    /// Multiplied by `max(1, ‖P‖_F)`.
    pub gap: f64,
    /// Multiplied by `max(1, ‖λ‖)`.
    pub coalesce: f64,
}

impl Default for LineTolerances {
    fn default() -> Self {
        Self { gap: DEFAULT_GAP_TOL, coalesce: DEFAULT_COALESCE_TOL }
    }
}

/// The line `t ↦ P + tQ` with `P`'s spectrum and `Q̃ = VᵀQV` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixLine {
    p: SymmetricMatrix,
    q: SymmetricMatrix,
    spectrum: Spectrum,
    q_tilde: SymmetricMatrix,
    tolerances: LineTolerances,
}

pub fn make_line(p: &SymmetricMatrix, q: &SymmetricMatrix) -> Result<MatrixLine> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch { left: p.n(), right: q.n() });
    }
    let spectrum = symmat::eigendecompose(p)?;
    let q_tilde = spectrum.to_eigenbasis(q)?;
    Ok(MatrixLine { p: p.clone(), q: q.clone(), spectrum, q_tilde, tolerances: LineTolerances::default() })
}

impl MatrixLine {
    pub fn with_tolerances(mut self, tolerances: LineTolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn p(&self) -> &SymmetricMatrix {
        &self.p
    }

    pub fn q(&self) -> &SymmetricMatrix {
        &self.q
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `Q` in the eigenbasis of `P`.
    pub fn q_tilde(&self) -> &SymmetricMatrix {
        &self.q_tilde
    }

    pub fn tolerances(&self) -> LineTolerances {
        self.tolerances
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    /// `P + tQ`.
    pub fn point(&self, t: f64) -> Result<SymmetricMatrix> {
        self.p.add_scaled(&self.q, t)
    }

    /// The same line re-based at `P + tQ`, for derivatives at `t ≠ 0`.
    pub fn rebased(&self, t: f64) -> Result<MatrixLine> {
        Ok(make_line(&self.point(t)?, &self.q)?.with_tolerances(self.tolerances))
    }

    /// Absolute gap tolerance for this line.
    pub fn gap_tolerance(&self) -> f64 {
        self.tolerances.gap * self.p.frobenius_norm().max(1.0)
    }

    fn require_simple(&self) -> Result<()> {
        let tol = self.gap_tolerance();
        let gap = self.spectrum.gap();
        if gap < tol {
            return Err(Error::DegenerateSpectrum { gap, tol });
        }
        Ok(())
    }
}

/// `λ̇ᵢ = Q̃ᵢᵢ`. Requires a simple spectrum.
pub fn eigen_velocity(line: &MatrixLine) -> Result<Vec<f64>> {
    line.require_simple()?;
    Ok(line.q_tilde.diagonal())
}

/// `λ̈ᵢ = 2 Σ_{j≠i} Q̃ᵢⱼ² / (λᵢ − λⱼ)`. Requires a simple spectrum.
pub fn eigen_acceleration(line: &MatrixLine) -> Result<Vec<f64>> {
    line.require_simple()?;
    let lambda = line.spectrum.eigenvalues();
    let n = line.n();
    Ok((0..n)
        .map(|i| {
            let s: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let qij = line.q_tilde.get(i, j);
                    qij * qij / (lambda[i] - lambda[j])
                })
                .sum();
            2.0 * s
        })
        .collect())
}

/// `f̃′(0) = Σᵢ ∂ᵢg · λ̇ᵢ`.
///
/// For fields claimed symmetric, `∂ᵢg = ∂ⱼg` whenever `λᵢ = λⱼ`, so the sum does not
/// depend on the basis chosen inside a repeated eigenspace and `P` may be degenerate.
/// Other fields require a simple spectrum.
pub fn first_derivative(g: &SymmetricScalarField, line: &MatrixLine) -> Result<f64> {
    if !g.claimed_symmetric() {
        line.require_simple()?;
    }
    let velocity = line.q_tilde.diagonal();
    let grad = g.gradient(line.spectrum.eigenvalues())?;
    Ok(dot(&grad, &velocity))
}

/// `f̃″(0)` and its decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    /// `f̃(0)`.
    pub value: f64,
    pub d1: f64,
    /// Always exactly `hessian_term + curvature_term`.
    pub d2: f64,
    /// `λ̇ᵀ H(g) λ̇`.
    pub hessian_term: f64,
    /// `∇g · λ̈` in divided-difference form.
    pub curvature_term: f64,
    pub gap: f64,
    pub coalesced_pairs: usize,
}

/// Full second-order report at `t = 0`. Near-equal eigenvalue pairs use the
/// coalescence limit, so a simple spectrum is not required.
pub fn second_derivative(g: &SymmetricScalarField, line: &MatrixLine) -> Result<DerivativeReport> {
    let lambda = line.spectrum.eigenvalues();
    let Jet { value, gradient, hessian } = g.jet(lambda)?;
    let n = line.n();
    let velocity = line.q_tilde.diagonal();

    let d1 = dot(&gradient, &velocity);
    let mut hessian_term = 0.0;
    for i in 0..n {
        for j in 0..n {
            hessian_term += velocity[i] * hessian.get(i, j) * velocity[j];
        }
    }

    let coalesce_tol = line.tolerances.coalesce * norm(lambda).max(1.0);
    let mut curvature_term = 0.0;
    let mut coalesced_pairs = 0;
    for i in 0..n {
        for j in i + 1..n {
            let qij = line.q_tilde.get(i, j);
            let quotient = if (lambda[j] - lambda[i]).abs() >= coalesce_tol {
                (gradient[j] - gradient[i]) / (lambda[j] - lambda[i])
            } else {
                coalesced_pairs += 1;
                coalescence_limit(g, lambda, i, j)?
            };
            curvature_term += 2.0 * qij * qij * quotient;
        }
    }

    Ok(DerivativeReport {
        value,
        d1,
        d2: hessian_term + curvature_term,
        hessian_term,
        curvature_term,
        gap: line.spectrum.gap(),
        coalesced_pairs,
    })
}

/// `(∂ⱼg − ∂ᵢg)/(λⱼ − λᵢ)`, or its limit `Hᵢᵢ − Hᵢⱼ` (evaluated with `λⱼ := λᵢ`) when
/// `|λⱼ − λᵢ| < coalesce_tol · max(1, ‖λ‖)`.
pub fn divided_difference(g: &SymmetricScalarField, lambda: &[f64], i: usize, j: usize) -> Result<f64> {
    divided_difference_with_tol(g, lambda, i, j, DEFAULT_COALESCE_TOL)
}

pub fn divided_difference_with_tol(
    g: &SymmetricScalarField,
    lambda: &[f64],
    i: usize,
    j: usize,
    coalesce_tol: f64,
) -> Result<f64> {
    let n = lambda.len();
    if i == j || i >= n || j >= n {
        return Err(Error::IndexPair { i, j, n });
    }
    if (lambda[j] - lambda[i]).abs() >= coalesce_tol * norm(lambda).max(1.0) {
        let grad = g.gradient(lambda)?;
        Ok((grad[j] - grad[i]) / (lambda[j] - lambda[i]))
    } else {
        coalescence_limit(g, lambda, i, j)
    }
}

fn coalescence_limit(g: &SymmetricScalarField, lambda: &[f64], i: usize, j: usize) -> Result<f64> {
    let mut merged = lambda.to_vec();
    merged[j] = merged[i];
    let h = g.hessian(&merged)?;
    Ok(h.get(i, i) - h.get(i, j))
}

/// Central-difference estimates of `f̃′(0)` and `f̃″(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifferences {
    pub d1: f64,
    pub d2: f64,
}

/// `(f̃(h) − f̃(−h))/(2h)` and `(f̃(h) − 2f̃(0) + f̃(−h))/h²`, each `f̃` evaluated
/// through a fresh eigendecomposition.
pub fn finite_difference_oracle(g: &SymmetricScalarField, line: &MatrixLine, h: f64) -> Result<FiniteDifferences> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::NotPositive { what: "finite-difference step", value: h });
    }
    let f = |t: f64| -> Result<f64> { evaluate_spectral(g, &line.point(t)?) };
    let (minus, zero, plus) = (f(-h)?, f(0.0)?, f(h)?);
    Ok(FiniteDifferences { d1: (plus - minus) / (2.0 * h), d2: (plus - 2.0 * zero + minus) / (h * h) })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(x: &[f64]) -> f64 {
    symmat::frobenius(x)
}
