//! Symmetric scalar fields `g(λ₁, …, λₙ)` and spectral evaluation `f(M) = g(λ(M))`.
//!
//! A [`SymmetricScalarField`] carries metadata (arity, domain, claimed symmetry and
//! convexity, known kink locations) around an [`Evaluator`] that supplies the value
//! and, for smooth fields, the analytic gradient and Hessian.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::rng;
use crate::symmat::{self, SquareMatrix, SymmetricMatrix};
use crate::{Error, Result};

/// Relative tolerance of [`check_symmetry`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Largest dimension swept exhaustively by [`check_symmetry`] (6! = 720 permutations).
pub const EXHAUSTIVE_PERMUTATION_MAX_N: usize = 6;

/// Random permutations sampled by [`check_symmetry`] above the exhaustive limit.
pub const SAMPLED_PERMUTATIONS: usize = 50;

/// Set of eigenvalue vectors a field is defined on. Every variant is convex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Real,
    /// Every coordinate strictly greater than the bound.
    GreaterThan(f64),
    /// Every coordinate at least the bound.
    AtLeast(f64),
}

impl Domain {
    pub const POSITIVE: Domain = Domain::GreaterThan(0.0);
    pub const NON_NEGATIVE: Domain = Domain::AtLeast(0.0);

    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            Domain::Real => x.iter().all(|v| v.is_finite()),
            Domain::GreaterThan(b) => x.iter().all(|&v| v.is_finite() && v > b),
            Domain::AtLeast(b) => x.iter().all(|&v| v.is_finite() && v >= b),
        }
    }

    pub fn is_restricted(&self) -> bool {
        !matches!(self, Domain::Real)
    }

    /// Lower bound on coordinates, if any.
    pub fn lower_bound(&self) -> Option<f64> {
        match *self {
            Domain::Real => None,
            Domain::GreaterThan(b) | Domain::AtLeast(b) => Some(b),
        }
    }

    /// Shift that moves the smallest eigenvalue at least one unit inside the domain:
    /// `|λ_min − bound| + 1`, the PD shift `|λ_min| + 1` for positive domains.
    pub fn feasibility_shift(&self, lambda_min: f64) -> Option<f64> {
        self.lower_bound().map(|b| (lambda_min - b).abs() + 1.0)
    }

    pub(crate) fn offset(&self, delta: f64) -> Domain {
        match *self {
            Domain::Real => Domain::Real,
            Domain::GreaterThan(b) => Domain::GreaterThan(b + delta),
            Domain::AtLeast(b) => Domain::AtLeast(b + delta),
        }
    }

    /// Draws a point of the domain: standard normal coordinates on `Real`,
    /// `bound + 0.1 + |z|` otherwise.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let z = rng::normal(rng);
                match self.lower_bound() {
                    None => z,
                    Some(b) => b + 0.1 + z.abs(),
                }
            })
            .collect()
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Real => write!(f, "all real λ"),
            Domain::GreaterThan(b) => write!(f, "all λᵢ > {b}"),
            Domain::AtLeast(b) => write!(f, "all λᵢ ≥ {b}"),
        }
    }
}

/// Admissible dimensions of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arity {
    pub min: usize,
    pub max: Option<usize>,
}

impl Arity {
    pub const ANY: Arity = Arity { min: 1, max: None };

    pub fn exactly(n: usize) -> Self {
        Self { min: n, max: Some(n) }
    }

    pub fn at_least(n: usize) -> Self {
        Self { min: n.max(1), max: None }
    }

    pub fn accepts(&self, n: usize) -> bool {
        n >= self.min && self.max.is_none_or(|m| n <= m)
    }

    pub fn capped(self, cap: usize) -> Self {
        Self { min: self.min, max: Some(self.max.map_or(cap, |m| m.min(cap))) }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.min, self.max) {
            (1, None) => write!(f, "any dimension"),
            (lo, None) => write!(f, "dimension ≥ {lo}"),
            (lo, Some(hi)) if lo == hi => write!(f, "dimension {lo}"),
            (lo, Some(hi)) => write!(f, "dimension {lo}..={hi}"),
        }
    }
}

/// Where a nonsmooth field may fail to be differentiable. Used by the mollifier to
/// split its quadrature at the kinks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Kinks {
    /// Kinks where two coordinates coincide (`λᵢ = λⱼ`), as for sorted-order functions.
    pub coincident: bool,
    /// Kinks where any coordinate equals one of these levels.
    pub levels: Vec<f64>,
}

impl Kinks {
    pub fn is_empty(&self) -> bool {
        !self.coincident && self.levels.is_empty()
    }
}

/// Value, gradient and Hessian at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: SquareMatrix,
}

/// Pointwise evaluation of a scalar field. Implementations may assume the point has
/// an admissible dimension and lies in the field's domain.
pub trait Evaluator: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;

    /// Whether [`Evaluator::gradient`] and [`Evaluator::hessian`] are available.
    fn has_derivatives(&self) -> bool {
        false
    }

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn hessian(&self, _x: &[f64]) -> Option<SquareMatrix> {
        None
    }

    fn jet(&self, x: &[f64]) -> Option<Jet> {
        Some(Jet { value: self.value(x), gradient: self.gradient(x)?, hessian: self.hessian(x)? })
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type HessianFn = dyn Fn(&[f64]) -> SquareMatrix + Send + Sync;

/// Evaluator assembled from closures.
pub struct FnEvaluator {
    value: Box<ValueFn>,
    derivatives: Option<(Box<GradientFn>, Box<HessianFn>)>,
}

impl Evaluator for FnEvaluator {
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn has_derivatives(&self) -> bool {
        self.derivatives.is_some()
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.derivatives.as_ref().map(|(g, _)| g(x))
    }

    fn hessian(&self, x: &[f64]) -> Option<SquareMatrix> {
        self.derivatives.as_ref().map(|(_, h)| h(x))
    }
}

/// A function `g(λ₁, …, λₙ)` with metadata.
#[derive(Clone)]
pub struct SymmetricScalarField {
    name: String,
    arity: Arity,
    domain: Domain,
    claimed_symmetric: bool,
    claimed_convex: bool,
    kinks: Kinks,
    evaluator: Arc<dyn Evaluator>,
}

impl fmt::Debug for SymmetricScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricScalarField")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("domain", &self.domain)
            .field("claimed_symmetric", &self.claimed_symmetric)
            .field("claimed_convex", &self.claimed_convex)
            .field("smooth", &self.is_smooth())
            .finish()
    }
}

impl SymmetricScalarField {
    /// Wraps an evaluator. Defaults: any dimension, real domain, no claims, no kinks.
    pub fn new(name: impl Into<String>, evaluator: Arc<dyn Evaluator>) -> Self {
        Self {
            name: name.into(),
            arity: Arity::ANY,
            domain: Domain::Real,
            claimed_symmetric: false,
            claimed_convex: false,
            kinks: Kinks::default(),
            evaluator,
        }
    }

    /// A value-only field from a closure.
    pub fn from_value_fn(name: impl Into<String>, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, Arc::new(FnEvaluator { value: Box::new(value), derivatives: None }))
    }

    /// A smooth field from value, gradient and Hessian closures.
    pub fn from_fns(
        name: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        hessian: impl Fn(&[f64]) -> SquareMatrix + Send + Sync + 'static,
    ) -> Self {
        let evaluator =
            FnEvaluator { value: Box::new(value), derivatives: Some((Box::new(gradient), Box::new(hessian))) };
        Self::new(name, Arc::new(evaluator))
    }

    pub fn with_arity(mut self, arity: Arity) -> Self {
        self.arity = arity;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_claims(mut self, symmetric: bool, convex: bool) -> Self {
        self.claimed_symmetric = symmetric;
        self.claimed_convex = convex;
        self
    }

    pub fn with_kinks(mut self, kinks: Kinks) -> Self {
        self.kinks = kinks;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn claimed_symmetric(&self) -> bool {
        self.claimed_symmetric
    }

    pub fn claimed_convex(&self) -> bool {
        self.claimed_convex
    }

    pub fn kinks(&self) -> &Kinks {
        &self.kinks
    }

    pub fn is_smooth(&self) -> bool {
        self.evaluator.has_derivatives()
    }

    pub fn evaluator(&self) -> &Arc<dyn Evaluator> {
        &self.evaluator
    }

    pub fn check_arity(&self, n: usize) -> Result<()> {
        if self.arity.accepts(n) {
            Ok(())
        } else {
            Err(Error::Arity { field: self.name.clone(), arity: self.arity, n })
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        self.check_arity(x.len())?;
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain { field: self.name.clone(), domain: self.domain })
        }
    }

    fn require_smooth(&self) -> Result<()> {
        if self.is_smooth() {
            Ok(())
        } else {
            Err(Error::NotSmooth { field: self.name.clone() })
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.evaluator.value(x))
    }

    /// `∂g/∂λᵢ`. Errors for value-only fields.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.require_smooth()?;
        self.evaluator.gradient(x).ok_or_else(|| Error::NotSmooth { field: self.name.clone() })
    }

    /// `∂²g/∂λᵢ∂λⱼ`. Errors for value-only fields.
    pub fn hessian(&self, x: &[f64]) -> Result<SquareMatrix> {
        self.check_point(x)?;
        self.require_smooth()?;
        self.evaluator.hessian(x).ok_or_else(|| Error::NotSmooth { field: self.name.clone() })
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        self.check_point(x)?;
        self.require_smooth()?;
        self.evaluator.jet(x).ok_or_else(|| Error::NotSmooth { field: self.name.clone() })
    }
}

/// A catalog field plus human-readable notes on its convexity and domain.
#[derive(Debug, Clone)]
pub struct FieldCatalogEntry {
    pub field: SymmetricScalarField,
    pub notes: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Builtin {
    Sum,
    SumOfSquares,
    NegLogDet,
    PowerSum(u32),
    Zeta(u32),
    LogSumExp,
    Product,
    SumKLargest(usize),
}

fn powi(x: f64, p: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..p {
        acc *= x;
    }
    acc
}

fn diagonal_matrix(diag: impl Iterator<Item = f64>) -> SquareMatrix {
    let d: Vec<f64> = diag.collect();
    let mut h = SquareMatrix::zeros(d.len());
    for (i, v) in d.into_iter().enumerate() {
        h.set(i, i, v);
    }
    h
}

fn log_sum_exp_parts(x: &[f64]) -> (f64, Vec<f64>) {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| libm::exp(v - m)).collect();
    let z: f64 = e.iter().sum();
    (m + libm::log(z), e.into_iter().map(|v| v / z).collect())
}

fn product_except(x: &[f64], skip: &[usize]) -> f64 {
    x.iter().enumerate().filter(|(k, _)| !skip.contains(k)).map(|(_, v)| v).product()
}

impl Evaluator for Builtin {
    fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Builtin::Sum => x.iter().sum(),
            Builtin::SumOfSquares => x.iter().map(|v| v * v).sum(),
            Builtin::NegLogDet => -x.iter().map(|&v| libm::log(v)).sum::<f64>(),
            Builtin::PowerSum(p) => x.iter().map(|&v| powi(v, p)).sum(),
            Builtin::Zeta(s) => x.iter().map(|&v| 1.0 / powi(v, s)).sum(),
            Builtin::LogSumExp => log_sum_exp_parts(x).0,
            Builtin::Product => x.iter().product(),
            Builtin::SumKLargest(k) => {
                // mollification calls this millions of times; avoid allocating for small n
                let mut buf = [0.0; 8];
                let mut heap;
                let sorted: &mut [f64] = if x.len() <= buf.len() {
                    &mut buf[..x.len()]
                } else {
                    heap = x.to_vec();
                    &mut heap
                };
                sorted.copy_from_slice(x);
                sorted.sort_unstable_by(|a, b| b.total_cmp(a));
                sorted.iter().take(k).sum()
            }
        }
    }

    fn has_derivatives(&self) -> bool {
        !matches!(self, Builtin::SumKLargest(_))
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let g = match *self {
            Builtin::Sum => vec![1.0; x.len()],
            Builtin::SumOfSquares => x.iter().map(|v| 2.0 * v).collect(),
            Builtin::NegLogDet => x.iter().map(|v| -1.0 / v).collect(),
            Builtin::PowerSum(p) => x.iter().map(|&v| p as f64 * powi(v, p.saturating_sub(1))).collect(),
            Builtin::Zeta(s) => x.iter().map(|&v| -(s as f64) / powi(v, s + 1)).collect(),
            Builtin::LogSumExp => log_sum_exp_parts(x).1,
            Builtin::Product => (0..x.len()).map(|i| product_except(x, &[i])).collect(),
            Builtin::SumKLargest(_) => return None,
        };
        Some(g)
    }

    fn hessian(&self, x: &[f64]) -> Option<SquareMatrix> {
        let n = x.len();
        let h = match *self {
            Builtin::Sum => SquareMatrix::zeros(n),
            Builtin::SumOfSquares => diagonal_matrix(x.iter().map(|_| 2.0)),
            Builtin::NegLogDet => diagonal_matrix(x.iter().map(|v| 1.0 / (v * v))),
            Builtin::PowerSum(p) => {
                let c = (p as f64) * (p as f64 - 1.0);
                diagonal_matrix(x.iter().map(|&v| if p >= 2 { c * powi(v, p - 2) } else { 0.0 }))
            }
            Builtin::Zeta(s) => {
                let c = (s as f64) * (s as f64 + 1.0);
                diagonal_matrix(x.iter().map(|&v| c / powi(v, s + 2)))
            }
            Builtin::LogSumExp => {
                let (_, p) = log_sum_exp_parts(x);
                let mut h = SquareMatrix::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        let d = if i == j { p[i] } else { 0.0 };
                        h.set(i, j, d - p[i] * p[j]);
                    }
                }
                h
            }
            Builtin::Product => {
                let mut h = SquareMatrix::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            h.set(i, j, product_except(x, &[i, j]));
                        }
                    }
                }
                h
            }
            Builtin::SumKLargest(_) => return None,
        };
        Some(h)
    }
}

fn builtin(name: String, b: Builtin, domain: Domain, convex: bool, notes: &str) -> FieldCatalogEntry {
    let arity = match b {
        Builtin::SumKLargest(k) => Arity::at_least(k),
        _ => Arity::ANY,
    };
    let kinks = match b {
        Builtin::SumKLargest(_) => Kinks { coincident: true, levels: Vec::new() },
        _ => Kinks::default(),
    };
    let field = SymmetricScalarField::new(name, Arc::new(b))
        .with_arity(arity)
        .with_domain(domain)
        .with_claims(true, convex)
        .with_kinks(kinks);
    FieldCatalogEntry { field, notes: notes.to_string() }
}

fn power_sum_entry(p: u32) -> FieldCatalogEntry {
    let name = format!("power_sum_{p}");
    if p % 2 == 0 {
        builtin(name, Builtin::PowerSum(p), Domain::Real, true, "Σλᵢᵖ, even p: convex on all of ℝⁿ")
    } else if p == 1 {
        builtin(name, Builtin::PowerSum(p), Domain::Real, true, "Σλᵢ: linear, convex with zero Hessian")
    } else {
        builtin(
            name,
            Builtin::PowerSum(p),
            Domain::NON_NEGATIVE,
            true,
            "Σλᵢᵖ, odd p ≥ 3: convex only on λ ≥ 0, so the domain is restricted to the PSD cone",
        )
    }
}

fn zeta_entry(s: u32) -> FieldCatalogEntry {
    builtin(format!("zeta_{s}"), Builtin::Zeta(s), Domain::POSITIVE, true, "Σλᵢ⁻ˢ: convex on λ > 0")
}

fn sum_k_largest_entry(k: usize) -> FieldCatalogEntry {
    builtin(
        format!("sum_{k}_largest"),
        Builtin::SumKLargest(k),
        Domain::Real,
        true,
        "sum of the k largest λᵢ: convex, nonsmooth where eigenvalues coincide; value-only, use mollify",
    )
}

/// The built-in fields.
pub fn catalog() -> Vec<FieldCatalogEntry> {
    let mut entries = vec![
        builtin("sum".into(), Builtin::Sum, Domain::Real, true, "trace: linear, convex, Hessian identically zero"),
        builtin("sum_of_squares".into(), Builtin::SumOfSquares, Domain::Real, true, "Σλᵢ² = ‖M‖_F²: strictly convex"),
        builtin(
            "neg_log_det".into(),
            Builtin::NegLogDet,
            Domain::POSITIVE,
            true,
            "−Σ log λᵢ = −log det M: convex on λ > 0",
        ),
    ];
    entries.extend((2..=4).map(power_sum_entry));
    entries.extend((1..=2).map(zeta_entry));
    entries.push(builtin(
        "log_sum_exp".into(),
        Builtin::LogSumExp,
        Domain::Real,
        true,
        "log Σ exp λᵢ: convex smooth surrogate for λ_max",
    ));
    entries.push(builtin(
        "product".into(),
        Builtin::Product,
        Domain::Real,
        false,
        "Πλᵢ = det M: symmetric but NOT convex for n ≥ 2 (negative control)",
    ));
    entries.extend((1..=3).map(sum_k_largest_entry));
    entries
}

/// Looks up a field by name. Parametrized families (`power_sum_<p>`, `zeta_<s>`,
/// `sum_<k>_largest`) accept any positive parameter.
pub fn field_by_name(name: &str) -> Result<SymmetricScalarField> {
    entry_by_name(name).map(|e| e.field)
}

pub fn entry_by_name(name: &str) -> Result<FieldCatalogEntry> {
    let unknown = || Error::UnknownField(name.to_string());
    if let Some(e) = catalog().into_iter().find(|e| e.field.name() == name) {
        return Ok(e);
    }
    let parse_positive = |s: &str| s.parse::<u32>().ok().filter(|v| (1..=64).contains(v));
    if let Some(p) = name.strip_prefix("power_sum_").and_then(parse_positive) {
        return Ok(power_sum_entry(p));
    }
    if let Some(s) = name.strip_prefix("zeta_").and_then(parse_positive) {
        return Ok(zeta_entry(s));
    }
    if let Some(k) = name.strip_prefix("sum_").and_then(|r| r.strip_suffix("_largest")).and_then(parse_positive) {
        return Ok(sum_k_largest_entry(k as usize));
    }
    Err(unknown())
}

/// `g(λ(M))`.
pub fn evaluate_spectral(g: &SymmetricScalarField, m: &SymmetricMatrix) -> Result<f64> {
    g.check_arity(m.n())?;
    let spectrum = symmat::eigendecompose(m)?;
    g.value(spectrum.eigenvalues())
}

/// A permutation that changed the value of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryViolation {
    pub point: Vec<f64>,
    pub permutation: Vec<usize>,
    pub discrepancy: f64,
}

/// Compares `g(λ)` with `g(σλ)` over all permutations (n ≤ 6) or 50 seeded random
/// permutations (n > 6). Violations are returned as data.
pub fn check_symmetry(g: &SymmetricScalarField, points: &[Vec<f64>]) -> Result<Vec<SymmetryViolation>> {
    let mut violations = Vec::new();
    let mut rng = rng::seeded(0, rng::STREAM_PERMUTATIONS);
    for point in points {
        let base = g.value(point)?;
        let limit = SYMMETRY_TOL * base.abs().max(1.0);
        for perm in permutations_for(point.len(), &mut rng) {
            let permuted: Vec<f64> = perm.iter().map(|&k| point[k]).collect();
            let discrepancy = (base - g.value(&permuted)?).abs();
            if discrepancy > limit {
                violations.push(SymmetryViolation { point: point.clone(), permutation: perm, discrepancy });
            }
        }
    }
    Ok(violations)
}

fn permutations_for(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    if n <= EXHAUSTIVE_PERMUTATION_MAX_N {
        all_permutations(n)
    } else {
        (0..SAMPLED_PERMUTATIONS)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                p
            })
            .collect()
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).expect("pivot has a successor");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// Dimensions in `2..=6` that `g` accepts, cycled through by seeded sweeps.
pub(crate) fn sweep_dimensions(g: &SymmetricScalarField) -> Result<Vec<usize>> {
    let dims: Vec<usize> = (2..=6).filter(|&n| g.arity().accepts(n)).collect();
    if dims.is_empty() {
        let n = g.arity().min;
        g.check_arity(n)?;
        return Ok(vec![n]);
    }
    Ok(dims)
}

/// Moves `m` inside `g`'s domain by the PD-style shift when the domain is restricted.
pub fn shift_into_domain(g: &SymmetricScalarField, m: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    if !g.domain().is_restricted() {
        return Ok(m.clone());
    }
    let lambda_min = symmat::eigendecompose(m)?.eigenvalues()[0];
    Ok(match g.domain().feasibility_shift(lambda_min) {
        Some(shift) => m.shifted(shift),
        None => m.clone(),
    })
}

/// Largest `|f(M) − f(OᵀMO)|` over `trials` seeded pairs `(M, O)`. Dimensions cycle
/// through the admissible part of `2..=6`; domain-restricted fields get PD-shifted samples.
pub fn check_orthogonal_invariance(g: &SymmetricScalarField, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::TooSmall { what: "trials", min: 1, got: 0 });
    }
    let dims = sweep_dimensions(g)?;
    let mut rng = rng::seeded(seed, rng::STREAM_INVARIANCE);
    let mut worst = 0.0_f64;
    for t in 0..trials {
        let n = dims[t % dims.len()];
        let m = symmat::random_symmetric_from(&mut rng, n, 1.0);
        let m = shift_into_domain(g, &m)?;
        let o = symmat::random_orthogonal_from(&mut rng, n);
        let rotated = symmat::conjugate(&m, &o)?;
        let discrepancy = (evaluate_spectral(g, &m)? - evaluate_spectral(g, &rotated)?).abs();
        worst = worst.max(discrepancy);
    }
    Ok(worst)
}

/// Seeded points of `g`'s domain in dimension `n`.
pub fn sample_domain_points(g: &SymmetricScalarField, n: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    g.check_arity(n)?;
    let mut rng = rng::seeded(seed, rng::STREAM_POINTS);
    Ok((0..count).map(|_| g.domain().sample(n, &mut rng)).collect())
}
