//! Gaussian smoothing of (possibly nonsmooth) symmetric fields on eigenvalue space.
//!
//! The mollification of `b` with bandwidth `σ` is `b_σ(λ) = E[b(λ + σZ)]`, `Z ~ N(0, I)`.
//! Its derivatives move onto the kernel,
//!
//! ```text
//! ∇b_σ(λ) = E[b(λ + σZ) Z] / σ,     H(b_σ)(λ) = E[b(λ + σZ) (ZZᵀ − I)] / σ²,
//! ```
//!
//! so they exist for merely continuous `b`. Convolution with a positive kernel keeps
//! convexity, and an isotropic kernel keeps permutation symmetry.
//!
//! # Quadrature
//!
//! Expectations are nested one-dimensional integrals over `z ∈ [−8.5, 8.5]` (the
//! Gaussian mass outside is below 2e−17). Each axis is cut at the kinks the base
//! declares through [`Kinks`]: at fixed levels, and (for sorted-order functions such as
//! `sum_k_largest`) wherever the coordinate meets one of the coordinates already fixed
//! by the outer integrals. The pieces are split into panels no wider than 4.25 and each
//! panel gets an `order`-point Gauss–Legendre rule against the Gaussian density. On
//! every panel the integrand is smooth, so the rule converges geometrically even though
//! `b` has kinks; plain Gauss–Hermite only converges algebraically there.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::convexity::{certify_line_convexity, CertificationReport, DEFAULT_CERTIFY_TOL};
use crate::specfun::{self, Evaluator, Jet, Kinks, SymmetricScalarField};
use crate::symmat::SquareMatrix;
use crate::{Error, Result};

/// Half-width of the integration window, in units of `σ`.
pub const TRUNCATION: f64 = 8.5;

/// Widest panel of the composite rule, in units of `σ`.
pub const PANEL_WIDTH: f64 = 4.25;

pub const MIN_ORDER: usize = 5;
pub const DEFAULT_ORDER: usize = 20;

/// Largest dimension a mollified field accepts; the cost grows like `(4·order)ⁿ`.
pub const MAX_MOLLIFY_DIM: usize = 4;

/// Largest dimension [`symmetrize`] averages over exhaustively (6! = 720 terms).
pub const MAX_SYMMETRIZE_DIM: usize = 6;

pub const DEFAULT_SIGMAS: [f64; 3] = [0.5, 0.25, 0.125];

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on `P_m`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let m = order;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre(m, x);
            dp = m as f64 * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                let (p, p_prev) = legendre(m, x);
                dp = m as f64 * (x * p - p_prev) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

// (P_m(x), P_{m-1}(x))
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Composite Gauss–Legendre rule for `∫ f(z) φ(z) dz` over `[−TRUNCATION, TRUNCATION]`,
/// cut at the given breakpoints. Appends `(node, weight)` pairs to `out`.
fn gaussian_rule(legendre: &(Vec<f64>, Vec<f64>), breakpoints: &mut Vec<f64>, out: &mut Vec<(f64, f64)>) {
    breakpoints.retain(|b| b.abs() < TRUNCATION);
    breakpoints.push(-TRUNCATION);
    breakpoints.push(TRUNCATION);
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    out.clear();
    let (nodes, weights) = legendre;
    for piece in breakpoints.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        let panels = libm::ceil((b - a) / PANEL_WIDTH).max(1.0) as usize;
        let width = (b - a) / panels as f64;
        for k in 0..panels {
            let lo = a + width * k as f64;
            let half = 0.5 * width;
            let mid = lo + half;
            for (x, w) in nodes.iter().zip(weights) {
                let z = mid + half * x;
                out.push((z, half * w * INV_SQRT_2PI * libm::exp(-0.5 * z * z)));
            }
        }
    }
}

struct Mollifier {
    base: Arc<dyn Evaluator>,
    sigma: f64,
    kinks: Kinks,
    legendre: (Vec<f64>, Vec<f64>),
    // rule for an axis without breakpoints inside the window
    plain: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Wanted {
    Value,
    Jet,
}

struct Accumulator {
    wanted: Wanted,
    baseline: f64,
    value: f64,
    gradient: Vec<f64>,
    hessian: Vec<f64>,
}

impl Mollifier {
    fn new(base: Arc<dyn Evaluator>, sigma: f64, order: usize, kinks: Kinks) -> Self {
        let legendre = gauss_legendre(order);
        let mut plain = Vec::new();
        gaussian_rule(&legendre, &mut Vec::new(), &mut plain);
        Self { base, sigma, kinks, legendre, plain }
    }

    fn integrate(&self, lambda: &[f64], wanted: Wanted) -> Accumulator {
        let n = lambda.len();
        let mut acc = Accumulator {
            wanted,
            // subtracting b(λ) leaves the kernel moments unchanged and reduces cancellation
            baseline: if wanted == Wanted::Jet { self.base.value(lambda) } else { 0.0 },
            value: 0.0,
            gradient: vec![0.0; n],
            hessian: vec![0.0; n * n],
        };
        let mut y = vec![0.0; n];
        let mut z = vec![0.0; n];
        self.recurse(0, lambda, &mut y, &mut z, 1.0, &mut acc);

        let (s, s2) = (self.sigma, self.sigma * self.sigma);
        acc.gradient.iter_mut().for_each(|g| *g /= s);
        for i in 0..n {
            for j in 0..i {
                acc.hessian[i * n + j] = acc.hessian[j * n + i];
            }
        }
        acc.hessian.iter_mut().for_each(|h| *h /= s2);
        acc
    }

    fn recurse(&self, k: usize, lambda: &[f64], y: &mut [f64], z: &mut [f64], weight: f64, acc: &mut Accumulator) {
        let n = lambda.len();
        if k == n {
            let b = self.base.value(y);
            acc.value += weight * b;
            if acc.wanted == Wanted::Jet {
                let c = weight * (b - acc.baseline);
                for i in 0..n {
                    acc.gradient[i] += c * z[i];
                    for j in i..n {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        acc.hessian[i * n + j] += c * (z[i] * z[j] - delta);
                    }
                }
            }
            return;
        }

        let mut breakpoints: Vec<f64> = self.kinks.levels.iter().map(|c| (c - lambda[k]) / self.sigma).collect();
        if self.kinks.coincident {
            breakpoints.extend(y[..k].iter().map(|yj| (yj - lambda[k]) / self.sigma));
        }
        let local;
        let rule = if breakpoints.iter().all(|b| b.abs() >= TRUNCATION) {
            &self.plain
        } else {
            let mut r = Vec::new();
            gaussian_rule(&self.legendre, &mut breakpoints, &mut r);
            local = r;
            &local
        };
        for &(zk, wk) in rule {
            z[k] = zk;
            y[k] = lambda[k] + self.sigma * zk;
            self.recurse(k + 1, lambda, y, z, weight * wk, acc);
        }
    }
}

impl Evaluator for Mollifier {
    fn value(&self, x: &[f64]) -> f64 {
        self.integrate(x, Wanted::Value).value
    }

    fn has_derivatives(&self) -> bool {
        true
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.integrate(x, Wanted::Jet).gradient)
    }

    fn hessian(&self, x: &[f64]) -> Option<SquareMatrix> {
        Some(SquareMatrix::from_row_major(x.len(), self.integrate(x, Wanted::Jet).hessian))
    }

    fn jet(&self, x: &[f64]) -> Option<Jet> {
        let acc = self.integrate(x, Wanted::Jet);
        Some(Jet {
            value: acc.value,
            gradient: acc.gradient,
            hessian: SquareMatrix::from_row_major(x.len(), acc.hessian),
        })
    }
}

/// A Gaussian mollification and its parameters.
#[derive(Debug, Clone)]
pub struct MollifiedField {
    pub base_name: String,
    pub sigma: f64,
    pub quadrature_order: usize,
    /// Smooth field with kernel-derivative gradient and Hessian.
    pub result: SymmetricScalarField,
}

/// Smooths `base` (only its values are used) with a Gaussian of bandwidth `sigma`.
///
/// The result accepts dimensions up to [`MAX_MOLLIFY_DIM`]; its domain is the base
/// domain pulled in by the integration window, so every quadrature node stays feasible.
pub fn gaussian_mollify(base: &SymmetricScalarField, sigma: f64, order: usize) -> Result<MollifiedField> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::NotPositive { what: "sigma", value: sigma });
    }
    if order < MIN_ORDER {
        return Err(Error::TooSmall { what: "quadrature order", min: MIN_ORDER, got: order });
    }
    let arity = base.arity().capped(MAX_MOLLIFY_DIM);
    if arity.min > MAX_MOLLIFY_DIM {
        return Err(Error::TooLarge { what: "mollified dimension", max: MAX_MOLLIFY_DIM, got: arity.min });
    }
    let evaluator = Mollifier::new(base.evaluator().clone(), sigma, order, base.kinks().clone());
    let result = SymmetricScalarField::new(format!("{}@sigma={}", base.name(), sigma), Arc::new(evaluator))
        .with_arity(arity)
        .with_domain(base.domain().offset(TRUNCATION * sigma))
        .with_claims(base.claimed_symmetric(), base.claimed_convex());
    Ok(MollifiedField { base_name: base.name().into(), sigma, quadrature_order: order, result })
}

struct PermutationAverage {
    base: Arc<dyn Evaluator>,
    // permutations[n] lists every permutation of 0..n
    permutations: Vec<Vec<Vec<usize>>>,
}

impl Evaluator for PermutationAverage {
    fn value(&self, x: &[f64]) -> f64 {
        // the average is permutation invariant, so averaging from the sorted point makes
        // the result bit-identical for every ordering of x
        let mut sorted = x.to_vec();
        sorted.sort_by(f64::total_cmp);
        let perms = &self.permutations[x.len()];
        let mut buf = vec![0.0; x.len()];
        let mut total = 0.0;
        for p in perms {
            for (slot, &k) in buf.iter_mut().zip(p) {
                *slot = sorted[k];
            }
            total += self.base.value(&buf);
        }
        total / perms.len() as f64
    }
}

/// Permutation average `(1/n!) Σ_σ b(σλ)`, a value-only field that is exactly symmetric.
pub fn symmetrize(base: &SymmetricScalarField) -> Result<SymmetricScalarField> {
    let arity = base.arity().capped(MAX_SYMMETRIZE_DIM);
    if arity.min > MAX_SYMMETRIZE_DIM {
        return Err(Error::TooLarge {
            what: "dimension for permutation averaging",
            max: MAX_SYMMETRIZE_DIM,
            got: arity.min,
        });
    }
    let permutations = (0..=MAX_SYMMETRIZE_DIM).map(specfun::all_permutations).collect();
    let evaluator = PermutationAverage { base: base.evaluator().clone(), permutations };
    Ok(SymmetricScalarField::new(format!("sym({})", base.name()), Arc::new(evaluator))
        .with_arity(arity)
        .with_domain(base.domain())
        .with_claims(true, base.claimed_convex())
        .with_kinks(base.kinks().clone()))
}

/// `max |a(λ) − b(λ)|` over a tensor grid of `grid` points per axis spanning `bounds`.
/// This bounds the true sup norm from below.
pub fn sup_norm_distance(
    a: &SymmetricScalarField,
    b: &SymmetricScalarField,
    bounds: &[(f64, f64)],
    grid: usize,
) -> Result<f64> {
    if grid < 2 {
        return Err(Error::TooSmall { what: "grid points per axis", min: 2, got: grid });
    }
    let n = bounds.len();
    let total = grid.checked_pow(n as u32).ok_or(Error::TooLarge { what: "grid size", max: usize::MAX, got: grid })?;
    let mut point = vec![0.0; n];
    let mut worst = 0.0_f64;
    for flat in 0..total {
        let mut rest = flat;
        for (coord, &(lo, hi)) in point.iter_mut().zip(bounds) {
            let k = rest % grid;
            rest /= grid;
            *coord = lo + (hi - lo) * k as f64 / (grid - 1) as f64;
        }
        worst = worst.max((a.value(&point)? - b.value(&point)?).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub order: usize,
    pub tol: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { order: DEFAULT_ORDER, tol: DEFAULT_CERTIFY_TOL }
    }
}

/// Checks a sigma schedule and builds one mollification of `base` per entry.
pub fn mollification_schedule(
    base: &SymmetricScalarField,
    sigma_schedule: &[f64],
    order: usize,
) -> Result<Vec<MollifiedField>> {
    if sigma_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::ScheduleNotDecreasing);
    }
    sigma_schedule.iter().map(|&s| gaussian_mollify(base, s, order)).collect()
}

/// Smooths the named catalog field at each sigma and certifies line convexity of every
/// smoothing. One report per sigma, in schedule order.
pub fn mollified_convexity_pipeline(
    base_name: &str,
    sigma_schedule: &[f64],
    dims: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<CertificationReport>> {
    mollified_convexity_pipeline_with(base_name, sigma_schedule, dims, trials, seed, PipelineOptions::default())
}

pub fn mollified_convexity_pipeline_with(
    base_name: &str,
    sigma_schedule: &[f64],
    dims: &[usize],
    trials: usize,
    seed: u64,
    options: PipelineOptions,
) -> Result<Vec<CertificationReport>> {
    let base = specfun::field_by_name(base_name)?;
    mollification_schedule(&base, sigma_schedule, options.order)?
        .iter()
        .map(|m| certify_line_convexity(&m.result, dims, trials, seed, options.tol))
        .collect()
}
