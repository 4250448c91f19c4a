//! Executable convexity checks for spectral functions.
//!
//! * [`lemma_check`] and [`lemma_proof_probe`]: for a convex `g` with `g(x, y) = g(y, x)`,
//!   `(∂ₓg − ∂ᵧg)(x − y) ≥ 0`. The probe evaluates `h(t) = g((1−t)x + ty, tx + (1−t)y)`,
//!   which is convex with `h(0) = h(1)`, hence `ḣ(0) ≤ 0`.
//! * [`hessian_psd`]: PSD test of `H(g)` through the Jacobi eigensolver.
//! * [`certify_line_convexity`]: seeded search for a line `P + tQ` with `f̃″(0) < 0`.
//! * [`diagonal_restriction_convexity`]: midpoint convexity of `g` itself.
//!
//! All checks are non-strict (`≥ −tol`): linear fields sit exactly on the boundary.

use alloc::string::String;
use alloc::vec::Vec;

use crate::perturb::{make_line, second_derivative, MatrixLine};
use crate::rng;
use crate::specfun::{shift_into_domain, SymmetricScalarField};
use crate::symmat::{self, SymmetricMatrix};
use crate::{Error, Result};

/// Default violation threshold of [`certify_line_convexity`]. Sampled directions have
/// unit Frobenius norm, so this equals `1e−8 · max(1, ‖Q‖_F²)`.
pub const DEFAULT_CERTIFY_TOL: f64 = 1e-8;

/// Default tolerance of [`lemma_check`] and [`hessian_psd`].
pub const DEFAULT_LEMMA_TOL: f64 = 1e-10;

/// Sampling attempts per trial before the trial is skipped.
pub const MAX_ATTEMPTS: usize = 100;

/// A point where `(∂ₓg − ∂ᵧg)(x − y) < −tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaViolation {
    pub point: [f64; 2],
    pub lhs: f64,
    pub tolerance: f64,
}

/// Embeds a pair `(x, y)` into coordinates `i` and `j` of a larger vector, all other
/// coordinates frozen. [`PairSlice::plain`] is the identity slice for arity-2 fields.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSlice {
    i: usize,
    j: usize,
    frozen: Vec<f64>,
}

impl PairSlice {
    pub fn plain() -> Self {
        Self { i: 0, j: 1, frozen: alloc::vec![0.0, 0.0] }
    }

    pub fn new(i: usize, j: usize, frozen: Vec<f64>) -> Result<Self> {
        let n = frozen.len();
        if i == j || i >= n || j >= n {
            return Err(Error::IndexPair { i, j, n });
        }
        Ok(Self { i, j, frozen })
    }

    pub fn embed(&self, x: f64, y: f64) -> Vec<f64> {
        let mut v = self.frozen.clone();
        v[self.i] = x;
        v[self.j] = y;
        v
    }

    /// `(∂ᵢg, ∂ⱼg)` at the embedded point.
    fn partials(&self, g: &SymmetricScalarField, x: f64, y: f64) -> Result<(f64, f64)> {
        let grad = g.gradient(&self.embed(x, y))?;
        Ok((grad[self.i], grad[self.j]))
    }
}

/// Flags every point with `(∂ₓg − ∂ᵧg)(x − y) < −tol`.
pub fn lemma_check(
    g: &SymmetricScalarField,
    points: &[[f64; 2]],
    tol: f64,
    slice: &PairSlice,
) -> Result<Vec<LemmaViolation>> {
    let mut violations = Vec::new();
    for &[x, y] in points {
        if x == y {
            return Err(Error::CoincidentPoint(x));
        }
        let (gx, gy) = slice.partials(g, x, y)?;
        let lhs = (gx - gy) * (x - y);
        if lhs < -tol {
            violations.push(LemmaViolation { point: [x, y], lhs, tolerance: tol });
        }
    }
    Ok(violations)
}

/// `h(0)`, `h(1)` and `ḣ(0)` for `h(t) = g((1−t)x + ty, tx + (1−t)y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaProbe {
    pub h0: f64,
    pub h1: f64,
    pub hdot0: f64,
}

pub fn lemma_proof_probe(g: &SymmetricScalarField, x: f64, y: f64, slice: &PairSlice) -> Result<LemmaProbe> {
    if x == y {
        return Err(Error::CoincidentPoint(x));
    }
    // the segment between (x, y) and (y, x) lies in every (convex) domain containing both ends
    let h0 = g.value(&slice.embed(x, y))?;
    let h1 = g.value(&slice.embed(y, x))?;
    let (gx, gy) = slice.partials(g, x, y)?;
    Ok(LemmaProbe { h0, h1, hdot0: (gx - gy) * (y - x) })
}

/// Whether `λ_min(H(g)(λ)) ≥ −tol · max(1, ‖H‖_F)`.
pub fn hessian_psd(g: &SymmetricScalarField, lambda: &[f64], tol: f64) -> Result<bool> {
    let h = SymmetricMatrix::from_square(&g.hessian(lambda)?)?;
    let spectrum = symmat::eigendecompose(&h)?;
    Ok(spectrum.eigenvalues()[0] >= -tol * h.frobenius_norm().max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConsistentWithConvex,
    ViolationFound,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ConsistentWithConvex => "consistent_with_convex",
            Verdict::ViolationFound => "violation_found",
        }
    }
}

/// A line along which the sampled second derivative is negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub n: usize,
    pub trial: usize,
    pub p: SymmetricMatrix,
    pub q: SymmetricMatrix,
    pub d2: f64,
}

impl Witness {
    /// Recomputes `f̃″(0)` along the witness line.
    pub fn replay(&self, g: &SymmetricScalarField) -> Result<f64> {
        Ok(second_derivative(g, &make_line(&self.p, &self.q)?)?.d2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub field_name: String,
    /// Trials per dimension.
    pub trials: usize,
    pub dimension_range: Vec<usize>,
    pub seed: u64,
    pub tol: f64,
    /// Trials that produced a second derivative.
    pub samples: usize,
    /// Extra sampling attempts spent on infeasible draws.
    pub resampled: usize,
    /// Trials abandoned after [`MAX_ATTEMPTS`] infeasible draws.
    pub skipped: usize,
    /// `+∞` when nothing was sampled.
    pub min_d2: f64,
    pub mean_d2: f64,
    pub max_d2: f64,
    pub coalesced_pairs: usize,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

/// Result of one certification trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub n: usize,
    pub trial: usize,
    pub resampled: usize,
    /// `None` if the trial was skipped.
    pub d2: Option<f64>,
    pub coalesced_pairs: usize,
}

/// The seeded line used by trial `trial` in dimension `n`: standard-normal `P` (shifted
/// into the domain when it is restricted) and a standard-normal direction `Q` scaled to
/// unit Frobenius norm. Returns the line and the number of discarded draws.
pub fn sample_certification_line(
    g: &SymmetricScalarField,
    n: usize,
    seed: u64,
    trial: usize,
) -> Result<Option<(MatrixLine, usize)>> {
    g.check_arity(n)?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng::seeded(seed, rng::trial_stream(n, attempt, trial));
        let p = symmat::random_symmetric_from(&mut rng, n, 1.0);
        let q = symmat::random_symmetric_from(&mut rng, n, 1.0);
        let q_norm = q.frobenius_norm();
        if q_norm == 0.0 {
            continue;
        }
        let Ok(p) = shift_into_domain(g, &p) else { continue };
        let Ok(line) = make_line(&p, &q.scaled(1.0 / q_norm)) else { continue };
        if g.check_point(line.spectrum().eigenvalues()).is_ok() {
            return Ok(Some((line, attempt)));
        }
    }
    Ok(None)
}

/// Runs one trial. Arity and smoothness are checked by the caller.
pub fn run_trial(g: &SymmetricScalarField, n: usize, seed: u64, trial: usize) -> Result<TrialOutcome> {
    let skipped = TrialOutcome { n, trial, resampled: MAX_ATTEMPTS, d2: None, coalesced_pairs: 0 };
    let Some((line, resampled)) = sample_certification_line(g, n, seed, trial)? else {
        return Ok(skipped);
    };
    match second_derivative(g, &line) {
        Ok(r) => Ok(TrialOutcome { n, trial, resampled, d2: Some(r.d2), coalesced_pairs: r.coalesced_pairs }),
        Err(Error::Domain { .. }) => Ok(TrialOutcome { resampled, ..skipped }),
        Err(e) => Err(e),
    }
}

/// Validates certification inputs and lists the `(n, trial)` jobs in reduction order.
pub fn certification_jobs(
    g: &SymmetricScalarField,
    dims: &[usize],
    trials_per_dim: usize,
) -> Result<Vec<(usize, usize)>> {
    if trials_per_dim == 0 {
        return Err(Error::TooSmall { what: "trials per dimension", min: 1, got: 0 });
    }
    if !g.is_smooth() {
        return Err(Error::NotSmooth { field: g.name().into() });
    }
    for &n in dims {
        g.check_arity(n)?;
    }
    Ok(dims.iter().flat_map(|&n| (0..trials_per_dim).map(move |t| (n, t))).collect())
}

/// Seeded line-convexity certification of a smooth field.
///
/// Every trial is an independent function of `(seed, n, trial)`, and the report is a
/// deterministic reduction over the outcomes in job order, so [`assemble_report`] gives
/// identical results for serial and parallel evaluation.
pub fn certify_line_convexity(
    g: &SymmetricScalarField,
    dims: &[usize],
    trials_per_dim: usize,
    seed: u64,
    tol: f64,
) -> Result<CertificationReport> {
    let jobs = certification_jobs(g, dims, trials_per_dim)?;
    let outcomes = jobs.iter().map(|&(n, t)| run_trial(g, n, seed, t)).collect::<Result<Vec<_>>>()?;
    assemble_report(g, dims, trials_per_dim, seed, tol, &outcomes)
}

/// Reduces trial outcomes (in job order) into a report. The minimum is taken by value,
/// ties resolved by the earlier job; the witness line is regenerated from its seed.
pub fn assemble_report(
    g: &SymmetricScalarField,
    dims: &[usize],
    trials_per_dim: usize,
    seed: u64,
    tol: f64,
    outcomes: &[TrialOutcome],
) -> Result<CertificationReport> {
    let mut samples = 0;
    let mut resampled = 0;
    let mut skipped = 0;
    let mut coalesced_pairs = 0;
    let mut sum = 0.0;
    let mut max_d2 = f64::NEG_INFINITY;
    let mut min: Option<(f64, &TrialOutcome)> = None;
    for o in outcomes {
        resampled += o.resampled;
        coalesced_pairs += o.coalesced_pairs;
        let Some(d2) = o.d2 else {
            skipped += 1;
            continue;
        };
        samples += 1;
        sum += d2;
        max_d2 = max_d2.max(d2);
        if min.is_none_or(|(m, _)| d2 < m) {
            min = Some((d2, o));
        }
    }

    let min_d2 = min.map_or(f64::INFINITY, |(m, _)| m);
    let witness = match min {
        Some((d2, o)) if d2 < -tol => {
            let (line, _) =
                sample_certification_line(g, o.n, seed, o.trial)?.expect("a sampled trial regenerates its line");
            Some(Witness { n: o.n, trial: o.trial, p: line.p().clone(), q: line.q().clone(), d2 })
        }
        _ => None,
    };
    let verdict = if witness.is_some() { Verdict::ViolationFound } else { Verdict::ConsistentWithConvex };

    Ok(CertificationReport {
        field_name: g.name().into(),
        trials: trials_per_dim,
        dimension_range: dims.to_vec(),
        seed,
        tol,
        samples,
        resampled,
        skipped,
        min_d2,
        mean_d2: if samples > 0 { sum / samples as f64 } else { f64::NAN },
        max_d2: if samples > 0 { max_d2 } else { f64::NAN },
        coalesced_pairs,
        verdict,
        witness,
    })
}

/// Largest midpoint defect `g((λ+μ)/2) − (g(λ) + g(μ))/2` over seeded pairs in the
/// domain. Non-positive (up to roundoff) for convex `g`.
pub fn diagonal_restriction_convexity(g: &SymmetricScalarField, n: usize, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::TooSmall { what: "trials", min: 1, got: 0 });
    }
    g.check_arity(n)?;
    let mut rng = rng::seeded(seed, rng::STREAM_MIDPOINT);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let a = g.domain().sample(n, &mut rng);
        let b = g.domain().sample(n, &mut rng);
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let defect = g.value(&mid)? - 0.5 * (g.value(&a)? + g.value(&b)?);
        worst = worst.max(defect);
    }
    Ok(worst)
}
