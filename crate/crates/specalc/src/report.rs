//! JSON report types. Field order is the serialization order and part of the format.
//!
//! Non-finite numbers (an empty certification's `min_d2`, say) serialize as `null`.

use serde::Serialize;
use specalc_core::convexity::{CertificationReport, LemmaProbe, LemmaViolation, Witness};
use specalc_core::perturb::{DerivativeReport, FiniteDifferences};

use crate::config::RunConfig;
use crate::matrix_file::MatrixFile;

pub const TOOL: &str = "specalc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerances in effect for a command; unused ones are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetrization_warn: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coalesce: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step_d1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step_d2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certify: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_order: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub warnings: Vec<String>,
    pub result: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigReport {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns.
    pub eigenvectors: MatrixFile,
    pub gap: f64,
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub field: String,
    pub value: f64,
    pub eigenvalues: Vec<f64>,
    /// `∇g(λ)`, absent for value-only fields.
    pub spectral_gradient: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteDifferenceReport {
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeriveReport {
    pub field: String,
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub hessian_term: f64,
    pub curvature_term: f64,
    pub gap: f64,
    pub coalesced_pairs: usize,
    pub eigenvalues: Vec<f64>,
    /// `λ̇`; `λ̈` only for a simple spectrum.
    pub eigen_velocity: Vec<f64>,
    pub eigen_acceleration: Option<Vec<f64>>,
    /// Central differences with the default steps; absent when `P ± hQ` leaves the domain.
    pub finite_differences: Option<FiniteDifferenceReport>,
}

impl DeriveReport {
    pub fn new(
        field: &str,
        r: &DerivativeReport,
        eigenvalues: Vec<f64>,
        eigen_velocity: Vec<f64>,
        eigen_acceleration: Option<Vec<f64>>,
        fd: Option<(FiniteDifferences, FiniteDifferences)>,
    ) -> Self {
        Self {
            field: field.into(),
            value: r.value,
            d1: r.d1,
            d2: r.d2,
            hessian_term: r.hessian_term,
            curvature_term: r.curvature_term,
            gap: r.gap,
            coalesced_pairs: r.coalesced_pairs,
            eigenvalues,
            eigen_velocity,
            eigen_acceleration,
            finite_differences: fd.map(|(a, b)| FiniteDifferenceReport { d1: a.d1, d2: b.d2 }),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub n: usize,
    pub trial: usize,
    pub p: MatrixFile,
    pub q: MatrixFile,
    pub d2: f64,
}

impl From<&Witness> for WitnessReport {
    fn from(w: &Witness) -> Self {
        Self { n: w.n, trial: w.trial, p: (&w.p).into(), q: (&w.q).into(), d2: w.d2 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationJson {
    pub field_name: String,
    pub trials: usize,
    pub dimension_range: Vec<usize>,
    pub seed: u64,
    pub tol: f64,
    pub samples: usize,
    pub resampled: usize,
    pub skipped: usize,
    pub min_d2: f64,
    pub mean_d2: f64,
    pub max_d2: f64,
    pub coalesced_pairs: usize,
    pub verdict: &'static str,
    pub witness: Option<WitnessReport>,
}

impl From<&CertificationReport> for CertificationJson {
    fn from(r: &CertificationReport) -> Self {
        Self {
            field_name: r.field_name.clone(),
            trials: r.trials,
            dimension_range: r.dimension_range.clone(),
            seed: r.seed,
            tol: r.tol,
            samples: r.samples,
            resampled: r.resampled,
            skipped: r.skipped,
            min_d2: r.min_d2,
            mean_d2: r.mean_d2,
            max_d2: r.max_d2,
            coalesced_pairs: r.coalesced_pairs,
            verdict: r.verdict.as_str(),
            witness: r.witness.as_ref().map(Into::into),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaViolationReport {
    pub point: [f64; 2],
    pub lhs: f64,
}

impl From<&LemmaViolation> for LemmaViolationReport {
    fn from(v: &LemmaViolation) -> Self {
        Self { point: v.point, lhs: v.lhs }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub field: String,
    pub points: usize,
    pub violations: Vec<LemmaViolationReport>,
    /// Largest `|h(0) − h(1)|` of the proof probe over the sweep.
    pub max_probe_asymmetry: f64,
    /// Largest `ḣ(0)`.
    pub max_probe_slope: f64,
    pub verdict: &'static str,
}

impl LemmaReport {
    pub fn probe_stats(probes: &[LemmaProbe]) -> (f64, f64) {
        probes.iter().fold((0.0_f64, f64::NEG_INFINITY), |(a, s), p| (a.max((p.h0 - p.h1).abs()), s.max(p.hdot0)))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MollifyStage {
    pub sigma: f64,
    pub field: String,
    /// Grid estimate of `sup |b_σ − b|` over the box (a lower bound of the true sup).
    pub sup_distance: Option<f64>,
    pub certification: CertificationJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct MollifyReport {
    pub base: String,
    pub quadrature_order: usize,
    pub distance_box: Option<Vec<[f64; 2]>>,
    pub stages: Vec<MollifyStage>,
}
