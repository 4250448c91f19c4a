use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use specalc_core::convexity::{lemma_check, lemma_proof_probe, PairSlice, Verdict};
use specalc_core::mollify::{mollification_schedule, sup_norm_distance, TRUNCATION};
use specalc_core::perturb::{
    eigen_acceleration, finite_difference_oracle, make_line, second_derivative, LineTolerances, DEFAULT_STEP_D1,
    DEFAULT_STEP_D2,
};
use specalc_core::specfun::{entry_by_name, evaluate_spectral, sample_domain_points, SymmetricScalarField};
use specalc_core::symmat::eigendecompose;

use crate::config::{Command, Format, RunConfig};
use crate::matrix_file::{parse_matrix_file, MatrixFile, ParsedMatrix, ASYMMETRY_WARN};
use crate::parallel;
use crate::report::*;
use crate::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Runs one command and writes its report to `config.output` or `stdout`. Warnings and
/// errors go to `stderr`. Returns the process exit code.
pub fn run(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(config) {
        Ok((text, code)) => {
            let written = match &config.output {
                Some(path) => fs::write(path, &text).map_err(|source| CliError::Io { path: path.clone(), source }),
                None => {
                    stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
                }
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    EXIT_ERROR
                }
            }
        }
        Err((e, warnings)) => {
            for w in warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

struct Output<'a> {
    config: &'a RunConfig,
    warnings: Vec<String>,
    tolerances: Tolerances,
}

type Failure = (CliError, Vec<String>);

fn execute(config: &RunConfig) -> Result<(String, i32), Failure> {
    // the field is resolved before any file is read or anything computed
    let field = match (&config.field, config.command) {
        (Some(name), _) => Some(entry_by_name(name).map_err(|e| (CliError::field(name, e), vec![]))?.field),
        (None, Command::Eig) => None,
        (None, _) => return Err((CliError::Usage("--field is required".into()), vec![])),
    };
    let mut out = Output { config, warnings: Vec::new(), tolerances: Tolerances::default() };
    let result = match (config.command, field) {
        (Command::Eig, _) => eig(&mut out),
        (Command::Eval, Some(g)) => eval(&mut out, &g),
        (Command::Derive, Some(g)) => derive(&mut out, &g),
        (Command::Certify, Some(g)) => certify(&mut out, &g),
        (Command::Lemma, Some(g)) => lemma(&mut out, &g),
        (Command::Mollify, Some(g)) => mollify(&mut out, &g),
        (_, None) => unreachable!("resolved above"),
    };
    result.map_err(|e| (e, out.warnings))
}

impl Output<'_> {
    fn matrix(&mut self, path: Option<&Path>, flag: &str) -> Result<ParsedMatrix, CliError> {
        let path = path.ok_or_else(|| CliError::Usage(format!("{flag} is required")))?;
        let parsed = parse_matrix_file(path)?;
        self.tolerances.symmetrization_warn = Some(ASYMMETRY_WARN);
        if let Some(w) = &parsed.warning {
            self.warnings.push(w.clone());
        }
        Ok(parsed)
    }

    fn finish<T: Serialize + Text>(&mut self, result: T, code: i32) -> Result<(String, i32), CliError> {
        let envelope = Envelope {
            tool: TOOL,
            version: VERSION,
            command: self.config.command.as_str(),
            config: self.config,
            seed: self.config.seed,
            tolerances: self.tolerances.clone(),
            warnings: std::mem::take(&mut self.warnings),
            result,
        };
        let text = match self.config.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&envelope).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut s = format!("{TOOL} {VERSION} {}  seed={}\n", envelope.command, envelope.seed);
                for w in &envelope.warnings {
                    let _ = writeln!(s, "warning: {w}");
                }
                envelope.result.text(&mut s);
                s
            }
        };
        Ok((text, code))
    }
}

fn core(context: &str) -> impl FnOnce(specalc_core::Error) -> CliError + '_ {
    move |source| CliError::Compute { context: context.into(), source }
}

fn eig(out: &mut Output) -> Result<(String, i32), CliError> {
    let m = out.matrix(out.config.matrix.as_deref(), "--matrix")?.matrix;
    let s = eigendecompose(&m).map_err(core("eigendecomposition"))?;
    let result = EigReport {
        n: m.n(),
        eigenvalues: s.eigenvalues().to_vec(),
        eigenvectors: MatrixFile::from(s.eigenvectors()),
        gap: s.gap(),
        reconstruction_error: s.reconstruct().max_abs_diff(&m),
    };
    out.finish(result, EXIT_OK)
}

fn eval(out: &mut Output, g: &SymmetricScalarField) -> Result<(String, i32), CliError> {
    let m = out.matrix(out.config.matrix.as_deref(), "--matrix")?.matrix;
    let value = evaluate_spectral(g, &m).map_err(core(g.name()))?;
    let s = eigendecompose(&m).map_err(core("eigendecomposition"))?;
    let spectral_gradient =
        if g.is_smooth() { Some(g.gradient(s.eigenvalues()).map_err(core(g.name()))?) } else { None };
    let result = EvalReport { field: g.name().into(), value, eigenvalues: s.eigenvalues().to_vec(), spectral_gradient };
    out.finish(result, EXIT_OK)
}

fn derive(out: &mut Output, g: &SymmetricScalarField) -> Result<(String, i32), CliError> {
    let p = out.matrix(out.config.p.as_deref(), "--P")?.matrix;
    let q = out.matrix(out.config.q.as_deref(), "--Q")?.matrix;
    let defaults = LineTolerances::default();
    let tolerances = LineTolerances {
        gap: out.config.tolerances.gap_tol.unwrap_or(defaults.gap),
        coalesce: out.config.tolerances.coalesce_tol.unwrap_or(defaults.coalesce),
    };
    out.tolerances.gap = Some(tolerances.gap);
    out.tolerances.coalesce = Some(tolerances.coalesce);
    out.tolerances.fd_step_d1 = Some(DEFAULT_STEP_D1);
    out.tolerances.fd_step_d2 = Some(DEFAULT_STEP_D2);
    let line = make_line(&p, &q).map_err(core("line"))?.with_tolerances(tolerances);
    let r = second_derivative(g, &line).map_err(core(g.name()))?;
    // absent when P ± hQ leaves the domain
    let fd = finite_difference_oracle(g, &line, DEFAULT_STEP_D1)
        .ok()
        .zip(finite_difference_oracle(g, &line, DEFAULT_STEP_D2).ok());
    let result = DeriveReport::new(
        g.name(),
        &r,
        line.spectrum().eigenvalues().to_vec(),
        line.q_tilde().diagonal(),
        eigen_acceleration(&line).ok(),
        fd,
    );
    out.finish(result, EXIT_OK)
}

fn certify(out: &mut Output, g: &SymmetricScalarField) -> Result<(String, i32), CliError> {
    let c = out.config;
    let tol = c.certify_tol();
    out.tolerances.certify = Some(tol);
    out.tolerances.gap = Some(LineTolerances::default().gap);
    out.tolerances.coalesce = Some(LineTolerances::default().coalesce);
    let report = parallel::certify_line_convexity(g, &c.dims, c.trials, c.seed, tol).map_err(core(g.name()))?;
    let code = verdict_code(report.verdict);
    out.finish(CertificationJson::from(&report), code)
}

fn lemma(out: &mut Output, g: &SymmetricScalarField) -> Result<(String, i32), CliError> {
    let c = out.config;
    let tol = c.lemma_tol();
    out.tolerances.lemma = Some(tol);
    let points: Vec<[f64; 2]> = sample_domain_points(g, 2, c.points, c.seed)
        .map_err(core(g.name()))?
        .into_iter()
        .filter(|p| p[0] != p[1])
        .map(|p| [p[0], p[1]])
        .collect();
    let slice = PairSlice::plain();
    let violations = lemma_check(g, &points, tol, &slice).map_err(core(g.name()))?;
    let probes = points
        .iter()
        .map(|&[x, y]| lemma_proof_probe(g, x, y, &slice))
        .collect::<Result<Vec<_>, _>>()
        .map_err(core(g.name()))?;
    let (max_probe_asymmetry, max_probe_slope) = LemmaReport::probe_stats(&probes);
    let verdict = if violations.is_empty() { Verdict::ConsistentWithConvex } else { Verdict::ViolationFound };
    let result = LemmaReport {
        field: g.name().into(),
        points: points.len(),
        violations: violations.iter().map(Into::into).collect(),
        max_probe_asymmetry,
        max_probe_slope,
        verdict: verdict.as_str(),
    };
    out.finish(result, verdict_code(verdict))
}

fn mollify(out: &mut Output, base: &SymmetricScalarField) -> Result<(String, i32), CliError> {
    let c = out.config;
    let tol = c.certify_tol();
    out.tolerances.certify = Some(tol);
    out.tolerances.quadrature_order = Some(c.order);
    let stages = mollification_schedule(base, &c.sigmas, c.order).map_err(core(base.name()))?;

    // one box for every stage, inside the domain of the widest smoothing
    let distance_box = match (c.grid, c.dims.first(), c.sigmas.first()) {
        (0, _, _) | (_, None, _) | (_, _, None) => None,
        (_, Some(&n), Some(&widest)) => {
            let (lo, hi) = match base.domain().lower_bound() {
                Some(b) => (b + TRUNCATION * widest + 0.5, b + TRUNCATION * widest + 2.5),
                None => (-1.0, 1.0),
            };
            Some(vec![[lo, hi]; n])
        }
    };

    let mut code = EXIT_OK;
    let mut reports = Vec::new();
    for m in &stages {
        let report = parallel::certify_line_convexity(&m.result, &c.dims, c.trials, c.seed, tol)
            .map_err(core(m.result.name()))?;
        if report.verdict == Verdict::ViolationFound {
            code = EXIT_VIOLATION;
        }
        let sup_distance = match &distance_box {
            Some(b) => {
                let bounds: Vec<(f64, f64)> = b.iter().map(|&[lo, hi]| (lo, hi)).collect();
                Some(sup_norm_distance(&m.result, base, &bounds, c.grid).map_err(core(m.result.name()))?)
            }
            None => None,
        };
        reports.push(MollifyStage {
            sigma: m.sigma,
            field: m.result.name().into(),
            sup_distance,
            certification: (&report).into(),
        });
    }
    let result = MollifyReport { base: base.name().into(), quadrature_order: c.order, distance_box, stages: reports };
    out.finish(result, code)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::ConsistentWithConvex => EXIT_OK,
        Verdict::ViolationFound => EXIT_VIOLATION,
    }
}

/// Human-oriented rendering; no stability promise.
trait Text {
    fn text(&self, s: &mut String);
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.10e}")).collect::<Vec<_>>().join(" ")
}

impl Text for EigReport {
    fn text(&self, s: &mut String) {
        let _ = writeln!(s, "eigenvalues: {}", list(&self.eigenvalues));
        let _ = writeln!(s, "gap: {:e}", self.gap);
        let _ = writeln!(s, "reconstruction error: {:e}", self.reconstruction_error);
    }
}

impl Text for EvalReport {
    fn text(&self, s: &mut String) {
        let _ = writeln!(s, "{}: {:.15e}", self.field, self.value);
        let _ = writeln!(s, "eigenvalues: {}", list(&self.eigenvalues));
        if let Some(g) = &self.spectral_gradient {
            let _ = writeln!(s, "gradient: {}", list(g));
        }
    }
}

impl Text for DeriveReport {
    fn text(&self, s: &mut String) {
        let _ = writeln!(s, "{} value {:.15e}", self.field, self.value);
        match &self.finite_differences {
            Some(fd) => {
                let _ = writeln!(s, "d1 {:.15e}  (fd {:.6e})", self.d1, fd.d1);
                let _ = writeln!(s, "d2 {:.15e}  (fd {:.6e})", self.d2, fd.d2);
            }
            None => {
                let _ = writeln!(s, "d1 {:.15e}\nd2 {:.15e}", self.d1, self.d2);
            }
        }
        let _ = writeln!(s, "   hessian term   {:.15e}", self.hessian_term);
        let _ = writeln!(s, "   curvature term {:.15e}", self.curvature_term);
        let _ = writeln!(s, "gap {:e}, coalesced pairs {}", self.gap, self.coalesced_pairs);
    }
}

impl Text for CertificationJson {
    fn text(&self, s: &mut String) {
        let _ = writeln!(
            s,
            "{}: {} ({} samples over n = {:?}, {} skipped)",
            self.field_name, self.verdict, self.samples, self.dimension_range, self.skipped
        );
        let _ = writeln!(s, "d2 min {:e}  mean {:e}  max {:e}", self.min_d2, self.mean_d2, self.max_d2);
        if let Some(w) = &self.witness {
            let _ = writeln!(s, "witness: n = {}, trial {}, d2 = {:e}", w.n, w.trial, w.d2);
            let _ = writeln!(s, "  P = {:?}", w.p.rows);
            let _ = writeln!(s, "  Q = {:?}", w.q.rows);
        }
    }
}

impl Text for LemmaReport {
    fn text(&self, s: &mut String) {
        let _ = writeln!(
            s,
            "{}: {} ({} points, {} violations)",
            self.field,
            self.verdict,
            self.points,
            self.violations.len()
        );
        let _ = writeln!(
            s,
            "probe: max |h(0) - h(1)| {:e}, max h'(0) {:e}",
            self.max_probe_asymmetry, self.max_probe_slope
        );
        for v in self.violations.iter().take(5) {
            let _ = writeln!(s, "  ({}, {}): {:e}", v.point[0], v.point[1], v.lhs);
        }
    }
}

impl Text for MollifyReport {
    fn text(&self, s: &mut String) {
        let _ = writeln!(s, "base {} at quadrature order {}", self.base, self.quadrature_order);
        for stage in &self.stages {
            match stage.sup_distance {
                Some(d) => {
                    let _ = writeln!(s, "sigma {}: distance {:e}", stage.sigma, d);
                }
                None => {
                    let _ = writeln!(s, "sigma {}", stage.sigma);
                }
            }
            stage.certification.text(s);
        }
    }
}
