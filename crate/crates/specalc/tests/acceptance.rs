//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and exits
//! non-zero if any fails. Tolerances below are the contract; do not loosen them to pass.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use specalc::{parse_args, run};
use specalc_core::convexity::{
    certify_line_convexity as certify_serial, lemma_check, lemma_proof_probe, PairSlice, Verdict, DEFAULT_LEMMA_TOL,
};
use specalc_core::mollify::{gaussian_mollify, mollification_schedule, sup_norm_distance};
use specalc_core::perturb::{eigen_acceleration, finite_difference_oracle, make_line, second_derivative, MatrixLine};
use specalc_core::specfun::{
    catalog, check_orthogonal_invariance, sample_domain_points, shift_into_domain, Arity, Kinks, SymmetricScalarField,
};
use specalc_core::symmat::{eigendecompose, make_symmetric, random_symmetric, SymmetricMatrix};

const KATO_STEP: f64 = 1e-4;
const KATO_REL: f64 = 1e-5;
const KATO_GAP: f64 = 1e-3;
const KATO_EXACT: f64 = 1e-9;
const D1_STEP: f64 = 1e-5;
const D2_STEP: f64 = 1e-4;
const D1_REL: f64 = 1e-6;
const D2_REL: f64 = 1e-5;
const CERTIFY_TOL: f64 = 1e-8;
const WITNESS_D2: f64 = -1e-8;
const PROBE_TOL: f64 = 1e-10;
const CURVATURE_REL: f64 = 1e-9;
const ABS_SMOOTHING_REL: f64 = 1e-6;
const INVARIANCE_ABS: f64 = 1e-8;
const RECONSTRUCTION_ABS: f64 = 1e-10;

type Outcome = Result<String, String>;

/// Name, runtime budget, check.
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("Kato-formula fidelity", Some(Duration::from_secs(10)), kato),
        ("derivative-formula fidelity", Some(Duration::from_secs(30)), derivatives),
        ("positivity for convex fields", Some(Duration::from_secs(120)), positivity),
        ("non-convex control", None, control),
        ("lemma suite", None, lemma),
        ("curvature-term identity", None, curvature),
        ("mollification suite", None, mollification),
        ("invariance suite", None, invariance),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(d), Some(b)) if elapsed > b => Err(format!("{d}; over the {} s budget", b.as_secs())),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += outcome.is_err() as usize;
        println!("{tag} {}  {name}: {detail} [{:.2} s]", i + 1, elapsed.as_secs_f64());
    }
    if failed == 0 {
        println!("acceptance: all 8 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria fail");
        ExitCode::FAILURE
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

fn unit(q: &SymmetricMatrix) -> SymmetricMatrix {
    q.scaled(1.0 / q.frobenius_norm())
}

fn smooth_fields() -> Vec<SymmetricScalarField> {
    catalog().into_iter().map(|e| e.field).filter(|f| f.is_smooth()).collect()
}

/// Seeded line for field `g` in dimension `n`, or `None` if the field rejects `n`.
fn line_for(g: &SymmetricScalarField, n: usize, seed: u64) -> Option<MatrixLine> {
    if !g.arity().accepts(n) {
        return None;
    }
    let p = shift_into_domain(g, &random_symmetric(n, seed, 1.0).ok()?).ok()?;
    let q = unit(&random_symmetric(n, seed ^ 0x9e37_79b9_7f4a_7c15, 1.0).ok()?);
    make_line(&p, &q).ok()
}

fn sorted_eigenvalues(m: &SymmetricMatrix) -> Vec<f64> {
    eigendecompose(m).unwrap().eigenvalues().to_vec()
}

fn kato() -> Outcome {
    let p = SymmetricMatrix::from_diagonal(&[0.0, 1.0]);
    let q = make_symmetric(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let exact = eigen_acceleration(&make_line(&p, &q).unwrap()).map_err(|e| e.to_string())?;
    if (exact[0] + 2.0).abs() > KATO_EXACT || (exact[1] - 2.0).abs() > KATO_EXACT {
        return Err(format!("2x2 case gives {exact:?}, expected [-2, 2]"));
    }

    let (mut instances, mut worst, mut seed) = (0, 0.0_f64, 0u64);
    while instances < 500 {
        seed += 1;
        let n = 2 + instances % 5;
        let p = random_symmetric(n, seed, 1.0).unwrap();
        let q = unit(&random_symmetric(n, seed + 1_000_000, 1.0).unwrap());
        let line = make_line(&p, &q).unwrap();
        if line.spectrum().gap() <= KATO_GAP {
            continue;
        }
        let acc = eigen_acceleration(&line).map_err(|e| e.to_string())?;
        let plus = sorted_eigenvalues(&line.point(KATO_STEP).unwrap());
        let minus = sorted_eigenvalues(&line.point(-KATO_STEP).unwrap());
        for (i, a) in acc.iter().enumerate() {
            let fd = (plus[i] - 2.0 * line.spectrum().eigenvalues()[i] + minus[i]) / (KATO_STEP * KATO_STEP);
            let r = rel(*a, fd);
            if r > KATO_REL {
                return Err(format!("n={n} seed {seed} λ̈[{i}] = {a:e} vs fd {fd:e} (rel {r:.2e})"));
            }
            worst = worst.max(r);
        }
        instances += 1;
    }
    Ok(format!("λ̈ = (-2, 2) on the 2x2 case; 500 instances, worst rel {worst:.2e} ≤ {KATO_REL:e}"))
}

fn derivatives() -> Outcome {
    let fields = smooth_fields();
    let (mut worst1, mut worst2) = (0.0_f64, 0.0_f64);
    for g in &fields {
        let mut lines = 0;
        let mut seed = 0;
        while lines < 100 {
            seed += 1;
            let n = 2 + (seed as usize) % 5;
            let Some(line) = line_for(g, n, seed) else { continue };
            let r = second_derivative(g, &line).map_err(|e| format!("{}: {e}", g.name()))?;
            let fd1 = finite_difference_oracle(g, &line, D1_STEP).map_err(|e| e.to_string())?;
            let fd2 = finite_difference_oracle(g, &line, D2_STEP).map_err(|e| e.to_string())?;
            let (r1, r2) = (rel(r.d1, fd1.d1), rel(r.d2, fd2.d2));
            if r1 > D1_REL || r2 > D2_REL {
                return Err(format!(
                    "{} n={n} seed {seed}: d1 {:e} vs {:e} (rel {r1:.2e}), d2 {:e} vs {:e} (rel {r2:.2e})",
                    g.name(),
                    r.d1,
                    fd1.d1,
                    r.d2,
                    fd2.d2
                ));
            }
            worst1 = worst1.max(r1);
            worst2 = worst2.max(r2);
            lines += 1;
        }
    }
    Ok(format!("{} smooth fields x 100 lines; worst rel d1 {worst1:.2e}, d2 {worst2:.2e}", fields.len()))
}

fn positivity() -> Outcome {
    let fields: Vec<_> = smooth_fields().into_iter().filter(|g| g.claimed_convex()).collect();
    let mut worst = f64::INFINITY;
    for g in &fields {
        let r = specalc::parallel::certify_line_convexity(g, &[2, 3, 4, 5], 1000, 2024, CERTIFY_TOL)
            .map_err(|e| format!("{}: {e}", g.name()))?;
        // sampled directions have unit Frobenius norm, so max(1, ‖Q‖²) = 1
        if r.verdict != Verdict::ConsistentWithConvex || r.min_d2 < -CERTIFY_TOL || r.samples != 4000 {
            return Err(format!(
                "{}: {} with min d2 {:e} over {} samples",
                g.name(),
                r.verdict.as_str(),
                r.min_d2,
                r.samples
            ));
        }
        worst = worst.min(r.min_d2);
    }
    let names: Vec<_> = fields.iter().map(|g| g.name()).collect();
    Ok(format!("{} over n = 2..5 x 1000 trials; smallest d2 {worst:.3e}", names.join(", ")))
}

fn control() -> Outcome {
    let g = field("product");
    let r = specalc::parallel::certify_line_convexity(&g, &[2], 500, 1, CERTIFY_TOL).map_err(|e| e.to_string())?;
    let Some(w) = &r.witness else {
        return Err(format!("no witness in 500 trials (min d2 {:e})", r.min_d2));
    };
    let replay = w.replay(&g).map_err(|e| e.to_string())?;
    if r.verdict != Verdict::ViolationFound || replay >= WITNESS_D2 {
        return Err(format!("verdict {}, replayed d2 {replay:e}", r.verdict.as_str()));
    }
    Ok(format!("witness at trial {} with d2 {:.4}, replayed {:.4}", w.trial, w.d2, replay))
}

fn field(name: &str) -> SymmetricScalarField {
    specalc_core::specfun::field_by_name(name).unwrap()
}

fn lemma() -> Outcome {
    let slice = PairSlice::plain();
    let fields: Vec<_> = smooth_fields().into_iter().filter(|g| g.claimed_convex() && g.arity().accepts(2)).collect();
    let (mut asym, mut slope) = (0.0_f64, f64::NEG_INFINITY);
    for g in &fields {
        let points: Vec<[f64; 2]> =
            sample_domain_points(g, 2, 1000, 77).unwrap().into_iter().map(|p| [p[0], p[1]]).collect();
        let v = lemma_check(g, &points, DEFAULT_LEMMA_TOL, &slice).map_err(|e| e.to_string())?;
        if let Some(first) = v.first() {
            return Err(format!("{}: {} violations, first at {:?}", g.name(), v.len(), first.point));
        }
        for &[x, y] in &points {
            let probe = lemma_proof_probe(g, x, y, &slice).map_err(|e| e.to_string())?;
            asym = asym.max((probe.h0 - probe.h1).abs());
            slope = slope.max(probe.hdot0);
        }
    }
    if asym > PROBE_TOL || slope > PROBE_TOL {
        return Err(format!("probe |h(0) - h(1)| {asym:e}, max h'(0) {slope:e}"));
    }
    let g = field("product");
    let points: Vec<[f64; 2]> =
        sample_domain_points(&g, 2, 1000, 77).unwrap().into_iter().map(|p| [p[0], p[1]]).collect();
    let control = lemma_check(&g, &points, DEFAULT_LEMMA_TOL, &slice).map_err(|e| e.to_string())?.len();
    if control == 0 {
        return Err("product produced no violation".into());
    }
    Ok(format!(
        "{} convex fields x 1000 points clean; probe |h(0)-h(1)| ≤ {asym:.1e}, h'(0) ≤ {slope:.1e}; product: {control} violations",
        fields.len()
    ))
}

fn curvature() -> Outcome {
    let fields = smooth_fields();
    let mut worst = 0.0_f64;
    for g in &fields {
        let (mut count, mut seed) = (0, 500_000u64);
        while count < 200 {
            seed += 1;
            let n = 2 + (seed as usize) % 5;
            let Some(line) = line_for(g, n, seed) else { continue };
            let r = second_derivative(g, &line).map_err(|e| e.to_string())?;
            if r.coalesced_pairs > 0 || line.spectrum().gap() <= line.gap_tolerance() {
                continue;
            }
            let grad = g.gradient(line.spectrum().eigenvalues()).unwrap();
            let direct: f64 = grad.iter().zip(eigen_acceleration(&line).unwrap()).map(|(a, b)| a * b).sum();
            let e1 = rel(r.d2, r.hessian_term + r.curvature_term);
            let e2 = rel(r.curvature_term, direct);
            if e1 > CURVATURE_REL || e2 > CURVATURE_REL {
                return Err(format!("{} seed {seed}: sum rel {e1:.2e}, ∇g·λ̈ rel {e2:.2e}", g.name()));
            }
            worst = worst.max(e1).max(e2);
            count += 1;
        }
    }
    Ok(format!("{} smooth fields x 200 instances; worst rel {worst:.2e}", fields.len()))
}

fn abs_field() -> SymmetricScalarField {
    SymmetricScalarField::from_value_fn("abs", |x| x[0].abs())
        .with_arity(Arity::exactly(1))
        .with_claims(true, true)
        .with_kinks(Kinks { coincident: false, levels: vec![0.0] })
}

fn mollification() -> Outcome {
    let sigmas = [0.5, 0.25, 0.125];
    let base = field("sum_2_largest");
    let mut notes = Vec::new();
    for m in mollification_schedule(&base, &sigmas, 20).map_err(|e| e.to_string())? {
        let r = specalc::parallel::certify_line_convexity(&m.result, &[3], 100, 5, CERTIFY_TOL)
            .map_err(|e| e.to_string())?;
        if r.verdict != Verdict::ConsistentWithConvex || r.samples != 100 {
            return Err(format!("{}: {} with min d2 {:e}", m.result.name(), r.verdict.as_str(), r.min_d2));
        }
        notes.push(format!("{:.1e}", r.min_d2));
    }

    let abs = abs_field();
    let mut worst = 0.0_f64;
    for sigma in [1.0, 0.5, 0.2, 0.1, 0.05, 0.01] {
        let v = gaussian_mollify(&abs, sigma, 40).unwrap().result.value(&[0.0]).unwrap();
        let exact = sigma * (2.0 / std::f64::consts::PI).sqrt();
        worst = worst.max((v - exact).abs() / exact);
    }
    if worst > ABS_SMOOTHING_REL {
        return Err(format!("|x| smoothing at 0 off by rel {worst:e}"));
    }

    let mut distances = Vec::new();
    for (b, sig, bounds, grid) in
        [(&abs, [0.2, 0.1, 0.05], vec![(-1.0, 1.0)], 21), (&base, sigmas, vec![(-1.0, 1.0); 3], 3)]
    {
        let d: Vec<f64> = sig
            .iter()
            .map(|&s| sup_norm_distance(&gaussian_mollify(b, s, 20).unwrap().result, b, &bounds, grid).unwrap())
            .collect();
        if d.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("{} distances increase: {d:?}", b.name()));
        }
        distances.push(format!(
            "{}: {}",
            b.name(),
            d.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" > ")
        ));
    }
    Ok(format!(
        "sum_2_largest n=3 certified at σ = 0.5, 0.25, 0.125 (min d2 {}); |x| at 0 rel err {worst:.1e}; {}",
        notes.join(", "),
        distances.join("; ")
    ))
}

fn invariance() -> Outcome {
    let mut worst = 0.0_f64;
    for e in catalog() {
        let d = check_orthogonal_invariance(&e.field, 100, 31).map_err(|err| format!("{}: {err}", e.field.name()))?;
        if d > INVARIANCE_ABS {
            return Err(format!("{}: |f(OᵀMO) - f(M)| = {d:e}", e.field.name()));
        }
        worst = worst.max(d);
    }

    let mut recon = 0.0_f64;
    for n in 1..=8 {
        for seed in 0..100 {
            let m = random_symmetric(n, seed, 1.0).unwrap();
            recon = recon.max(eigendecompose(&m).unwrap().reconstruct().max_abs_diff(&m));
        }
    }
    if recon > RECONSTRUCTION_ABS {
        return Err(format!("reconstruction error {recon:e}"));
    }

    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let p = dir.path().join("p.json");
    let q = dir.path().join("q.json");
    std::fs::write(&p, r#"{"n":3,"rows":[[2,1,0],[1,3,0.5],[0,0.5,4]]}"#).unwrap();
    std::fs::write(&q, r#"{"n":3,"rows":[[0,1,2],[1,0,-1],[2,-1,1]]}"#).unwrap();
    let (p, q) = (path(&p), path(&q));
    let commands: Vec<Vec<&str>> = vec![
        vec!["eig", "--matrix", p],
        vec!["eval", "--field", "neg_log_det", "--matrix", p],
        vec!["derive", "--field", "log_sum_exp", "--P", p, "--Q", q],
        vec!["certify", "--field", "neg_log_det", "--dims", "2,3", "--trials", "200", "--seed", "42"],
        vec!["certify", "--field", "product", "--dims", "2", "--trials", "500", "--seed", "1"],
        vec!["lemma", "--field", "product", "--points", "300", "--seed", "8"],
        vec![
            "mollify",
            "--field",
            "sum_1_largest",
            "--sigmas",
            "0.5,0.25",
            "--dims",
            "2",
            "--trials",
            "20",
            "--seed",
            "3",
        ],
    ];
    for args in &commands {
        let config = parse_args(std::iter::once("specalc").chain(args.iter().copied())).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let code = run(&config, &mut out, &mut err);
            if code == specalc::EXIT_ERROR {
                return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&err)));
            }
            outputs.push(out);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{args:?}: reports differ between runs"));
        }
    }
    let g = field("neg_log_det");
    let serial = certify_serial(&g, &[2, 3], 200, 42, CERTIFY_TOL).unwrap();
    let parallel = specalc::parallel::certify_line_convexity(&g, &[2, 3], 200, 42, CERTIFY_TOL).unwrap();
    if format!("{serial:?}") != format!("{parallel:?}") {
        return Err("serial and parallel certification differ".into());
    }
    Ok(format!(
        "catalog x 100 (M, O): worst {worst:.1e}; reconstruction {recon:.1e}; {} commands byte-identical across runs",
        commands.len()
    ))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}
