//! Multi-threaded certification. Trials run on the rayon pool; outcomes are collected in
//! job order and reduced by the core, so reports match the serial ones exactly.

use rayon::prelude::*;
use specalc_core::convexity::{assemble_report, certification_jobs, run_trial, CertificationReport};
use specalc_core::specfun::SymmetricScalarField;
use specalc_core::Result;

pub fn certify_line_convexity(
    g: &SymmetricScalarField,
    dims: &[usize],
    trials_per_dim: usize,
    seed: u64,
    tol: f64,
) -> Result<CertificationReport> {
    let jobs = certification_jobs(g, dims, trials_per_dim)?;
    let outcomes = jobs.par_iter().map(|&(n, t)| run_trial(g, n, seed, t)).collect::<Result<Vec<_>>>()?;
    assemble_report(g, dims, trials_per_dim, seed, tol, &outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use specalc_core::specfun::field_by_name;

    #[test]
    fn matches_serial() {
        for name in ["neg_log_det", "product", "zeta_1"] {
            let g = field_by_name(name).unwrap();
            let serial = specalc_core::convexity::certify_line_convexity(&g, &[2, 3], 60, 17, 1e-8).unwrap();
            let parallel = certify_line_convexity(&g, &[2, 3], 60, 17, 1e-8).unwrap();
            assert_eq!(format!("{serial:?}"), format!("{parallel:?}"), "{name}");
        }
    }
}
