//! Calculus of orthogonally invariant spectral functions of real symmetric matrices.
//!
//! A spectral function `f(M) = g(λ(M))` is built from a permutation-symmetric scalar
//! field `g` on eigenvalue vectors. This crate evaluates such functions, differentiates
//! them along matrix lines `P + tQ` with eigenvalue perturbation theory, and checks
//! (or refutes) their convexity:
//!
//! * [`symmat`]: dense symmetric matrices, a cyclic Jacobi eigensolver and seeded
//!   random generators for matrices and orthogonal conjugations.
//! * [`specfun`]: symmetric scalar fields, spectral evaluation and the built-in catalog.
//! * [`perturb`]: eigenvalue velocity/acceleration and the first and second line
//!   derivatives, including the divided-difference form of the curvature term.
//! * [`convexity`]: the two-variable divided-difference lemma, Hessian PSD checks and
//!   randomized line-convexity certification with replayable witnesses.
//! * [`mollify`]: Gaussian smoothing of nonsmooth symmetric fields, permutation
//!   averaging and sup-norm distance estimates.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod convexity;
mod error;
pub mod mollify;
pub mod perturb;
mod rng;
pub mod specfun;
pub mod symmat;

pub use error::{Error, Result};
