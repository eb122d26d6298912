//! Symmetric Kubo-Ando operator means satisfying Molnár's weak associativity.
//!
//! Every mean in the Molnár class of type `c > 1` is generated by a real, odd,
//! `p`-periodic function `Ψ` with `|Ψ| ≤ 1/2` (`p = 2 log c`). This crate builds the
//! strip function `S` and the representing function `f(z) = √z·exp(S(log z))` from such a
//! generator, evaluates the induced means on Hermitian positive-definite matrices, and
//! checks the axioms and order structure of the class numerically.
//!
//! Module map:
//! - [`elliptic`]: `K(m)`, Jacobi `sn/cn/dn`, and the period-to-parameter solver.
//! - [`generator`]: the generator `Ψ` (Fourier, square wave, zero).
//! - [`repfun`]: strip functions, representing functions, the elliptic kernel `E_p`.
//! - [`matmean`]: matrix functional calculus and Kubo-Ando means.
//! - [`verify`]: property suites producing [`verify::VerificationReport`]s.
//! - [`cli`]: the `molnar` command-line tool.
//!
//! Elliptic functions use the *parameter* convention throughout: `m = k²`, and
//! `K'(m) = K(1 - m)`.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod generator;
pub mod matmean;
pub mod quadrature;
pub mod repfun;
pub mod validation;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
