//! Recovery of Sturm-Liouville problems from samples of the Weyl function.
//!
//! Given values M(z_k) of the Weyl function of
//! `-y'' + q(x) y = rho^2 y` on `(0, pi)` with Robin conditions
//! `y'(0) - h y(0) = 0`, `y'(pi) + H y(pi) = 0` at finitely many points
//! z_k, the library reconstructs the potential `q` and the constants `h`
//! and `H`. The route:
//!
//! 1. [`weyl_system`] writes one linear equation per sample in the unknowns
//!    (omega, omega2, xi_0, xi_1, ...) coming from the Fourier-Legendre
//!    expansion of the transmutation kernel, and solves the truncated
//!    system by least squares.
//! 2. [`spectral`] evaluates the reconstructed characteristic functions,
//!    finds eigenvalues as their zeros, computes norming constants, and
//!    shifts the spectrum so the first eigenvalue sits at zero.
//! 3. [`gelfand_levitan`] turns the spectral data into the kernel
//!    coefficient beta_0(x) through a small linear system per grid point
//!    and extracts q = 2 beta_0''/(2 beta_0 + 1), h and H.
//!
//! [`direct`] holds an independent forward solver used to synthesize data
//! for the classical reductions (two spectra, several spectra, partially
//! known potential, analytic boundary conditions) in [`pipeline`], and to
//! verify reconstructions.
//!
//! The book under `book/` walks through the method chapter by chapter; its
//! code snippets are compiled and run as part of `cargo test`.

pub mod direct;
pub mod error;
pub mod gelfand_levitan;
pub mod numeric;
pub mod pipeline;
pub mod potential;
pub mod special;
pub mod spectral;
pub mod value;
pub mod weyl_system;

pub use error::{Error, Result};
pub use potential::PotentialSpec;
pub use value::ExtendedComplex;

/// Book chapters double as documentation tests.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }
    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(DirectProblem, "../../../book/src/direct-problem.md");
    chapter!(WeylSamples, "../../../book/src/weyl-samples.md");
    chapter!(LinearSystem, "../../../book/src/linear-system.md");
    chapter!(SpectralData, "../../../book/src/spectral-data.md");
    chapter!(GelfandLevitan, "../../../book/src/gelfand-levitan.md");
    chapter!(Cli, "../../../book/src/cli.md");
    chapter!(FileFormats, "../../../book/src/file-formats.md");
    chapter!(Accuracy, "../../../book/src/accuracy.md");
}
