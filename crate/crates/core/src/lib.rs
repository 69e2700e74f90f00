//! White-noise calculus on a discretized Wiener space.
//!
//! Random variables are finite chaos expansions whose kernels are step
//! functions on a uniform grid of `[0, T)`. On such kernels the stochastic
//! derivative, Skorohod integral, Wick and pointwise products, S-transform
//! and the Volterra operator `K_g` act exactly, so the identities of the
//! continuum theory hold to rounding error and can be tested as such.

pub mod calculus;
pub mod chaos;
pub mod combinatorics;
pub mod donsker;
pub mod draws;
pub mod error;
pub mod grid;
pub mod montecarlo;
pub mod oracle;
pub mod quad;
pub mod suite;
pub mod tensor;
pub mod vmbv;
pub mod volterra;

pub use chaos::{ChaosProcess, ChaosVector};
pub use error::{ChaosError, Result};
pub use grid::Grid;
pub use tensor::{EntryMode, SymKernel};

/// Order-preserving map over `0..n`, parallel when the feature is enabled.
pub(crate) fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
