//! Lattice Dirac operators on U(1) tori and the spectral quantities built
//! from them: eta invariants, spectral flow of domain-wall mass families,
//! mod-two flow for real odd-dimensional operators, and the finite-element
//! interpolator that couples a coarse lattice to a fine one.
//!
//! Fields live on `(aZ/Z)^d` with `a = 1/N`. Sites are ordered row-major
//! with the first coordinate slowest, and the spinor index runs fastest, so
//! the component `alpha` at site `s` sits at `s * spinor_dim + alpha`.

pub mod clifford;
pub mod combined;
pub mod continuum;
pub mod dirac;
mod error;
pub mod gauge;
pub mod interp;
pub mod lattice;
pub mod problem;
pub mod sparse;
pub mod spectral;
pub mod wall;

pub use error::{Error, Result};

/// Library version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;

pub(crate) const TAU: f64 = std::f64::consts::TAU;

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
