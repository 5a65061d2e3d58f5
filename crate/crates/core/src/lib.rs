//! Möbius energy of closed curves in ℝⁿ and its invariant decomposition.
//!
//! Curves are truncated Fourier series ([`ClosedCurve`]); energies are
//! double integrals over a staggered grid that never touches the diagonal or
//! antipodal pairs ([`quad`]). The crate is `no_std` with `alloc`; the `std`
//! and `parallel` features enable row-parallel quadrature.

#![cfg_attr(not(feature = "std"), no_std)]
// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bounds;
pub mod curve;
pub mod densities;
pub mod energy;
mod fourier;
pub mod moebius;
pub mod quad;
pub mod suite;
pub mod vector;

pub use bounds::{BoundReport, BoundVariant, PairComparison};
pub use curve::{
    ArcLengthCurve, ClosedCurve, Curve, CurveError, CurveMeta, Family, Jet, ReparamOptions,
};
pub use densities::{CBundle, DensityBundle, DensityError, PairGeometry, XBundle};
pub use energy::{AntipodalSignVariant, EnergyReport};
pub use moebius::{MappedCurve, MoebiusError, MoebiusMap, Primitive};
pub use quad::{ConvergenceReport, PairGrid, QuadError};
pub use vector::{Vector, MAX_DIM};

/// Any failure raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
