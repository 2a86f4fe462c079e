//! spectrakit: degenerate spectral transforms associated with Sturm-Liouville
//! operators on the half-line.
//!
//! The library builds integral transforms whose continuous-spectrum part has a
//! nontrivial kernel spanned by genuine eigenfunctions (sine/cosine, Robin,
//! and Weber-type Bessel transforms), certifies the Parseval identity, the
//! inversion formula and kernel annihilation by quadrature, and solves the
//! associated heat evolution spectrally with a finite-difference cross-check.

pub mod bessel;
pub mod error;
pub mod interp;
pub mod quadgrid;
pub mod sici;
pub mod spectral_pde;
pub mod sturm_liouville;
pub mod testfn;
pub mod transforms;
pub mod validation;

pub use error::{Result, SpectraError};
pub use quadgrid::{make_spatial_grid, make_spectral_grid, SpatialGrid, SpectralGrid};
pub use testfn::TestFunctionSpec;
pub use transforms::{
    discrete_coefficients, forward, inverse, make_cosine, make_robin, make_sine, make_weber,
    reconstruct, relative_l2, DegenerateTransform, DiscreteMode, SampledFunction,
    SpectralFunction, TransformKind,
};
