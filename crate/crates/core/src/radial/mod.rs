//! Radial discretization of the whole-space problem: grid, fields,
//! quadrature, differential operators and the dilation `u_tau`.

mod field;
mod grid;
mod interp;
mod ops;

pub use field::RadialField;
pub use grid::{RadialGrid, MIN_INTERVALS};
pub use ops::{
    dilate, dirichlet_energy, energy_inner, laplacian, norm, radial_derivative, resample,
    volume_inner, volume_integrate, NormKind,
};

pub(crate) use grid::simpson;
pub(crate) use ops::{energy_integral, neg_laplacian_variational};
