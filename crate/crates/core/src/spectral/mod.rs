//! Grids, transforms and Fourier multiplier operators.

pub mod fld;
mod field;
mod grid;
mod ops;

pub use field::{ScalarField, Space, VectorField};
pub use grid::{mode_index, Grid, GridSpec};
pub(crate) use grid::SliceWork;
pub use ops::{
    curl_h, dealias, dealias_h, derivative, div_check, divergence, gradient_h, heat_semigroup,
    inv_laplacian_h, leray_3d, leray_h, lowpass, perp_gradient_h, Axis, HeatKind,
};
pub(crate) use ops::project_3d_in_place;
#[cfg(test)]
pub(crate) use ops::apply_3d;
