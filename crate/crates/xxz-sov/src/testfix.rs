//! Shared parameter fixtures for the crate's unit tests.
//!
//! Both fixtures use the same bulk data (anisotropy and inhomogeneities) so
//! that results for the two boundary classes can be compared side by side;
//! they differ only in which boundary carries the general (non-diagonal)
//! matrix.

use crate::algebra::{BoundaryCase, ModelParams};
use crate::numkit::{c, cr, Complex};

/// Generic complex inhomogeneities, pairwise in general position.
pub(crate) const XI_POOL: [Complex; 5] = [
    Complex::new(0.31, -0.14),
    Complex::new(-0.52, 0.23),
    Complex::new(0.17, 0.41),
    Complex::new(-0.11, -0.33),
    Complex::new(0.44, 0.08),
];

/// Minus class: general `K₋` (κ₋ ≠ 0), diagonal `K₊` (κ₊ = 0).
pub(crate) fn minus_params(n: usize) -> ModelParams {
    ModelParams::new(
        n,
        c(0.73, 0.21),
        c(0.41, -0.33),
        c(0.57, 0.12),
        c(-0.25, 0.44),
        c(1.13, 0.29),
        cr(0.0),
        cr(0.0),
        XI_POOL[..n].to_vec(),
        BoundaryCase::Minus,
        None,
    )
    .unwrap()
}

/// Plus class: diagonal `K₋` (κ₋ = 0), general `K₊` (κ₊ ≠ 0).
pub(crate) fn plus_params(n: usize) -> ModelParams {
    ModelParams::new(
        n,
        c(0.73, 0.21),
        c(0.41, -0.33),
        cr(0.0),
        cr(0.0),
        c(1.13, 0.29),
        c(0.36, -0.27),
        c(-0.67, 0.19),
        XI_POOL[..n].to_vec(),
        BoundaryCase::Plus,
        None,
    )
    .unwrap()
}
