//! Substitution tilings in integer address coordinates.
//!
//! The crate is organised bottom-up:
//!
//! - [`algebra`] classifies the cubic `z^3 - p z^2 + q z + r` behind the
//!   Kenyon family and computes its roots.
//! - [`substitution`] holds the combinatorial data: digit sets, the
//!   substitution matrix, supertile expansion and Perron-Frobenius data.
//! - [`models`] builds the Kenyon `(p,q,r)` systems and the 6x6 square model.
//! - [`cocycle`] evaluates the spectral cocycle over the toral endomorphism
//!   and estimates Lyapunov exponents.
//! - [`deformation`] covers shape matrices, torus orbits, the eigenvalue
//!   test and the escape statistic.
//! - [`spectral`] computes twisted integrals over supertiles and boxes.
//! - [`geometry`] realizes patches as polygons, collars tiles and renders SVG.

pub mod algebra;
pub mod cocycle;
pub mod deformation;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod spectral;
pub mod substitution;

pub use algebra::{classify_cubic, complex_root, AlgebraError, CubicClass, CubicParams, CubicTag};
pub use cocycle::{
    cocycle_product, domination_check, fourier_matrix, lyapunov, lyapunov_directional,
    CocycleError, CocycleResult, Lyapunov, TorusPoint,
};
pub use deformation::{
    eigenvalue_test, epsilon_sequence, expanding_dimension, lift, rho_default,
    sample_deformations, veech_statistic, DeformationError, EigenVerdict, EpsilonSequence,
    ShapeMatrix,
};
pub use geometry::{
    collared_prototiles, corona, realize_patch, render_svg, CollaredAtlas, Coloring,
    GeometryError, RealizedPatch,
};
pub use linalg::{Int, IntMatrix};
pub use models::{kenyon_system, kenyon_system_with_layout, square_system, KenyonLayout, KenyonModel, ModelError, SquareModel};
pub use spectral::{
    box_decomposition, dim_lower_bound, dim_lower_bound_zero, twisted_box_integral,
    twisted_supertile_bruteforce, twisted_supertile_integral, SpectralError, TestFunction,
};
pub use substitution::{
    is_primitive, pf_data, Address, Patch, PatchTile, PfData, SubstitutionError,
    SubstitutionSystem,
};

/// Any error produced by the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Deformation(#[from] DeformationError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
