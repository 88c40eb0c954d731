//! Computational geometry of the first Heisenberg group.
//!
//! The crate provides the exact group structure (products, dilations,
//! gauge, frames, contact form, Siegel embedding), scalar fields with
//! derivative dispatch, planar profiles and the solid-torus domains they
//! generate under w = t + i|z|², the product diffeomorphism of the
//! complement of the center, convex-profile homeomorphisms, and a
//! characteristic-point scanner with certificates for convex-profile tori.

// `!(x > 0.0)` rejects NaN where `x <= 0.0` would accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristic;
pub mod convex;
pub mod error;
pub mod expr;
pub mod field;
pub mod heis;
pub mod profile;
pub mod report;
pub mod torus_map;

pub use error::{Error, Result};
pub use field::{
    compose_profile, validate_defining, AmbientField, BoundingBox, GradientData, PlanarField,
    ScalarField,
};
pub use heis::{
    contact_form, dilate, distance, frame_at, gauge, group_inv, group_mul, horizontal_gradient,
    j_map, left_translate_push, siegel_action, siegel_embed, sublaplacian, zbar_derivative, HPoint,
    HorizontalVector, TangentVector,
};
pub use profile::{
    boundary_mesh, euclidean_ball, koranyi_ball, make_torus, Domain, DomainSpec, ImplicitDomain,
    MeshSpec, Profile, ProfileSpec, TorusDomain,
};
