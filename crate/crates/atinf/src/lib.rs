//! Numerical and symbolic toolkit for polynomial vector fields near the
//! hyperplane at infinity: the holonomy form on leaves at infinity, oriented
//! real trajectories and their time-form integrals, classification of
//! singular points, and triangle-group Poincare series for Halphen-type
//! fields.

pub mod halphen;
pub mod infinity_form;
pub mod ode;
pub mod polyfield;
pub mod roots;
pub mod series;
pub mod singularities;
pub mod trajectory;

pub use polyfield::{
    field_from_json, field_to_json, identity_matrix, rotate_chart, to_infinity_chart, FieldError,
    InfinityChartField, MultiPoly, PolyVectorField,
};

/// Shared complex scalar type.
pub type C64 = num_complex::Complex64;
