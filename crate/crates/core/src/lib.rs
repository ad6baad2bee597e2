//! Exact computation of flat lattices, Poincaré polynomials and codimension
//! generating functions for quaternionic reflection arrangements.
//!
//! Scalars live in `Q(√2, √5)` and its quaternion algebra ([`scalars`]).
//! [`geometry`] does right-linear algebra in `H^n`, [`systems`] builds the
//! line systems, [`groups`] enumerates finite groups, [`lattice`] builds the
//! lattice of flats and its invariants, and [`poly`] handles integer
//! polynomials in `t`.

pub mod cache;
pub mod geometry;
pub mod groups;
pub mod lattice;
pub mod modular;
pub mod poly;
pub mod scalars;
pub mod systems;
pub mod verify;

pub use geometry::{AngleClass, Line, Subspace, Vector};
pub use scalars::{FieldElem, Quat};
