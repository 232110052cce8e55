//! Curvature-tensor calculus and numerical verification tools for weakly
//! Einstein Kähler surfaces.
//!
//! * [`tensor`]: metrics, 2-tensors, 2-forms, complex structures and
//!   algebraic curvature tensors with their contractions.
//! * [`conditions`]: the weakly Einstein predicate, the universal identity
//!   chain and the four algebraic characterizations on Kähler surfaces.
//! * [`examples`]: space forms, products of surfaces, the EPS space and
//!   random algebraic curvature tensors.
//! * [`ode_q`]: the closed-form profile `Q` solving `u^2 Q'' + 2Q = eps K u`.
//! * [`family`]: the cohomogeneity-one frame family built from `Q`.
//! * [`lemma_f`]: the level-matching map of `F(a) = exp(-a cot c) sin a`.

pub mod conditions;
pub mod error;
pub mod examples;
pub mod family;
pub mod lemma_f;
pub mod ode_q;
pub mod tensor;

pub use error::{Error, Result};
