//! Bessel heat kernels, Bessel–Schrödinger semigroups and local Hardy-space atoms on
//! `((0, ∞), x^α dx)`.

// parameter checks are written `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod error;
pub mod grid;
pub mod hardy;
pub mod kernel;
pub mod measure;
mod quad;
pub mod section;
pub mod semigroup;

pub use error::{Error, Result};

// The guide's snippets run as doc-tests of this crate.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/measure.md")]
    mod measure {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/sections.md")]
    mod sections {}
    #[doc = include_str!("../../../book/src/semigroup.md")]
    mod semigroup {}
    #[doc = include_str!("../../../book/src/hardy.md")]
    mod hardy {}
    #[doc = include_str!("../../../book/src/conditions.md")]
    mod conditions {}
}
