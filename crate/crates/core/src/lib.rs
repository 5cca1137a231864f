// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dbm;
pub mod ensembles;
pub mod error;
pub mod ginibre;
pub mod girko;
pub mod hermitization;
pub mod mde;
pub mod quad;
pub mod seed;
pub mod stats;
pub mod tail_stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ensembles.md")]
    mod ensembles {}
    #[doc = include_str!("../../../book/src/hermitization.md")]
    mod hermitization {}
    #[doc = include_str!("../../../book/src/dyson_equation.md")]
    mod dyson_equation {}
    #[doc = include_str!("../../../book/src/girko.md")]
    mod girko {}
    #[doc = include_str!("../../../book/src/ginibre.md")]
    mod ginibre {}
    #[doc = include_str!("../../../book/src/dbm.md")]
    mod dbm {}
    #[doc = include_str!("../../../book/src/tails.md")]
    mod tails {}
}
