// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Reference values in tests keep all the digits they were computed with.
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod analysis;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod potentials;
pub mod report;
pub mod series;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    pub mod model {}
    #[doc = include_str!("../../../book/src/potentials.md")]
    pub mod potentials {}
    #[doc = include_str!("../../../book/src/closed-form.md")]
    pub mod closed_form {}
    #[doc = include_str!("../../../book/src/series.md")]
    pub mod series {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    pub mod oracle {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    pub mod analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
