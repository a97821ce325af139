//! Differential forms on flat complex tori, Higgs bundles and their
//! curvature functionals.

pub mod cli;
pub mod endforms;
pub mod error;
pub mod forms;
pub mod functionals;
pub mod higgs;
pub mod hitchin2d;
pub mod io;
pub mod lattice;
pub mod matrix;
pub mod multiindex;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/multiindex.md")]
    mod multiindex {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/forms.md")]
    mod forms {}
    #[doc = include_str!("../../../book/src/endforms.md")]
    mod endforms {}
    #[doc = include_str!("../../../book/src/higgs.md")]
    mod higgs {}
    #[doc = include_str!("../../../book/src/functionals.md")]
    mod functionals {}
    #[doc = include_str!("../../../book/src/hitchin2d.md")]
    mod hitchin2d {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
