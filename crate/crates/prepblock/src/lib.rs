//! Partially replicated block designs: constructions, efficiency criteria
//! with sharp lower bounds, brute-force verification, and exhaustive
//! small-instance search. See the guide under `book/` for a walkthrough;
//! its code snippets compile and run as doctests of this crate.

pub mod construct;
pub mod criteria;
pub mod enumerate;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod reports;

pub use error::{Error, Result};
pub use linalg::SymMatrix;
pub use model::{BlockDesign, FullDesignSpec};

// Compile and run every code snippet in the guide as a doctest.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/designs.md")]
    mod designs {}
    #[doc = include_str!("../../../book/src/constructions.md")]
    mod constructions {}
    #[doc = include_str!("../../../book/src/a-criterion.md")]
    mod a_criterion {}
    #[doc = include_str!("../../../book/src/mv-criterion.md")]
    mod mv_criterion {}
    #[doc = include_str!("../../../book/src/enumeration.md")]
    mod enumeration {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
