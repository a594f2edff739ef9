pub mod error;
pub mod poly;
pub mod predicates;
pub mod schemes;

pub use error::{Error, Result};
pub mod tables;
pub mod eval;
pub mod codegen;
pub mod lab;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/schemes.md")]
    mod schemes {}
    #[doc = include_str!("../../../book/src/tables.md")]
    mod tables {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/codegen.md")]
    mod codegen {}
    #[doc = include_str!("../../../book/src/lab.md")]
    mod lab {}
}
