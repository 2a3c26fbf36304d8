pub mod error;
pub mod invariance;
pub mod linalg;
pub mod manifest;
pub mod par;
pub mod relations;
pub mod report;
pub mod term;
pub mod text;

pub use error::{Error, Result};
pub use term::*;
pub use text::{parse_expr, parse_monomial, parse_rational, print_expr};
