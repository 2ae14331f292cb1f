//! Annotated bidirectional data exchange.

pub mod chase;
pub mod condition;
pub mod error;
pub mod gaifman;
pub mod hom;
pub mod instance;
pub mod iso;
pub mod labeling;
pub mod lexer;
pub mod mapping;
pub mod oracle;
pub mod query;
pub mod reductions;
pub mod rep;
pub mod term;
pub mod unify;

pub use condition::{sat_check, Clause, Diseq, GlobalCondition};
pub use error::{Error, Result};
pub use instance::Instance;
pub use query::{parse_query, Query};
pub use term::{sym, Fact, Sym, Term};
