//! Library surface of the `nlmc` command-line tool; the binary is a thin
//! wrapper so the argument, spec-file, and rendering layers stay testable.

pub mod args;
pub mod error;
pub mod output;
pub mod run;
pub mod specfile;
