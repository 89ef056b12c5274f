//! Core of the modeling workbench: the Lingua Franca subset, the grammar
//! notation and tool generation, the tool runtime, and diagram synthesis
//! with layered layout.

pub mod diagnostic;
pub mod diagram;
pub mod grammar;
pub mod layout;
pub mod lf;
pub mod toolgen;
pub mod tools;

pub use diagnostic::{Diagnostic, Range, Severity, Span};
