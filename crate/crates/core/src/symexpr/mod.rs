//! Exact symbolic scalar expressions over a coordinate chart.
//!
//! Coordinates are real. Complex behaviour enters through constants (the
//! imaginary unit in particular) and through declared complex coordinate
//! pairs, which give access to Wirtinger derivatives.

mod chart;
mod expr;
mod parse;
mod sample;
mod tape;

pub use chart::{Chart, ChartError};
pub use expr::{Expr, Node, NoSuchPair, C64};
pub use parse::{parse, parse_with, ParseError, ParseErrorKind, ParseFailure};
pub use sample::{EquivReport, NamedCheck, PointStream, SampleError, Sampler};
pub use tape::{EvalError, Tape};
