//! Timed complex event recognition.
//!
//! Queries are written in timed CEL, compiled to timed complex event
//! automata (CEA), optionally determinized, and evaluated over timestamped
//! streams. The [`streaming`] evaluator handles deterministic monotonic
//! single-clock automata with constant update time per event and
//! output-linear delay enumeration; the brute-force oracles in [`cel`] and
//! [`cea`] serve as ground truth.

pub mod cea;
pub mod cel;
pub mod compiler;
pub mod determinize;
pub mod gen;
pub mod io;
pub mod model;
pub mod predicate;
pub mod rational;
pub mod samples;
pub mod streaming;

pub use cea::{ClockCondition, ClockValuation, Monotonicity, TimedCea, Transition};
pub use cel::{classify, eval_cel_oracle, parse_query, CelFormula, Fragment};
pub use compiler::{compile, compile_windowed, CompileError};
pub use determinize::{check_sync, determinize, DeterminizeError, SyncVerdict};
pub use streaming::{evaluate, streamable, Evaluator, LoadError};
pub use model::{ComplexEvent, Event, Interval, TimedStream, Value, Var, VarSet};
pub use predicate::{Cmp, Predicate};
pub use rational::Rational;

