//! Text formats: process specifications, properties, configuration and reports.

mod bench;
mod config;
mod lexer;
mod parser;
mod printer;
mod report;

pub use bench::{bench_bundle, run_bench, Aggregate, BenchOptions, BenchRow, BenchTable};
pub use config::{Config, ConfigError};
pub use lexer::{lex, ParseError, Pos, Tok};
pub use parser::{parse_property, parse_spec};
pub use printer::{print_property, print_spec};
pub use report::{verify, FunctionEntry, ModelFacts, ReportStats, TraceStep, VerdictReport, VerifyOptions, VerifyOutcome};
