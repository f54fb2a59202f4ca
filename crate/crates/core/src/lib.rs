//! Groundness analysis of definite logic programs over the Pos and Def
//! domains of positive Boolean functions.
//!
//! * [`boolfun`]: model sets, the Pos/Def lattice operations and the Def
//!   chain construction.
//! * [`program`]: clause AST, parser, renderer and size metric.
//! * [`analyzer`]: abstract clause evaluation and naive Kleene iteration.
//! * [`generators`]: the `def-chain` and `pos-linear` worst-case families.
//! * [`oracle`]: brute-force reference implementations.
//! * [`cli`]: the `groundness` command.

pub mod analyzer;
pub mod boolfun;
pub mod cli;
pub mod generators;
pub mod oracle;
pub mod program;

pub use analyzer::{analyze, kleene, AnalysisResult, AnalyzerError, Interpretation, KleeneOptions};
pub use boolfun::{chain_f, AbsFun, Domain, Model, ModelSet};
pub use generators::{gen_def_chain, gen_pos_linear, FamilyId};
pub use program::{parse, render, size_metric, Program, Signature};
