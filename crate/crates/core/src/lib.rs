//! Receiver-design toolkit for factor-graph communication models.
//!
//! Any model whose non-pendant factors are indicator functions of local
//! behaviours can be decoded by linear programming: the toolkit assembles
//! the exact convex-hull programs and their local-consistency relaxations,
//! solves them with an arbitrary-precision rational simplex, certifies
//! ML-optimality of integral outputs, and materializes fractional outputs
//! as graph-cover pseudoconfigurations. A joint equalization-and-decoding
//! application over ISI channels and a sum-product baseline are included.
//!
//! Module map:
//!
//! - [`model`] — factor-graph problem instances and brute-force oracles
//! - [`lp`] — the four LP formulations, indicator embeddings, point maps
//! - [`simplex`] — exact rational two-phase simplex
//! - [`receiver`] — solve / integrality test / decode-or-failure driver
//! - [`pseudo`] — graph covers and the LP-point correspondence
//! - [`sum_product`] — flooding sum-product baseline on the same models
//! - [`equalizer`] — parity-check coded BPSK over an ISI channel
//! - [`instances`] — ready-made desk-scale models and generators
//!
//! # Example
//!
//! ```
//! use lprx_core::{instances, lp::FormulationKind, model::DEFAULT_ENUM_CAP, receiver};
//!
//! let model = instances::repetition_model();
//! let out = receiver::run_receiver(&model, FormulationKind::RelaxedQtilde, DEFAULT_ENUM_CAP)
//!     .unwrap();
//! let cfg = out.configuration().expect("this instance decodes");
//! assert_eq!(cfg.display(&model).to_string(), "1 1");
//! assert!(out.certified_optimal);
//! ```

pub mod equalizer;
pub mod instances;
pub mod lp;
pub mod model;
pub mod pseudo;
pub mod rat;
pub mod receiver;
pub mod simplex;
pub mod sum_product;

use std::fmt;

/// Errors surfaced by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Model construction or validation failed.
    Model(String),
    /// An enumeration would exceed the configured cap.
    EnumerationCap { size: u128, cap: u64 },
    /// The global behaviour is empty.
    NoValidConfiguration,
    /// A configuration is malformed or not in the global behaviour.
    InvalidConfiguration(String),
    /// The constraint system admits no feasible point.
    Infeasible,
    /// The objective is unbounded over the feasible region; for the
    /// programs built here this indicates a construction bug.
    Unbounded,
    /// A point failed a feasibility precondition; carries the violations.
    InfeasiblePoint(Vec<String>),
    /// Mismatched dimensions between related objects.
    Dimension(String),
    /// A text format (alist, dense matrix, rational, point file) failed to parse.
    Parse(String),
    /// An operation precondition was violated.
    Precondition(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Model(msg) => write!(f, "invalid model: {msg}"),
            Error::EnumerationCap { size, cap } => {
                write!(f, "instance too large for enumeration: {size} > cap {cap}")
            }
            Error::NoValidConfiguration => write!(f, "no valid configuration"),
            Error::InvalidConfiguration(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Infeasible => write!(f, "infeasible constraint system"),
            Error::Unbounded => write!(f, "unbounded objective (construction bug)"),
            Error::InfeasiblePoint(violations) => {
                write!(f, "point is not feasible: {}", violations.join("; "))
            }
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
