//! Event-log analytics for production processes.
//!
//! The crate covers the whole analysis loop on a single event log:
//!
//! ```text
//! CSV / MXML > ingest > EventLog > discovery (variants, frequency, DFG, bottlenecks, DOT)
//!                                > clustering (Markov-chain mixture) > split > discovery per cluster
//! ```
//!
//! [`testkit`] generates labeled synthetic logs so that clustering recovery and
//! bottleneck ranking can be checked against a known ground truth.

pub mod cli;
pub mod clustering;
pub mod discovery;
pub mod error;
pub mod ingest;
pub mod log;
pub mod seed;
pub mod testkit;
pub mod units;

pub use error::{Error, Result};
pub use log::{Event, EventLog, Trace};
