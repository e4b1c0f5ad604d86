//! In-memory sub-multigraph matching over labeled property multigraphs.
//!
//! The pipeline: parse a CYPHER query ([`cypher`]), index the target
//! ([`index`]), derive symmetry-breaking conditions ([`symmetry`]), build
//! compatibility domains ([`domains`]), order the query edges
//! ([`ordering`]) and run the backtracking search ([`matcher`]).
//! [`engine`] wires the stages together.

pub mod cypher;
pub mod domains;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod index;
pub mod io;
pub mod matcher;
pub mod oracle;
pub mod ordering;
pub mod query;
pub mod symmetry;
pub mod synth;

pub use error::{ConfigError, EngineError, GraphError, ParseError, SnapshotError};
pub use graph::{Direction, Edge, GraphBuilder, Multigraph, Node, Properties, PropertyValue};
pub use query::{ConjunctiveQuery, QueryGraph};
pub use engine::{run_query, EngineOptions, PhaseTimings, QueryRun};
pub use index::TargetIndex;
pub use matcher::MatchStatus;
pub use ordering::OrderingKind;
