//! Exact search for Pareto-efficient outcomes in multi-issue negotiations
//! with interdependent binary issues.
//!
//! Utilities are k-additive polynomials stored as weighted hypergraphs
//! ([`hypergraph`]). Instances come from seeded topology generators
//! ([`topology`]). A balanced vertex-separator decomposition ([`separator`])
//! turns the exponential welfare search into an exhaustive sweep of the cut
//! set with independent per-partition inner searches ([`optimizer`]), with
//! evaluation counts tracked exactly. A mediator runs the same search over
//! two agents' private utilities through counted value or comparison
//! queries, returning a welfare-optimal contract or the full Pareto
//! frontier ([`mediator`]).

pub mod hypergraph;
pub mod mediator;
pub mod optimizer;
pub mod rng;
pub mod separator;
pub mod topology;

pub use hypergraph::{Assignment, Hyperedge, Instantiation, UtilityHypergraph};
pub use separator::Decomposition;
