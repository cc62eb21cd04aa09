//! Mediated two-agent negotiation.
//!
//! The mediator sees both agents' edge *structures* but never their weights:
//! every utility datum it learns arrives through a counted query. Value
//! queries elicit the exact utility of one contract; comparison queries
//! elicit only the order between two contracts. The mediator partitions the
//! shared structure and drives the decomposed search through queries,
//! returning a welfare-optimal contract (value protocol) or the full Pareto
//! frontier (comparison protocol).
//!
//! Partition-local queries use a canonical completion: the cut set as
//! instantiated, this partition's free vertices as the candidate, every
//! other partition's free vertices at 0. Those other partitions contribute
//! nothing at 0, so the local argmax is unaffected, and the all-zero
//! candidate of each block reads off the residual (all-cut-edge) value that
//! every completion shares.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::rc::Rc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::hypergraph::{HypergraphError, Instantiation, UtilityHypergraph};
use crate::optimizer::SearchCaps;
use crate::separator::{cost_estimate, partition_balanced, DecompositionError};

#[derive(Debug, Error)]
pub enum NegotiationError {
    #[error("agents declare different issue counts: {a} vs {b}")]
    AgentMismatch { a: u32, b: u32 },
    #[error("shared structure does not match the union of the agents' structures")]
    StructureMismatch,
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Graph(#[from] HypergraphError),
    #[error("cut set of {size} exceeds the mediator cap of {cap}")]
    CutCapExceeded { size: usize, cap: usize },
    #[error("partition of {size} free vertices exceeds the mediator cap of {cap}")]
    FreeCapExceeded { size: usize, cap: usize },
    #[error("{required} candidate contracts exceed the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
}

/// Transcript entry: one query and its answer.
#[derive(Clone, Debug)]
pub enum QueryRecord {
    Value {
        agent: String,
        contract: String,
        value: i64,
    },
    Comparison {
        agent: String,
        left: String,
        right: String,
        outcome: Ordering,
    },
}

/// Ordered log of every query in a session, for counter audits and replay.
#[derive(Debug, Default)]
pub struct QueryLog {
    pub entries: Vec<QueryRecord>,
}

impl QueryLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            match e {
                QueryRecord::Value {
                    agent,
                    contract,
                    value,
                } => out.push_str(&format!("V {agent} {contract} = {value}\n")),
                QueryRecord::Comparison {
                    agent,
                    left,
                    right,
                    outcome,
                } => {
                    let sym = match outcome {
                        Ordering::Greater => ">",
                        Ordering::Equal => "=",
                        Ordering::Less => "<",
                    };
                    out.push_str(&format!("C {agent} {left} {right} = {sym}\n"));
                }
            }
        }
        out
    }
}

/// A negotiating party. The utility graph is private to this module; the
/// mediator reaches it only through the two query methods, which is what
/// makes the query counters a faithful cost measure.
pub struct Agent {
    id: String,
    graph: UtilityHypergraph,
    value_queries: u64,
    comparison_queries: u64,
    log: Option<Rc<RefCell<QueryLog>>>,
}

impl Agent {
    pub fn new(id: impl Into<String>, graph: UtilityHypergraph) -> Self {
        Agent {
            id: id.into(),
            graph,
            value_queries: 0,
            comparison_queries: 0,
            log: None,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn issue_count(&self) -> u32 {
        self.graph.issue_count()
    }

    /// Edge structure with unit weights — the public part of a preference.
    pub fn structure(&self) -> UtilityHypergraph {
        self.graph.skeleton()
    }

    pub fn attach_log(&mut self, log: Rc<RefCell<QueryLog>>) {
        self.log = Some(log);
    }

    pub fn value_queries_answered(&self) -> u64 {
        self.value_queries
    }

    pub fn comparison_queries_answered(&self) -> u64 {
        self.comparison_queries
    }

    /// "What is your utility for this contract?"
    pub fn answer_value_query(&mut self, x: &Instantiation) -> Result<i64, HypergraphError> {
        let value = self.graph.evaluate(x)?;
        self.value_queries += 1;
        if let Some(log) = &self.log {
            log.borrow_mut().entries.push(QueryRecord::Value {
                agent: self.id.clone(),
                contract: x.to_string(),
                value,
            });
        }
        Ok(value)
    }

    /// "Is your utility for `x` greater than for `y`?" — three-way.
    pub fn answer_comparison_query(
        &mut self,
        x: &Instantiation,
        y: &Instantiation,
    ) -> Result<Ordering, HypergraphError> {
        let ux = self.graph.evaluate(x)?;
        let uy = self.graph.evaluate(y)?;
        self.comparison_queries += 1;
        let outcome = ux.cmp(&uy);
        if let Some(log) = &self.log {
            log.borrow_mut().entries.push(QueryRecord::Comparison {
                agent: self.id.clone(),
                left: x.to_string(),
                right: y.to_string(),
                outcome,
            });
        }
        Ok(outcome)
    }
}

/// Union of both agents' edge structures, unit weights. This is the graph
/// the mediator partitions.
pub fn shared_skeleton(a: &Agent, b: &Agent) -> Result<UtilityHypergraph, NegotiationError> {
    if a.issue_count() != b.issue_count() {
        return Err(NegotiationError::AgentMismatch {
            a: a.issue_count(),
            b: b.issue_count(),
        });
    }
    Ok(a.structure().merge(&b.structure())?.skeleton())
}

#[derive(Clone, Copy, Debug)]
pub struct MediatorConfig {
    pub caps: SearchCaps,
    /// Upper bound on materialized candidate contracts in the comparison
    /// protocol's merge step.
    pub candidate_budget: u64,
}

impl Default for MediatorConfig {
    fn default() -> Self {
        MediatorConfig {
            caps: SearchCaps::default(),
            candidate_budget: 1_000_000,
        }
    }
}

/// Query accounting for one negotiation session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegotiationReport {
    pub k: u32,
    pub cutset_size: usize,
    pub max_free: usize,
    /// Exact decomposed-search candidate count for the decomposition used.
    pub predicted_calls: BigUint,
    pub value_queries_a: u64,
    pub value_queries_b: u64,
    pub comparison_queries_a: u64,
    pub comparison_queries_b: u64,
    /// Comparison protocol only: contracts materialized in the merge step.
    pub candidates_merged: u64,
}

impl NegotiationReport {
    pub fn value_queries_total(&self) -> u64 {
        self.value_queries_a + self.value_queries_b
    }

    pub fn comparison_queries_total(&self) -> u64 {
        self.comparison_queries_a + self.comparison_queries_b
    }
}

#[derive(Clone, Debug)]
pub struct NegotiationOutcome {
    pub contract: Instantiation,
    pub welfare: i64,
    pub report: NegotiationReport,
}

struct Session {
    cut: Vec<u32>,
    parts: Vec<Vec<u32>>,
    issue_count: u32,
    report: NegotiationReport,
}

fn open_session(
    a: &Agent,
    b: &Agent,
    shared: &UtilityHypergraph,
    k: u32,
    epsilon: f64,
    seed: u64,
    config: &MediatorConfig,
) -> Result<Session, NegotiationError> {
    let skeleton = shared_skeleton(a, b)?;
    if shared.skeleton() != skeleton {
        return Err(NegotiationError::StructureMismatch);
    }
    let d = partition_balanced(shared, k, epsilon, seed)?;
    if d.cut_size() > config.caps.max_cut {
        return Err(NegotiationError::CutCapExceeded {
            size: d.cut_size(),
            cap: config.caps.max_cut,
        });
    }
    if d.max_free() > config.caps.max_free {
        return Err(NegotiationError::FreeCapExceeded {
            size: d.max_free(),
            cap: config.caps.max_free,
        });
    }
    let parts = (1..=d.k()).map(|p| d.free_vertices(p)).collect();
    Ok(Session {
        cut: d.cut_set(),
        parts,
        issue_count: shared.issue_count(),
        report: NegotiationReport {
            k: d.k(),
            cutset_size: d.cut_size(),
            max_free: d.max_free(),
            predicted_calls: cost_estimate(&d).exact,
            value_queries_a: 0,
            value_queries_b: 0,
            comparison_queries_a: 0,
            comparison_queries_b: 0,
            candidates_merged: 0,
        },
    })
}

/// Value-query protocol: find the contract maximizing the summed utilities.
///
/// For every cut instantiation each partition is maximized independently;
/// the block welfare is assembled from the per-partition query maxima with
/// the shared residual value counted once, and the best block wins. The
/// outcome's welfare always equals the brute-force maximum of the summed
/// utilities. Each agent answers exactly one value query per candidate.
pub fn negotiate_value(
    a: &mut Agent,
    b: &mut Agent,
    shared: &UtilityHypergraph,
    k: u32,
    epsilon: f64,
    seed: u64,
    config: &MediatorConfig,
) -> Result<NegotiationOutcome, NegotiationError> {
    let mut session = open_session(a, b, shared, k, epsilon, seed, config)?;
    let (va0, vb0) = (a.value_queries_answered(), b.value_queries_answered());
    let n = session.issue_count;
    let cut = session.cut.clone();

    let mut scratch = Instantiation::zeros(n);
    let mut parts_best: Vec<u64> = vec![0; session.parts.len()];
    let mut best: Option<(i64, Instantiation)> = None;

    for i in 0..(1u64 << cut.len()) {
        let cut_bits = i ^ (i >> 1);
        scratch.apply_counter(&cut, cut_bits);
        let mut block = 0i64;
        let mut residual_q = 0i64;
        for (pi, free) in session.parts.iter().enumerate() {
            let mut best_val = i64::MIN;
            let mut best_f = 0u64;
            let mut q_zero = 0i64;
            for f in 0..(1u64 << free.len()) {
                scratch.apply_counter(free, f);
                let q = a.answer_value_query(&scratch)? + b.answer_value_query(&scratch)?;
                if f == 0 {
                    q_zero = q;
                    if pi == 0 {
                        residual_q = q;
                    }
                }
                if q > best_val {
                    best_val = q;
                    best_f = f;
                }
            }
            scratch.apply_counter(free, 0);
            // the all-zero candidate of every partition is the same contract,
            // whose value is the block's residual; subtracting it leaves this
            // partition's own contribution
            block += best_val - q_zero;
            parts_best[pi] = best_f;
        }
        block += residual_q;

        let better = best.as_ref().map_or(true, |(v, _)| block > *v);
        let tied = matches!(&best, Some((v, _)) if block == *v);
        if better || tied {
            let mut candidate = Instantiation::zeros(n);
            candidate.apply_counter(&cut, cut_bits);
            for (pi, free) in session.parts.iter().enumerate() {
                candidate.apply_counter(free, parts_best[pi]);
            }
            if better || matches!(&best, Some((_, c)) if candidate < *c) {
                best = Some((block, candidate));
            }
        }
    }

    let (welfare, contract) = best.expect("at least one cut instantiation");
    session.report.value_queries_a = a.value_queries_answered() - va0;
    session.report.value_queries_b = b.value_queries_answered() - vb0;
    Ok(NegotiationOutcome {
        contract,
        welfare,
        report: session.report,
    })
}

/// A frontier point; utilities are populated only when the protocol that
/// produced it actually learned them (value queries). Comparison-protocol
/// frontiers carry the query transcript as their ordinal certificate.
#[derive(Clone, Debug)]
pub struct ParetoPoint {
    pub contract: Instantiation,
    pub utilities: Option<(i64, i64)>,
}

#[derive(Clone, Debug, Default)]
pub struct ParetoFrontier {
    pub points: Vec<ParetoPoint>,
}

impl ParetoFrontier {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contracts(&self) -> impl Iterator<Item = &Instantiation> {
        self.points.iter().map(|p| &p.contract)
    }
}

/// Stable bottom-up merge sort, descending in the agent's utility. Every
/// comparison is a counted query.
fn sort_descending(
    contracts: &[Instantiation],
    agent: &mut Agent,
) -> Result<Vec<usize>, NegotiationError> {
    let n = contracts.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut buf = idx.clone();
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut o) = (start, mid, start);
            while i < mid && j < end {
                let keep_left = agent
                    .answer_comparison_query(&contracts[idx[i]], &contracts[idx[j]])?
                    != Ordering::Less;
                if keep_left {
                    buf[o] = idx[i];
                    i += 1;
                } else {
                    buf[o] = idx[j];
                    j += 1;
                }
                o += 1;
            }
            while i < mid {
                buf[o] = idx[i];
                i += 1;
                o += 1;
            }
            while j < end {
                buf[o] = idx[j];
                j += 1;
                o += 1;
            }
            start = end;
        }
        std::mem::swap(&mut idx, &mut buf);
        width *= 2;
    }
    Ok(idx)
}

/// Dense utility levels (0 = best) from a descending order: one adjacency
/// comparison per neighbor detects exact ties.
fn dense_levels(
    contracts: &[Instantiation],
    order: &[usize],
    agent: &mut Agent,
) -> Result<Vec<u32>, NegotiationError> {
    let mut level_of = vec![0u32; contracts.len()];
    let mut level = 0u32;
    for w in 1..order.len() {
        match agent.answer_comparison_query(&contracts[order[w - 1]], &contracts[order[w]])? {
            Ordering::Greater => level += 1,
            Ordering::Equal => {}
            Ordering::Less => unreachable!("sort produced an ascending pair"),
        }
        level_of[order[w]] = level;
    }
    Ok(level_of)
}

/// Nondominated subset of `contracts` using comparison queries only: sort by
/// both agents' orders (merge sorts plus one adjacency pass each), then one
/// sweep in agent-a-descending order keeping contracts whose b-level beats
/// everything seen at strictly better a. A point is discarded only if weakly
/// dominated with at least one strict inequality; exact utility duplicates
/// keep the lexicographically smallest contract. Output stays in a-descending
/// order.
pub fn local_pareto_sweep(
    contracts: &[Instantiation],
    a: &mut Agent,
    b: &mut Agent,
) -> Result<Vec<Instantiation>, NegotiationError> {
    if contracts.is_empty() {
        return Ok(Vec::new());
    }
    if contracts.len() == 1 {
        return Ok(vec![contracts[0].clone()]);
    }
    let a_order = sort_descending(contracts, a)?;
    let a_level = dense_levels(contracts, &a_order, a)?;
    let b_order = sort_descending(contracts, b)?;
    let b_level = dense_levels(contracts, &b_order, b)?;

    let mut result = Vec::new();
    let mut best_b: Option<u32> = None;
    let n = contracts.len();
    let mut gi = 0;
    while gi < n {
        let group_level = a_level[a_order[gi]];
        let mut gj = gi;
        while gj < n && a_level[a_order[gj]] == group_level {
            gj += 1;
        }
        let group_min_b = (gi..gj).map(|t| b_level[a_order[t]]).min().unwrap();
        if best_b.map_or(true, |bb| group_min_b < bb) {
            let keep = (gi..gj)
                .filter(|t| b_level[a_order[*t]] == group_min_b)
                .map(|t| a_order[t])
                .min_by(|&p, &q| contracts[p].cmp(&contracts[q]))
                .unwrap();
            result.push(contracts[keep].clone());
        }
        best_b = Some(best_b.map_or(group_min_b, |bb| bb.min(group_min_b)));
        gi = gj;
    }
    Ok(result)
}

/// Comparison-query protocol: compute the Pareto frontier without ever
/// learning a utility value.
///
/// Step 1 partitions the shared structure and enumerates all cut-set
/// instantiations. Step 2 sweeps each partition's candidate contracts to a
/// local frontier. Step 3 merges: within each cut block the local frontiers
/// are cross-composed (dominated compositions dropped as soon as they
/// appear), blocks are pooled, and a final sweep filters the pool. The
/// result equals the nondominated set of the full outcome space, as utility
/// pairs.
pub fn negotiate_comparison(
    a: &mut Agent,
    b: &mut Agent,
    shared: &UtilityHypergraph,
    k: u32,
    epsilon: f64,
    seed: u64,
    config: &MediatorConfig,
) -> Result<(ParetoFrontier, NegotiationReport), NegotiationError> {
    let mut session = open_session(a, b, shared, k, epsilon, seed, config)?;
    let (ca0, cb0) = (
        a.comparison_queries_answered(),
        b.comparison_queries_answered(),
    );
    let n = session.issue_count;
    let cut = session.cut.clone();
    let budget = config.candidate_budget;
    let mut materialized: u64 = 0;
    let charge = |count: u128, materialized: &mut u64| -> Result<(), NegotiationError> {
        let next = *materialized as u128 + count;
        if next > budget as u128 {
            return Err(NegotiationError::BudgetExceeded {
                required: next,
                budget,
            });
        }
        *materialized = next as u64;
        Ok(())
    };

    let mut scratch = Instantiation::zeros(n);
    let mut pool: Vec<Instantiation> = Vec::new();

    for i in 0..(1u64 << cut.len()) {
        let cut_bits = i ^ (i >> 1);
        scratch.apply_counter(&cut, cut_bits);
        let mut block: Option<Vec<Instantiation>> = None;
        for free in &session.parts {
            charge(1u128 << free.len(), &mut materialized)?;
            let contracts: Vec<Instantiation> = (0..(1u64 << free.len()))
                .map(|f| {
                    scratch.apply_counter(free, f);
                    scratch.clone()
                })
                .collect();
            scratch.apply_counter(free, 0);
            let local = local_pareto_sweep(&contracts, a, b)?;
            block = Some(match block {
                None => local,
                Some(prev) => {
                    charge(prev.len() as u128 * local.len() as u128, &mut materialized)?;
                    let mut combos = Vec::with_capacity(prev.len() * local.len());
                    for p in &prev {
                        for q in &local {
                            combos.push(p.union(q));
                        }
                    }
                    local_pareto_sweep(&combos, a, b)?
                }
            });
        }
        pool.extend(block.unwrap_or_default());
    }

    let frontier_contracts = local_pareto_sweep(&pool, a, b)?;
    session.report.comparison_queries_a = a.comparison_queries_answered() - ca0;
    session.report.comparison_queries_b = b.comparison_queries_answered() - cb0;
    session.report.candidates_merged = materialized;
    let frontier = ParetoFrontier {
        points: frontier_contracts
            .into_iter()
            .map(|contract| ParetoPoint {
                contract,
                utilities: None,
            })
            .collect(),
    };
    Ok((frontier, session.report))
}
