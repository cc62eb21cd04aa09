//! Weighted utility hypergraphs over binary issues.
//!
//! A utility function over `n` binary issues is a polynomial whose nonzero
//! coefficients sit on vertex subsets: unary weights are 1-vertex edges,
//! pairwise synergies 2-vertex edges, and so on. Evaluating the graph at an
//! instantiation sums the weights of the edges whose vertices are all set
//! to 1. There is no constant term, so the all-zeros contract always has
//! utility 0.
//!
//! Weights are signed scaled integers rather than floats: optima, ties and
//! dominance comparisons are exact and reproducible.
//!
//! All types are immutable after construction; evaluation is pure and safe
//! to call concurrently.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::separator::Decomposition;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("issue count must be positive")]
    ZeroIssues,
    #[error("edge references vertex {vertex}, outside 1..={issue_count}")]
    VertexOutOfRange { vertex: u32, issue_count: u32 },
    #[error("edge contains vertex {vertex} more than once")]
    DuplicateVertex { vertex: u32 },
    #[error("edge has no vertices")]
    EmptyEdge,
    #[error("instantiation has {got} issues, graph has {expected}")]
    DimensionMismatch { expected: u32, got: u32 },
    #[error("issue counts differ: {a} vs {b}")]
    IssueCountMismatch { a: u32, b: u32 },
    #[error("partition index {part} out of range 1..={k}")]
    PartOutOfRange { part: u32, k: u32 },
    #[error("assignment domain does not match the {role} vertex set")]
    AssignmentDomain { role: &'static str },
    #[error("decomposition is invalid for this graph: edge {vertices:?} spans two partitions")]
    EdgeSpansPartitions { vertices: Vec<u32> },
}

/// One nonzero polynomial coefficient: a sorted vertex set plus its weight.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hyperedge {
    vertices: Vec<u32>,
    weight: i64,
}

impl Hyperedge {
    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn arity(&self) -> usize {
        self.vertices.len()
    }

    /// True when every member vertex is set in `x`.
    pub fn is_active(&self, x: &Instantiation) -> bool {
        self.vertices.iter().all(|&v| x.get(v))
    }
}

/// A 0/1 assignment to all issues — one candidate contract.
///
/// Ordering is lexicographic in issue order (issue 1 first), which is the
/// tie-break used by every search in this crate.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Instantiation {
    issue_count: u32,
    blocks: Vec<u64>,
}

impl Instantiation {
    pub fn zeros(issue_count: u32) -> Self {
        let blocks = vec![0u64; issue_count.div_ceil(64) as usize];
        Instantiation {
            issue_count,
            blocks,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut x = Instantiation::zeros(bits.len() as u32);
        for (i, &b) in bits.iter().enumerate() {
            if b {
                x.set(i as u32 + 1, true);
            }
        }
        x
    }

    /// Parse a bit string such as `"0111"` (issue 1 first).
    pub fn from_bitstring(s: &str) -> Result<Self, String> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(format!("invalid bit character {other:?}")),
            }
        }
        Ok(Instantiation::from_bits(&bits))
    }

    /// The instantiation whose bits, issue 1 most significant, spell the
    /// binary expansion of `index`. Enumerating `0..2^n` in ascending index
    /// order therefore visits contracts in ascending lexicographic order.
    pub fn from_index(issue_count: u32, index: u64) -> Self {
        let mut x = Instantiation::zeros(issue_count);
        for v in 1..=issue_count {
            if (index >> (issue_count - v)) & 1 == 1 {
                x.set(v, true);
            }
        }
        x
    }

    pub fn len(&self) -> u32 {
        self.issue_count
    }

    pub fn is_empty(&self) -> bool {
        self.issue_count == 0
    }

    /// Value of issue `v` (1-indexed).
    pub fn get(&self, v: u32) -> bool {
        assert!(v >= 1 && v <= self.issue_count, "issue {v} out of range");
        let i = (v - 1) as usize;
        (self.blocks[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, v: u32, value: bool) {
        assert!(v >= 1 && v <= self.issue_count, "issue {v} out of range");
        let i = (v - 1) as usize;
        if value {
            self.blocks[i / 64] |= 1 << (i % 64);
        } else {
            self.blocks[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.blocks.iter().map(|b| b.count_ones()).sum()
    }

    /// Write `counter` onto `vertices` big-endian: vertices[0] takes the most
    /// significant of the low `vertices.len()` bits. With a strictly-greater
    /// replacement rule, ascending counters keep the lexicographically
    /// smallest argmax over that vertex set.
    pub fn apply_counter(&mut self, vertices: &[u32], counter: u64) {
        let p = vertices.len();
        for (j, &v) in vertices.iter().enumerate() {
            self.set(v, (counter >> (p - 1 - j)) & 1 == 1);
        }
    }

    /// Bitwise union. Used to compose per-partition contract fragments that
    /// live on disjoint vertex sets (plus identical cut bits).
    pub fn union(&self, other: &Instantiation) -> Instantiation {
        assert_eq!(self.issue_count, other.issue_count);
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a | b)
            .collect();
        Instantiation {
            issue_count: self.issue_count,
            blocks,
        }
    }
}

impl Ord for Instantiation {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.issue_count, other.issue_count);
        // Issue 1 sits at the LSB of block 0; reversing each block makes the
        // numeric comparison lexicographic in issue order.
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            let (ra, rb) = (a.reverse_bits(), b.reverse_bits());
            if ra != rb {
                return ra.cmp(&rb);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Instantiation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Instantiation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in 1..=self.issue_count {
            f.write_str(if self.get(v) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Instantiation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Instantiation({self})")
    }
}

/// Explicit 0/1 assignment over an arbitrary vertex subset, used for the
/// partition-local evaluation entry point.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    map: BTreeMap<u32, bool>,
}

impl Assignment {
    pub fn new(pairs: impl IntoIterator<Item = (u32, bool)>) -> Self {
        Assignment {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn domain(&self) -> impl Iterator<Item = u32> + '_ {
        self.map.keys().copied()
    }

    pub fn get(&self, v: u32) -> Option<bool> {
        self.map.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn domain_matches(&self, vertices: &[u32]) -> bool {
        self.map.len() == vertices.len() && self.map.keys().copied().eq(vertices.iter().copied())
    }
}

/// The k-additive utility polynomial as a weighted hypergraph.
///
/// Construction consolidates duplicate vertex sets by summing their weights
/// and drops anything that cancels to zero, so stored edges are unique,
/// nonzero, and sorted — two graphs representing the same polynomial compare
/// equal and serialize identically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtilityHypergraph {
    issue_count: u32,
    edges: Vec<Hyperedge>,
}

impl UtilityHypergraph {
    pub fn new(
        issue_count: u32,
        edges: impl IntoIterator<Item = (Vec<u32>, i64)>,
    ) -> Result<Self, HypergraphError> {
        if issue_count == 0 {
            return Err(HypergraphError::ZeroIssues);
        }
        let mut consolidated: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
        for (mut vertices, weight) in edges {
            if vertices.is_empty() {
                return Err(HypergraphError::EmptyEdge);
            }
            vertices.sort_unstable();
            for pair in vertices.windows(2) {
                if pair[0] == pair[1] {
                    return Err(HypergraphError::DuplicateVertex { vertex: pair[0] });
                }
            }
            for &v in &vertices {
                if v == 0 || v > issue_count {
                    return Err(HypergraphError::VertexOutOfRange {
                        vertex: v,
                        issue_count,
                    });
                }
            }
            *consolidated.entry(vertices).or_insert(0) += weight;
        }
        let edges = consolidated
            .into_iter()
            .filter(|(_, w)| *w != 0)
            .map(|(vertices, weight)| Hyperedge { vertices, weight })
            .collect();
        Ok(UtilityHypergraph { issue_count, edges })
    }

    pub fn empty(issue_count: u32) -> Result<Self, HypergraphError> {
        UtilityHypergraph::new(issue_count, std::iter::empty())
    }

    pub fn issue_count(&self) -> u32 {
        self.issue_count
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Degree of the largest stored coefficient (the `k` of k-additive).
    pub fn max_arity(&self) -> usize {
        self.edges.iter().map(Hyperedge::arity).max().unwrap_or(0)
    }

    /// Vertex degrees counting edge memberships, 1-indexed slot `v` at `v-1`.
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.issue_count as usize];
        for e in &self.edges {
            for &v in &e.vertices {
                deg[(v - 1) as usize] += 1;
            }
        }
        deg
    }

    /// Total utility of `x`: the sum of active edge weights.
    pub fn evaluate(&self, x: &Instantiation) -> Result<i64, HypergraphError> {
        if x.len() != self.issue_count {
            return Err(HypergraphError::DimensionMismatch {
                expected: self.issue_count,
                got: x.len(),
            });
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| e.is_active(x))
            .map(|e| e.weight)
            .sum())
    }

    /// Pointwise sum of two utility functions over the same issues.
    pub fn merge(&self, other: &UtilityHypergraph) -> Result<UtilityHypergraph, HypergraphError> {
        if self.issue_count != other.issue_count {
            return Err(HypergraphError::IssueCountMismatch {
                a: self.issue_count,
                b: other.issue_count,
            });
        }
        UtilityHypergraph::new(
            self.issue_count,
            self.edges
                .iter()
                .chain(&other.edges)
                .map(|e| (e.vertices.clone(), e.weight)),
        )
    }

    /// The edge structure with every weight set to 1 — what an agent reveals
    /// to the mediator.
    pub fn skeleton(&self) -> UtilityHypergraph {
        UtilityHypergraph {
            issue_count: self.issue_count,
            edges: self
                .edges
                .iter()
                .map(|e| Hyperedge {
                    vertices: e.vertices.clone(),
                    weight: 1,
                })
                .collect(),
        }
    }

    /// Sum of the weights of the edges *owned* by partition `part` that are
    /// fully active under the combined assignment.
    ///
    /// Ownership: an edge with at least one non-cut vertex belongs to the
    /// unique partition holding its non-cut vertices; an edge whose vertices
    /// are all in the cut set is residual and belongs to partition 1.
    /// Summed over all partitions this reproduces `evaluate` exactly for
    /// every completion of the two assignments.
    pub fn owned_evaluate(
        &self,
        d: &Decomposition,
        part: u32,
        x_free: &Assignment,
        x_cut: &Assignment,
    ) -> Result<i64, HypergraphError> {
        if d.issue_count() != self.issue_count {
            return Err(HypergraphError::DimensionMismatch {
                expected: self.issue_count,
                got: d.issue_count(),
            });
        }
        if part == 0 || part > d.k() {
            return Err(HypergraphError::PartOutOfRange { part, k: d.k() });
        }
        if !x_cut.domain_matches(&d.cut_set()) {
            return Err(HypergraphError::AssignmentDomain { role: "cut-set" });
        }
        if !x_free.domain_matches(&d.free_vertices(part)) {
            return Err(HypergraphError::AssignmentDomain { role: "free" });
        }
        let mut total = 0i64;
        for e in &self.edges {
            let owner = edge_owner(d, e.vertices())?;
            if owner != part {
                continue;
            }
            let active = e.vertices.iter().all(|&v| match d.part_of(v) {
                None => x_cut.get(v).unwrap(),
                Some(_) => x_free.get(v).unwrap(),
            });
            if active {
                total += e.weight;
            }
        }
        Ok(total)
    }
}

/// Owning partition of an edge under the decomposition's ownership rule,
/// or an error if the edge's non-cut vertices span two partitions (the
/// decomposition is then invalid for this graph).
pub fn edge_owner(d: &Decomposition, vertices: &[u32]) -> Result<u32, HypergraphError> {
    let mut owner: Option<u32> = None;
    for &v in vertices {
        if let Some(p) = d.part_of(v) {
            match owner {
                None => owner = Some(p),
                Some(q) if q != p => {
                    return Err(HypergraphError::EdgeSpansPartitions {
                        vertices: vertices.to_vec(),
                    })
                }
                Some(_) => {}
            }
        }
    }
    // Residual edges (all vertices in the cut set) ride with partition 1:
    // they are constant during every partition's inner search, and charging
    // them there keeps evaluation counts equal to the decomposition cost.
    Ok(owner.unwrap_or(1))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UhgParseError {
    #[error("line 1: expected header 'UHG 1'")]
    BadHeader,
    #[error("line 2: expected '<issues> <edges>'")]
    BadCounts,
    #[error("line {line}: malformed edge (want '<weight> <v1> ... <vk>')")]
    BadEdge { line: usize },
    #[error("line {line}: zero weight")]
    ZeroWeight { line: usize },
    #[error("line {line}: vertices must be sorted ascending")]
    Unsorted { line: usize },
    #[error("line {line}: duplicate vertex set")]
    DuplicateEdge { line: usize },
    #[error("expected {expected} edge lines, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] HypergraphError),
}

impl UtilityHypergraph {
    /// Serialize to the `.uhg` text format:
    ///
    /// ```text
    /// UHG 1
    /// <n> <m>
    /// <weight> <v1> ... <vk>     (m lines, vertices ascending)
    /// ```
    ///
    /// Edges are written in canonical (sorted vertex-set) order, so equal
    /// graphs serialize byte-identically.
    pub fn to_uhg_string(&self) -> String {
        let mut out = format!("UHG 1\n{} {}\n", self.issue_count, self.edges.len());
        for e in &self.edges {
            out.push_str(&e.weight.to_string());
            for v in &e.vertices {
                out.push(' ');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_uhg(text: &str) -> Result<Self, UhgParseError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(UhgParseError::BadHeader)?;
        if header.trim_end() != "UHG 1" {
            return Err(UhgParseError::BadHeader);
        }
        let (_, counts) = lines.next().ok_or(UhgParseError::BadCounts)?;
        let mut it = counts.split_whitespace();
        let n: u32 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(UhgParseError::BadCounts)?;
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(UhgParseError::BadCounts)?;
        if it.next().is_some() {
            return Err(UhgParseError::BadCounts);
        }

        let mut edges: Vec<(Vec<u32>, i64)> = Vec::with_capacity(m);
        let mut seen: std::collections::BTreeSet<Vec<u32>> = std::collections::BTreeSet::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let weight: i64 = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or(UhgParseError::BadEdge { line: line_no })?;
            if weight == 0 {
                return Err(UhgParseError::ZeroWeight { line: line_no });
            }
            let vertices: Vec<u32> = toks
                .map(|t| t.parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| UhgParseError::BadEdge { line: line_no })?;
            if vertices.is_empty() {
                return Err(UhgParseError::BadEdge { line: line_no });
            }
            if vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(UhgParseError::Unsorted { line: line_no });
            }
            if !seen.insert(vertices.clone()) {
                return Err(UhgParseError::DuplicateEdge { line: line_no });
            }
            edges.push((vertices, weight));
        }
        if edges.len() != m {
            return Err(UhgParseError::EdgeCount {
                expected: m,
                found: edges.len(),
            });
        }
        Ok(UtilityHypergraph::new(n, edges)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{buyer, seller};
    use crate::separator::Decomposition;

    fn x(bits: &str) -> Instantiation {
        Instantiation::from_bitstring(bits).unwrap()
    }

    #[test]
    fn buyer_fixture_values() {
        let g = buyer();
        assert_eq!(g.evaluate(&x("0111")).unwrap(), 13);
        assert_eq!(g.evaluate(&x("0000")).unwrap(), 0);
        // hand substitution: 7 + 5 - 5
        assert_eq!(g.evaluate(&x("1100")).unwrap(), 7);
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let g = buyer();
        let err = g.evaluate(&x("011")).unwrap_err();
        assert_eq!(
            err,
            HypergraphError::DimensionMismatch {
                expected: 4,
                got: 3
            }
        );
    }

    #[test]
    fn merged_buyer_seller() {
        let g = buyer().merge(&seller()).unwrap();
        assert_eq!(g.evaluate(&x("0111")).unwrap(), 7);
    }

    #[test]
    fn merge_identity_and_cancellation() {
        let g = buyer();
        let merged = g.merge(&UtilityHypergraph::empty(4).unwrap()).unwrap();
        assert_eq!(merged, g);

        let negated = UtilityHypergraph::new(
            4,
            g.edges().iter().map(|e| (e.vertices().to_vec(), -e.weight())),
        )
        .unwrap();
        let zero = g.merge(&negated).unwrap();
        let mut rng = crate::rng::SplitMix64::new(9);
        for _ in 0..10 {
            let xi = Instantiation::from_index(4, rng.gen_range(16));
            assert_eq!(zero.evaluate(&xi).unwrap(), 0);
        }
    }

    #[test]
    fn merge_rejects_issue_count_mismatch() {
        let a = UtilityHypergraph::empty(3).unwrap();
        let b = UtilityHypergraph::empty(4).unwrap();
        assert_eq!(
            a.merge(&b).unwrap_err(),
            HypergraphError::IssueCountMismatch { a: 3, b: 4 }
        );
    }

    #[test]
    fn consolidation_sums_duplicate_vertex_sets() {
        let g = UtilityHypergraph::new(3, vec![(vec![1, 2], 3), (vec![2, 1], 4), (vec![3], 1)])
            .unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.edges()[0].vertices(), &[1, 2]);
        assert_eq!(g.edges()[0].weight(), 7);

        let cancelled =
            UtilityHypergraph::new(3, vec![(vec![1, 2], 3), (vec![1, 2], -3)]).unwrap();
        assert_eq!(cancelled.edge_count(), 0);
    }

    #[test]
    fn construction_rejections() {
        assert_eq!(
            UtilityHypergraph::new(0, vec![]).unwrap_err(),
            HypergraphError::ZeroIssues
        );
        assert_eq!(
            UtilityHypergraph::new(2, vec![(vec![3], 1)]).unwrap_err(),
            HypergraphError::VertexOutOfRange {
                vertex: 3,
                issue_count: 2
            }
        );
        assert_eq!(
            UtilityHypergraph::new(2, vec![(vec![1, 1], 1)]).unwrap_err(),
            HypergraphError::DuplicateVertex { vertex: 1 }
        );
        assert_eq!(
            UtilityHypergraph::new(2, vec![(vec![], 1)]).unwrap_err(),
            HypergraphError::EmptyEdge
        );
    }

    #[test]
    fn instantiation_ordering_is_lexicographic() {
        assert!(x("0111") < x("1000"));
        assert!(x("0001") < x("0010"));
        let mut all: Vec<Instantiation> = (0..16).map(|i| Instantiation::from_index(4, i)).collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        all.reverse();
        all.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn instantiation_ordering_past_one_block() {
        let n = 130;
        let mut a = Instantiation::zeros(n);
        let mut b = Instantiation::zeros(n);
        a.set(130, true);
        b.set(129, true);
        // first difference at issue 129 decides
        assert!(a < b);
        b.set(1, true);
        // issue 1 is the most significant position
        assert!(a < b);
        a.set(1, true);
        assert!(a < b);
        a.set(129, true);
        // equal through issue 129, a alone carries 130
        assert!(b < a);
    }

    #[test]
    fn owned_evaluate_rejects_spanning_edge() {
        let g = UtilityHypergraph::new(2, vec![(vec![1, 2], 5)]).unwrap();
        let d = Decomposition::from_parts(2, &[], &[vec![1], vec![2]], 0.5).unwrap();
        let err = g
            .owned_evaluate(
                &d,
                1,
                &Assignment::new([(1, true)]),
                &Assignment::new([]),
            )
            .unwrap_err();
        assert_eq!(
            err,
            HypergraphError::EdgeSpansPartitions {
                vertices: vec![1, 2]
            }
        );
    }

    #[test]
    fn owned_evaluate_part_two_sees_only_its_unary_edges() {
        // all pairwise edges inside part 1; part 2 holds unary edges only
        let g = UtilityHypergraph::new(
            4,
            vec![(vec![1, 2], 10), (vec![1], 2), (vec![3], 3), (vec![4], -1)],
        )
        .unwrap();
        let d = Decomposition::from_parts(4, &[], &[vec![1, 2], vec![3, 4]], 0.5).unwrap();
        let x_free = Assignment::new([(3, true), (4, true)]);
        let x_cut = Assignment::new([]);
        assert_eq!(g.owned_evaluate(&d, 2, &x_free, &x_cut).unwrap(), 2);
    }

    #[test]
    fn owned_evaluate_rejects_wrong_domains() {
        let g = UtilityHypergraph::new(2, vec![(vec![1], 1)]).unwrap();
        let d = Decomposition::from_parts(2, &[2], &[vec![1]], 0.9).unwrap();
        let err = g
            .owned_evaluate(&d, 1, &Assignment::new([]), &Assignment::new([(2, false)]))
            .unwrap_err();
        assert_eq!(err, HypergraphError::AssignmentDomain { role: "free" });
        let err = g
            .owned_evaluate(
                &d,
                1,
                &Assignment::new([(1, true)]),
                &Assignment::new([(1, false)]),
            )
            .unwrap_err();
        assert_eq!(err, HypergraphError::AssignmentDomain { role: "cut-set" });
    }

    #[test]
    fn uhg_round_trip_and_golden_bytes() {
        let g = buyer();
        let text = g.to_uhg_string();
        assert_eq!(
            text,
            "UHG 1\n4 5\n7 1\n-5 1 2\n5 2\n4 2 3\n4 2 4\n"
        );
        assert_eq!(UtilityHypergraph::parse_uhg(&text).unwrap(), g);
    }

    #[test]
    fn uhg_parser_rejections() {
        assert_eq!(
            UtilityHypergraph::parse_uhg("UHG 2\n1 0\n").unwrap_err(),
            UhgParseError::BadHeader
        );
        assert_eq!(
            UtilityHypergraph::parse_uhg("UHG 1\n4\n").unwrap_err(),
            UhgParseError::BadCounts
        );
        assert_eq!(
            UtilityHypergraph::parse_uhg("UHG 1\n4 1\n0 1 2\n").unwrap_err(),
            UhgParseError::ZeroWeight { line: 3 }
        );
        assert_eq!(
            UtilityHypergraph::parse_uhg("UHG 1\n4 1\n3 2 1\n").unwrap_err(),
            UhgParseError::Unsorted { line: 3 }
        );
        assert_eq!(
            UtilityHypergraph::parse_uhg("UHG 1\n4 2\n3 1 2\n4 1 2\n").unwrap_err(),
            UhgParseError::DuplicateEdge { line: 4 }
        );
        assert_eq!(
            UtilityHypergraph::parse_uhg("UHG 1\n4 2\n3 1 2\n").unwrap_err(),
            UhgParseError::EdgeCount {
                expected: 2,
                found: 1
            }
        );
        assert!(matches!(
            UtilityHypergraph::parse_uhg("UHG 1\n4 1\n3 1 9\n").unwrap_err(),
            UhgParseError::Graph(HypergraphError::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn ownership_sums_reproduce_evaluate() {
        let g = buyer().merge(&seller()).unwrap();
        let d = Decomposition::from_parts(4, &[2], &[vec![1], vec![3, 4]], 0.5).unwrap();
        for idx in 0..16u64 {
            let xi = Instantiation::from_index(4, idx);
            let x_cut = Assignment::new([(2, xi.get(2))]);
            let total: i64 = (1..=2)
                .map(|p| {
                    let free = d.free_vertices(p);
                    let x_free = Assignment::new(free.iter().map(|&v| (v, xi.get(v))));
                    g.owned_evaluate(&d, p, &x_free, &x_cut).unwrap()
                })
                .sum();
            assert_eq!(total, g.evaluate(&xi).unwrap());
        }
    }
}
