//! Balanced decomposition of a utility hypergraph into k partitions plus a
//! cut-set vertex separator.
//!
//! Exhausting the cut set costs `2^|cut|`, and each partition is then an
//! independent inner search over its free vertices, so the total work for a
//! decomposed search is
//!
//! ```text
//! exact = 2^|cut| * (2^|free(1)| + ... + 2^|free(k)|)
//! upper = 2^|cut| * k * 2^(max free)
//! ```
//!
//! with the bound tight for a perfectly balanced cut. The partitioner is a
//! multilevel recursive bisection: coarsen by heavy-edge matching, bisect,
//! refine with Fiduccia-Mattheyses vertex moves, then convert the cut edges
//! of each bisection into a vertex separator by greedy minimum cover.
//! Everything is deterministic given the seed.

mod multilevel;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::hypergraph::{edge_owner, UtilityHypergraph};
use crate::rng::SplitMix64;

use multilevel::Fragment;

#[derive(Debug, Error, PartialEq)]
pub enum DecompositionError {
    #[error("k must be at least 1, got 0")]
    ZeroParts,
    #[error("cannot split {issue_count} vertices into {k} partitions")]
    InfeasibleParts { k: u32, issue_count: u32 },
    #[error("epsilon must lie in (0, 1), got {epsilon}")]
    BadEpsilon { epsilon: f64 },
    #[error("vertex {vertex} out of range 1..={issue_count}")]
    VertexOutOfRange { vertex: u32, issue_count: u32 },
    #[error("vertex {vertex} assigned more than once")]
    DuplicateVertex { vertex: u32 },
    #[error("vertex {vertex} is neither in the cut set nor in any partition")]
    UnassignedVertex { vertex: u32 },
    #[error("partition index {part} out of range 1..={k}")]
    PartOutOfRange { part: u32, k: u32 },
    #[error("decomposition text is malformed: {0}")]
    Parse(String),
}

/// Partition assignment of every vertex: cut-set members plus, for each free
/// vertex, its unique partition. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    issue_count: u32,
    /// slot v-1: 0 = cut, 1..=k = partition
    assign: Vec<u32>,
    k: u32,
    epsilon: f64,
}

impl Decomposition {
    pub fn new(
        issue_count: u32,
        assign: Vec<u32>,
        k: u32,
        epsilon: f64,
    ) -> Result<Self, DecompositionError> {
        if k == 0 {
            return Err(DecompositionError::ZeroParts);
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(DecompositionError::BadEpsilon { epsilon });
        }
        if assign.len() != issue_count as usize {
            return Err(DecompositionError::UnassignedVertex {
                vertex: assign.len() as u32 + 1,
            });
        }
        for (i, &p) in assign.iter().enumerate() {
            if p > k {
                return Err(DecompositionError::PartOutOfRange { part: p, k });
            }
            let _ = i;
        }
        Ok(Decomposition {
            issue_count,
            assign,
            k,
            epsilon,
        })
    }

    /// Build from explicit vertex lists; every vertex must appear exactly once.
    pub fn from_parts(
        issue_count: u32,
        cut: &[u32],
        parts: &[Vec<u32>],
        epsilon: f64,
    ) -> Result<Self, DecompositionError> {
        let k = parts.len() as u32;
        let mut assign = vec![u32::MAX; issue_count as usize];
        let mut place = |v: u32, label: u32| -> Result<(), DecompositionError> {
            if v == 0 || v > issue_count {
                return Err(DecompositionError::VertexOutOfRange {
                    vertex: v,
                    issue_count,
                });
            }
            let slot = &mut assign[(v - 1) as usize];
            if *slot != u32::MAX {
                return Err(DecompositionError::DuplicateVertex { vertex: v });
            }
            *slot = label;
            Ok(())
        };
        for &v in cut {
            place(v, 0)?;
        }
        for (i, part) in parts.iter().enumerate() {
            for &v in part {
                place(v, i as u32 + 1)?;
            }
        }
        if let Some(i) = assign.iter().position(|&p| p == u32::MAX) {
            return Err(DecompositionError::UnassignedVertex {
                vertex: i as u32 + 1,
            });
        }
        Decomposition::new(issue_count, assign, k, epsilon)
    }

    pub fn issue_count(&self) -> u32 {
        self.issue_count
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Partition of a free vertex, or `None` for cut-set members.
    pub fn part_of(&self, v: u32) -> Option<u32> {
        match self.assign[(v - 1) as usize] {
            0 => None,
            p => Some(p),
        }
    }

    pub fn cut_set(&self) -> Vec<u32> {
        (1..=self.issue_count)
            .filter(|&v| self.part_of(v).is_none())
            .collect()
    }

    pub fn cut_size(&self) -> usize {
        self.assign.iter().filter(|&&p| p == 0).count()
    }

    pub fn free_vertices(&self, part: u32) -> Vec<u32> {
        (1..=self.issue_count)
            .filter(|&v| self.part_of(v) == Some(part))
            .collect()
    }

    /// Free-vertex counts per partition, index 0 = partition 1.
    pub fn free_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k as usize];
        for &p in &self.assign {
            if p > 0 {
                sizes[(p - 1) as usize] += 1;
            }
        }
        sizes
    }

    pub fn max_free(&self) -> usize {
        self.free_sizes().into_iter().max().unwrap_or(0)
    }

    /// Allowed pairwise difference in free sizes: `ceil(epsilon * n)`.
    pub fn balance_tolerance(&self) -> usize {
        (self.epsilon * self.issue_count as f64).ceil() as usize
    }

    /// Owner partition per edge of `g`, in `g.edges()` order.
    pub fn ownership(&self, g: &UtilityHypergraph) -> Result<Vec<u32>, Violation> {
        g.edges()
            .iter()
            .map(|e| {
                edge_owner(self, e.vertices()).map_err(|_| Violation::EdgeSpansPartitions {
                    vertices: e.vertices().to_vec(),
                })
            })
            .collect()
    }

    /// Text form: a `CUT` line, then one `PART <i>:` line per partition.
    pub fn to_text(&self) -> String {
        let mut out = String::from("CUT");
        for v in self.cut_set() {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
        for p in 1..=self.k {
            out.push_str(&format!("PART {p}:"));
            for v in self.free_vertices(p) {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parse the text form. The balance tolerance is not carried by the
    /// format, so the caller supplies `epsilon`.
    pub fn parse_text(text: &str, epsilon: f64) -> Result<Self, DecompositionError> {
        let mut cut: Vec<u32> = Vec::new();
        let mut parts: Vec<Vec<u32>> = Vec::new();
        let mut saw_cut = false;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            let parse_verts = |s: &str| -> Result<Vec<u32>, DecompositionError> {
                s.split_whitespace()
                    .map(|t| {
                        t.parse::<u32>().map_err(|_| {
                            DecompositionError::Parse(format!("line {}: bad vertex {t:?}", ln + 1))
                        })
                    })
                    .collect()
            };
            if let Some(rest) = line.strip_prefix("CUT") {
                if saw_cut {
                    return Err(DecompositionError::Parse(format!(
                        "line {}: duplicate CUT line",
                        ln + 1
                    )));
                }
                saw_cut = true;
                cut = parse_verts(rest)?;
            } else if let Some(rest) = line.strip_prefix("PART") {
                let (idx_str, verts_str) = rest.split_once(':').ok_or_else(|| {
                    DecompositionError::Parse(format!("line {}: PART line missing ':'", ln + 1))
                })?;
                let idx: usize = idx_str.trim().parse().map_err(|_| {
                    DecompositionError::Parse(format!("line {}: bad partition index", ln + 1))
                })?;
                if idx != parts.len() + 1 {
                    return Err(DecompositionError::Parse(format!(
                        "line {}: expected PART {}, got PART {}",
                        ln + 1,
                        parts.len() + 1,
                        idx
                    )));
                }
                parts.push(parse_verts(verts_str)?);
            } else {
                return Err(DecompositionError::Parse(format!(
                    "line {}: expected CUT or PART",
                    ln + 1
                )));
            }
        }
        if !saw_cut {
            return Err(DecompositionError::Parse("missing CUT line".into()));
        }
        if parts.is_empty() {
            return Err(DecompositionError::Parse("no PART lines".into()));
        }
        let n = cut
            .iter()
            .chain(parts.iter().flatten())
            .copied()
            .max()
            .unwrap_or(0);
        let count = cut.len() + parts.iter().map(Vec::len).sum::<usize>();
        if n as usize != count {
            return Err(DecompositionError::Parse(format!(
                "vertices 1..={n} expected, {count} listed"
            )));
        }
        Decomposition::from_parts(n, &cut, &parts, epsilon)
    }
}

/// First violated invariant found by `validate`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("edge {vertices:?} has free vertices in partitions {part_a} and {part_b}")]
    EdgeSpansPartitions2 {
        vertices: Vec<u32>,
        part_a: u32,
        part_b: u32,
    },
    #[error("edge {vertices:?} has free vertices in more than one partition")]
    EdgeSpansPartitions { vertices: Vec<u32> },
    #[error(
        "partitions {part_a} and {part_b} have free sizes {size_a} and {size_b}, tolerance {tolerance}"
    )]
    Imbalance {
        part_a: u32,
        part_b: u32,
        size_a: usize,
        size_b: usize,
        tolerance: usize,
    },
}

/// Check validity (each edge's free vertices within one partition) and
/// balance (pairwise free sizes within `ceil(epsilon*n)`), reporting the
/// first violation in edge order, then partition order.
pub fn validate(g: &UtilityHypergraph, d: &Decomposition) -> Result<(), Violation> {
    for e in g.edges() {
        let mut first: Option<u32> = None;
        for &v in e.vertices() {
            if let Some(p) = d.part_of(v) {
                match first {
                    None => first = Some(p),
                    Some(q) if q != p => {
                        return Err(Violation::EdgeSpansPartitions2 {
                            vertices: e.vertices().to_vec(),
                            part_a: q.min(p),
                            part_b: q.max(p),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let sizes = d.free_sizes();
    let tolerance = d.balance_tolerance();
    let (mut lo, mut hi) = (0usize, 0usize);
    for (i, &s) in sizes.iter().enumerate() {
        if s < sizes[lo] {
            lo = i;
        }
        if s > sizes[hi] {
            hi = i;
        }
    }
    if sizes[hi] - sizes[lo] > tolerance {
        let (part_a, part_b) = (lo.min(hi) as u32 + 1, lo.max(hi) as u32 + 1);
        return Err(Violation::Imbalance {
            part_a,
            part_b,
            size_a: sizes[(part_a - 1) as usize],
            size_b: sizes[(part_b - 1) as usize],
            tolerance,
        });
    }
    Ok(())
}

/// Exact and upper-bound work counts for a decomposed search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostEstimate {
    pub exact: BigUint,
    pub upper_bound: BigUint,
}

impl CostEstimate {
    pub fn log2_exact(&self) -> f64 {
        log2_biguint(&self.exact)
    }
}

pub fn cost_estimate(d: &Decomposition) -> CostEstimate {
    let cut = d.cut_size();
    let sizes = d.free_sizes();
    let outer = BigUint::one() << cut;
    let inner: BigUint = sizes
        .iter()
        .map(|&s| BigUint::one() << s)
        .fold(BigUint::zero(), |a, b| a + b);
    let max_free = sizes.iter().copied().max().unwrap_or(0);
    CostEstimate {
        exact: &outer * inner,
        upper_bound: outer * BigUint::from(d.k()) * (BigUint::one() << max_free),
    }
}

/// log2 of an arbitrary-size count, good to f64 precision.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        return (x.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_u64().unwrap() as f64;
    top.log2() + shift as f64
}

/// Balanced decomposition of `g` into `k` partitions, minimizing the cut set
/// best-effort. Deterministic given the seed.
pub fn partition_balanced(
    g: &UtilityHypergraph,
    k: u32,
    epsilon: f64,
    seed: u64,
) -> Result<Decomposition, DecompositionError> {
    let n = g.issue_count();
    if k == 0 {
        return Err(DecompositionError::ZeroParts);
    }
    if k > n {
        return Err(DecompositionError::InfeasibleParts { k, issue_count: n });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(DecompositionError::BadEpsilon { epsilon });
    }
    if k == 1 {
        return Decomposition::new(n, vec![1; n as usize], 1, epsilon);
    }

    let mut rng = SplitMix64::substream(seed, 0x7061_7274); // "part"
    let tolerance = (epsilon * n as f64).ceil().max(1.0) as usize;

    // Structural edges: arity >= 2 vertex sets. Unary edges never constrain a
    // decomposition.
    let struct_edges: Vec<Vec<u32>> = g
        .edges()
        .iter()
        .filter(|e| e.arity() >= 2)
        .map(|e| e.vertices().to_vec())
        .collect();

    let mut cut: BTreeSet<u32> = BTreeSet::new();
    let all: Vec<u32> = (1..=n).collect();
    split_recursive(&struct_edges, &all, k, tolerance, &mut cut, &mut rng);

    // Pack free components into k bins, splitting further if the granularity
    // cannot reach the balance tolerance.
    loop {
        let comps = free_components(&struct_edges, n, &cut);
        let bins = pack_components(&comps, k as usize);
        let sizes: Vec<usize> = bins.iter().map(|b| b.iter().map(|c| comps[*c].len()).sum()).collect();
        let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
        if spread <= tolerance {
            let mut assign = vec![0u32; n as usize];
            for (b, comp_ids) in bins.iter().enumerate() {
                for &c in comp_ids {
                    for &v in &comps[c] {
                        assign[(v - 1) as usize] = b as u32 + 1;
                    }
                }
            }
            let d = Decomposition::new(n, assign, k, epsilon)?;
            debug_assert_eq!(validate(g, &d), Ok(()));
            return Ok(d);
        }
        // Largest component caps the packing granularity; bisect it.
        let largest = comps
            .iter()
            .enumerate()
            .max_by_key(|(i, c)| (c.len(), std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
            .unwrap();
        if comps[largest].len() < 2 {
            // All singletons pack within a spread of 1 <= tolerance, so this
            // is unreachable; bail out rather than loop.
            unreachable!("singleton components cannot violate balance");
        }
        let sep = bisect_component(&struct_edges, &comps[largest], 0.5, tolerance, &mut rng);
        debug_assert!(!sep.is_empty(), "connected component bisected without a separator");
        if sep.is_empty() {
            // cannot make progress; fall back to cutting the lowest vertex
            cut.insert(comps[largest][0]);
        } else {
            cut.extend(sep);
        }
    }
}

/// One row per requested k: the decomposition's cut size and exact cost.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub k: u32,
    pub cutset_size: usize,
    pub exact_cost: BigUint,
}

/// Partition `g` once per k value. Each row uses an RNG stream derived from
/// `(seed, k)`, so rows are independent of evaluation order.
pub fn sweep_partitions(
    g: &UtilityHypergraph,
    k_values: &[u32],
    epsilon: f64,
    seed: u64,
) -> Result<Vec<SweepRow>, DecompositionError> {
    k_values
        .iter()
        .map(|&k| {
            let mut row_seed = SplitMix64::substream(seed, k as u64);
            let d = partition_balanced(g, k, epsilon, row_seed.next_u64())?;
            Ok(SweepRow {
                k,
                cutset_size: d.cut_size(),
                exact_cost: cost_estimate(&d).exact,
            })
        })
        .collect()
}

/// Recursive bisection: split the vertex set toward a kl:kr proportional
/// target, preferring zero-cut splits when the induced subgraph is already
/// disconnected, and bisecting the largest component otherwise.
fn split_recursive(
    struct_edges: &[Vec<u32>],
    verts: &[u32],
    k: u32,
    tolerance: usize,
    cut: &mut BTreeSet<u32>,
    rng: &mut SplitMix64,
) {
    if k <= 1 || verts.len() <= 1 {
        return;
    }
    let kl = k.div_ceil(2);
    let kr = k - kl;
    let slack = (tolerance / 2).max(1);

    let mut live: Vec<u32> = verts.iter().filter(|v| !cut.contains(v)).copied().collect();
    loop {
        let comps = components_of(struct_edges, &live);
        let total: usize = live.len();
        let target_l = (total * kl as usize) / k as usize;
        let (left, right, dev) = pack_two_sides(&comps, target_l);
        if dev <= slack || comps.iter().map(Vec::len).max().unwrap_or(0) < 2 {
            let lv: Vec<u32> = left.iter().flat_map(|&c| comps[c].iter().copied()).collect();
            let rv: Vec<u32> = right.iter().flat_map(|&c| comps[c].iter().copied()).collect();
            split_recursive(struct_edges, &lv, kl, tolerance, cut, rng);
            split_recursive(struct_edges, &rv, kr, tolerance, cut, rng);
            return;
        }
        let largest = comps
            .iter()
            .enumerate()
            .max_by_key(|(i, c)| (c.len(), std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
            .unwrap();
        let frac = kl as f64 / k as f64;
        let sep = bisect_component(struct_edges, &comps[largest], frac, tolerance, rng);
        debug_assert!(!sep.is_empty(), "connected component bisected without a separator");
        if sep.is_empty() {
            cut.insert(comps[largest][0]);
        } else {
            cut.extend(sep.iter().copied());
        }
        live.retain(|v| !cut.contains(v));
    }
}

/// Multilevel-bisect one connected component and return the separator.
fn bisect_component(
    struct_edges: &[Vec<u32>],
    comp: &[u32],
    frac: f64,
    tolerance: usize,
    rng: &mut SplitMix64,
) -> Vec<u32> {
    let frag = Fragment::induced(struct_edges, comp);
    let target_a = ((comp.len() as f64 * frac).round() as usize).clamp(1, comp.len() - 1);
    let slack = (tolerance / 2).max(1);
    let outcome = multilevel::bisect(&frag, target_a, slack, rng);
    outcome
        .separator
        .into_iter()
        .map(|local| comp[local as usize])
        .collect()
}

/// Connected components of the subgraph induced on `verts` (edges bind their
/// surviving vertices). Components are sorted internally and returned in
/// order of their smallest vertex.
fn components_of(struct_edges: &[Vec<u32>], verts: &[u32]) -> Vec<Vec<u32>> {
    let sorted: Vec<u32> = {
        let mut s = verts.to_vec();
        s.sort_unstable();
        s
    };
    let index_of = |v: u32| sorted.binary_search(&v).ok();
    let mut dsu = Dsu::new(sorted.len());
    for e in struct_edges {
        let mut prev: Option<usize> = None;
        for &v in e {
            if let Some(i) = index_of(v) {
                if let Some(p) = prev {
                    dsu.union(p, i);
                }
                prev = Some(i);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for (i, &v) in sorted.iter().enumerate() {
        groups.entry(dsu.find(i)).or_default().push(v);
    }
    let mut comps: Vec<Vec<u32>> = groups.into_values().collect();
    comps.sort_by_key(|c| c[0]);
    comps
}

fn free_components(struct_edges: &[Vec<u32>], n: u32, cut: &BTreeSet<u32>) -> Vec<Vec<u32>> {
    let free: Vec<u32> = (1..=n).filter(|v| !cut.contains(v)).collect();
    let pruned: Vec<Vec<u32>> = struct_edges
        .iter()
        .map(|e| e.iter().filter(|v| !cut.contains(v)).copied().collect::<Vec<u32>>())
        .filter(|e| e.len() >= 2)
        .collect();
    components_of(&pruned, &free)
}

/// Largest-first packing into k bins, each component atomic.
/// Returns per-bin component indices; bins renumbered by smallest vertex.
fn pack_components(comps: &[Vec<u32>], k: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(comps[i].len()), comps[i][0]));
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut sizes = vec![0usize; k];
    for i in order {
        let target = (0..k).min_by_key(|&b| (sizes[b], b)).unwrap();
        bins[target].push(i);
        sizes[target] += comps[i].len();
    }
    bins.sort_by_key(|b| {
        b.iter()
            .map(|&c| comps[c][0])
            .min()
            .unwrap_or(u32::MAX)
    });
    bins
}

/// Pack components onto two sides aiming at `target_l` vertices on the left.
/// Returns (left component ids, right component ids, deviation from target).
fn pack_two_sides(comps: &[Vec<u32>], target_l: usize) -> (Vec<usize>, Vec<usize>, usize) {
    let total: usize = comps.iter().map(Vec::len).sum();
    let target_r = total - target_l;
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(comps[i].len()), comps[i][0]));
    let (mut left, mut right) = (Vec::new(), Vec::new());
    let (mut size_l, mut size_r) = (0usize, 0usize);
    for i in order {
        let need_l = target_l.saturating_sub(size_l);
        let need_r = target_r.saturating_sub(size_r);
        if need_l >= need_r {
            left.push(i);
            size_l += comps[i].len();
        } else {
            right.push(i);
            size_r += comps[i].len();
        }
    }
    let dev = size_l.abs_diff(target_l);
    (left, right, dev)
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // lower root wins, keeps component labels stable
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}
