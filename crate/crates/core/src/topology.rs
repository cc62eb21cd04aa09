//! Seeded generators for the three utility-graph families used in the
//! experiments: fixed-edge-count random graphs, Watts-Strogatz small worlds,
//! and Barabasi-Albert preferential attachment. All three emit 2-vertex
//! edges with uniform nonzero integer weights; identical specs produce
//! byte-identical graphs on every platform.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::hypergraph::UtilityHypergraph;
use crate::rng::SplitMix64;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("vertex count must be at least 2, got {0}")]
    TooFewVertices(u32),
    #[error("{requested} edges requested, at most {max} possible on {n} vertices")]
    TooManyEdges { requested: u64, max: u64, n: u32 },
    #[error("ring degree {ring_degree} invalid: must be even and in 2..{n}")]
    BadRingDegree { ring_degree: u32, n: u32 },
    #[error("rewire probability {0} outside [0, 1]")]
    BadRewireProb(f64),
    #[error("attach count {attach_count} invalid: must be in 1..{n}")]
    BadAttachCount { attach_count: u32, n: u32 },
    #[error("weight bound must be at least 1, got {0}")]
    BadWeightBound(i64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum TopologyKind {
    /// Exactly `edge_count` distinct edges with uniform endpoints.
    Random { edge_count: u64 },
    /// Ring lattice with each edge independently rewired.
    SmallWorld { ring_degree: u32, rewire_prob: f64 },
    /// Preferential attachment from a seed clique of `attach_count + 1`.
    ScaleFree { attach_count: u32 },
}

impl TopologyKind {
    pub fn name(&self) -> &'static str {
        match self {
            TopologyKind::Random { .. } => "random",
            TopologyKind::SmallWorld { .. } => "small_world",
            TopologyKind::ScaleFree { .. } => "scale_free",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    pub issue_count: u32,
    /// Weights are uniform over `{-W..-1, 1..W}`.
    pub weight_bound: i64,
    pub seed: u64,
}

impl TopologySpec {
    pub fn generate(&self) -> Result<UtilityHypergraph, TopologyError> {
        if self.issue_count < 2 {
            return Err(TopologyError::TooFewVertices(self.issue_count));
        }
        if self.weight_bound < 1 {
            return Err(TopologyError::BadWeightBound(self.weight_bound));
        }
        let mut rng = SplitMix64::new(self.seed);
        let structure = match self.kind {
            TopologyKind::Random { edge_count } => {
                gen_random_structure(self.issue_count, edge_count, &mut rng)?
            }
            TopologyKind::SmallWorld {
                ring_degree,
                rewire_prob,
            } => gen_small_world_structure(self.issue_count, ring_degree, rewire_prob, &mut rng)?,
            TopologyKind::ScaleFree { attach_count } => {
                gen_scale_free_structure(self.issue_count, attach_count, &mut rng)?
            }
        };
        let edges = structure
            .into_iter()
            .map(|(a, b)| (vec![a, b], sample_weight(&mut rng, self.weight_bound)));
        Ok(UtilityHypergraph::new(self.issue_count, edges).expect("generated edges are valid"))
    }
}

/// Uniform draw from `{-bound..-1, 1..bound}` — zero excluded so every
/// stored coefficient is live.
pub fn sample_weight(rng: &mut SplitMix64, bound: i64) -> i64 {
    assert!(bound >= 1, "weight bound must be positive");
    let v = rng.gen_range(2 * bound as u64) as i64;
    if v < bound {
        v - bound // -bound ..= -1
    } else {
        v - bound + 1 // 1 ..= bound
    }
}

/// Redraw a fresh weight for every edge of `g`, keeping the structure.
/// Used to hand the same generated topology to several agents.
pub fn reweight(g: &UtilityHypergraph, weight_bound: i64, seed: u64) -> UtilityHypergraph {
    let mut rng = SplitMix64::new(seed);
    UtilityHypergraph::new(
        g.issue_count(),
        g.edges()
            .iter()
            .map(|e| (e.vertices().to_vec(), sample_weight(&mut rng, weight_bound))),
    )
    .expect("reweighted edges are valid")
}

fn gen_random_structure(
    n: u32,
    edge_count: u64,
    rng: &mut SplitMix64,
) -> Result<Vec<(u32, u32)>, TopologyError> {
    let max = n as u64 * (n as u64 - 1) / 2;
    if edge_count > max {
        return Err(TopologyError::TooManyEdges {
            requested: edge_count,
            max,
            n,
        });
    }
    if edge_count > max / 2 {
        // dense request: enumerate every pair and take a seeded partial shuffle
        let mut all: Vec<(u32, u32)> = Vec::with_capacity(max as usize);
        for a in 1..=n {
            for b in (a + 1)..=n {
                all.push((a, b));
            }
        }
        for i in 0..edge_count as usize {
            let j = i + rng.gen_range((all.len() - i) as u64) as usize;
            all.swap(i, j);
        }
        all.truncate(edge_count as usize);
        return Ok(all);
    }
    let mut seen: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut edges = Vec::with_capacity(edge_count as usize);
    while edges.len() < edge_count as usize {
        let a = rng.gen_range(n as u64) as u32 + 1;
        let b = rng.gen_range(n as u64) as u32 + 1;
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            edges.push(key);
        }
    }
    Ok(edges)
}

fn gen_small_world_structure(
    n: u32,
    ring_degree: u32,
    rewire_prob: f64,
    rng: &mut SplitMix64,
) -> Result<Vec<(u32, u32)>, TopologyError> {
    if ring_degree < 2 || ring_degree % 2 != 0 || ring_degree >= n {
        return Err(TopologyError::BadRingDegree { ring_degree, n });
    }
    if !(0.0..=1.0).contains(&rewire_prob) {
        return Err(TopologyError::BadRewireProb(rewire_prob));
    }
    // ring lattice: vertex i (0-based) connects to its ring_degree/2 nearest
    // clockwise neighbors
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut present: BTreeSet<(u32, u32)> = BTreeSet::new();
    let norm = |a: u32, b: u32| (a.min(b), a.max(b));
    for j in 1..=ring_degree / 2 {
        for i in 0..n {
            let e = norm(i + 1, (i + j) % n + 1);
            if present.insert(e) {
                edges.push(e);
            }
        }
    }
    // rewire pass: each edge independently, redrawing the far endpoint
    for idx in 0..edges.len() {
        if !rng.gen_bool(rewire_prob) {
            continue;
        }
        let (home, old_far) = edges[idx];
        // a vertex adjacent to everyone cannot be rewired further
        let degree_home = present
            .iter()
            .filter(|&&(a, b)| a == home || b == home)
            .count() as u32;
        if degree_home >= n - 1 {
            continue;
        }
        loop {
            let far = rng.gen_range(n as u64) as u32 + 1;
            if far == home {
                continue;
            }
            let candidate = norm(home, far);
            if present.contains(&candidate) {
                continue;
            }
            present.remove(&norm(home, old_far));
            present.insert(candidate);
            edges[idx] = candidate;
            break;
        }
    }
    Ok(edges)
}

fn gen_scale_free_structure(
    n: u32,
    attach_count: u32,
    rng: &mut SplitMix64,
) -> Result<Vec<(u32, u32)>, TopologyError> {
    if attach_count < 1 || attach_count >= n {
        return Err(TopologyError::BadAttachCount { attach_count, n });
    }
    let a = attach_count;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    // endpoint pool: each vertex appears once per unit of degree, so a
    // uniform pool draw is degree-proportional
    let mut pool: Vec<u32> = Vec::new();
    for i in 1..=a + 1 {
        for j in (i + 1)..=a + 1 {
            edges.push((i, j));
            pool.push(i);
            pool.push(j);
        }
    }
    for v in (a + 2)..=n {
        let mut targets: Vec<u32> = Vec::with_capacity(a as usize);
        while targets.len() < a as usize {
            let t = pool[rng.gen_range(pool.len() as u64) as usize];
            if t == v || targets.contains(&t) {
                continue; // duplicate hit: redraw, keeping the edge count exact
            }
            targets.push(t);
        }
        for &t in &targets {
            edges.push((t.min(v), t.max(v)));
            pool.push(t);
            pool.push(v);
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(g: &UtilityHypergraph) -> Vec<u32> {
        g.degrees()
    }

    #[test]
    fn random_exact_edge_count_and_degree() {
        let spec = TopologySpec {
            kind: TopologyKind::Random { edge_count: 100 },
            issue_count: 100,
            weight_bound: 10,
            seed: 7,
        };
        let g = spec.generate().unwrap();
        assert_eq!(g.edge_count(), 100);
        let deg = degrees(&g);
        let mean = deg.iter().sum::<u32>() as f64 / deg.len() as f64;
        assert_eq!(mean, 2.0);
        assert!(g.edges().iter().all(|e| e.arity() == 2));
    }

    #[test]
    fn random_two_vertices_single_edge() {
        let spec = TopologySpec {
            kind: TopologyKind::Random { edge_count: 1 },
            issue_count: 2,
            weight_bound: 5,
            seed: 3,
        };
        let g = spec.generate().unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].vertices(), &[1, 2]);
    }

    #[test]
    fn random_rejects_too_many_edges() {
        let spec = TopologySpec {
            kind: TopologyKind::Random { edge_count: 7 },
            issue_count: 3,
            weight_bound: 5,
            seed: 3,
        };
        assert_eq!(
            spec.generate().unwrap_err(),
            TopologyError::TooManyEdges {
                requested: 7,
                max: 3,
                n: 3
            }
        );
    }

    #[test]
    fn random_dense_request_uses_every_pair_once() {
        let spec = TopologySpec {
            kind: TopologyKind::Random { edge_count: 40 },
            issue_count: 10,
            weight_bound: 3,
            seed: 9,
        };
        let g = spec.generate().unwrap();
        assert_eq!(g.edge_count(), 40);
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in [
            TopologyKind::Random { edge_count: 50 },
            TopologyKind::SmallWorld {
                ring_degree: 2,
                rewire_prob: 0.1,
            },
            TopologyKind::ScaleFree { attach_count: 1 },
        ] {
            let spec = TopologySpec {
                kind,
                issue_count: 50,
                weight_bound: 10,
                seed: 1234,
            };
            let a = spec.generate().unwrap().to_uhg_string();
            let b = spec.generate().unwrap().to_uhg_string();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn small_world_without_rewiring_is_the_lattice() {
        let spec = TopologySpec {
            kind: TopologyKind::SmallWorld {
                ring_degree: 4,
                rewire_prob: 0.0,
            },
            issue_count: 20,
            weight_bound: 10,
            seed: 5,
        };
        let g = spec.generate().unwrap();
        assert_eq!(g.edge_count(), 40);
        assert!(degrees(&g).iter().all(|&d| d == 4));
    }

    #[test]
    fn small_world_edge_count_preserved() {
        let spec = TopologySpec {
            kind: TopologyKind::SmallWorld {
                ring_degree: 2,
                rewire_prob: 0.1,
            },
            issue_count: 50,
            weight_bound: 10,
            seed: 21,
        };
        let g = spec.generate().unwrap();
        assert_eq!(g.edge_count(), 50);
    }

    #[test]
    fn small_world_full_rewire_leaves_the_lattice() {
        // with p = 1 at least half the edges must differ from the ring
        let lattice: BTreeSet<(u32, u32)> = (0..100u32)
            .map(|i| {
                let a = i + 1;
                let b = (i + 1) % 100 + 1;
                (a.min(b), a.max(b))
            })
            .collect();
        let mut total_delta = 0usize;
        for seed in 0..10 {
            let spec = TopologySpec {
                kind: TopologyKind::SmallWorld {
                    ring_degree: 2,
                    rewire_prob: 1.0,
                },
                issue_count: 100,
                weight_bound: 10,
                seed,
            };
            let g = spec.generate().unwrap();
            let rewired = g
                .edges()
                .iter()
                .filter(|e| {
                    let v = e.vertices();
                    !lattice.contains(&(v[0], v[1]))
                })
                .count();
            total_delta += rewired;
        }
        assert!(
            total_delta >= 500,
            "only {total_delta}/1000 edges left the lattice"
        );
    }

    #[test]
    fn small_world_rejects_bad_ring_degree() {
        for rd in [0u32, 3, 20] {
            let spec = TopologySpec {
                kind: TopologyKind::SmallWorld {
                    ring_degree: rd,
                    rewire_prob: 0.1,
                },
                issue_count: 20,
                weight_bound: 10,
                seed: 5,
            };
            assert!(spec.generate().is_err(), "ring_degree {rd} accepted");
        }
    }

    #[test]
    fn scale_free_small_case_is_a_path() {
        let spec = TopologySpec {
            kind: TopologyKind::ScaleFree { attach_count: 1 },
            issue_count: 3,
            weight_bound: 10,
            seed: 2,
        };
        let g = spec.generate().unwrap();
        // seed pair {1,2} plus one attachment: every 2-edge graph on three
        // vertices is a path (equivalently a 2-leaf star)
        assert_eq!(g.edge_count(), 2);
        let deg = degrees(&g);
        assert_eq!(deg.iter().sum::<u32>(), 4);
        assert_eq!(*deg.iter().max().unwrap(), 2);
    }

    #[test]
    fn scale_free_rejects_bad_attach_count() {
        let spec = TopologySpec {
            kind: TopologyKind::ScaleFree { attach_count: 5 },
            issue_count: 5,
            weight_bound: 10,
            seed: 2,
        };
        assert_eq!(
            spec.generate().unwrap_err(),
            TopologyError::BadAttachCount {
                attach_count: 5,
                n: 5
            }
        );
    }

    #[test]
    fn scale_free_concentrates_degree_on_hubs() {
        // top-1% of vertices hold a disproportionate share of edge endpoints;
        // the 8% floor was pinned from a pilot over these exact seeds
        // (observed minimum 10.4%, mean ~13%)
        for seed in 0..20u64 {
            let spec = TopologySpec {
                kind: TopologyKind::ScaleFree { attach_count: 1 },
                issue_count: 1000,
                weight_bound: 10,
                seed,
            };
            let g = spec.generate().unwrap();
            let mut deg = degrees(&g);
            deg.sort_unstable_by(|a, b| b.cmp(a));
            let top: u32 = deg[..10].iter().sum();
            let all: u32 = deg.iter().sum();
            let share = top as f64 / all as f64;
            assert!(
                share >= 0.08,
                "seed {seed}: top-1% share {share:.4} below pinned floor"
            );
        }
    }

    #[test]
    fn generator_invariants_hold_across_families() {
        let specs = vec![
            TopologySpec {
                kind: TopologyKind::Random { edge_count: 30 },
                issue_count: 30,
                weight_bound: 4,
                seed: 77,
            },
            TopologySpec {
                kind: TopologyKind::SmallWorld {
                    ring_degree: 2,
                    rewire_prob: 0.2,
                },
                issue_count: 30,
                weight_bound: 4,
                seed: 78,
            },
            TopologySpec {
                kind: TopologyKind::ScaleFree { attach_count: 2 },
                issue_count: 30,
                weight_bound: 4,
                seed: 79,
            },
        ];
        for spec in specs {
            let g = spec.generate().unwrap();
            assert_eq!(g.issue_count(), 30);
            let mut seen = BTreeSet::new();
            for e in g.edges() {
                assert_eq!(e.arity(), 2, "{:?}", spec.kind);
                assert_ne!(e.weight(), 0);
                assert!(e.weight().abs() <= 4);
                assert!(seen.insert(e.vertices().to_vec()), "duplicate edge");
            }
        }
    }

    #[test]
    fn sample_weight_two_point_support() {
        let mut rng = SplitMix64::new(1);
        for _ in 0..100 {
            let w = sample_weight(&mut rng, 1);
            assert!(w == -1 || w == 1);
        }
    }

    #[test]
    fn sample_weight_frequencies_near_uniform() {
        // W = 10: twenty values, 10^4 draws, each count within 5 sigma
        let mut rng = SplitMix64::new(99);
        let mut counts = std::collections::BTreeMap::new();
        let draws = 10_000u32;
        for _ in 0..draws {
            *counts.entry(sample_weight(&mut rng, 10)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 20);
        assert!(!counts.contains_key(&0));
        let p = 1.0 / 20.0;
        let expect = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (v, c) in counts {
            assert!(
                (c as f64 - expect).abs() < 5.0 * sigma,
                "value {v} count {c} outside 5 sigma of {expect}"
            );
        }
    }

    #[test]
    fn sample_weight_golden_draws() {
        // frozen replay fixture for the documented generator
        let mut rng = SplitMix64::new(2024);
        let first: Vec<i64> = (0..5).map(|_| sample_weight(&mut rng, 10)).collect();
        assert_eq!(first, golden_draws());
    }

    fn golden_draws() -> Vec<i64> {
        // recorded from SplitMix64::new(2024) with bound 10
        vec![3, -9, -5, -8, 7]
    }

    #[test]
    fn reweight_keeps_structure() {
        let spec = TopologySpec {
            kind: TopologyKind::ScaleFree { attach_count: 1 },
            issue_count: 40,
            weight_bound: 10,
            seed: 4,
        };
        let g = spec.generate().unwrap();
        let h = reweight(&g, 10, 999);
        assert_eq!(g.skeleton(), h.skeleton());
        assert_ne!(g, h);
    }
}
