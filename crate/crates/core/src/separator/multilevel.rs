//! Multilevel bisection of one connected hypergraph fragment.
//!
//! Coarsen with heavy-edge matching until the fragment is small, grow an
//! initial side by seeded BFS, then project back up refining each level with
//! Fiduccia-Mattheyses boundary moves. The returned separator is a greedy
//! minimum cover of the cut edges: repeatedly take the vertex incident to
//! the most still-spanning edges (ties to the lowest index) until no edge
//! has free vertices on both sides.

use crate::rng::SplitMix64;

const COARSEST_VERTICES: usize = 32;
const STALL_RATIO: f64 = 0.92;
const MAX_FM_PASSES: usize = 6;
const INITIAL_TRIES: usize = 4;

/// Local-index view of a subgraph: vertices `0..vertex_count`, weighted
/// edges of arity >= 2.
pub(crate) struct Fragment {
    pub vertex_count: usize,
    pub edges: Vec<(Vec<u32>, u64)>,
}

impl Fragment {
    /// Restrict `struct_edges` to `verts` (sorted ascending), relabeling to
    /// local indices. Edges keeping fewer than two endpoints drop out.
    pub(crate) fn induced(struct_edges: &[Vec<u32>], verts: &[u32]) -> Fragment {
        debug_assert!(verts.windows(2).all(|w| w[0] < w[1]));
        let mut edges = Vec::new();
        for e in struct_edges {
            let local: Vec<u32> = e
                .iter()
                .filter_map(|v| verts.binary_search(v).ok().map(|i| i as u32))
                .collect();
            if local.len() >= 2 {
                edges.push((local, 1u64));
            }
        }
        Fragment {
            vertex_count: verts.len(),
            edges,
        }
    }
}

pub(crate) struct BisectOutcome {
    pub separator: Vec<u32>,
    pub side_a: Vec<u32>,
    pub side_b: Vec<u32>,
}

struct Level {
    vertex_weights: Vec<u64>,
    edges: Vec<(Vec<u32>, u64)>,
    incidence: Vec<Vec<u32>>,
    /// fine vertex -> coarse vertex of the next level
    coarse_of: Vec<u32>,
}

fn build_incidence(vertex_count: usize, edges: &[(Vec<u32>, u64)]) -> Vec<Vec<u32>> {
    let mut incidence = vec![Vec::new(); vertex_count];
    for (i, (verts, _)) in edges.iter().enumerate() {
        for &v in verts {
            incidence[v as usize].push(i as u32);
        }
    }
    incidence
}

/// Bisect `frag` aiming at `target_a` vertices on side A, within `slack`.
pub(crate) fn bisect(
    frag: &Fragment,
    target_a: usize,
    slack: usize,
    rng: &mut SplitMix64,
) -> BisectOutcome {
    let n = frag.vertex_count;
    debug_assert!(n >= 2);
    let mut levels: Vec<Level> = Vec::new();

    let mut vertex_weights: Vec<u64> = vec![1; n];
    let mut edges = frag.edges.clone();

    // coarsening phase
    loop {
        let count = vertex_weights.len();
        if count <= COARSEST_VERTICES || edges.is_empty() {
            break;
        }
        let incidence = build_incidence(count, &edges);
        let (coarse_of, coarse_count) =
            heavy_edge_matching(count, &edges, &incidence, &vertex_weights, rng);
        if coarse_count as f64 > count as f64 * STALL_RATIO {
            break; // matching stalled, stop coarsening here
        }
        let mut coarse_weights = vec![0u64; coarse_count];
        for (v, &c) in coarse_of.iter().enumerate() {
            coarse_weights[c as usize] += vertex_weights[v];
        }
        let coarse_edges = project_edges(&edges, &coarse_of);
        levels.push(Level {
            vertex_weights,
            edges,
            incidence,
            coarse_of,
        });
        vertex_weights = coarse_weights;
        edges = coarse_edges;
    }

    // initial bisection at the coarsest level; the balance window must keep
    // both sides nonempty, otherwise a 2-coloring of a connected fragment
    // could cut nothing and the separator would be empty
    let target_w = target_a as u64;
    let slack_w = (slack as u64)
        .min(target_w.saturating_sub(1))
        .min((n as u64).saturating_sub(target_w + 1));
    let coarse_incidence = build_incidence(vertex_weights.len(), &edges);
    let mut side = initial_bisection(
        &vertex_weights,
        &edges,
        &coarse_incidence,
        target_w,
        rng,
    );
    fm_refine(
        &vertex_weights,
        &edges,
        &coarse_incidence,
        &mut side,
        target_w,
        slack_w,
    );

    // uncoarsen, refining each level
    while let Some(level) = levels.pop() {
        let mut fine_side = vec![0u8; level.vertex_weights.len()];
        for (v, &c) in level.coarse_of.iter().enumerate() {
            fine_side[v] = side[c as usize];
        }
        side = fine_side;
        fm_refine(
            &level.vertex_weights,
            &level.edges,
            &level.incidence,
            &mut side,
            target_w,
            slack_w,
        );
    }

    extract_separator(n, &frag.edges, &side)
}

/// Heavy-edge matching. Pairs are rated by the summed weight of shared edges
/// scaled down by arity; ties break to the lowest vertex index. Returns the
/// fine-to-coarse map (coarse ids ordered by the lowest fine member).
fn heavy_edge_matching(
    count: usize,
    edges: &[(Vec<u32>, u64)],
    incidence: &[Vec<u32>],
    vertex_weights: &[u64],
    rng: &mut SplitMix64,
) -> (Vec<u32>, usize) {
    let mut mate: Vec<Option<u32>> = vec![None; count];
    let order = rng.permutation(count);
    let mut rating: Vec<f64> = vec![0.0; count];
    let mut touched: Vec<u32> = Vec::new();
    let half_total: u64 = vertex_weights.iter().sum::<u64>() / 2;

    for &v in &order {
        let v = v as usize;
        if mate[v].is_some() {
            continue;
        }
        touched.clear();
        for &ei in &incidence[v] {
            let (verts, w) = &edges[ei as usize];
            let score = *w as f64 / (verts.len() - 1) as f64;
            for &u in verts {
                let u = u as usize;
                if u != v && mate[u].is_none() {
                    if rating[u] == 0.0 {
                        touched.push(u as u32);
                    }
                    rating[u] += score;
                }
            }
        }
        let mut best: Option<u32> = None;
        for &u in &touched {
            // avoid overly heavy coarse vertices
            if vertex_weights[v] + vertex_weights[u as usize] > half_total {
                continue;
            }
            best = match best {
                None => Some(u),
                Some(b) => {
                    let (ru, rb) = (rating[u as usize], rating[b as usize]);
                    if ru > rb || (ru == rb && u < b) {
                        Some(u)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        if let Some(u) = best {
            mate[v] = Some(u);
            mate[u as usize] = Some(v as u32);
        } else {
            mate[v] = Some(v as u32);
        }
        for &u in &touched {
            rating[u as usize] = 0.0;
        }
    }

    let mut coarse_of = vec![u32::MAX; count];
    let mut next = 0u32;
    for v in 0..count {
        if coarse_of[v] != u32::MAX {
            continue;
        }
        let m = mate[v].unwrap_or(v as u32) as usize;
        coarse_of[v] = next;
        coarse_of[m] = next;
        next += 1;
    }
    (coarse_of, next as usize)
}

/// Map edges through the coarse ids, dropping collapsed edges and merging
/// parallel ones.
fn project_edges(edges: &[(Vec<u32>, u64)], coarse_of: &[u32]) -> Vec<(Vec<u32>, u64)> {
    let mut merged: std::collections::BTreeMap<Vec<u32>, u64> = std::collections::BTreeMap::new();
    for (verts, w) in edges {
        let mut mapped: Vec<u32> = verts.iter().map(|&v| coarse_of[v as usize]).collect();
        mapped.sort_unstable();
        mapped.dedup();
        if mapped.len() >= 2 {
            *merged.entry(mapped).or_insert(0) += w;
        }
    }
    merged.into_iter().collect()
}

/// Seeded BFS region growing; the best of a few tries by cut weight.
fn initial_bisection(
    vertex_weights: &[u64],
    edges: &[(Vec<u32>, u64)],
    incidence: &[Vec<u32>],
    target_w: u64,
    rng: &mut SplitMix64,
) -> Vec<u8> {
    let n = vertex_weights.len();
    let mut best: Option<(u64, Vec<u8>)> = None;
    for _ in 0..INITIAL_TRIES {
        let start = rng.gen_range(n as u64) as usize;
        let mut side = vec![1u8; n];
        let mut weight_a = 0u64;
        let mut queue = std::collections::VecDeque::new();
        let mut seen = vec![false; n];
        queue.push_back(start);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            if weight_a >= target_w {
                break;
            }
            side[v] = 0;
            weight_a += vertex_weights[v];
            for &ei in &incidence[v] {
                for &u in &edges[ei as usize].0 {
                    let u = u as usize;
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        // fill from unvisited vertices if the component ran out
        if weight_a < target_w {
            for v in 0..n {
                if weight_a >= target_w {
                    break;
                }
                if side[v] == 1 {
                    side[v] = 0;
                    weight_a += vertex_weights[v];
                }
            }
        }
        let cut = cut_weight(edges, &side);
        if best.as_ref().map_or(true, |(c, _)| cut < *c) {
            best = Some((cut, side));
        }
    }
    best.unwrap().1
}

fn cut_weight(edges: &[(Vec<u32>, u64)], side: &[u8]) -> u64 {
    edges
        .iter()
        .filter(|(verts, _)| {
            let s = side[verts[0] as usize];
            verts.iter().any(|&v| side[v as usize] != s)
        })
        .map(|(_, w)| *w)
        .sum()
}

/// One FM pass: tentatively move the highest-gain movable vertex, keep the
/// best prefix. Repeated until a pass yields no improvement.
fn fm_refine(
    vertex_weights: &[u64],
    edges: &[(Vec<u32>, u64)],
    incidence: &[Vec<u32>],
    side: &mut Vec<u8>,
    target_w: u64,
    slack_w: u64,
) {
    let n = vertex_weights.len();
    let lo = target_w.saturating_sub(slack_w);
    let hi = target_w + slack_w;

    for _pass in 0..MAX_FM_PASSES {
        let mut pins = pin_counts(edges, side);
        let mut gain: Vec<i64> = (0..n).map(|v| vertex_gain(v, edges, incidence, side, &pins)).collect();
        let mut weight_a: u64 = (0..n).filter(|&v| side[v] == 0).map(|v| vertex_weights[v]).sum();
        let mut heap: std::collections::BinaryHeap<(i64, std::cmp::Reverse<u32>)> =
            (0..n as u32).map(|v| (gain[v as usize], std::cmp::Reverse(v))).collect();
        let mut locked = vec![false; n];

        let start_cut = cut_weight(edges, side);
        let mut cur_cut = start_cut as i64;
        let mut best_cut = cur_cut;
        let mut moves: Vec<u32> = Vec::new();
        let mut best_prefix = 0usize;

        while let Some((g, std::cmp::Reverse(v))) = heap.pop() {
            let vu = v as usize;
            if locked[vu] || g != gain[vu] {
                continue; // stale entry
            }
            let vw = vertex_weights[vu];
            let new_weight_a = if side[vu] == 0 {
                weight_a - vw
            } else {
                weight_a + vw
            };
            if new_weight_a < lo || new_weight_a > hi {
                continue;
            }
            locked[vu] = true;
            weight_a = new_weight_a;
            cur_cut -= g;
            apply_move(vu, incidence, side, &mut pins);
            moves.push(v);
            if cur_cut < best_cut {
                best_cut = cur_cut;
                best_prefix = moves.len();
            }
            // refresh gains of affected vertices
            for &ei in &incidence[vu] {
                for &u in &edges[ei as usize].0 {
                    let u = u as usize;
                    if !locked[u] {
                        let g2 = vertex_gain(u, edges, incidence, side, &pins);
                        if g2 != gain[u] {
                            gain[u] = g2;
                            heap.push((g2, std::cmp::Reverse(u as u32)));
                        }
                    }
                }
            }
        }

        // roll back past the best prefix
        for &v in moves[best_prefix..].iter().rev() {
            let vu = v as usize;
            apply_move(vu, incidence, side, &mut pins);
        }
        if best_cut >= start_cut as i64 {
            break;
        }
    }
}

fn pin_counts(edges: &[(Vec<u32>, u64)], side: &[u8]) -> Vec<[u32; 2]> {
    edges
        .iter()
        .map(|(verts, _)| {
            let mut c = [0u32; 2];
            for &v in verts {
                c[side[v as usize] as usize] += 1;
            }
            c
        })
        .collect()
}

/// Cut-weight reduction from moving `v` to the other side.
fn vertex_gain(
    v: usize,
    edges: &[(Vec<u32>, u64)],
    incidence: &[Vec<u32>],
    side: &[u8],
    pins: &[[u32; 2]],
) -> i64 {
    let s = side[v] as usize;
    let o = 1 - s;
    let mut g = 0i64;
    for &ei in &incidence[v] {
        let (_, w) = &edges[ei as usize];
        let c = pins[ei as usize];
        if c[o] == 0 {
            g -= *w as i64; // currently uncut, the move cuts it
        } else if c[s] == 1 {
            g += *w as i64; // v is the last pin on this side, the move uncuts it
        }
    }
    g
}

fn apply_move(v: usize, incidence: &[Vec<u32>], side: &mut [u8], pins: &mut [[u32; 2]]) {
    let s = side[v] as usize;
    for &ei in &incidence[v] {
        pins[ei as usize][s] -= 1;
        pins[ei as usize][1 - s] += 1;
    }
    side[v] = 1 - side[v];
}

/// Greedy minimum cover of the spanning edges. A cut edge stays "open" while
/// its non-separator vertices touch both sides; each round removes the
/// vertex incident to the most open edges (lowest index on ties).
fn extract_separator(n: usize, edges: &[(Vec<u32>, u64)], side: &[u8]) -> BisectOutcome {
    let mut in_sep = vec![false; n];
    loop {
        let mut open: Vec<&(Vec<u32>, u64)> = Vec::new();
        for e in edges {
            let mut seen = [false, false];
            for &v in &e.0 {
                if !in_sep[v as usize] {
                    seen[side[v as usize] as usize] = true;
                }
            }
            if seen[0] && seen[1] {
                open.push(e);
            }
        }
        if open.is_empty() {
            break;
        }
        let mut count = vec![0u32; n];
        for e in &open {
            for &v in &e.0 {
                if !in_sep[v as usize] {
                    count[v as usize] += 1;
                }
            }
        }
        let pick = (0..n)
            .filter(|&v| count[v] > 0)
            .max_by_key(|&v| (count[v], std::cmp::Reverse(v)))
            .unwrap();
        in_sep[pick] = true;
    }
    let mut outcome = BisectOutcome {
        separator: Vec::new(),
        side_a: Vec::new(),
        side_b: Vec::new(),
    };
    for v in 0..n {
        if in_sep[v] {
            outcome.separator.push(v as u32);
        } else if side[v] == 0 {
            outcome.side_a.push(v as u32);
        } else {
            outcome.side_b.push(v as u32);
        }
    }
    outcome
}
