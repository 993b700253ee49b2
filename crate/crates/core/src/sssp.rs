//! Single-source shortest paths over the descending graph.
//!
//! [`dijkstra`] relaxes every link of each settled node. [`bushwhack`]
//! settles the same nodes but only opens, for a Steiner node `u` on edge `e`
//! and each other edge `e'` of a face of `e`, the interval of `e'` nodes that
//! `u` can reach descending and that are strictly closer to `u` than to the
//! settled neighbors of `u` along `e` (when those neighbors may also link to
//! them). Pruned links are dominated: an earlier-settled node has smaller
//! distance and a shorter link. Each interval is walked lazily in order of
//! increasing link length, one heap entry at a time.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};
use std::ops::Range;

use serde::Serialize;

use crate::descend_graph::DescendGraph;
use crate::discretizer::{Discretization, NodeKind};
use crate::error::{Error, Result};
use crate::oracle::Path;
use crate::{EdgeId, NodeId};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Dijkstra,
    Bushwhack,
}

impl Solver {
    pub fn run(self, g: &DescendGraph, source: NodeId) -> Result<SPTree> {
        match self {
            Solver::Dijkstra => dijkstra(g, source),
            Solver::Bushwhack => bushwhack(g, source),
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dijkstra" => Ok(Solver::Dijkstra),
            "bushwhack" => Ok(Solver::Bushwhack),
            other => Err(Error::InvalidParameter(format!("unknown solver {other:?}"))),
        }
    }
}

/// Shortest-path tree rooted at the source node.
#[derive(Debug, Clone)]
pub struct SPTree {
    root: NodeId,
    dist: Vec<f64>,
    parent: Vec<usize>,
    order: Vec<NodeId>,
    heap_pushes: usize,
}

impl SPTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Distance from the root, `+inf` when unreachable.
    pub fn dist(&self, id: NodeId) -> f64 {
        self.dist[id]
    }

    pub fn dists(&self) -> &[f64] {
        &self.dist
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        let p = self.parent[id];
        (p != NONE).then_some(p)
    }

    /// Nodes in the order they were settled.
    pub fn settle_order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn settled_count(&self) -> usize {
        self.order.len()
    }

    pub fn heap_pushes(&self) -> usize {
        self.heap_pushes
    }

    /// Node ids from the root to `target`.
    pub fn node_path(&self, target: NodeId) -> Result<Vec<NodeId>> {
        if target >= self.dist.len() {
            return Err(Error::UnknownNode(target));
        }
        if !self.dist[target].is_finite() {
            return Err(Error::NoDescendingPath);
        }
        let mut ids = vec![target];
        let mut cur = target;
        while let Some(p) = self.parent(cur) {
            ids.push(p);
            cur = p;
        }
        ids.reverse();
        Ok(ids)
    }
}

/// Polyline from the root to `target` through the tree.
pub fn extract_path(tree: &SPTree, disc: &Discretization, target: NodeId) -> Result<Path> {
    let ids = tree.node_path(target)?;
    let points = ids.iter().map(|&id| disc.node(id).pos).collect();
    let mut path = Path::new(points);
    // Keep the tree distance as the reported length; it sums the same segments.
    path.length = tree.dist(target);
    Ok(path)
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    key: f64,
    node: NodeId,
    from: NodeId,
    stream: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.node.cmp(&other.node))
            .then(self.from.cmp(&other.from))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct State {
    dist: Vec<f64>,
    parent: Vec<usize>,
    settled: Vec<bool>,
    order: Vec<NodeId>,
    heap: BinaryHeap<Reverse<Entry>>,
    pushes: usize,
}

impl State {
    fn new(n: usize, source: NodeId) -> Self {
        let mut s = Self {
            dist: vec![f64::INFINITY; n],
            parent: vec![NONE; n],
            settled: vec![false; n],
            order: Vec::new(),
            heap: BinaryHeap::new(),
            pushes: 0,
        };
        s.dist[source] = 0.0;
        s.push(Entry {
            key: 0.0,
            node: source,
            from: NONE,
            stream: NONE,
        });
        s
    }

    fn push(&mut self, e: Entry) {
        self.pushes += 1;
        self.heap.push(Reverse(e));
    }

    /// Relaxes `from -> to`; returns whether a heap entry was added.
    fn relax(&mut self, from: NodeId, to: NodeId, key: f64, stream: usize) -> bool {
        if self.settled[to] || key >= self.dist[to] {
            return false;
        }
        self.dist[to] = key;
        self.push(Entry {
            key,
            node: to,
            from,
            stream,
        });
        true
    }

    fn finish(self, root: NodeId) -> SPTree {
        let mut dist = self.dist;
        for (d, &s) in dist.iter_mut().zip(&self.settled) {
            if !s {
                *d = f64::INFINITY;
            }
        }
        SPTree {
            root,
            dist,
            parent: self.parent,
            order: self.order,
            heap_pushes: self.pushes,
        }
    }
}

/// Plain Dijkstra with a binary heap and lazy deletion. Ties between equal
/// tentative distances go to the smaller node id.
pub fn dijkstra(g: &DescendGraph, source: NodeId) -> Result<SPTree> {
    if source >= g.node_count() {
        return Err(Error::UnknownNode(source));
    }
    let mut st = State::new(g.node_count(), source);
    while let Some(Reverse(e)) = st.heap.pop() {
        if st.settled[e.node] || e.key > st.dist[e.node] {
            continue;
        }
        let u = e.node;
        st.settled[u] = true;
        st.parent[u] = e.from;
        st.order.push(u);
        let du = e.key;
        g.for_each_out_link(u, |y, w| {
            st.relax(u, y, du + w, NONE);
        });
    }
    Ok(st.finish(source))
}

/// Lazy walk over `lo..hi` of an edge's node sequence in order of
/// increasing distance from `src`.
struct Stream {
    src: NodeId,
    edge: EdgeId,
    lo: usize,
    hi: usize,
    /// Next candidate index on the left, `left < lo` when exhausted.
    left: isize,
    right: usize,
}

impl Stream {
    fn next(&mut self, disc: &Discretization) -> Option<(NodeId, f64)> {
        let seq = disc.edge_nodes(self.edge);
        let p = disc.node(self.src).pos;
        let l = (self.left >= self.lo as isize).then(|| {
            let id = seq[self.left as usize];
            (id, (disc.node(id).pos - p).norm())
        });
        let r = (self.right < self.hi).then(|| {
            let id = seq[self.right];
            (id, (disc.node(id).pos - p).norm())
        });
        match (l, r) {
            (Some(a), Some(b)) if a.1 <= b.1 => {
                self.left -= 1;
                Some(a)
            }
            (_, Some(b)) => {
                self.right += 1;
                Some(b)
            }
            (Some(a), None) => {
                self.left -= 1;
                Some(a)
            }
            (None, None) => None,
        }
    }
}

/// Shortest-path tree via interval pruning. Produces the same distances as
/// [`dijkstra`]; parents may differ between equal-length alternatives.
pub fn bushwhack(g: &DescendGraph, source: NodeId) -> Result<SPTree> {
    if source >= g.node_count() {
        return Err(Error::UnknownNode(source));
    }
    let terrain = g.terrain();
    let disc = g.discretization();
    let mut st = State::new(g.node_count(), source);
    let mut streams: Vec<Stream> = Vec::new();
    let mut settled_on_edge: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); terrain.edge_count()];

    while let Some(Reverse(e)) = st.heap.pop() {
        if e.stream != NONE {
            advance(&mut st, &mut streams, disc, e.stream);
        }
        if st.settled[e.node] {
            continue;
        }
        let u = e.node;
        st.settled[u] = true;
        st.dist[u] = e.key;
        st.parent[u] = e.from;
        st.order.push(u);
        let du = e.key;

        match disc.node(u).kind {
            NodeKind::Vertex(_) => {
                g.for_each_out_link(u, |y, w| {
                    st.relax(u, y, du + w, NONE);
                });
            }
            NodeKind::Steiner { edge, index, .. } => {
                let settled = &settled_on_edge[edge];
                let below = settled.range(..index).next_back().copied();
                let above = settled.range(index + 1..).next().copied();
                for &f in &terrain.edge(edge).faces {
                    for e2 in terrain.face_edges(f) {
                        if e2 == edge {
                            continue;
                        }
                        if let Some(range) = claim(g, edge, index, below, above, e2) {
                            let id = streams.len();
                            streams.push(open_stream(disc, u, e2, range));
                            advance(&mut st, &mut streams, disc, id);
                        }
                    }
                }
                if g.edge_chords() {
                    let seq = disc.edge_nodes(edge);
                    for y in [seq[index - 1], seq[index + 1]] {
                        if disc.height(y) <= disc.height(u) {
                            st.relax(u, y, du + g.weight(u, y), NONE);
                        }
                    }
                }
                settled_on_edge[edge].insert(index);
            }
        }
    }
    Ok(st.finish(source))
}

/// Pushes the next useful candidate of stream `id`, skipping settled nodes
/// and nodes that already hold an entry at least as good.
fn advance(st: &mut State, streams: &mut [Stream], disc: &Discretization, id: usize) {
    let s = &mut streams[id];
    let base = st.dist[s.src];
    while let Some((y, w)) = s.next(disc) {
        if st.relax(s.src, y, base + w, id) {
            return;
        }
    }
}

fn open_stream(disc: &Discretization, src: NodeId, edge: EdgeId, range: Range<usize>) -> Stream {
    let seq = disc.edge_nodes(edge);
    let p = disc.node(src).pos;
    let dist = |i: usize| (disc.node(seq[i]).pos - p).norm();
    // Distance to a point moving along a line is convex in the parameter.
    let start = range.start + partition(range.start, range.end - 1, |i| dist(i + 1) < dist(i));
    Stream {
        src,
        edge,
        lo: range.start,
        hi: range.end,
        left: start as isize - 1,
        right: start,
    }
}

/// Index range of `target` nodes opened by the Steiner node at `index` on
/// `edge`, given its nearest settled neighbors along `edge`.
fn claim(
    g: &DescendGraph,
    edge: EdgeId,
    index: usize,
    below: Option<usize>,
    above: Option<usize>,
    target: EdgeId,
) -> Option<Range<usize>> {
    let terrain = g.terrain();
    let disc = g.discretization();
    let seq = disc.edge_nodes(edge);
    let tseq = disc.edge_nodes(target);
    let u = seq[index];
    let hu = disc.height(u);
    let pu = disc.node(u).pos;

    // Drop the vertex shared with `edge`: it lies on a common edge with `u`.
    let [a, b] = terrain.edge(edge).v;
    let first = tseq[0];
    let mut range = if first == a || first == b {
        1..tseq.len()
    } else {
        0..tseq.len() - 1
    };

    range = monotone_subrange(range, |i| disc.height(tseq[i]) <= hu)?;

    let level = terrain.is_level(edge);
    // Neighbors along `edge` that may link to everything `u` can reach.
    let mut dominating = Vec::with_capacity(2);
    let mut partial = None;
    for nb in [below, above].into_iter().flatten() {
        let h = disc.height(seq[nb]);
        if level || h > hu {
            dominating.push(seq[nb]);
        } else {
            partial = Some(seq[nb]);
        }
    }
    for o in dominating {
        let po = disc.node(o).pos;
        let mid = nalgebra::center(&pu, &po);
        let dir = po - pu;
        // Strictly closer to u; ties stay with the earlier-settled node.
        range = monotone_subrange(range, |i| (disc.node(tseq[i]).pos - mid).dot(&dir) < 0.0)?;
    }
    if let Some(o) = partial {
        // `o` is lower than `u`: it dominates only targets it can reach.
        let po = disc.node(o).pos;
        let ho = disc.height(o);
        let mid = nalgebra::center(&pu, &po);
        let dir = po - pu;
        let dominated = |i: usize| {
            let p = disc.node(tseq[i]).pos;
            p.z <= ho && (p - mid).dot(&dir) >= 0.0
        };
        let (lo, hi) = (range.start, range.end);
        if dominated(lo) {
            range = lo + partition(lo, hi, dominated)..hi;
        } else if dominated(hi - 1) {
            range = lo..lo + partition(lo, hi, |i| !dominated(i));
        }
        if range.is_empty() {
            return None;
        }
    }
    Some(range)
}

/// Restricts `range` to the indices satisfying `pred`, which must hold on a
/// prefix or a suffix of the range.
fn monotone_subrange(range: Range<usize>, pred: impl Fn(usize) -> bool) -> Option<Range<usize>> {
    if range.is_empty() {
        return None;
    }
    let (lo, hi) = (range.start, range.end);
    let out = match (pred(lo), pred(hi - 1)) {
        (true, true) => lo..hi,
        (false, false) => return None,
        (true, false) => lo..lo + partition(lo, hi, &pred),
        (false, true) => lo + partition(lo, hi, |i| !pred(i))..hi,
    };
    (!out.is_empty()).then_some(out)
}

/// Number of leading indices in `lo..hi` satisfying `pred`.
fn partition(lo: usize, hi: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let m = a + (b - a) / 2;
        if pred(m) {
            a = m + 1;
        } else {
            b = m;
        }
    }
    a - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::terrain::Terrain;

    fn setup(t: &Terrain, eps: f64) -> Discretization {
        let p = t.geometry_params().unwrap();
        Discretization::new(t, &p, eps).unwrap()
    }

    #[test]
    fn horizontal_triangle_dists() {
        let t = generate::horizontal_triangle(1.0).unwrap();
        let p = t.geometry_params().unwrap();
        let d = crate::discretizer::place_steiner(&t, &p, 10.0);
        let g = DescendGraph::new(&t, &d);
        for solver in [Solver::Dijkstra, Solver::Bushwhack] {
            let tree = solver.run(&g, 0).unwrap();
            assert_eq!(tree.dist(1), 1.0);
            // (0.5, sqrt(3)/2) is one unit away up to rounding.
            assert!((tree.dist(2) - 1.0).abs() < 1e-15);
            assert_eq!(tree.parent(1), Some(0));
            assert_eq!(tree.parent(2), Some(0));
        }
    }

    #[test]
    fn ramp_a_to_d_within_factor() {
        let t = generate::ramp(1.0).unwrap();
        let d = setup(&t, 0.1);
        let g = DescendGraph::new(&t, &d);
        let tree = dijkstra(&g, 0).unwrap();
        let len = tree.dist(3);
        assert!(len >= 3f64.sqrt() - 1e-12 && len <= 1.1 * 3f64.sqrt(), "{len}");
        let bw = bushwhack(&g, 0).unwrap();
        assert!((bw.dist(3) - len).abs() <= 1e-9 * len);
    }

    #[test]
    fn isolated_minimum_reaches_nothing() {
        // A pit: the centre vertex is strictly below its ring.
        let t = generate::pit().unwrap();
        let d = setup(&t, 1.0);
        let g = DescendGraph::new(&t, &d);
        let tree = dijkstra(&g, 0).unwrap();
        assert_eq!(tree.settled_count(), 1);
        assert!((1..d.node_count()).all(|v| tree.dist(v).is_infinite()));
        assert!(matches!(extract_path(&tree, &d, 1), Err(Error::NoDescendingPath)));
    }

    #[test]
    fn root_path_is_single_point() {
        let t = generate::ramp(1.0).unwrap();
        let d = setup(&t, 1.0);
        let g = DescendGraph::new(&t, &d);
        let tree = dijkstra(&g, 0).unwrap();
        let p = extract_path(&tree, &d, 0).unwrap();
        assert_eq!(p.points.len(), 1);
        assert_eq!(p.length, 0.0);
        assert!(matches!(dijkstra(&g, 99_999), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn tree_invariants() {
        let t = generate::random_grid(4, 7).unwrap();
        let d = setup(&t, 1.0);
        let g = DescendGraph::new(&t, &d);
        let s = t.highest_vertex();
        for solver in [Solver::Dijkstra, Solver::Bushwhack] {
            let tree = solver.run(&g, s).unwrap();
            assert_eq!(tree.dist(s), 0.0);
            for v in 0..d.node_count() {
                if let Some(p) = tree.parent(v) {
                    assert_eq!(tree.dist(v), tree.dist(p) + g.weight(p, v));
                    assert!(d.height(p) >= d.height(v));
                    assert!(g.link_exists(p, v).unwrap());
                }
            }
            // Bellman condition.
            for x in 0..d.node_count() {
                if tree.dist(x).is_finite() {
                    g.for_each_out_link(x, |y, w| {
                        assert!(tree.dist(y) <= tree.dist(x) + w + 1e-12);
                    });
                }
            }
            let order = tree.settle_order();
            for w in order.windows(2) {
                assert!(tree.dist(w[0]) <= tree.dist(w[1]));
            }
        }
    }

    #[test]
    fn monotone_subrange_shapes() {
        assert_eq!(monotone_subrange(0..10, |i| i < 4), Some(0..4));
        assert_eq!(monotone_subrange(0..10, |i| i >= 4), Some(4..10));
        assert_eq!(monotone_subrange(0..10, |_| false), None);
        assert_eq!(monotone_subrange(2..5, |_| true), Some(2..5));
    }
}
