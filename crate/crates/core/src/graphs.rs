//! Undirected unweighted graphs, the generator families used by the test
//! suite, a canonical text format, and exact Max-Cut by enumeration.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Largest vertex count accepted by [`brute_force_maxcut`].
pub const MAX_BRUTE_FORCE_VERTICES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    label: String,
}

impl Graph {
    /// Builds a graph from an edge list. Endpoint order within a pair is
    /// normalized to `i < j` and the list is sorted; self-loops, duplicates
    /// and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>, label: impl Into<String>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("graph needs at least 2 vertices, got {n}")));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::invalid(format!("self-loop on vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) out of range for {n} vertices")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Self { n, edges: set.into_iter().collect(), label: label.into() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Neighbor bitmasks, one per vertex. Only meaningful for `n <= 64`.
    pub(crate) fn neighbor_masks(&self) -> Vec<u64> {
        let mut masks = vec![0u64; self.n];
        for &(a, b) in &self.edges {
            masks[a] |= 1 << b;
            masks[b] |= 1 << a;
        }
        masks
    }

    /// Returns the graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: perm.len() });
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("relabeling is not a permutation"));
            }
        }
        Graph::new(self.n, self.edges.iter().map(|&(a, b)| (perm[a], perm[b])), self.label.clone())
    }

    /// Breadth-first connectivity check.
    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Number of edges crossing the bipartition given by `assignment`.
    pub fn cut_value(&self, assignment: &[u8]) -> usize {
        self.edges.iter().filter(|&&(a, b)| assignment[a] != assignment[b]).count()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={}, m={})", self.label, self.n, self.edges.len())
    }
}

/// G(n, e_p) random graph. Pairs `(i, j)`, `i < j`, are visited in
/// lexicographic order and kept iff the next splitmix64 draw is `< e_p`.
pub fn gen_erdos_renyi(n: usize, edge_prob: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::invalid(format!("edge probability {edge_prob} outside [0, 1]")));
    }
    let mut rng = SplitMix64::new(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.next_f64() < edge_prob {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges, format!("erdos_renyi(n={n},p={edge_prob},seed={seed})"))
}

/// Ladder with `len` rungs: rails `0..len` and `len..2len`, rung `(i, i+len)`.
pub fn gen_ladder(len: usize) -> Result<Graph> {
    if len < 2 {
        return Err(Error::invalid(format!("ladder length must be >= 2, got {len}")));
    }
    let mut edges = Vec::with_capacity(3 * len - 2);
    for i in 0..len {
        if i + 1 < len {
            edges.push((i, i + 1));
            edges.push((len + i, len + i + 1));
        }
        edges.push((i, len + i));
    }
    Graph::new(2 * len, edges, format!("ladder({len})"))
}

/// Two copies of `K_clique` joined by the single edge `(clique-1, clique)`.
pub fn gen_barbell(clique: usize) -> Result<Graph> {
    if clique < 3 {
        return Err(Error::invalid(format!("barbell clique size must be >= 3, got {clique}")));
    }
    let mut edges = Vec::new();
    for offset in [0, clique] {
        for i in 0..clique {
            for j in i + 1..clique {
                edges.push((offset + i, offset + j));
            }
        }
    }
    edges.push((clique - 1, clique));
    Graph::new(2 * clique, edges, format!("barbell({clique})"))
}

/// Connected caveman graph: `cliques` copies of `K_size` on consecutive
/// vertex blocks. In each block starting at `s`, edge `(s, s+1)` is removed
/// and `s` is linked to the last vertex of the previous block (cyclically).
pub fn gen_caveman(cliques: usize, size: usize) -> Result<Graph> {
    if cliques < 2 || size < 3 {
        return Err(Error::invalid(format!("caveman needs >= 2 cliques of size >= 3, got ({cliques}, {size})")));
    }
    let n = cliques * size;
    let mut edges = BTreeSet::new();
    for c in 0..cliques {
        let s = c * size;
        for i in 0..size {
            for j in i + 1..size {
                edges.insert((s + i, s + j));
            }
        }
    }
    for c in 0..cliques {
        let s = c * size;
        edges.remove(&(s, s + 1));
        let prev_last = (s + n - 1) % n;
        edges.insert((s.min(prev_last), s.max(prev_last)));
    }
    Graph::new(n, edges, format!("caveman({cliques},{size})"))
}

pub fn complete_graph(m: usize) -> Result<Graph> {
    let edges = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j)));
    Graph::new(m, edges, format!("complete({m})"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    pub value: usize,
    /// Side (0 or 1) of each vertex; vertex 0 is always on side 0.
    pub assignment: Vec<u8>,
}

/// Exact Max-Cut by Gray-code enumeration of the `2^(n-1)` bipartitions
/// with vertex 0 pinned to side 0. Ties resolve to the lexicographically
/// smallest assignment string.
pub fn brute_force_maxcut(g: &Graph) -> Result<CutResult> {
    let n = g.n();
    if n > MAX_BRUTE_FORCE_VERTICES {
        return Err(Error::Capacity { n, max: MAX_BRUTE_FORCE_VERTICES });
    }
    let masks = g.neighbor_masks();
    let degrees: Vec<i64> = masks.iter().map(|m| m.count_ones() as i64).collect();
    // lexicographic order on (s_0, s_1, ...) is integer order on the bit-reversed index
    let lex_key = |z: u64| z.reverse_bits() >> (64 - n);

    let mut z: u64 = 0;
    let mut cut: i64 = 0;
    let mut best = (0i64, 0u64);
    let free = n - 1;
    for step in 1u64..(1u64 << free) {
        let v = step.trailing_zeros() as usize + 1;
        let ones = (z & masks[v]).count_ones() as i64;
        // neighbors on v's old side become cut, the others become uncut
        let delta = if z >> v & 1 == 1 { 2 * ones - degrees[v] } else { degrees[v] - 2 * ones };
        z ^= 1 << v;
        cut += delta;
        if cut > best.0 || (cut == best.0 && lex_key(z) < lex_key(best.1)) {
            best = (cut, z);
        }
    }
    let assignment = (0..n).map(|v| (best.1 >> v & 1) as u8).collect();
    Ok(CutResult { value: best.0 as usize, assignment })
}

/// Canonical text form: `"<n> <m>"` followed by one `"<i> <j>"` line per edge.
pub fn serialize_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.num_edges());
    for &(a, b) in g.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let parse_pair = |line: usize, s: &str| -> Result<(usize, usize)> {
        let mut it = s.split_whitespace();
        let mut next = || -> Result<usize> {
            it.next()
                .ok_or_else(|| Error::Parse { line, msg: "expected two integers".into() })?
                .parse()
                .map_err(|e| Error::Parse { line, msg: format!("{e}") })
        };
        let pair = (next()?, next()?);
        if it.next().is_some() {
            return Err(Error::Parse { line, msg: "trailing tokens".into() });
        }
        Ok(pair)
    };
    let (line, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
    let (n, m) = parse_pair(line, header)?;
    if n < 2 {
        return Err(Error::Parse { line, msg: format!("vertex count {n} < 2") });
    }
    let mut seen = BTreeSet::new();
    for k in 0..m {
        let (line, text) =
            lines.next().ok_or(Error::Parse { line: k + 2, msg: format!("expected {m} edges, found {k}") })?;
        let (a, b) = parse_pair(line, text)?;
        if a == b || a >= n || b >= n {
            return Err(Error::Parse { line, msg: format!("invalid edge ({a}, {b}) for {n} vertices") });
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::Parse { line, msg: format!("duplicate edge ({a}, {b})") });
        }
    }
    if let Some((line, rest)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(Error::Parse { line, msg: format!("unexpected content {rest:?}") });
    }
    Graph::new(n, seen, "parsed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(gen_erdos_renyi(4, 0.0, 7).unwrap().num_edges(), 0);
        assert_eq!(gen_erdos_renyi(4, 1.0, 7).unwrap().num_edges(), 6);
        assert!(gen_erdos_renyi(4, 1.5, 7).is_err());
        assert!(gen_erdos_renyi(4, -0.1, 7).is_err());
    }

    #[test]
    fn ladder_sizes() {
        for (len, n, m) in [(2, 4, 4), (8, 16, 22), (11, 22, 31)] {
            let g = gen_ladder(len).unwrap();
            assert_eq!((g.n(), g.num_edges()), (n, m));
        }
        assert!(gen_ladder(1).is_err());
    }

    #[test]
    fn barbell_sizes() {
        for (k, n, m) in [(3, 6, 7), (4, 8, 13), (5, 10, 21)] {
            let g = gen_barbell(k).unwrap();
            assert_eq!((g.n(), g.num_edges()), (n, m));
            let bridges = g.edges().iter().filter(|&&(a, b)| (a < k) != (b < k)).count();
            assert_eq!(bridges, 1);
        }
        assert!(gen_barbell(2).is_err());
    }

    #[test]
    fn caveman_structure() {
        let g = gen_caveman(2, 3).unwrap();
        assert_eq!(g.n(), 6);
        assert!(g.is_connected());
        assert_eq!(gen_caveman(2, 8).unwrap().n(), 16);
        let g = gen_caveman(5, 4).unwrap();
        assert_eq!(g.n(), 20);
        let links = g.edges().iter().filter(|&&(a, b)| a / 4 != b / 4).count();
        assert_eq!(links, 5);
        assert!(gen_caveman(1, 4).is_err());
        assert!(gen_caveman(3, 2).is_err());
    }

    #[test]
    fn maxcut_small_cases() {
        let k3 = complete_graph(3).unwrap();
        assert_eq!(brute_force_maxcut(&k3).unwrap().value, 2);
        assert_eq!(brute_force_maxcut(&gen_ladder(2).unwrap()).unwrap().value, 4);
        assert_eq!(brute_force_maxcut(&gen_barbell(3).unwrap()).unwrap().value, 5);
    }

    #[test]
    fn maxcut_tie_break_is_lexicographic() {
        // K3: optimal cuts isolate one vertex; with vertex 0 pinned the
        // lexicographically smallest is 001.
        let r = brute_force_maxcut(&complete_graph(3).unwrap()).unwrap();
        assert_eq!(r.assignment, vec![0, 0, 1]);
        assert_eq!(complete_graph(3).unwrap().cut_value(&r.assignment), 2);
    }

    #[test]
    fn maxcut_capacity_error() {
        let g = gen_ladder(13).unwrap();
        assert!(matches!(brute_force_maxcut(&g), Err(Error::Capacity { .. })));
    }

    #[test]
    fn text_format() {
        let k3 = complete_graph(3).unwrap();
        let text = serialize_graph(&k3);
        assert_eq!(text, "3 3\n0 1\n0 2\n1 2\n");
        assert_eq!(parse_graph(&text).unwrap().edges(), k3.edges());
        let empty = Graph::new(2, [], "empty").unwrap();
        assert_eq!(serialize_graph(&empty), "2 0\n");
        assert_eq!(parse_graph("2 0\n").unwrap().num_edges(), 0);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let cases = [
            ("3 2\n0 1\n", 3),
            ("3 1\n0 x\n", 2),
            ("3 1\n0 0\n", 2),
            ("3 2\n0 1\n1 0\n", 3),
            ("3 1\n0 1\n1 2\n", 3),
            ("3\n", 1),
        ];
        for (text, want) in cases {
            match parse_graph(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(Graph::new(3, [(0, 0)], "x").is_err());
        assert!(Graph::new(3, [(0, 3)], "x").is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)], "x").is_err());
    }
}
