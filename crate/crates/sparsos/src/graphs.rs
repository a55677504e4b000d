//! Undirected graphs on character vertices: Cayley graphs, chordality
//! testing via maximum cardinality search, maximal cliques from a perfect
//! elimination ordering, greedy minimum-fill covers, and strong products.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::abelian::{GroupElement, GroupSpec};
use crate::error::{Error, Result};

/// Vertex labels carry their character coordinates end-to-end; strong
/// products append the K_d coordinate.
pub type Label = Vec<u64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<Label>,
    index: BTreeMap<Label, usize>,
    adj: Vec<BTreeSet<usize>>,
}

/// A perfect elimination ordering: `order[0]` is eliminated first, and for a
/// chordal graph each vertex's later neighbors form a clique.
#[derive(Clone, Debug)]
pub struct EliminationOrder {
    pub order: Vec<usize>,
}

impl Graph {
    /// Creates an edgeless graph; labels are sorted into canonical order.
    pub fn new(mut labels: Vec<Label>) -> Result<Self> {
        labels.sort();
        let index: BTreeMap<Label, usize> = labels
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, l)| (l, i))
            .collect();
        if index.len() != labels.len() {
            return Err(Error::InvalidParameter("duplicate vertex label".into()));
        }
        let adj = vec![BTreeSet::new(); labels.len()];
        Ok(Graph { labels, index, adj })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &Label {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn neighbors(&self, i: usize) -> &BTreeSet<usize> {
        &self.adj[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(&j)
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i != j, "self-loops are not allowed");
        self.adj[i].insert(j);
        self.adj[j].insert(i);
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    /// Edges as index pairs (i < j) in canonical order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &j in nbrs.iter().filter(|&&j| j > i) {
                out.push((i, j));
            }
        }
        out
    }

    /// True if every edge of `self` is an edge of `other` (same vertex set).
    pub fn is_covered_by(&self, other: &Graph) -> bool {
        if self.labels != other.labels {
            return false;
        }
        self.edges()
            .iter()
            .all(|&(i, j)| other.has_edge(i, j))
    }

    pub fn labels_of(&self, vertices: &BTreeSet<usize>) -> Vec<Label> {
        vertices.iter().map(|&i| self.labels[i].clone()).collect()
    }
}

/// The Cayley graph Cay(G^, S): all characters as vertices, an edge between
/// chi and chi' iff inv(chi) * chi' lies in S. S must be symmetric; the
/// identity is ignored for edges.
pub fn cayley_graph(group: &GroupSpec, s: &BTreeSet<GroupElement>) -> Result<Graph> {
    for x in s {
        if !s.contains(&group.inv(x)) {
            return Err(Error::NotSymmetric(format!(
                "{x} is in S but its inverse is not"
            )));
        }
    }
    let labels: Vec<Label> = group.elements().map(|e| e.coords().to_vec()).collect();
    let mut g = Graph::new(labels)?;
    let elems: Vec<GroupElement> = group.elements().collect();
    for (i, chi) in elems.iter().enumerate() {
        for chi2 in elems.iter().skip(i + 1) {
            let diff = group.mul(&group.inv(chi), chi2);
            if diff != group.identity() && s.contains(&diff) {
                let a = g.index_of(&chi.coords().to_vec()).unwrap();
                let b = g.index_of(&chi2.coords().to_vec()).unwrap();
                g.add_edge(a, b);
            }
        }
    }
    Ok(g)
}

/// Maximum cardinality search. Returns the visit order (a reverse PEO
/// candidate for chordal graphs). Ties break on smallest vertex index.
fn mcs_order(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut weight = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !visited[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .unwrap();
        visited[v] = true;
        order.push(v);
        for &u in g.neighbors(v) {
            if !visited[u] {
                weight[u] += 1;
            }
        }
    }
    order
}

/// Bitset adjacency rows, for subset tests on dense neighborhoods.
fn adjacency_bitsets(g: &Graph) -> Vec<Vec<u64>> {
    let words = g.n().div_ceil(64);
    let mut rows = vec![vec![0u64; words]; g.n()];
    for (v, nbrs) in g.adj.iter().enumerate() {
        for &u in nbrs {
            rows[v][u / 64] |= 1 << (u % 64);
        }
    }
    rows
}

fn bitset_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x & !y == 0)
}

/// Checks the later-neighbors-clique property of a candidate PEO.
pub fn verify_peo(g: &Graph, peo: &EliminationOrder) -> bool {
    let n = g.n();
    if peo.order.len() != n {
        return false;
    }
    let mut pos = vec![usize::MAX; n];
    for (p, &v) in peo.order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return false;
        }
        pos[v] = p;
    }
    let adj = adjacency_bitsets(g);
    let words = n.div_ceil(64);
    for (p, &v) in peo.order.iter().enumerate() {
        let later: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| pos[u] > p)
            .collect();
        let mut mask = vec![0u64; words];
        for &u in &later {
            mask[u / 64] |= 1 << (u % 64);
        }
        for &u in &later {
            let mut rest = mask.clone();
            rest[u / 64] &= !(1 << (u % 64));
            if !bitset_subset(&rest, &adj[u]) {
                return false;
            }
        }
    }
    true
}

/// Returns a perfect elimination ordering iff the graph is chordal.
pub fn is_chordal(g: &Graph) -> Option<EliminationOrder> {
    let mut order = mcs_order(g);
    order.reverse();
    let peo = EliminationOrder { order };
    verify_peo(g, &peo).then_some(peo)
}

/// The inclusion-maximal cliques of a chordal graph, from a PEO sweep.
/// Cliques are vertex-index sets; the list is sorted by canonical label
/// sequence and deduplicated.
pub fn maximal_cliques_chordal(g: &Graph, peo: &EliminationOrder) -> Result<Vec<BTreeSet<usize>>> {
    if !verify_peo(g, peo) {
        return Err(Error::BadCertificate(
            "order is not a perfect elimination ordering".into(),
        ));
    }
    let n = g.n();
    let mut pos = vec![0usize; n];
    for (p, &v) in peo.order.iter().enumerate() {
        pos[v] = p;
    }
    let mut candidates: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
    for (p, &v) in peo.order.iter().enumerate() {
        let mut c: BTreeSet<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| pos[u] > p)
            .collect();
        c.insert(v);
        candidates.push(c);
    }
    candidates.sort_by_key(|c| std::cmp::Reverse(c.len()));
    let words = n.div_ceil(64);
    let to_mask = |c: &BTreeSet<usize>| {
        let mut m = vec![0u64; words];
        for &v in c {
            m[v / 64] |= 1 << (v % 64);
        }
        m
    };
    let mut keep: Vec<BTreeSet<usize>> = Vec::new();
    let mut keep_masks: Vec<Vec<u64>> = Vec::new();
    for c in candidates {
        let m = to_mask(&c);
        if !keep_masks.iter().any(|k| bitset_subset(&m, k)) {
            keep.push(c);
            keep_masks.push(m);
        }
    }
    keep.sort_by(|a, b| g.labels_of(a).cmp(&g.labels_of(b)));
    Ok(keep)
}

/// Greedy minimum-fill chordal cover. Ties break on the smallest canonical
/// vertex label (= smallest index, labels being sorted). Returns the cover
/// together with the elimination order, which is a PEO of the cover.
pub fn min_fill_cover(g: &Graph) -> (Graph, EliminationOrder) {
    let n = g.n();
    let mut work: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut cover = g.clone();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        // Fill-in count of each remaining vertex.
        let fill = |v: usize, work: &[BTreeSet<usize>]| -> usize {
            let nbrs: Vec<usize> = work[v].iter().copied().collect();
            let mut count = 0;
            for (a, &x) in nbrs.iter().enumerate() {
                for &y in &nbrs[a + 1..] {
                    if !work[x].contains(&y) {
                        count += 1;
                    }
                }
            }
            count
        };
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (fill(v, &work), v))
            .unwrap();
        let nbrs: Vec<usize> = work[v].iter().copied().collect();
        for (a, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[a + 1..] {
                if !work[x].contains(&y) {
                    work[x].insert(y);
                    work[y].insert(x);
                    cover.add_edge(x, y);
                }
            }
        }
        for &u in &nbrs {
            work[u].remove(&v);
        }
        work[v].clear();
        alive[v] = false;
        order.push(v);
    }
    (cover, EliminationOrder { order })
}

/// Strong product with the complete graph K_d: vertices are (u, r) for
/// r in 0..d (the K_d coordinate is appended to the label); distinct
/// vertices are adjacent iff u = v or {u, v} is an edge.
pub fn strong_product_kd(g: &Graph, d: u64) -> Result<Graph> {
    if d == 0 {
        return Err(Error::InvalidParameter("strong product needs d >= 1".into()));
    }
    let mut labels = Vec::with_capacity(g.n() * d as usize);
    for l in g.labels() {
        for r in 0..d {
            let mut lab = l.clone();
            lab.push(r);
            labels.push(lab);
        }
    }
    let mut p = Graph::new(labels)?;
    for (i, li) in g.labels().iter().enumerate() {
        for r in 0..d {
            let mut a = li.clone();
            a.push(r);
            let ai = p.index_of(&a).unwrap();
            // Same fiber.
            for s in (r + 1)..d {
                let mut b = li.clone();
                b.push(s);
                p.add_edge(ai, p.index_of(&b).unwrap());
            }
            // Adjacent fibers.
            for &j in g.neighbors(i).iter().filter(|&&j| j > i) {
                for s in 0..d {
                    let mut b = g.label(j).clone();
                    b.push(s);
                    p.add_edge(ai, p.index_of(&b).unwrap());
                }
            }
        }
    }
    Ok(p)
}

/// True iff every edge of `g` maps to an edge of `h` under the bijection.
pub fn is_subgraph(g: &Graph, h: &Graph, map: &BTreeMap<Label, Label>) -> Result<bool> {
    if map.len() != g.n() || g.n() != h.n() {
        return Err(Error::BadVertexMap);
    }
    let mut seen = BTreeSet::new();
    let mut to_h = vec![usize::MAX; g.n()];
    for (from, to) in map {
        let (Some(i), Some(j)) = (g.index_of(from), h.index_of(to)) else {
            return Err(Error::BadVertexMap);
        };
        if !seen.insert(j) {
            return Err(Error::BadVertexMap);
        }
        to_h[i] = j;
    }
    Ok(g.edges().iter().all(|&(i, j)| h.has_edge(to_h[i], to_h[j])))
}

// --- JSON wire format ---------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<Label>,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            vertices: self.labels.clone(),
            edges: self.edges().iter().map(|&(i, j)| [i, j]).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text)?;
        let mut g = Graph::new(doc.vertices)?;
        for [i, j] in doc.edges {
            if i >= g.n() || j >= g.n() || i == j {
                return Err(Error::Parse(format!("bad edge [{i}, {j}]")));
            }
            g.add_edge(i, j);
        }
        Ok(g)
    }
}

// --- Brute-force oracles (used by tests and the acceptance suite) -------

/// Exhaustive chordality check: no induced cycle of length >= 4. Intended
/// for graphs with at most ~10 vertices.
pub fn chordal_brute_force(g: &Graph) -> bool {
    let n = g.n();
    for mask in 0u32..(1 << n) {
        let verts: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        let k = verts.len();
        if k < 4 {
            continue;
        }
        // Induced subgraph is a chordless cycle iff it is connected and
        // 2-regular.
        if !verts
            .iter()
            .all(|&v| g.neighbors(v).iter().filter(|&&u| mask & (1 << u) != 0).count() == 2)
        {
            continue;
        }
        let mut seen = BTreeSet::from([verts[0]]);
        let mut stack = vec![verts[0]];
        while let Some(v) = stack.pop() {
            for &u in g.neighbors(v) {
                if mask & (1 << u) != 0 && seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        if seen.len() == k {
            return false;
        }
    }
    true
}

/// Exhaustive maximal-clique enumeration for small graphs.
pub fn maximal_cliques_brute_force(g: &Graph) -> Vec<BTreeSet<usize>> {
    let n = g.n();
    let mut cliques: Vec<u32> = Vec::new();
    for mask in 1u32..(1 << n) {
        let verts: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        let is_clique = verts
            .iter()
            .enumerate()
            .all(|(a, &x)| verts[a + 1..].iter().all(|&y| g.has_edge(x, y)));
        if is_clique {
            cliques.push(mask);
        }
    }
    let mut maximal: Vec<BTreeSet<usize>> = cliques
        .iter()
        .filter(|&&c| !cliques.iter().any(|&d| d != c && d & c == c))
        .map(|&c| (0..n).filter(|&v| c & (1 << v) != 0).collect())
        .collect();
    maximal.sort_by(|a, b| g.labels_of(a).cmp(&g.labels_of(b)));
    maximal
}
