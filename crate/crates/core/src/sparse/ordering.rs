//! Fill-reducing column ordering by recursive level-set nested dissection
//! on the graph of `A + A^T`.

use std::collections::VecDeque;

use super::csr::CsrMatrix;

const LEAF: usize = 32;

/// Symmetric adjacency of `A + A^T` without self loops.
struct Graph {
    ptr: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    fn new(a: &CsrMatrix) -> Self {
        let n = a.nrows();
        let mut deg = vec![0usize; n + 1];
        for i in 0..n {
            for &j in a.row(i).0 {
                if i != j {
                    deg[i + 1] += 1;
                    deg[j + 1] += 1;
                }
            }
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut next = deg.clone();
        let mut adj = vec![0; deg[n]];
        for i in 0..n {
            for &j in a.row(i).0 {
                if i != j {
                    adj[next[i]] = j;
                    next[i] += 1;
                    adj[next[j]] = i;
                    next[j] += 1;
                }
            }
        }
        // dedupe
        let mut ptr = vec![0];
        let mut out = Vec::with_capacity(adj.len());
        for i in 0..n {
            let s = &mut adj[deg[i]..deg[i + 1]];
            s.sort_unstable();
            let mut last = usize::MAX;
            for &j in s.iter() {
                if j != last {
                    out.push(j);
                    last = j;
                }
            }
            ptr.push(out.len());
        }
        Graph { ptr, adj: out }
    }

    fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[self.ptr[i]..self.ptr[i + 1]]
    }
}

struct Dissector<'a> {
    g: &'a Graph,
    /// Label of the subgraph a node currently belongs to; `usize::MAX` once ordered.
    label: Vec<usize>,
    level: Vec<usize>,
    next_label: usize,
    order: Vec<usize>,
}

impl Dissector<'_> {
    /// BFS inside `lab` from `root`; returns nodes in BFS order and sets levels.
    fn bfs(&mut self, root: usize, lab: usize) -> (Vec<usize>, usize) {
        let mut seen = Vec::new();
        let mut q = VecDeque::new();
        self.level[root] = 0;
        q.push_back(root);
        let mut visit_mark = vec![root];
        let mut depth = 0;
        // mark visited with a temporary label
        let tmp = usize::MAX - 1;
        self.label[root] = tmp;
        while let Some(v) = q.pop_front() {
            seen.push(v);
            depth = depth.max(self.level[v]);
            for &u in self.g.neighbors(v) {
                if self.label[u] == lab {
                    self.label[u] = tmp;
                    self.level[u] = self.level[v] + 1;
                    visit_mark.push(u);
                    q.push_back(u);
                }
            }
        }
        for v in visit_mark {
            self.label[v] = lab;
        }
        (seen, depth)
    }

    fn pseudo_peripheral(&mut self, start: usize, lab: usize) -> (Vec<usize>, usize) {
        let (mut nodes, mut depth) = self.bfs(start, lab);
        for _ in 0..4 {
            let last_level: Vec<usize> = nodes.iter().copied().filter(|&v| self.level[v] == depth).collect();
            let cand = *last_level
                .iter()
                .min_by_key(|&&v| self.g.neighbors(v).len())
                .unwrap();
            let (n2, d2) = self.bfs(cand, lab);
            if d2 <= depth {
                // restore levels for the kept BFS
                let r = nodes[0];
                let out = self.bfs(r, lab);
                return out;
            }
            nodes = n2;
            depth = d2;
        }
        (nodes, depth)
    }

    fn dissect(&mut self, nodes: Vec<usize>, lab: usize) {
        if nodes.len() <= LEAF {
            self.emit_leaf(&nodes, lab);
            return;
        }
        let (comp, depth) = self.pseudo_peripheral(nodes[0], lab);
        if comp.len() < nodes.len() {
            // disconnected: split off the component
            let rest_lab = self.fresh();
            let comp_lab = self.fresh();
            for &v in &nodes {
                self.label[v] = rest_lab;
            }
            for &v in &comp {
                self.label[v] = comp_lab;
            }
            let rest: Vec<usize> = nodes.into_iter().filter(|&v| self.label[v] == rest_lab).collect();
            self.dissect(comp, comp_lab);
            self.dissect(rest, rest_lab);
            return;
        }
        if depth < 2 {
            self.emit_leaf(&nodes, lab);
            return;
        }
        let mut counts = vec![0usize; depth + 1];
        for &v in &comp {
            counts[self.level[v]] += 1;
        }
        let half = comp.len() / 2;
        let mut acc = 0;
        let mut sep = 1;
        for (l, &c) in counts.iter().enumerate() {
            acc += c;
            if acc >= half {
                sep = l.clamp(1, depth - 1);
                break;
            }
        }
        let (la, lb) = (self.fresh(), self.fresh());
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut s = Vec::new();
        for &v in &comp {
            let l = self.level[v];
            if l < sep {
                self.label[v] = la;
                a.push(v);
            } else if l > sep {
                self.label[v] = lb;
                b.push(v);
            } else {
                s.push(v);
            }
        }
        for &v in &s {
            self.label[v] = usize::MAX;
        }
        self.dissect(a, la);
        self.dissect(b, lb);
        self.order.extend_from_slice(&s);
    }

    fn emit_leaf(&mut self, nodes: &[usize], lab: usize) {
        // BFS order within the leaf keeps bandwidth small
        let mut seen = Vec::with_capacity(nodes.len());
        for &r in nodes {
            if self.label[r] != lab {
                continue;
            }
            let (comp, _) = self.bfs(r, lab);
            for &v in &comp {
                self.label[v] = usize::MAX;
            }
            seen.extend(comp);
        }
        self.order.extend(seen);
    }

    fn fresh(&mut self) -> usize {
        self.next_label += 1;
        self.next_label
    }
}

/// Returns a permutation `perm` with `perm[k]` the original index placed at
/// position `k`. Rows with very many off-diagonal entries go last.
pub fn nested_dissection(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let g = Graph::new(a);
    let dense_cut = 16usize.max((10.0 * (n as f64).sqrt()) as usize);
    let mut d = Dissector {
        g: &g,
        label: vec![0; n],
        level: vec![0; n],
        next_label: 0,
        order: Vec::with_capacity(n),
    };
    let mut dense = Vec::new();
    let mut sparse = Vec::new();
    for i in 0..n {
        if g.neighbors(i).len() > dense_cut {
            d.label[i] = usize::MAX;
            dense.push(i);
        } else {
            sparse.push(i);
        }
    }
    d.dissect(sparse, 0);
    d.order.extend(dense);
    debug_assert_eq!(d.order.len(), n);
    d.order
}

/// Nested dissection on the quotient graph of `groups` (unknown → group id).
/// Each group is emitted contiguously in increasing unknown index.
pub fn nested_dissection_grouped(a: &CsrMatrix, groups: &[usize]) -> Vec<usize> {
    let n = a.nrows();
    assert_eq!(groups.len(), n);
    let ng = groups.iter().copied().max().map_or(0, |m| m + 1);
    let mut t = super::Triplets::with_capacity(a.nnz());
    for i in 0..n {
        for &j in a.row(i).0 {
            t.push(groups[i], groups[j], 1.0);
        }
    }
    let q = CsrMatrix::from_triplets(ng, ng, &t).expect("groups in range");
    let gperm = nested_dissection(&q);
    let mut members = vec![Vec::new(); ng];
    for (i, &g) in groups.iter().enumerate() {
        members[g].push(i);
    }
    gperm.into_iter().flat_map(|g| std::mem::take(&mut members[g])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Triplets;

    fn grid_laplacian(m: usize) -> CsrMatrix {
        let n = m * m;
        let mut t = Triplets::default();
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                t.push(k, k, 4.0);
                if i > 0 {
                    t.push(k, k - m, -1.0);
                }
                if i + 1 < m {
                    t.push(k, k + m, -1.0);
                }
                if j > 0 {
                    t.push(k, k - 1, -1.0);
                }
                if j + 1 < m {
                    t.push(k, k + 1, -1.0);
                }
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn is_a_permutation() {
        for m in [1, 3, 10, 40] {
            let a = grid_laplacian(m);
            let mut p = nested_dissection(&a);
            p.sort_unstable();
            assert_eq!(p, (0..m * m).collect::<Vec<_>>());
        }
    }

    #[test]
    fn grouped_keeps_groups_contiguous() {
        let a = grid_laplacian(12);
        let groups: Vec<usize> = (0..144).map(|i| i / 2).collect();
        let p = nested_dissection_grouped(&a, &groups);
        for pair in p.chunks(2) {
            assert_eq!(pair[0] / 2, pair[1] / 2);
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn disconnected_and_dense_rows() {
        let mut t = Triplets::default();
        for k in 0..200 {
            t.push(k, k, 1.0);
            if k % 2 == 1 {
                t.push(k, k - 1, 1.0);
            }
            t.push(200, k, 1.0);
            t.push(k, 200, 1.0);
        }
        t.push(200, 200, 0.0);
        let a = CsrMatrix::from_triplets(201, 201, &t).unwrap();
        let p = nested_dissection(&a);
        assert_eq!(*p.last().unwrap(), 200);
        let mut s = p.clone();
        s.sort_unstable();
        assert_eq!(s, (0..201).collect::<Vec<_>>());
    }
}
