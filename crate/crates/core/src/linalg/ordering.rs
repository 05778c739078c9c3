//! Fill-reducing symmetric orderings. All orderings are returned as
//! `perm[new] = old` and depend only on the sparsity pattern.

use std::collections::VecDeque;

use super::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    Natural,
    ReverseCuthillMcKee,
    /// Vertices whose neighbourhood is already a clique go first (their
    /// elimination creates no fill), the rest is ordered by recursive
    /// level-set nested dissection.
    #[default]
    NestedDissection,
}

const LEAF_SIZE: usize = 48;

pub fn compute_ordering(a: &CsrMatrix, kind: Ordering) -> Vec<usize> {
    let graph = Graph::from_pattern(a);
    match kind {
        Ordering::Natural => (0..a.dim()).collect(),
        Ordering::ReverseCuthillMcKee => reverse_cuthill_mckee(&graph),
        Ordering::NestedDissection => nested_dissection(&graph),
    }
}

struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    fn from_pattern(a: &CsrMatrix) -> Self {
        let adj = (0..a.dim())
            .map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
            .collect();
        Graph { adj }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn is_simplicial(&self, v: usize) -> bool {
        let nb = &self.adj[v];
        for (x, &a) in nb.iter().enumerate() {
            for &b in &nb[x + 1..] {
                if self.adj[a].binary_search(&b).is_err() {
                    return false;
                }
            }
        }
        true
    }
}

fn reverse_cuthill_mckee(g: &Graph) -> Vec<usize> {
    let n = g.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let active = vec![true; n];
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(g, seed, &active);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = g.adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (g.adj[w].len(), w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// BFS levels from `start` restricted to `active` vertices.
fn level_structure(g: &Graph, start: usize, active: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = std::collections::HashSet::new();
    seen.insert(start);
    let mut levels = vec![vec![start]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &g.adj[v] {
                if active[w] && seen.insert(w) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        levels.push(next);
    }
    levels
}

fn pseudo_peripheral(g: &Graph, seed: usize, active: &[bool]) -> usize {
    let mut start = seed;
    let mut ecc = level_structure(g, start, active).len();
    for _ in 0..8 {
        let levels = level_structure(g, start, active);
        let last = levels.last().unwrap();
        let cand = *last
            .iter()
            .min_by_key(|&&w| (g.adj[w].iter().filter(|&&x| active[x]).count(), w))
            .unwrap();
        let e = level_structure(g, cand, active).len();
        if e > ecc {
            ecc = e;
            start = cand;
        } else {
            break;
        }
    }
    start
}

fn nested_dissection(g: &Graph) -> Vec<usize> {
    let n = g.len();
    let mut order = Vec::with_capacity(n);
    let mut rest = Vec::new();
    for v in 0..n {
        if g.is_simplicial(v) {
            order.push(v);
        } else {
            rest.push(v);
        }
    }
    let mut active = vec![false; n];
    dissect(g, rest, &mut active, &mut order);
    debug_assert_eq!(order.len(), n);
    order
}

fn dissect(g: &Graph, verts: Vec<usize>, active: &mut [bool], out: &mut Vec<usize>) {
    if verts.len() <= LEAF_SIZE {
        out.extend(verts);
        return;
    }
    for &v in &verts {
        active[v] = true;
    }

    // split into connected components first
    let comps = components(g, &verts, active);
    if comps.len() > 1 {
        for &v in &verts {
            active[v] = false;
        }
        for c in comps {
            dissect(g, c, active, out);
        }
        return;
    }

    let start = pseudo_peripheral(g, verts[0], active);
    let levels = level_structure(g, start, active);
    for &v in &verts {
        active[v] = false;
    }
    if levels.len() < 3 {
        out.extend(verts);
        return;
    }
    let mid = levels.len() / 2;
    let mut part_a: Vec<usize> = levels[..mid].concat();
    let part_b: Vec<usize> = levels[mid + 1..].concat();

    // separator vertices with no neighbour beyond the separator join part A
    let mut in_b = vec![];
    for &v in &part_b {
        active[v] = true;
        in_b.push(v);
    }
    let mut sep = Vec::with_capacity(levels[mid].len());
    for &v in &levels[mid] {
        if g.adj[v].iter().any(|&w| active[w]) {
            sep.push(v);
        } else {
            part_a.push(v);
        }
    }
    for v in in_b {
        active[v] = false;
    }
    part_a.sort_unstable();

    dissect(g, part_a, active, out);
    dissect(g, part_b, active, out);
    out.extend(sep);
}

fn components(g: &Graph, verts: &[usize], active: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = std::collections::HashSet::with_capacity(verts.len());
    let mut comps = Vec::new();
    for &s in verts {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            for &w in &g.adj[v] {
                if active[w] && seen.insert(w) {
                    comp.push(w);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}
