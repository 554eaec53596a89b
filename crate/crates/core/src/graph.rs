//! Combinatorial structure of the support: the bipartite support graph, its
//! components (Gacs-Korner), short paths and cycles, and the confusability
//! graph used for Korner's graph entropy.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::prob::{entropy, JointPmf};

/// Vertex cap for maximal independent set enumeration.
pub const MIS_VERTEX_CAP: usize = 40;

/// Tolerance for the equal-marginal condition.
pub const MAX_CONDITION_TOL: f64 = 1e-9;

/// Bipartite graph on `X ⊔ Y` with an edge for each support cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportGraph {
    pub nx: usize,
    pub ny: usize,
    pub x_adj: Vec<Vec<usize>>,
    pub y_adj: Vec<Vec<usize>>,
}

impl SupportGraph {
    pub fn new(p: &JointPmf) -> Self {
        let mut x_adj = vec![Vec::new(); p.nx()];
        let mut y_adj = vec![Vec::new(); p.ny()];
        for (x, y) in p.support() {
            x_adj[x].push(y);
            y_adj[y].push(x);
        }
        Self { nx: p.nx(), ny: p.ny(), x_adj, y_adj }
    }

    pub fn edge_count(&self) -> usize {
        self.x_adj.iter().map(Vec::len).sum()
    }
}

/// Connected components of the support graph. Symbols outside the support
/// have no component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentLabeling {
    pub x_component: Vec<Option<usize>>,
    pub y_component: Vec<Option<usize>>,
    pub masses: Vec<f64>,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.masses.len()
    }

    /// The common part as a channel: `U` is the component of the cell.
    pub fn channel(&self, nx: usize, ny: usize) -> Channel {
        let k = self.count().max(1);
        Channel::deterministic(nx, ny, k, |x, y| {
            self.x_component[x].or(self.y_component[y]).unwrap_or(0)
        })
    }
}

/// Labels components in order of their smallest `x` symbol.
pub fn components(p: &JointPmf) -> ComponentLabeling {
    let g = SupportGraph::new(p);
    let mut xc = vec![None; g.nx];
    let mut yc = vec![None; g.ny];
    let mut masses = Vec::new();
    for start in 0..g.nx {
        if xc[start].is_some() || g.x_adj[start].is_empty() {
            continue;
        }
        let id = masses.len();
        let mut mass = 0.0;
        let mut stack = vec![start];
        xc[start] = Some(id);
        while let Some(x) = stack.pop() {
            for &y in &g.x_adj[x] {
                mass += p.get(x, y);
                if yc[y].is_none() {
                    yc[y] = Some(id);
                    for &x2 in &g.y_adj[y] {
                        if xc[x2].is_none() {
                            xc[x2] = Some(id);
                            stack.push(x2);
                        }
                    }
                }
            }
        }
        masses.push(mass);
    }
    ComponentLabeling { x_component: xc, y_component: yc, masses }
}

/// Gacs-Korner common information: entropy of the component label.
pub fn gacs_korner(p: &JointPmf) -> (f64, ComponentLabeling) {
    let lab = components(p);
    (entropy(lab.masses.iter().copied()), lab)
}

/// A path `y2 - x1 - y1 - x2` in the support graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path3 {
    pub x1: usize,
    pub y1: usize,
    pub x2: usize,
    pub y2: usize,
}

/// Finds `x1 != x2`, `y1 != y2` with `p(x1,y1), p(x1,y2), p(x2,y1) > 0`.
pub fn has_path_length_3(p: &JointPmf) -> Option<Path3> {
    let g = SupportGraph::new(p);
    for x1 in 0..g.nx {
        if g.x_adj[x1].len() < 2 {
            continue;
        }
        for &y1 in &g.x_adj[x1] {
            if let Some(&x2) = g.y_adj[y1].iter().find(|&&x| x != x1) {
                let y2 = *g.x_adj[x1].iter().find(|&&y| y != y1).expect("degree checked");
                return Some(Path3 { x1, y1, x2, y2 });
            }
        }
    }
    None
}

/// A cycle `y_1 x_1 y_2 x_2 ... y_a x_a y_1` in the support graph.
///
/// Its edges are `(x_i, y_i)` and `(x_i, y_{i+1})`, indices mod `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    pub ys: Vec<usize>,
    pub xs: Vec<usize>,
}

impl Cycle {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Cells carrying `+eps` and `-eps` in the cycle witness.
    pub fn cells(&self) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
        let a = self.len();
        let plus = (0..a).map(|i| (self.xs[i], self.ys[i])).collect();
        let minus = (0..a).map(|i| (self.xs[i], self.ys[(i + 1) % a])).collect();
        (plus, minus)
    }
}

/// Finds some cycle, searching depth first from `y` vertices in order.
pub fn find_cycle(p: &JointPmf) -> Option<Cycle> {
    let g = SupportGraph::new(p);
    // Vertices: y in 0..ny, x in ny..ny+nx.
    let n = g.nx + g.ny;
    let neighbors = |v: usize| -> Vec<usize> {
        if v < g.ny {
            g.y_adj[v].iter().map(|&x| g.ny + x).collect()
        } else {
            g.x_adj[v - g.ny].clone()
        }
    };
    let mut visited = vec![false; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        // Iterative DFS keeping the current path.
        let mut parent = vec![usize::MAX; n];
        let mut on_path = vec![false; n];
        let mut path: Vec<usize> = vec![root];
        let mut iters: Vec<(Vec<usize>, usize)> = vec![(neighbors(root), 0)];
        visited[root] = true;
        on_path[root] = true;
        while let Some((nbrs, idx)) = iters.last_mut() {
            let v = *path.last().expect("path tracks iterator stack");
            if *idx >= nbrs.len() {
                iters.pop();
                on_path[v] = false;
                path.pop();
                continue;
            }
            let w = nbrs[*idx];
            *idx += 1;
            if w == parent[v] {
                continue;
            }
            if on_path[w] {
                let pos = path.iter().position(|&z| z == w).expect("w is on the path");
                let mut cyc: Vec<usize> = path[pos..].to_vec();
                let start = cyc.iter().position(|&z| z < g.ny).expect("bipartite cycle has a y");
                cyc.rotate_left(start);
                let ys = cyc.iter().step_by(2).copied().collect();
                let xs = cyc.iter().skip(1).step_by(2).map(|&z| z - g.ny).collect();
                return Some(Cycle { ys, xs });
            }
            if !visited[w] {
                visited[w] = true;
                on_path[w] = true;
                parent[w] = v;
                path.push(w);
                iters.push((neighbors(w), 0));
            }
        }
    }
    None
}

/// Undirected simple graph on `X`; `x ~ x'` when some `y` is compatible with both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusabilityGraph {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
}

impl ConfusabilityGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in edges {
            if a != b {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
        Self { n, adj }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.adj[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(i, &a)| set[i + 1..].iter().all(|&b| !self.adj[a][b]))
    }
}

pub fn confusability_graph(p: &JointPmf) -> ConfusabilityGraph {
    let g = SupportGraph::new(p);
    let mut edges = Vec::new();
    for xs in &g.y_adj {
        for (i, &a) in xs.iter().enumerate() {
            for &b in &xs[i + 1..] {
                edges.push((a, b));
            }
        }
    }
    ConfusabilityGraph::from_edges(p.nx(), &edges)
}

/// All maximal independent sets, each sorted, in lexicographic order.
pub fn maximal_independent_sets(g: &ConfusabilityGraph) -> Result<Vec<Vec<usize>>> {
    if g.n > MIS_VERTEX_CAP {
        return Err(Error::GraphTooLarge { vertices: g.n, cap: MIS_VERTEX_CAP });
    }
    // Bron-Kerbosch with pivoting on the complement graph.
    let n = g.n;
    let non_adj = |a: usize, b: usize| a != b && !g.adj[a][b];
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> = vec![(Vec::new(), (0..n).collect(), Vec::new())];
    while let Some((r, p, x)) = stack.pop() {
        if p.is_empty() {
            if x.is_empty() {
                let mut s = r.clone();
                s.sort_unstable();
                out.push(s);
            }
            continue;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| p.iter().filter(|&&v| non_adj(u, v)).count())
            .expect("p is nonempty");
        let mut p = p;
        let mut x = x;
        let candidates: Vec<usize> = p.iter().copied().filter(|&v| !non_adj(pivot, v)).collect();
        for v in candidates {
            let mut r2 = r.clone();
            r2.push(v);
            let p2 = p.iter().copied().filter(|&w| non_adj(v, w)).collect();
            let x2 = x.iter().copied().filter(|&w| non_adj(v, w)).collect();
            stack.push((r2, p2, x2));
            p.retain(|&w| w != v);
            x.push(v);
        }
    }
    out.sort();
    Ok(out)
}

/// Equal-marginal condition: `H(X) = H(Y)` and `p(x) = p(y)` on every support cell.
pub fn max_condition_check(p: &JointPmf) -> bool {
    if (p.h_x() - p.h_y()).abs() > MAX_CONDITION_TOL {
        return false;
    }
    let px = p.px();
    let py = p.py();
    p.support()
        .into_iter()
        .all(|(x, y)| (px[x] - py[y]).abs() <= MAX_CONDITION_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pl() -> JointPmf {
        let t = 1.0 / 3.0;
        JointPmf::from_rows(&[vec![t, t], vec![t, 0.0]]).unwrap()
    }

    fn pind() -> JointPmf {
        JointPmf::from_rows(&[vec![0.25; 2], vec![0.25; 2]]).unwrap()
    }

    #[test]
    fn components_of_diagonal() {
        let p = JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let (k, lab) = gacs_korner(&p);
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-15);
        assert_eq!(lab.count(), 2);
        let (k, _) = gacs_korner(&pind());
        assert_abs_diff_eq!(k, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn path_on_l_shape() {
        let path = has_path_length_3(&pl()).unwrap();
        assert_eq!(path, Path3 { x1: 0, y1: 0, x2: 1, y2: 1 });
        let p = JointPmf::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!(has_path_length_3(&p).is_none());
    }

    #[test]
    fn cycles() {
        assert!(find_cycle(&pl()).is_none());
        let c = find_cycle(&pind()).unwrap();
        assert_eq!(c.len(), 2);
        let (plus, minus) = c.cells();
        let mut all: Vec<_> = plus.into_iter().chain(minus).collect();
        all.sort();
        assert_eq!(all, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn pentagon_independent_sets() {
        let edges: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let g = ConfusabilityGraph::from_edges(5, &edges);
        let sets = maximal_independent_sets(&g).unwrap();
        assert_eq!(sets, vec![vec![0, 2], vec![0, 3], vec![1, 3], vec![1, 4], vec![2, 4]]);
    }

    #[test]
    fn max_condition() {
        assert!(max_condition_check(&pind()));
        assert!(!max_condition_check(&pl()));
    }
}
