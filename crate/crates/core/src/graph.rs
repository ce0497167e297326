//! Finite trees with boundary.
//!
//! The boundary of a tree is its set of degree-one vertices; every other
//! vertex is interior. Vertex ids are dense integers `0..n` and every edge is
//! stored as `(min, max)` so that gradients have a reproducible sign.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite tree together with its boundary (leaves) and interior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryTree {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    boundary: Vec<usize>,
    interior: Vec<usize>,
    boundary_slot: Vec<Option<usize>>,
    max_degree: usize,
}

/// A connected vertex subset of a tree. The relative boundary is always taken
/// against the parent tree's leaves, never recomputed from degrees inside the subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtreeRef {
    pub vertices: Vec<usize>,
    pub relative_boundary: Vec<usize>,
}

impl SubtreeRef {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Number of parent-boundary vertices inside the subtree.
    pub fn boundary_count(&self) -> usize {
        self.relative_boundary.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// The component hanging at the `k`-th interior vertex of a path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Branch {
    /// Position along the path, `1 <= k <= L - 1`.
    pub k: usize,
    pub part: SubtreeRef,
}

impl Branch {
    /// `n_k`, the number of boundary vertices in the branch.
    pub fn boundary_count(&self) -> usize {
        self.part.boundary_count()
    }
}

impl BoundaryTree {
    /// Validates an edge list over vertex ids `0..n` and builds the tree.
    pub fn from_edges(edge_list: &[(usize, usize)]) -> Result<Self> {
        let n = edge_list
            .iter()
            .map(|&(u, v)| u.max(v) + 1)
            .max()
            .unwrap_or(0);
        Self::with_vertex_count(n, edge_list)
    }

    /// Like [`BoundaryTree::from_edges`] but with an explicit vertex count, so
    /// that isolated trailing ids are reported as gaps.
    pub fn with_vertex_count(n: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edge_list.len());
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(u, v) in edge_list {
            if u == v {
                return Err(Error::Malformed(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Malformed(format!(
                    "edge ({u}, {v}) exceeds vertex count {n}"
                )));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::Malformed(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
            edges.push(e);
        }
        if n < 3 {
            return Err(Error::TooSmall(n));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        if let Some(gap) = adjacency.iter().position(|a| a.is_empty()) {
            return Err(Error::Malformed(format!(
                "vertex id {gap} has no incident edge"
            )));
        }
        if edges.len() != n - 1 {
            return Err(Error::NotATree(format!(
                "{} edges on {n} vertices (a tree has {})",
                edges.len(),
                n - 1
            )));
        }
        edges.sort_unstable();
        for a in adjacency.iter_mut() {
            a.sort_unstable();
        }

        let mut visited = vec![false; n];
        let mut stack = vec![0];
        visited[0] = true;
        let mut reached = 1;
        while let Some(x) = stack.pop() {
            for &y in &adjacency[x] {
                if !visited[y] {
                    visited[y] = true;
                    reached += 1;
                    stack.push(y);
                }
            }
        }
        if reached != n {
            return Err(Error::NotATree("graph is disconnected".into()));
        }

        let boundary: Vec<usize> = (0..n).filter(|&v| adjacency[v].len() == 1).collect();
        let interior: Vec<usize> = (0..n).filter(|&v| adjacency[v].len() != 1).collect();
        let mut boundary_slot = vec![None; n];
        for (i, &b) in boundary.iter().enumerate() {
            boundary_slot[b] = Some(i);
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);

        let tree = BoundaryTree {
            n,
            edges,
            adjacency,
            boundary,
            interior,
            boundary_slot,
            max_degree,
        };
        tree.check_boundary_structure()?;
        Ok(tree)
    }

    // Automatic for trees with n >= 3; kept as an explicit structural check.
    fn check_boundary_structure(&self) -> Result<()> {
        if self.interior.is_empty() {
            return Err(Error::TooSmall(self.n));
        }
        if let Some(&(u, v)) = self
            .edges
            .iter()
            .find(|&&(u, v)| self.is_boundary(u) && self.is_boundary(v))
        {
            return Err(Error::Malformed(format!(
                "edge ({u}, {v}) joins two boundary vertices"
            )));
        }
        let inside = |v: usize| !self.is_boundary(v);
        if self.component(self.interior[0], |_, w| inside(w)).len() != self.interior.len() {
            return Err(Error::Malformed("interior is disconnected".into()));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Sorted boundary vertices; this order indexes every boundary vector and DtN row.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_slot[v].is_some()
    }

    /// Position of `v` in the sorted boundary list.
    pub fn boundary_slot(&self, v: usize) -> Option<usize> {
        self.boundary_slot[v]
    }

    /// `D`, the largest vertex degree.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::BadVertex(v))
        }
    }

    /// Breadth-first distances from `source`.
    pub fn distances_from(&self, source: usize) -> Result<Vec<usize>> {
        self.check_vertex(source)?;
        Ok(self.bfs(source).0)
    }

    fn bfs(&self, source: usize) -> (Vec<usize>, Vec<usize>) {
        let mut dist = vec![usize::MAX; self.n];
        let mut parent = vec![usize::MAX; self.n];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        while let Some(x) = queue.pop_front() {
            for &y in &self.adjacency[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
        (dist, parent)
    }

    /// Combinatorial distance between `u` and `v`.
    pub fn distance(&self, u: usize, v: usize) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(self.distances_from(u)?[v])
    }

    /// The unique path from `u` to `v`, both included.
    pub fn path_between(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let (_, parent) = self.bfs(u);
        let mut path = vec![v];
        let mut x = v;
        while x != u {
            x = parent[x];
            path.push(x);
        }
        path.reverse();
        Ok(path)
    }

    /// Diameter `L` and a path realizing it, by two breadth-first sweeps.
    ///
    /// The first sweep starts at vertex 0; each sweep picks the farthest vertex
    /// with the smallest id. The path is oriented from its smaller endpoint.
    pub fn diameter(&self) -> (usize, Vec<usize>) {
        let farthest = |dist: &[usize]| {
            let best = *dist.iter().max().expect("nonempty tree");
            dist.iter()
                .position(|&d| d == best)
                .expect("maximum exists")
        };
        let (d0, _) = self.bfs(0);
        let u = farthest(&d0);
        let (du, parent) = self.bfs(u);
        let v = farthest(&du);
        let mut path = vec![v];
        let mut x = v;
        while x != u {
            x = parent[x];
            path.push(x);
        }
        if path[0] > path[path.len() - 1] {
            path.reverse();
        }
        debug_assert!(self.is_boundary(path[0]) && self.is_boundary(path[path.len() - 1]));
        (du[v], path)
    }

    /// Vertices reachable from `start` through edges `(x, y)` with `allowed(x, y)`, sorted.
    pub fn component<F>(&self, start: usize, allowed: F) -> Vec<usize>
    where
        F: Fn(usize, usize) -> bool,
    {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        let mut out = vec![start];
        while let Some(x) = stack.pop() {
            for &y in &self.adjacency[x] {
                if !seen[y] && allowed(x, y) {
                    seen[y] = true;
                    out.push(y);
                    stack.push(y);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Builds a [`SubtreeRef`] after checking that `vertices` induces a connected subgraph.
    pub fn subtree(&self, vertices: &[usize]) -> Result<SubtreeRef> {
        let mut vs = vertices.to_vec();
        vs.sort_unstable();
        vs.dedup();
        let Some(&first) = vs.first() else {
            return Err(Error::NotConnected);
        };
        for &v in &vs {
            self.check_vertex(v)?;
        }
        let mut member = vec![false; self.n];
        for &v in &vs {
            member[v] = true;
        }
        if self.component(first, |_, y| member[y]).len() != vs.len() {
            return Err(Error::NotConnected);
        }
        Ok(self.subtree_unchecked(vs))
    }

    /// Caller guarantees `vertices` is sorted and connected.
    pub(crate) fn subtree_unchecked(&self, vertices: Vec<usize>) -> SubtreeRef {
        let relative_boundary = vertices
            .iter()
            .copied()
            .filter(|&v| self.is_boundary(v))
            .collect();
        SubtreeRef {
            vertices,
            relative_boundary,
        }
    }

    /// The components `G_k` hanging at each interior vertex `x_k` of `path`
    /// once the two path edges at `x_k` are removed.
    pub fn branch_components(&self, path: &[usize]) -> Result<Vec<Branch>> {
        if path.len() < 2 {
            return Err(Error::NotAPath);
        }
        let mut on_path = vec![false; self.n];
        for &x in path {
            if x >= self.n || on_path[x] {
                return Err(Error::NotAPath);
            }
            on_path[x] = true;
        }
        if path
            .windows(2)
            .any(|w| self.adjacency[w[0]].binary_search(&w[1]).is_err())
        {
            return Err(Error::NotAPath);
        }
        let branches = (1..path.len() - 1)
            .map(|k| {
                let (prev, next) = (path[k - 1], path[k + 1]);
                let part = self.component(path[k], |_, y| y != prev && y != next);
                Branch {
                    k,
                    part: self.subtree_unchecked(part),
                }
            })
            .collect();
        Ok(branches)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> BoundaryTree {
        BoundaryTree::from_edges(&[(0, 1), (1, 2)]).unwrap()
    }

    fn star(m: usize) -> BoundaryTree {
        let edges: Vec<_> = (1..=m).map(|i| (0, i)).collect();
        BoundaryTree::from_edges(&edges).unwrap()
    }

    #[test]
    fn smallest_tree() {
        let t = path3();
        assert_eq!(t.boundary(), &[0, 2]);
        assert_eq!(t.interior(), &[1]);
        assert_eq!(t.max_degree(), 2);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(BoundaryTree::from_edges(&[(0, 1)]), Err(Error::TooSmall(2)));
        assert!(matches!(
            BoundaryTree::from_edges(&[(0, 1), (1, 1)]),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(
            BoundaryTree::from_edges(&[(0, 1), (1, 0), (1, 2)]),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(
            BoundaryTree::from_edges(&[(0, 1), (1, 3)]),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(
            BoundaryTree::from_edges(&[(0, 1), (1, 2), (2, 0), (2, 3)]),
            Err(Error::NotATree(_))
        ));
        assert!(matches!(
            BoundaryTree::from_edges(&[(0, 1), (1, 2), (3, 4), (4, 5), (0, 2)]),
            Err(Error::NotATree(_))
        ));
    }

    #[test]
    fn star_structure() {
        let t = BoundaryTree::from_edges(&[(0, 1), (1, 2), (1, 3), (1, 4)]).unwrap();
        assert_eq!(t.boundary(), &[0, 2, 3, 4]);
        assert_eq!(t.max_degree(), 4);
    }

    #[test]
    fn distances() {
        let t = path3();
        assert_eq!(t.distance(0, 2).unwrap(), 2);
        assert_eq!(t.distance(1, 1).unwrap(), 0);
        assert_eq!(t.distance(0, 7), Err(Error::BadVertex(7)));
    }

    #[test]
    fn star_diameter() {
        let (l, path) = star(5).diameter();
        assert_eq!(l, 2);
        assert_eq!(path, vec![1, 0, 2]);
    }

    #[test]
    fn path_branches_are_singletons() {
        let edges: Vec<_> = (0..6).map(|i| (i, i + 1)).collect();
        let t = BoundaryTree::from_edges(&edges).unwrap();
        let (l, path) = t.diameter();
        assert_eq!(l, 6);
        let branches = t.branch_components(&path).unwrap();
        assert_eq!(branches.len(), 5);
        for b in &branches {
            assert_eq!(b.part.vertices, vec![path[b.k]]);
            assert_eq!(b.boundary_count(), 0);
        }
    }

    #[test]
    fn star_branch_holds_off_path_leaves() {
        let t = star(4);
        let (_, path) = t.diameter();
        assert_eq!(path, vec![1, 0, 2]);
        let branches = t.branch_components(&path).unwrap();
        assert_eq!(branches[0].part.vertices, vec![0, 3, 4]);
        assert_eq!(branches[0].boundary_count(), 2);
    }

    #[test]
    fn rejects_non_paths() {
        let t = star(4);
        assert_eq!(t.branch_components(&[1, 2]), Err(Error::NotAPath));
        assert_eq!(t.branch_components(&[1, 0, 1]), Err(Error::NotAPath));
    }

    #[test]
    fn subtree_connectivity() {
        let t = star(4);
        assert!(t.subtree(&[0, 1, 2]).is_ok());
        assert_eq!(t.subtree(&[1, 2]), Err(Error::NotConnected));
        let s = t.subtree(&[0, 3]).unwrap();
        assert_eq!(s.relative_boundary, vec![3]);
    }
}
